#include "subsil/silhouette.hpp"
#include "subsil/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace subsil {

namespace {

void require_geometry(int width, int height)
{
    if (width <= 0 || height <= 0)
        throw DataError("frame geometry must be positive, got " + std::to_string(width) + "x"
                        + std::to_string(height));
}

template <typename A, typename B>
void require_same_geometry(const A& a, const B& b)
{
    if (a.width() != b.width() || a.height() != b.height())
        throw DataError("geometry mismatch: " + std::to_string(a.width()) + "x"
                        + std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x"
                        + std::to_string(b.height()));
}

} // namespace

FrameRegion::FrameRegion(int width, int height, std::uint8_t fill)
    : width_(width), height_(height)
{
    require_geometry(width, height);
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

FrameRegion::FrameRegion(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels))
{
    require_geometry(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * height)
        throw DataError("frame pixel count does not match its geometry");
}

SilhouetteMask::SilhouetteMask(int width, int height) : width_(width), height_(height)
{
    require_geometry(width, height);
    bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

SilhouetteMask::SilhouetteMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits))
{
    require_geometry(width, height);
    if (bits_.size() != static_cast<std::size_t>(width) * height)
        throw DataError("mask bit count does not match its geometry");
    for (auto& b : bits_)
        b = b ? 1 : 0;
}

std::size_t SilhouetteMask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int SilhouetteMask::bbox_height() const
{
    int top = -1;
    int bottom = -1;
    for (int y = 0; y < height_; ++y) {
        const auto row = bits_.begin() + static_cast<std::ptrdiff_t>(index(0, y));
        if (std::any_of(row, row + width_, [](std::uint8_t b) { return b != 0; })) {
            if (top < 0)
                top = y;
            bottom = y;
        }
    }
    return top < 0 ? 0 : bottom - top + 1;
}

SilhouetteMask mask_intersection(const SilhouetteMask& a, const SilhouetteMask& b)
{
    require_same_geometry(a, b);
    std::vector<std::uint8_t> bits(a.bits().size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        bits[i] = a.bits()[i] & b.bits()[i];
    return SilhouetteMask(a.width(), a.height(), std::move(bits));
}

void SeparationConfig::validate() const
{
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw DataError("iou_threshold must be in (0, 1]");
    if (!(t0 > 0.0))
        throw DataError("t0 must be positive");
}

double mask_iou(const SilhouetteMask& s1, const SilhouetteMask& s2)
{
    require_same_geometry(s1, s2);
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto a = s1.bits();
    const auto b = s2.bits();
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += a[i] & b[i];
        uni += a[i] | b[i];
    }
    if (uni == 0)
        return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double similarity_ratio(const FrameRegion& a1,
                        const FrameRegion& a2,
                        const SilhouetteMask& intersection,
                        const SeparationConfig& cfg)
{
    require_same_geometry(a1, a2);
    require_same_geometry(a1, intersection);
    cfg.validate();

    std::uint64_t diff_sum = 0;
    std::uint64_t n = 0;
    const auto p1 = a1.pixels();
    const auto p2 = a2.pixels();
    const auto bits = intersection.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i])
            continue;
        diff_sum += static_cast<std::uint64_t>(std::abs(int(p1[i]) - int(p2[i])));
        ++n;
    }
    if (n == 0)
        throw DataError("similarity ratio needs a non-empty intersection");
    return similarity_ratio(static_cast<double>(diff_sum), cfg.t0 * static_cast<double>(n));
}

bool same_subtitle(const Frame& f1, const Frame& f2, const SeparationConfig& cfg)
{
    require_same_geometry(f1.region, f1.mask);
    require_same_geometry(f2.region, f2.mask);
    if (f1.mask.empty() && f2.mask.empty())
        return true;
    if (mask_iou(f1.mask, f2.mask) < cfg.iou_threshold)
        return false;
    const auto inter = mask_intersection(f1.mask, f2.mask);
    return similarity_ratio(f1.region, f2.region, inter, cfg) <= 1.0;
}

std::vector<int> SilhouetteSequence::heights() const
{
    std::vector<int> out;
    out.reserve(events.size());
    for (const auto& e : events)
        out.push_back(e.height_px);
    return out;
}

SilhouetteSequence segment_sequence(std::span<const Frame> frames, const SeparationConfig& cfg)
{
    cfg.validate();
    SilhouetteSequence seq;
    bool in_event = false;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& frame = frames[i];
        if (frame.mask.empty()) {
            in_event = false;
            continue;
        }
        if (in_event && same_subtitle(frames[i - 1], frame, cfg)) {
            seq.events.back().last_frame = i;
            continue;
        }
        seq.events.push_back({frame.mask.bbox_height(), i, i});
        in_event = true;
    }
    return seq;
}

std::vector<LineClass> cluster_heights(std::span<const int> heights, std::optional<double> unit_height)
{
    if (heights.empty())
        return {};
    if (std::any_of(heights.begin(), heights.end(), [](int h) { return h <= 0; }))
        throw DataError("silhouette heights must be positive");

    double unit = 0.0;
    if (unit_height) {
        if (!(*unit_height > 0.0))
            throw DataError("unit height must be positive");
        unit = *unit_height;
    } else {
        // Line classes sit near integer multiples of the unit height, so the
        // lowest cluster is everything below 1.5x the minimum.
        const double floor_h = *std::min_element(heights.begin(), heights.end());
        double sum = 0.0;
        std::size_t n = 0;
        for (int h : heights) {
            if (h < 1.5 * floor_h) {
                sum += h;
                ++n;
            }
        }
        unit = sum / static_cast<double>(n);
    }

    std::vector<LineClass> labels;
    labels.reserve(heights.size());
    for (int h : heights) {
        const auto k = static_cast<long>(std::lround(h / unit));
        labels.push_back(static_cast<LineClass>(std::clamp<long>(k, 1, kMaxLineClass)));
    }
    return labels;
}

} // namespace subsil
