#pragma once

#include "subsil/corpus.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace subsil {

// Grayscale crop of the subtitle area, row-major.
class FrameRegion {
public:
    FrameRegion() = default;
    FrameRegion(int width, int height, std::uint8_t fill = 0);
    FrameRegion(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { pixels_[index(x, y)] = v; }
    std::span<const std::uint8_t> pixels() const { return pixels_; }

    bool operator==(const FrameRegion&) const = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

class SilhouetteMask {
public:
    SilhouetteMask() = default;
    SilhouetteMask(int width, int height);
    SilhouetteMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
    std::span<const std::uint8_t> bits() const { return bits_; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    // Rows spanned by the set pixels; 0 for an empty mask.
    int bbox_height() const;

    bool operator==(const SilhouetteMask&) const = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

SilhouetteMask mask_intersection(const SilhouetteMask& a, const SilhouetteMask& b);

struct SeparationConfig {
    double iou_threshold = 0.93;
    double t0 = 1.5;  // mean per-pixel allowance

    void validate() const;
};

struct Frame {
    FrameRegion region;
    SilhouetteMask mask;
};

// |S1 ∩ S2| / |S1 ∪ S2|, and 1 when both masks are empty.
// Throws DataError on a geometry mismatch.
double mask_iou(const SilhouetteMask& s1, const SilhouetteMask& s2);

// Sum of |a1 - a2| over the intersection pixels, divided by t0 * N.
// Throws DataError when the intersection is empty or geometries differ.
double similarity_ratio(const FrameRegion& a1,
                        const FrameRegion& a2,
                        const SilhouetteMask& intersection,
                        const SeparationConfig& cfg = {});

// Ratio form used when only the aggregate sums are known.
inline double similarity_ratio(double pixel_diff_sum, double threshold)
{
    return pixel_diff_sum / threshold;
}

bool same_subtitle(const Frame& f1, const Frame& f2, const SeparationConfig& cfg = {});

struct SilhouetteEvent {
    int height_px = 0;
    std::size_t first_frame = 0;
    std::size_t last_frame = 0;

    bool operator==(const SilhouetteEvent&) const = default;
};

struct SilhouetteSequence {
    std::vector<SilhouetteEvent> events;

    std::size_t size() const { return events.size(); }
    std::vector<int> heights() const;
};

// Collapses runs of frames that show the same subtitle into one event.
// Frames with an empty mask produce no event and end the current run.
SilhouetteSequence segment_sequence(std::span<const Frame> frames, const SeparationConfig& cfg = {});

// Maps heights to absolute line-count classes: round(h / u) clamped to 1..3,
// where u is the centroid of the lowest height cluster, or `unit_height` when
// the caller knows the rendered line height.
std::vector<LineClass> cluster_heights(std::span<const int> heights,
                                       std::optional<double> unit_height = std::nullopt);

} // namespace subsil
