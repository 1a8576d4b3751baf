#include "subsil/simulate.hpp"
#include "subsil/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace subsil {

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0)
        throw DataError("Rng::below needs a positive bound");
    // Rejection sampling keeps the draw unbiased.
    const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
        throw DataError("Rng::between with an empty range");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::unit()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::lognormal(double median, double sigma)
{
    // Box-Muller; u1 is kept away from 0.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = unit();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return median * std::exp(sigma * z);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finaliser over the combined value.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string_view to_string(ShiftRule r)
{
    return r == ShiftRule::adjacent ? "adjacent" : "any";
}

ShiftRule parse_shift_rule(std::string_view name)
{
    if (name == "adjacent")
        return ShiftRule::adjacent;
    if (name == "any")
        return ShiftRule::any;
    throw DataError("unknown shift rule '" + std::string(name) + "'");
}

std::string_view to_string(CaptureKind k)
{
    switch (k) {
    case CaptureKind::single:
        return "single";
    case CaptureKind::joint:
        return "joint";
    case CaptureKind::seek:
        return "seek";
    }
    return "?";
}

CaptureKind parse_capture_kind(std::string_view name)
{
    if (name == "single")
        return CaptureKind::single;
    if (name == "joint")
        return CaptureKind::joint;
    if (name == "seek")
        return CaptureKind::seek;
    throw DataError("unknown capture kind '" + std::string(name) + "'");
}

std::optional<std::pair<std::size_t, std::size_t>> visible_window(const SubtitleTrack& track,
                                                                  std::int64_t from_ms,
                                                                  std::int64_t to_ms,
                                                                  std::int64_t min_overlap_ms)
{
    const auto& subs = track.subtitles;
    // First subtitle ending after from_ms.
    auto it = std::upper_bound(subs.begin(), subs.end(), from_ms,
                               [](std::int64_t t, const Subtitle& s) { return t < s.end_ms; });
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (; it != subs.end() && it->start_ms < to_ms; ++it) {
        const auto overlap = std::min(it->end_ms, to_ms) - std::max(it->start_ms, from_ms);
        if (overlap <= min_overlap_ms)
            continue;
        const auto idx = static_cast<std::size_t>(it - subs.begin());
        if (!first)
            first = idx;
        last = idx;
    }
    if (!first)
        return std::nullopt;
    return std::make_pair(*first, last - *first + 1);
}

std::vector<LineClass> inject_errors(std::span<const LineClass> window, const ErrorSpec& errors, Rng& rng,
                                     EditRecord& record)
{
    std::vector<LineClass> seq(window.begin(), window.end());
    const auto n = seq.size();
    if (errors.substitutions > n)
        throw DataError("more substitutions than silhouettes");
    if (errors.deletions >= n)
        throw DataError("deletions would remove every silhouette");

    auto pick_distinct = [&](std::size_t count, std::size_t size) {
        std::vector<std::size_t> idx(size);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i)
            std::swap(idx[i], idx[i + rng.below(size - i)]);
        idx.resize(count);
        std::sort(idx.begin(), idx.end());
        return idx;
    };

    record.substituted = pick_distinct(errors.substitutions, n);
    for (auto pos : record.substituted) {
        const auto c = seq[pos];
        if (errors.shift == ShiftRule::adjacent) {
            if (c == 1)
                seq[pos] = 2;
            else if (c == kMaxLineClass)
                seq[pos] = kMaxLineClass - 1;
            else
                seq[pos] = rng.chance(0.5) ? c - 1 : c + 1;
        } else {
            auto other = static_cast<LineClass>(1 + rng.below(kMaxLineClass - 1));
            seq[pos] = other >= c ? other + 1 : other;
        }
    }

    record.deleted = pick_distinct(errors.deletions, n);
    for (auto it = record.deleted.rbegin(); it != record.deleted.rend(); ++it)
        seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(*it));

    record.inserted.clear();
    for (std::size_t i = 0; i < errors.insertions; ++i) {
        const auto pos = static_cast<std::size_t>(rng.below(seq.size() + 1));
        const auto cls = static_cast<LineClass>(1 + rng.below(kMaxLineClass));
        seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(pos), cls);
        for (auto& p : record.inserted)
            if (p >= pos)
                ++p;
        record.inserted.push_back(pos);
    }
    std::sort(record.inserted.begin(), record.inserted.end());
    return seq;
}

namespace {

struct PlayedClip {
    std::int64_t play_start = 0;
    std::int64_t play_end = 0;
    std::int64_t wall_ms = 0;
    std::vector<Pause> pauses;
};

} // namespace

Rendered render_observation(const SubtitleTrack& track, const ScenarioSpec& scenario, const ErrorSpec& errors)
{
    if (scenario.duration_ms <= 0)
        throw DataError("scenario duration must be positive");
    if (scenario.start_ms < 0)
        throw DataError("scenario start must be non-negative");
    if (scenario.seeks.size() > 1)
        throw DataError("at most one seek per scenario");
    if (!scenario.pauses.empty() && (!scenario.seeks.empty() || !scenario.clips.empty()))
        throw DataError("pauses are supported in single-clip scenarios only");
    if (!scenario.seeks.empty() && !scenario.clips.empty())
        throw DataError("a scenario cannot combine seeks and multiple clips");

    std::vector<PlayedClip> played;
    Capture capture;
    if (!scenario.seeks.empty()) {
        const auto& seek = scenario.seeks[0];
        const auto end = scenario.start_ms + scenario.duration_ms;
        if (seek.at_ms <= scenario.start_ms || seek.at_ms >= end)
            throw DataError("seek must happen inside the recording");
        if (seek.to_ms < 0 || seek.to_ms == seek.at_ms)
            throw DataError("seek target must be a different, non-negative time");
        const auto first_wall = seek.at_ms - scenario.start_ms;
        const auto second_wall = scenario.duration_ms - first_wall;
        played.push_back({scenario.start_ms, seek.at_ms, first_wall, {}});
        played.push_back({seek.to_ms, seek.to_ms + second_wall, second_wall, {}});
        capture.kind = CaptureKind::seek;
        capture.seek = seek.to_ms < seek.at_ms ? SeekKind::rewind : SeekKind::fast_forward;
    } else {
        Observation probe;
        probe.sequence = ClassSequence({1});
        probe.duration_ms = scenario.duration_ms;
        probe.pauses = scenario.pauses;
        probe.validate();
        const auto playback = adjust_for_pause(probe);
        played.push_back({scenario.start_ms, scenario.start_ms + playback, scenario.duration_ms, scenario.pauses});
        auto cursor = scenario.start_ms + playback;
        for (const auto& c : scenario.clips) {
            if (c.gap_ms < 0 || c.duration_ms <= 0)
                throw DataError("clip gaps must be non-negative and durations positive");
            const auto s = cursor + c.gap_ms;
            played.push_back({s, s + c.duration_ms, c.duration_ms, {}});
            capture.gaps_ms.push_back(c.gap_ms);
            cursor = s + c.duration_ms;
        }
        capture.kind = scenario.clips.empty() ? CaptureKind::single : CaptureKind::joint;
    }

    Rng rng(errors.seed);
    const auto classes = line_counts(track);
    Rendered out;
    out.truth.video_id = track.video_id;
    for (std::size_t k = 0; k < played.size(); ++k) {
        const auto& p = played[k];
        if (p.play_end > track.duration_ms)
            throw DataError("clip " + std::to_string(k + 1) + " plays past the end of '" + track.video_id + "'");
        const auto window = visible_window(track, p.play_start, p.play_end, scenario.min_overlap_ms);
        if (!window)
            throw DataError("clip " + std::to_string(k + 1) + " shows no subtitle");

        ClipTruth truth;
        truth.offset = window->first;
        truth.length = window->second;
        truth.play_start_ms = p.play_start;
        truth.play_end_ms = p.play_end;
        const std::span<const LineClass> shown(classes.data() + truth.offset, truth.length);
        auto seq = errors.any() ? inject_errors(shown, errors, rng, truth.edits)
                                : std::vector<LineClass>(shown.begin(), shown.end());

        Observation obs;
        obs.sequence = ClassSequence(std::move(seq));
        obs.duration_ms = p.wall_ms;
        obs.pauses = p.pauses;
        capture.clips.push_back(std::move(obs));
        out.truth.clips.push_back(std::move(truth));
    }
    out.capture = std::move(capture);
    return out;
}

void FrameGeometry::validate() const
{
    if (width <= 0 || height <= 0 || line_height_px <= 0)
        throw DataError("frame geometry must be positive");
    if (fps < 1)
        throw DataError("fps must be at least 1");
    if (height < int(kMaxLineClass) * line_height_px + 2)
        throw DataError("frame too short for three subtitle lines");
}

std::vector<Frame> synth_frames(std::span<const RenderSpan> spans, std::int64_t from_ms, std::int64_t to_ms,
                                const FrameGeometry& geometry, std::uint64_t seed)
{
    geometry.validate();
    const int w = geometry.width;
    const int h = geometry.height;
    const int bottom = h - 1 - std::max(1, geometry.line_height_px / 4);
    auto frames_for = [&](std::int64_t ms) {
        return static_cast<std::size_t>(std::llround(static_cast<double>(std::max<std::int64_t>(ms, 0))
                                                     * geometry.fps / 1000.0));
    };

    std::vector<Frame> frames;
    std::size_t frame_no = 0;
    auto push_frame = [&](const RenderSpan* span, std::size_t ordinal) {
        Rng noise(mix_seed(seed, 1'000'000 + frame_no++));
        FrameRegion region(w, h);
        SilhouetteMask mask(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                region.set(x, y, static_cast<std::uint8_t>(15 + noise.below(3)));
        if (span) {
            Rng shape(mix_seed(seed, ordinal));
            const int block_w = span->width_px > 0 ? std::min(span->width_px, w)
                                                   : static_cast<int>(w * (0.4 + 0.5 * shape.unit()));
            const int block_h = span->lines * geometry.line_height_px;
            const int left = (w - block_w) / 2;
            const int top = bottom - block_h + 1;
            for (int y = top; y <= bottom; ++y) {
                for (int x = left; x < left + block_w; ++x) {
                    const int base = 80 + static_cast<int>(shape.below(174));
                    const int v = base + static_cast<int>(noise.below(3)) - 1;
                    region.set(x, y, static_cast<std::uint8_t>(std::clamp(v, 0, 255)));
                    mask.set(x, y, true);
                }
            }
        }
        frames.push_back({std::move(region), std::move(mask)});
    };

    std::int64_t cursor = from_ms;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        if (s.lines < 1 || s.lines > kMaxLineClass)
            throw DataError("render span line count outside 1..3");
        const auto start = std::max(s.start_ms, from_ms);
        const auto end = std::min(s.end_ms, to_ms);
        for (std::size_t k = frames_for(start - cursor); k > 0; --k)
            push_frame(nullptr, 0);
        for (std::size_t k = std::max<std::size_t>(1, frames_for(end - start)); k > 0; --k)
            push_frame(&s, i);
        cursor = std::max(cursor, end);
    }
    for (std::size_t k = frames_for(to_ms - cursor); k > 0; --k)
        push_frame(nullptr, 0);
    return frames;
}

std::vector<RenderSpan> clip_spans(const SubtitleTrack& track, const ClipTruth& clip)
{
    std::vector<RenderSpan> spans;
    for (std::size_t i = clip.offset; i < clip.offset + clip.length; ++i) {
        const auto& s = track.subtitles[i];
        std::size_t longest = 0;
        for (const auto& line : s.lines)
            longest = std::max(longest, line.size());
        spans.push_back({line_count(s), std::max(s.start_ms, clip.play_start_ms),
                         std::min(s.end_ms, clip.play_end_ms), static_cast<int>(40 + 6 * longest)});
    }
    return spans;
}

Observation observation_from_frames(std::span<const Frame> frames, const FrameGeometry& geometry,
                                    const SeparationConfig& cfg, std::optional<double> unit_height)
{
    const auto seq = segment_sequence(frames, cfg);
    const auto heights = seq.heights();
    Observation obs;
    obs.sequence = ClassSequence(cluster_heights(heights, unit_height));
    obs.duration_ms = static_cast<std::int64_t>(frames.size()) * 1000 / geometry.fps;
    return obs;
}

namespace {

constexpr const char* kWords[] = {
    "you",   "know",  "there", "are",   "we",    "have",  "to",    "go",    "now",   "what",
    "is",    "that",  "I",     "don't", "think", "so",    "come",  "on",    "look",  "at",
    "this",  "where", "were",  "they",  "it's",  "not",   "over",  "yet",   "maybe", "just",
    "tell",  "me",    "why",   "never", "again", "right", "here",  "okay",  "listen", "wait",
    "please", "going", "back", "home",  "time",  "found", "something", "nothing", "really", "sure",
};

std::string synth_line(Rng& rng)
{
    const auto target = static_cast<std::size_t>(rng.between(12, 40));
    std::string line;
    while (line.size() < target) {
        if (!line.empty())
            line += ' ';
        line += kWords[rng.below(std::size(kWords))];
    }
    return line;
}

LineClass draw_lines(Rng& rng)
{
    const double u = rng.unit();
    if (u < 0.52)
        return 1;
    if (u < 0.96)
        return 2;
    return 3;
}

} // namespace

SubtitleTrack synth_track(std::string video_id, std::string title, std::int64_t duration_ms, Rng& rng)
{
    SubtitleTrack track;
    track.video_id = std::move(video_id);
    track.title = std::move(title);
    track.duration_ms = duration_ms;

    auto t = static_cast<std::int64_t>(rng.between(5'000, 60'000));
    LineClass lines = draw_lines(rng);
    std::uint32_t index = 1;
    while (true) {
        // Dialog scene.
        const auto scene_end = t + std::max<std::int64_t>(20'000, static_cast<std::int64_t>(
                                                                      rng.lognormal(110'000, 0.8)));
        while (t < scene_end) {
            if (!rng.chance(0.45))
                lines = draw_lines(rng);
            const double median = lines == 1 ? 1900.0 : lines == 2 ? 3100.0 : 4300.0;
            const auto shown = std::clamp<std::int64_t>(static_cast<std::int64_t>(rng.lognormal(median, 0.35)),
                                                        700, 8000);
            if (t + shown > duration_ms - 2'000)
                return track;

            Subtitle s;
            s.index = index++;
            s.start_ms = t;
            s.end_ms = t + shown;
            for (LineClass k = 0; k < lines; ++k)
                s.lines.push_back(synth_line(rng));
            track.subtitles.push_back(std::move(s));

            const double u = rng.unit();
            std::int64_t gap;
            if (u < 0.6)
                gap = rng.between(80, 400);
            else if (u < 0.9)
                gap = rng.between(400, 2500);
            else
                gap = rng.between(2500, 9000);
            t += shown + gap;
        }

        // Subtitle-free stretch.
        const double u = rng.unit();
        if (u < 0.65)
            t += rng.between(5'000, 30'000);
        else if (u < 0.93)
            t += rng.between(30'000, 120'000);
        else
            t += rng.between(120'000, 420'000);
        if (t >= duration_ms - 2'000)
            return track;
    }
}

std::vector<SubtitleTrack> synth_corpus(const CorpusSynthSpec& spec)
{
    if (spec.min_duration_ms <= 0 || spec.max_duration_ms < spec.min_duration_ms)
        throw DataError("invalid synthetic duration range");
    std::vector<SubtitleTrack> out;
    out.reserve(spec.tracks);
    const auto width = std::to_string(std::max<std::size_t>(spec.tracks, 1)).size();
    for (std::size_t i = 0; i < spec.tracks; ++i) {
        Rng rng(mix_seed(spec.seed, i));
        auto number = std::to_string(i + 1);
        number.insert(0, std::max<std::size_t>(width, 3) - number.size(), '0');
        const auto duration = rng.between(spec.min_duration_ms, spec.max_duration_ms);
        auto track = synth_track(spec.id_prefix + number, "Synthetic Feature " + number, duration, rng);
        if (track.subtitles.empty())
            throw DataError("synthetic track '" + track.video_id + "' came out empty; duration too short");
        out.push_back(std::move(track));
    }
    return out;
}

} // namespace subsil
