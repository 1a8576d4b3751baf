#pragma once

#include "subsil/corpus.hpp"
#include "subsil/feature.hpp"
#include "subsil/matcher.hpp"
#include "subsil/silhouette.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace subsil {

// Portable seeded generator: mt19937_64 output is fixed by the standard and
// the draws below avoid the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    // Uniform in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    // Uniform in [0, 1).
    double unit();
    bool chance(double p) { return unit() < p; }
    // exp(N(log(median), sigma))
    double lognormal(double median, double sigma);

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class ShiftRule {
    adjacent,  // move one class up or down (stays within 1..3)
    any,       // any other class
};

std::string_view to_string(ShiftRule r);
ShiftRule parse_shift_rule(std::string_view name);

struct ErrorSpec {
    std::size_t substitutions = 0;
    ShiftRule shift = ShiftRule::adjacent;
    std::size_t deletions = 0;
    std::size_t insertions = 0;  // inserted classes drawn uniformly from 1..3
    std::uint64_t seed = 0;

    bool any() const { return substitutions || deletions || insertions; }
};

struct Seek {
    std::int64_t at_ms = 0;  // video time where playback jumps
    std::int64_t to_ms = 0;  // video time where it resumes
};

// Later clip of a multi-clip capture: the recording resumes `gap_ms` after
// the previous clip ended, while the video keeps playing.
struct ClipSpec {
    std::int64_t gap_ms = 0;
    std::int64_t duration_ms = 0;
};

struct ScenarioSpec {
    std::string video_id;
    std::int64_t start_ms = 0;     // video time at the start of the recording
    std::int64_t duration_ms = 0;  // wall time of the first (or only) clip, pauses included
    std::vector<Pause> pauses;     // single-clip scenarios only
    std::vector<Seek> seeks;       // at most one
    std::vector<ClipSpec> clips;   // additional clips after the first
    // A subtitle counts as observed when it overlaps the played span by more
    // than this many milliseconds (0: any overlap).
    std::int64_t min_overlap_ms = 0;
};

struct EditRecord {
    std::vector<std::size_t> substituted;  // window positions
    std::vector<std::size_t> deleted;      // window positions
    std::vector<std::size_t> inserted;     // positions in the final sequence

    std::size_t count() const { return substituted.size() + deleted.size() + inserted.size(); }
};

struct ClipTruth {
    std::size_t offset = 0;  // window is subtitles offset+1 .. offset+length
    std::size_t length = 0;
    std::int64_t play_start_ms = 0;
    std::int64_t play_end_ms = 0;
    EditRecord edits;
};

struct GroundTruth {
    std::string video_id;
    std::vector<ClipTruth> clips;
};

enum class CaptureKind { single, joint, seek };

std::string_view to_string(CaptureKind k);
CaptureKind parse_capture_kind(std::string_view name);

struct Capture {
    CaptureKind kind = CaptureKind::single;
    std::vector<Observation> clips;
    std::vector<std::int64_t> gaps_ms;   // joint captures
    std::optional<SeekKind> seek;        // seek captures
};

struct Rendered {
    Capture capture;
    GroundTruth truth;
};

// Subtitles overlapping [from_ms, to_ms) by more than `min_overlap_ms`, as a
// (offset, length) window; nullopt when none is visible.
std::optional<std::pair<std::size_t, std::size_t>> visible_window(const SubtitleTrack& track,
                                                                  std::int64_t from_ms,
                                                                  std::int64_t to_ms,
                                                                  std::int64_t min_overlap_ms = 0);

// Applies substitutions, then deletions, then insertions. Throws DataError
// if the edits would consume the whole sequence.
std::vector<LineClass> inject_errors(std::span<const LineClass> window, const ErrorSpec& errors, Rng& rng,
                                     EditRecord& record);

// Throws DataError when the scenario leaves the track or a clip shows no
// subtitle.
Rendered render_observation(const SubtitleTrack& track, const ScenarioSpec& scenario,
                            const ErrorSpec& errors = {});

struct FrameGeometry {
    int width = 320;
    int height = 72;
    int line_height_px = 16;
    int fps = 10;

    void validate() const;
};

// One subtitle to draw. width_px 0 picks a width from the seed.
struct RenderSpan {
    LineClass lines = 1;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    int width_px = 0;
};

// Draws each subtitle as a bottom-anchored block lines*line_height_px tall
// with its own texture plus small per-frame noise. Every subtitle gets at
// least one frame; gaps become empty-mask frames.
std::vector<Frame> synth_frames(std::span<const RenderSpan> spans, std::int64_t from_ms, std::int64_t to_ms,
                                const FrameGeometry& geometry, std::uint64_t seed = 0);

// Spans of a ground-truth clip, clipped to its played interval.
std::vector<RenderSpan> clip_spans(const SubtitleTrack& track, const ClipTruth& clip);

// Silhouette pipeline: segment frames, cluster heights, build an observation
// lasting frames / fps.
Observation observation_from_frames(std::span<const Frame> frames, const FrameGeometry& geometry,
                                    const SeparationConfig& cfg = {},
                                    std::optional<double> unit_height = std::nullopt);

// Synthetic subtitle tracks with feature-film statistics: dialog scenes with
// short inter-subtitle gaps separated by subtitle-free stretches of
// heavy-tailed length.
struct CorpusSynthSpec {
    std::size_t tracks = 100;
    std::uint64_t seed = 1;
    std::int64_t min_duration_ms = 33 * 60'000;
    std::int64_t max_duration_ms = 200 * 60'000;
    std::string id_prefix = "film";
};

SubtitleTrack synth_track(std::string video_id, std::string title, std::int64_t duration_ms, Rng& rng);
std::vector<SubtitleTrack> synth_corpus(const CorpusSynthSpec& spec);

} // namespace subsil
