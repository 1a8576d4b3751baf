#pragma once

#include "subsil/corpus.hpp"
#include "subsil/feature.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subsil {

// Playback pause detected during a recording, relative to the recording start.
struct Pause {
    std::int64_t offset_ms = 0;
    std::int64_t length_ms = 0;

    bool operator==(const Pause&) const = default;
};

// One continuously recorded silhouette sequence.
struct Observation {
    ClassSequence sequence;
    std::int64_t duration_ms = 0;  // wall-clock recording span, pauses included
    std::vector<Pause> pauses;

    // Throws DataError: empty sequence, non-positive duration, pauses that
    // leave the recording or overlap each other.
    void validate() const;

    bool operator==(const Observation&) const = default;
};

// Recording span minus the total pause length.
std::int64_t adjust_for_pause(const Observation& obs);

struct TimeRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    double midpoint() const { return 0.5 * (static_cast<double>(lo) + static_cast<double>(hi)); }

    bool operator==(const TimeRange&) const = default;
};

// Subtitles offset+1 .. offset+length (1-based) of one track.
struct CandidateClip {
    std::string video_id;
    std::string title;
    std::size_t offset = 0;
    std::size_t length = 0;
    TimeRange start_bounds;  // recording start lies in (lo, hi]
    TimeRange end_bounds;    // recording end lies in [lo, hi]
    std::int64_t first_subtitle_ms = 0;  // display duration of the first subtitle
    std::int64_t last_subtitle_ms = 0;   // ... and of the last one

    bool operator==(const CandidateClip& o) const
    {
        return video_id == o.video_id && offset == o.offset && length == o.length;
    }
    std::strong_ordering operator<=>(const CandidateClip& o) const
    {
        if (auto c = video_id <=> o.video_id; c != 0)
            return c;
        if (auto c = offset <=> o.offset; c != 0)
            return c;
        return length <=> o.length;
    }
};

CandidateClip make_candidate(const SubtitleTrack& track, std::size_t offset, std::size_t length);

// How observed and candidate classes are compared.
//   absolute: raw line-count classes.
//   rank:     classes re-indexed 1..r over the classes present (the literal
//             spatiotemporal vector); wildcards are left out of the ranking.
enum class LabelMode { absolute, rank };

std::string_view to_string(LabelMode m);
LabelMode parse_label_mode(std::string_view name);

struct ToleranceConfig {
    // d0^2 = ceil(d0_per_mille * aligned_length / 1000); 100 gives ceil(0.1 * n).
    std::uint32_t d0_per_mille = 100;
    std::size_t max_deletions = 0;
    std::size_t max_insertions = 0;
    LabelMode labels = LabelMode::absolute;

    static constexpr std::size_t kMaxEdits = 2;

    void validate() const;
};

std::int64_t d0_squared(std::size_t aligned_length, const ToleranceConfig& cfg);

// True iff some recording of `duration_ms` shows exactly subtitles
// offset+1 .. offset+length. t_0^e is 0 and t_{w+1}^s is the video end.
// Throws DataError if the window does not fit in the track.
bool feasible_window(const SubtitleTrack& track, std::size_t offset, std::size_t length,
                     std::int64_t duration_ms);

// Slot value 0 is a wildcard and matches anything.
inline constexpr std::uint8_t kWildcard = 0;

// Squared Euclidean distance ignoring wildcard slots. Throws on length mismatch.
std::int64_t squared_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

bool match_vectors(std::span<const std::uint8_t> observed,
                   std::span<const std::uint8_t> candidate,
                   const ToleranceConfig& cfg);
bool match_vectors(const SpatioTemporalVector& observed,
                   const SpatioTemporalVector& candidate,
                   const ToleranceConfig& cfg);

// One way of undoing deletion/insertion errors in an observation: drop the
// observed elements at `removed` (original indices), then place wildcards at
// `wildcards` (indices in the aligned sequence).
struct Hypothesis {
    std::size_t aligned_length = 0;
    std::vector<std::size_t> wildcards;
    std::vector<std::size_t> removed;

    bool operator==(const Hypothesis&) const = default;
};

// Deletions before insertions, positions left to right; (0, 0) first.
std::vector<Hypothesis> tolerate_errors(const Observation& obs, const ToleranceConfig& cfg);

// Aligned class vector for a hypothesis, kWildcard at the wildcard slots.
std::vector<std::uint8_t> apply_hypothesis(const ClassSequence& seq, const Hypothesis& h);

struct MatchResult {
    std::vector<CandidateClip> candidates;  // sorted by (video_id, offset, length)
    std::vector<std::string> diagnostics;

    std::size_t title_count() const;
};

enum class SearchStrategy {
    automatic,  // banded alignment when labels are absolute, enumeration otherwise
    alignment,
    enumerate,
};

struct MatchOptions {
    SearchStrategy strategy = SearchStrategy::automatic;
    unsigned threads = 1;  // 0 = hardware concurrency
};

// Sliding-window search of every track. Throws DataError for an empty
// corpus or an invalid observation/config.
MatchResult correlate(const Observation& obs, const Corpus& corpus, const ToleranceConfig& cfg,
                      const MatchOptions& opts = {});

// Same search driven by an explicit hypothesis list.
MatchResult correlate_hypotheses(const Observation& obs, std::span<const Hypothesis> hypotheses,
                                 const Corpus& corpus, const ToleranceConfig& cfg,
                                 unsigned threads = 1);

struct CandidateChain {
    std::vector<CandidateClip> links;  // one per observed clip

    const std::string& video_id() const { return links.front().video_id; }
    bool operator==(const CandidateChain&) const = default;
};

struct ChainResult {
    std::vector<CandidateChain> chains;
    std::vector<std::string> diagnostics;

    std::size_t title_count() const;
};

// Gap check between consecutive clips: some start of the later clip and end
// of the earlier one inside their candidates' bounds must put
// |observed gap - (start - end)| within the summed durations of the facing
// subtitles.
bool gap_consistent(const CandidateClip& earlier, const CandidateClip& later, std::int64_t gap_ms);

// `gaps_ms[i]` is the wall time between the end of clip i and the start of
// clip i+1. Throws DataError unless |gaps_ms| == |clips| - 1 and |clips| >= 2.
ChainResult joint_demodulate(std::span<const Observation> clips, std::span<const std::int64_t> gaps_ms,
                             const Corpus& corpus, const ToleranceConfig& cfg,
                             const MatchOptions& opts = {});

enum class SeekKind { rewind, fast_forward };

std::string_view to_string(SeekKind k);
SeekKind parse_seek_kind(std::string_view name);

// Candidate pairs from one video ordered by the seek direction; the gap
// between the clips carries no information and is not checked.
ChainResult demodulate_with_seek(const Observation& first, const Observation& second, SeekKind kind,
                                 const Corpus& corpus, const ToleranceConfig& cfg,
                                 const MatchOptions& opts = {});

} // namespace subsil
