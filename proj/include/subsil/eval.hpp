#pragma once

#include "subsil/corpus.hpp"
#include "subsil/feature.hpp"
#include "subsil/matcher.hpp"
#include "subsil/simulate.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subsil {

inline constexpr std::array<std::size_t, 5> kTopK{1, 5, 10, 20, 50};

// 1 when k > n, else k / n; 0 when the target is not among the candidates.
// Throws DataError for n == 0 with the target present, or k == 0.
double top_k_accuracy(std::size_t n, std::size_t k, bool target_present = true);

// Shannon entropy (bits) of the distribution given by class multiplicities.
// Throws DataError on an empty population or a zero multiplicity.
double entropy_bits(std::span<const std::uint64_t> multiplicities);

enum class WindowDedup { all_starts, distinct };

std::string_view to_string(WindowDedup d);
WindowDedup parse_window_dedup(std::string_view name);

struct WindowPopulation {
    std::vector<ClassSequence> sequences;
    std::size_t starts = 0;         // window starts visited
    std::size_t empty_windows = 0;  // starts with no visible subtitle (not in sequences)
    std::vector<std::string> diagnostics;
};

// Number of window starts 0, stride, ... with start + window <= duration.
std::size_t window_start_count(std::int64_t duration_ms, std::int64_t window_ms, std::int64_t stride_ms);

WindowPopulation enumerate_windows(const Corpus& corpus, std::int64_t window_ms, std::int64_t stride_ms = 1000,
                                   WindowDedup dedup = WindowDedup::all_starts);

// Partition of a window population by spatiotemporal vector.
struct EntropyStats {
    std::size_t population = 0;
    std::size_t classes = 0;
    std::size_t largest_class = 0;
    std::size_t smallest_class = 0;
    double entropy_bits = 0;           // H over the class distribution
    double max_class_bits = 0;         // log2(largest class)
    double min_class_bits = 0;         // log2(smallest class)
    double mean_class_bits = 0;        // mean of log2(class size) over classes
    double mean_member_bits = 0;       // same, weighted by class size
};

EntropyStats entropy_stats(std::span<const ClassSequence> population);

struct TrialResult {
    std::size_t trial_id = 0;
    std::int64_t duration_ms = 0;
    std::string video_id;
    std::int64_t start_ms = 0;
    std::size_t offset = 0;
    std::size_t length = 0;
    std::size_t observed_length = 0;
    std::size_t title_candidates = 0;
    std::size_t clip_candidates = 0;
    bool title_hit = false;
    bool clip_hit = false;
    std::string error;  // set when the trial could not run
};

struct TopKRow {
    std::int64_t duration_ms = 0;
    std::size_t trials = 0;
    std::size_t failed = 0;
    std::array<double, kTopK.size()> title{};
    std::array<double, kTopK.size()> clip{};
    double mean_title_candidates = 0;
    double mean_clip_candidates = 0;
};

struct ClosedWorldSpec {
    std::vector<std::int64_t> durations_ms{120'000};
    std::size_t trials = 100;
    ErrorSpec errors;  // seed ignored; each trial derives its own
    ToleranceConfig tolerance;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct ClosedWorldResult {
    std::vector<TrialResult> trials;
    std::vector<TopKRow> rows;
};

// Aggregates over trials that ran; failed rows are counted but not scored.
std::vector<TopKRow> aggregate_top_k(std::span<const TrialResult> trials);

ClosedWorldResult closed_world_eval(const Corpus& corpus, const ClosedWorldSpec& spec);

struct OpenWorldSpec {
    std::vector<std::int64_t> durations_ms{60'000, 90'000, 120'000, 150'000, 180'000};
    std::size_t folds = 10;
    std::size_t clips_per_video = 10;
    ToleranceConfig tolerance;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct OpenWorldTrial {
    std::size_t trial_id = 0;
    std::size_t fold = 0;
    std::int64_t duration_ms = 0;
    std::string video_id;
    std::int64_t start_ms = 0;
    std::size_t observed_length = 0;
    std::size_t matched_clips = 0;
    std::size_t matched_titles = 0;
    bool false_positive = false;
    std::string error;
};

struct OpenWorldRow {
    std::int64_t duration_ms = 0;
    std::size_t clips = 0;
    std::size_t fp_clips = 0;
    double fp_rate = 0;
    // Absent when the row has no false positive.
    std::optional<double> mean_matched_clips;
    std::optional<double> mean_matched_titles;
};

struct OpenWorldResult {
    std::vector<OpenWorldTrial> trials;
    std::vector<OpenWorldRow> rows;
};

std::vector<OpenWorldRow> aggregate_open_world(std::span<const OpenWorldTrial> trials);

// Targets are matched against the library only. Throws DataError when the
// two share a video_id.
OpenWorldResult open_world_eval(const Corpus& targets, const Corpus& library, const OpenWorldSpec& spec,
                                std::size_t fold = 0);

// Seeded split into spec.folds groups; each group in turn is the target set
// and the rest the library.
OpenWorldResult open_world_folds(const Corpus& corpus, const OpenWorldSpec& spec);

struct UniquenessSpec {
    std::vector<std::int64_t> durations_ms{60'000, 90'000, 120'000, 150'000, 180'000};
    std::size_t clips = 10'000;
    // Named subsets of the corpus; an empty list selects every track. No
    // entry at all means one set called "all".
    std::map<std::string, std::vector<std::string>> sets;
    std::uint64_t seed = 1;
};

struct UniquenessRow {
    std::string set;
    Feature feature = Feature::spatiotemporal;
    std::int64_t duration_ms = 0;
    std::size_t clips = 0;
    std::size_t classes = 0;
    double score = 0;
};

// Distinct clips (track, start on a 1 s grid) with at least one visible
// subtitle, sampled without replacement.
std::vector<ClassSequence> sample_clips(const Corpus& corpus, std::span<const std::string> video_ids,
                                        std::int64_t window_ms, std::size_t count, std::uint64_t seed);

std::vector<UniquenessRow> uniqueness_sweep(const Corpus& corpus, const UniquenessSpec& spec);

struct ConvergenceSpec {
    std::int64_t duration_ms = 120'000;
    std::size_t trials = 200;
    ToleranceConfig tolerance;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Candidate counts as silhouettes arrive: prefix k holds the first k
// subtitles of the clip, recorded up to the moment subtitle k+1 appears.
struct ConvergenceTrial {
    std::size_t trial_id = 0;
    std::string video_id;
    std::int64_t start_ms = 0;
    std::size_t length = 0;
    std::vector<std::size_t> titles;
    std::vector<std::size_t> clips;
    std::string error;
};

struct ConvergenceResult {
    std::vector<ConvergenceTrial> trials;
    // Means per prefix length; shorter trials carry their final count.
    std::vector<double> mean_titles;
    std::vector<double> mean_clips;
    std::size_t completed = 0;
    std::size_t unique_title = 0;  // final title count 1
    std::size_t unique_both = 0;   // final title and clip counts 1
};

ConvergenceResult convergence_eval(const Corpus& corpus, const ConvergenceSpec& spec);

} // namespace subsil
