#pragma once

#include "subsil/eval.hpp"
#include "subsil/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace subsil {

struct EntropySpec {
    std::int64_t window_ms = 120'000;
    std::int64_t stride_ms = 1000;
    WindowDedup dedup = WindowDedup::all_starts;
};

// Optional gates checked after the run; a miss is listed in the report.
struct Thresholds {
    std::optional<double> min_top1_title;
    std::optional<double> min_top1_clip;
    std::optional<double> max_fp_rate;  // every open-world row
    bool fp_decreasing = false;         // open-world FP rate strictly decreasing in duration
    std::optional<double> min_unique_title_fraction;
    bool convergence_non_increasing = false;
};

struct SuiteSpec {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    ToleranceConfig tolerance;
    std::optional<ClosedWorldSpec> closed_world;
    std::optional<OpenWorldSpec> open_world;
    std::optional<UniquenessSpec> uniqueness;
    std::optional<EntropySpec> entropy;
    std::optional<ConvergenceSpec> convergence;
    Thresholds thresholds;
};

// Section seeds, thread counts and tolerances default to the suite-level
// values. Unknown keys are rejected.
SuiteSpec suite_from_json(const Json& j);
Json to_json(const SuiteSpec& spec);

struct EvalReport {
    Json body;
    std::string summary;
    std::vector<std::string> violations;
};

EvalReport run_suite(const Corpus& corpus, const SuiteSpec& spec);

} // namespace subsil
