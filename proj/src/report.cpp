#include "subsil/report.hpp"
#include "subsil/error.hpp"

#include <cstdio>
#include <sstream>

namespace subsil {

namespace {

std::vector<std::int64_t> durations_from_json(const Json& j, std::string_view where)
{
    if (!j.is_array() || j.empty())
        throw DataError(std::string(where) + ": 'durations_ms' must be a non-empty array");
    std::vector<std::int64_t> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
            throw DataError(std::string(where) + ": durations must be positive integers (ms)");
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

std::size_t count_of(const Json& j, std::string_view key, std::size_t fallback, std::string_view where)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned())
        throw DataError(std::string(where) + ": '" + std::string(key) + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t seed_of(const Json& j, std::uint64_t fallback, std::string_view where)
{
    return count_of(j, "seed", fallback, where);
}

ToleranceConfig section_tolerance(const Json& j, const ToleranceConfig& base)
{
    return j.contains("tolerance") ? tolerance_from_json(j.at("tolerance"), base) : base;
}

Json opt(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

} // namespace

SuiteSpec suite_from_json(const Json& j)
{
    check_keys(j, {"seed", "threads", "tolerance", "closed_world", "open_world", "uniqueness", "entropy",
                   "convergence", "thresholds"},
               "suite");
    SuiteSpec s;
    s.seed = seed_of(j, s.seed, "suite");
    s.threads = static_cast<unsigned>(count_of(j, "threads", 0, "suite"));
    if (j.contains("tolerance"))
        s.tolerance = tolerance_from_json(j.at("tolerance"));

    if (j.contains("closed_world")) {
        const auto& c = j.at("closed_world");
        check_keys(c, {"durations_ms", "trials", "errors", "tolerance", "seed"}, "closed_world");
        ClosedWorldSpec cw;
        if (c.contains("durations_ms"))
            cw.durations_ms = durations_from_json(c.at("durations_ms"), "closed_world");
        cw.trials = count_of(c, "trials", cw.trials, "closed_world");
        if (c.contains("errors"))
            cw.errors = errors_from_json(c.at("errors"));
        cw.tolerance = section_tolerance(c, s.tolerance);
        cw.seed = seed_of(c, s.seed, "closed_world");
        cw.threads = s.threads;
        s.closed_world = cw;
    }
    if (j.contains("open_world")) {
        const auto& o = j.at("open_world");
        check_keys(o, {"durations_ms", "folds", "clips_per_video", "tolerance", "seed"}, "open_world");
        OpenWorldSpec ow;
        if (o.contains("durations_ms"))
            ow.durations_ms = durations_from_json(o.at("durations_ms"), "open_world");
        ow.folds = count_of(o, "folds", ow.folds, "open_world");
        ow.clips_per_video = count_of(o, "clips_per_video", ow.clips_per_video, "open_world");
        ow.tolerance = section_tolerance(o, s.tolerance);
        ow.seed = seed_of(o, s.seed, "open_world");
        ow.threads = s.threads;
        s.open_world = ow;
    }
    if (j.contains("uniqueness")) {
        const auto& u = j.at("uniqueness");
        check_keys(u, {"durations_ms", "clips", "sets", "seed"}, "uniqueness");
        UniquenessSpec us;
        if (u.contains("durations_ms"))
            us.durations_ms = durations_from_json(u.at("durations_ms"), "uniqueness");
        us.clips = count_of(u, "clips", us.clips, "uniqueness");
        if (u.contains("sets")) {
            if (!u.at("sets").is_object())
                throw DataError("uniqueness: 'sets' must map names to video id lists");
            for (const auto& [name, ids] : u.at("sets").items())
                us.sets[name] = ids.get<std::vector<std::string>>();
        }
        us.seed = seed_of(u, s.seed, "uniqueness");
        s.uniqueness = us;
    }
    if (j.contains("entropy")) {
        const auto& e = j.at("entropy");
        check_keys(e, {"window_ms", "stride_ms", "dedup"}, "entropy");
        EntropySpec es;
        es.window_ms = static_cast<std::int64_t>(count_of(e, "window_ms", es.window_ms, "entropy"));
        es.stride_ms = static_cast<std::int64_t>(count_of(e, "stride_ms", es.stride_ms, "entropy"));
        if (e.contains("dedup"))
            es.dedup = parse_window_dedup(e.at("dedup").get<std::string>());
        s.entropy = es;
    }
    if (j.contains("convergence")) {
        const auto& c = j.at("convergence");
        check_keys(c, {"duration_ms", "trials", "tolerance", "seed"}, "convergence");
        ConvergenceSpec cs;
        cs.duration_ms = static_cast<std::int64_t>(count_of(c, "duration_ms", cs.duration_ms, "convergence"));
        cs.trials = count_of(c, "trials", cs.trials, "convergence");
        cs.tolerance = section_tolerance(c, s.tolerance);
        cs.seed = seed_of(c, s.seed, "convergence");
        cs.threads = s.threads;
        s.convergence = cs;
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        check_keys(t, {"min_top1_title", "min_top1_clip", "max_fp_rate", "fp_decreasing",
                       "min_unique_title_fraction", "convergence_non_increasing"},
                   "thresholds");
        auto num = [&](const char* key) -> std::optional<double> {
            if (!t.contains(key) || t.at(key).is_null())
                return std::nullopt;
            return t.at(key).get<double>();
        };
        s.thresholds.min_top1_title = num("min_top1_title");
        s.thresholds.min_top1_clip = num("min_top1_clip");
        s.thresholds.max_fp_rate = num("max_fp_rate");
        s.thresholds.min_unique_title_fraction = num("min_unique_title_fraction");
        s.thresholds.fp_decreasing = t.value("fp_decreasing", false);
        s.thresholds.convergence_non_increasing = t.value("convergence_non_increasing", false);
    }
    return s;
}

Json to_json(const SuiteSpec& s)
{
    Json j = {{"seed", s.seed}, {"tolerance", to_json(s.tolerance)}};
    if (s.closed_world) {
        const auto& c = *s.closed_world;
        j["closed_world"] = {{"durations_ms", c.durations_ms},
                             {"trials", c.trials},
                             {"errors", to_json(c.errors)},
                             {"tolerance", to_json(c.tolerance)},
                             {"seed", c.seed}};
    }
    if (s.open_world) {
        const auto& o = *s.open_world;
        j["open_world"] = {{"durations_ms", o.durations_ms},
                           {"folds", o.folds},
                           {"clips_per_video", o.clips_per_video},
                           {"tolerance", to_json(o.tolerance)},
                           {"seed", o.seed}};
    }
    if (s.uniqueness) {
        const auto& u = *s.uniqueness;
        j["uniqueness"] = {{"durations_ms", u.durations_ms}, {"clips", u.clips}, {"sets", u.sets}, {"seed", u.seed}};
    }
    if (s.entropy) {
        const auto& e = *s.entropy;
        j["entropy"] = {{"window_ms", e.window_ms}, {"stride_ms", e.stride_ms}, {"dedup", std::string(to_string(e.dedup))}};
    }
    if (s.convergence) {
        const auto& c = *s.convergence;
        j["convergence"] = {{"duration_ms", c.duration_ms},
                            {"trials", c.trials},
                            {"tolerance", to_json(c.tolerance)},
                            {"seed", c.seed}};
    }
    const auto& t = s.thresholds;
    j["thresholds"] = {{"min_top1_title", opt(t.min_top1_title)},
                       {"min_top1_clip", opt(t.min_top1_clip)},
                       {"max_fp_rate", opt(t.max_fp_rate)},
                       {"fp_decreasing", t.fp_decreasing},
                       {"min_unique_title_fraction", opt(t.min_unique_title_fraction)},
                       {"convergence_non_increasing", t.convergence_non_increasing}};
    return j;
}

EvalReport run_suite(const Corpus& corpus, const SuiteSpec& spec)
{
    if (corpus.empty())
        throw DataError("evaluation needs a non-empty corpus");
    EvalReport rep;
    rep.body = {{"format", "subsil-report"},
                {"version", 1},
                {"seed", spec.seed},
                {"config", to_json(spec)},
                {"corpus", {{"tracks", corpus.size()}}}};
    std::ostringstream out;
    out << "corpus: " << corpus.size() << " tracks, seed " << spec.seed << "\n";
    const auto& th = spec.thresholds;

    if (spec.closed_world) {
        const auto r = closed_world_eval(corpus, *spec.closed_world);
        Json trials = Json::array();
        for (const auto& t : r.trials) {
            trials.push_back({{"trial_id", t.trial_id},
                              {"duration_ms", t.duration_ms},
                              {"video_id", t.video_id},
                              {"start_ms", t.start_ms},
                              {"offset", t.offset},
                              {"length", t.length},
                              {"observed_length", t.observed_length},
                              {"title_candidates", t.title_candidates},
                              {"clip_candidates", t.clip_candidates},
                              {"title_hit", t.title_hit},
                              {"clip_hit", t.clip_hit},
                              {"error", t.error.empty() ? Json(nullptr) : Json(t.error)}});
        }
        Json rows = Json::array();
        out << "closed world (top-k for k = 1,5,10,20,50)\n";
        for (const auto& row : r.rows) {
            Json title = Json::object();
            Json clip = Json::object();
            for (std::size_t i = 0; i < kTopK.size(); ++i) {
                title[std::to_string(kTopK[i])] = row.title[i];
                clip[std::to_string(kTopK[i])] = row.clip[i];
            }
            rows.push_back({{"duration_ms", row.duration_ms},
                            {"trials", row.trials},
                            {"failed", row.failed},
                            {"title_top_k", title},
                            {"clip_top_k", clip},
                            {"mean_title_candidates", row.mean_title_candidates},
                            {"mean_clip_candidates", row.mean_clip_candidates}});
            out << "  T=" << row.duration_ms / 1000 << "s trials=" << row.trials << " failed=" << row.failed
                << " title:";
            for (auto v : row.title)
                out << fmt(" %.3f", v);
            out << " clip:";
            for (auto v : row.clip)
                out << fmt(" %.3f", v);
            out << fmt(" mean titles %.2f", row.mean_title_candidates)
                << fmt(" clips %.2f", row.mean_clip_candidates) << "\n";
            if (th.min_top1_title && row.title[0] < *th.min_top1_title)
                rep.violations.push_back("top-1 title accuracy " + fmt("%.4f", row.title[0]) + " at T="
                                         + std::to_string(row.duration_ms) + " ms");
            if (th.min_top1_clip && row.clip[0] < *th.min_top1_clip)
                rep.violations.push_back("top-1 clip accuracy " + fmt("%.4f", row.clip[0]) + " at T="
                                         + std::to_string(row.duration_ms) + " ms");
        }
        rep.body["closed_world"] = {{"top_k", rows}, {"trials", trials}};
    }

    if (spec.open_world) {
        const auto r = open_world_folds(corpus, *spec.open_world);
        Json trials = Json::array();
        for (const auto& t : r.trials) {
            trials.push_back({{"trial_id", t.trial_id},
                              {"fold", t.fold},
                              {"duration_ms", t.duration_ms},
                              {"video_id", t.video_id},
                              {"start_ms", t.start_ms},
                              {"observed_length", t.observed_length},
                              {"matched_clips", t.matched_clips},
                              {"matched_titles", t.matched_titles},
                              {"false_positive", t.false_positive},
                              {"error", t.error.empty() ? Json(nullptr) : Json(t.error)}});
        }
        Json rows = Json::array();
        out << "open world (duration, clips, FP clips, FP rate, mean matched clips, mean matched titles)\n";
        for (const auto& row : r.rows) {
            rows.push_back({{"duration_ms", row.duration_ms},
                            {"clips", row.clips},
                            {"fp_clips", row.fp_clips},
                            {"fp_rate", row.fp_rate},
                            {"mean_matched_clips", opt(row.mean_matched_clips)},
                            {"mean_matched_titles", opt(row.mean_matched_titles)}});
            out << "  " << row.duration_ms / 1000 << "s " << row.clips << " " << row.fp_clips
                << fmt(" %.2f%%", 100.0 * row.fp_rate)
                << (row.mean_matched_clips ? fmt(" %.2f", *row.mean_matched_clips) : std::string(" -"))
                << (row.mean_matched_titles ? fmt(" %.2f", *row.mean_matched_titles) : std::string(" -")) << "\n";
            if (th.max_fp_rate && row.fp_rate > *th.max_fp_rate)
                rep.violations.push_back("FP rate " + fmt("%.4f", row.fp_rate) + " at T="
                                         + std::to_string(row.duration_ms) + " ms");
        }
        if (th.fp_decreasing) {
            for (std::size_t i = 1; i < r.rows.size(); ++i)
                if (!(r.rows[i].fp_rate < r.rows[i - 1].fp_rate))
                    rep.violations.push_back("FP rate does not decrease from T="
                                             + std::to_string(r.rows[i - 1].duration_ms) + " to T="
                                             + std::to_string(r.rows[i].duration_ms) + " ms");
        }
        rep.body["open_world"] = {{"rows", rows}, {"trials", trials}};
    }

    if (spec.uniqueness) {
        const auto rows = uniqueness_sweep(corpus, *spec.uniqueness);
        Json arr = Json::array();
        out << "uniqueness scores\n";
        for (const auto& r : rows) {
            arr.push_back({{"set", r.set},
                           {"feature", std::string(to_string(r.feature))},
                           {"duration_ms", r.duration_ms},
                           {"clips", r.clips},
                           {"classes", r.classes},
                           {"score", r.score}});
            out << "  " << r.set << " " << to_string(r.feature) << " T=" << r.duration_ms / 1000 << "s "
                << r.classes << "/" << r.clips << fmt(" = %.4f", r.score) << "\n";
        }
        rep.body["uniqueness"] = {{"rows", arr}};
    }

    if (spec.entropy) {
        const auto& e = *spec.entropy;
        const auto pop = enumerate_windows(corpus, e.window_ms, e.stride_ms, e.dedup);
        Json j = {{"window_ms", e.window_ms},
                  {"stride_ms", e.stride_ms},
                  {"dedup", std::string(to_string(e.dedup))},
                  {"starts", pop.starts},
                  {"empty_windows", pop.empty_windows},
                  {"diagnostics", pop.diagnostics}};
        if (!pop.sequences.empty()) {
            const auto s = entropy_stats(pop.sequences);
            j["population"] = s.population;
            j["classes"] = s.classes;
            j["largest_class"] = s.largest_class;
            j["smallest_class"] = s.smallest_class;
            j["entropy_bits"] = s.entropy_bits;
            j["max_class_bits"] = s.max_class_bits;
            j["min_class_bits"] = s.min_class_bits;
            j["mean_class_bits"] = s.mean_class_bits;
            j["mean_member_bits"] = s.mean_member_bits;
            out << "entropy: " << s.population << " windows, " << s.classes << " classes, largest "
                << s.largest_class << fmt(" (%.2f bits)", s.max_class_bits)
                << fmt(", H = %.2f bits", s.entropy_bits) << fmt(", mean class %.4f bits", s.mean_class_bits)
                << "\n";
        } else {
            out << "entropy: no non-empty window\n";
        }
        rep.body["entropy"] = j;
    }

    if (spec.convergence) {
        const auto r = convergence_eval(corpus, *spec.convergence);
        Json trials = Json::array();
        for (const auto& t : r.trials) {
            trials.push_back({{"trial_id", t.trial_id},
                              {"video_id", t.video_id},
                              {"start_ms", t.start_ms},
                              {"length", t.length},
                              {"titles", t.titles},
                              {"clips", t.clips},
                              {"error", t.error.empty() ? Json(nullptr) : Json(t.error)}});
        }
        const double frac = r.completed ? static_cast<double>(r.unique_title) / static_cast<double>(r.completed) : 0.0;
        rep.body["convergence"] = {{"completed", r.completed},
                                   {"unique_title", r.unique_title},
                                   {"unique_title_and_clip", r.unique_both},
                                   {"unique_title_fraction", frac},
                                   {"mean_titles", r.mean_titles},
                                   {"mean_clips", r.mean_clips},
                                   {"trials", trials}};
        out << "convergence: " << r.completed << " trials, " << r.unique_title << " end with one title ("
            << fmt("%.1f%%", 100.0 * frac) << "), " << r.unique_both << " with one title and one clip\n";
        if (!r.mean_titles.empty())
            out << "  mean titles after 1, 5, 10, all silhouettes: " << fmt("%.2f", r.mean_titles[0]) << " "
                << fmt("%.2f", r.mean_titles[std::min<std::size_t>(4, r.mean_titles.size() - 1)]) << " "
                << fmt("%.2f", r.mean_titles[std::min<std::size_t>(9, r.mean_titles.size() - 1)]) << " "
                << fmt("%.2f", r.mean_titles.back()) << "\n";
        if (th.min_unique_title_fraction && frac < *th.min_unique_title_fraction)
            rep.violations.push_back("only " + fmt("%.4f", frac) + " of observations reach one title");
        if (th.convergence_non_increasing) {
            for (std::size_t k = 1; k < r.mean_titles.size(); ++k)
                if (r.mean_titles[k] > r.mean_titles[k - 1]) {
                    rep.violations.push_back("mean title count rises at prefix " + std::to_string(k + 1));
                    break;
                }
        }
    }

    rep.body["threshold_violations"] = rep.violations;
    for (const auto& v : rep.violations)
        out << "THRESHOLD: " << v << "\n";
    rep.summary = out.str();
    return rep;
}

} // namespace subsil
