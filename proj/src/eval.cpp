#include "subsil/eval.hpp"
#include "subsil/error.hpp"
#include "subsil/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace subsil {

namespace {

constexpr int kMaxDraws = 64;

std::vector<LineClass> window_classes(const SubtitleTrack& track, std::size_t offset, std::size_t length)
{
    std::vector<LineClass> out;
    out.reserve(length);
    for (std::size_t i = offset; i < offset + length; ++i)
        out.push_back(line_count(track.subtitles[i]));
    return out;
}

std::vector<const SubtitleTrack*> long_enough(const Corpus& corpus, std::int64_t window_ms)
{
    std::vector<const SubtitleTrack*> out;
    for (const auto& t : corpus.tracks())
        if (t.duration_ms >= window_ms)
            out.push_back(&t);
    return out;
}

std::string what_of(const std::exception& e)
{
    return e.what();
}

} // namespace

double top_k_accuracy(std::size_t n, std::size_t k, bool target_present)
{
    if (k == 0)
        throw DataError("top-k needs k >= 1");
    if (!target_present)
        return 0.0;
    if (n == 0)
        throw DataError("target cannot be among zero candidates");
    return k > n ? 1.0 : static_cast<double>(k) / static_cast<double>(n);
}

double entropy_bits(std::span<const std::uint64_t> multiplicities)
{
    if (multiplicities.empty())
        throw DataError("entropy of an empty population");
    long double total = 0;
    for (auto c : multiplicities) {
        if (c == 0)
            throw DataError("class multiplicities must be positive");
        total += static_cast<long double>(c);
    }
    long double h = 0;
    for (auto c : multiplicities) {
        const long double p = static_cast<long double>(c) / total;
        h -= p * std::log2(p);
    }
    // -0.0 for a single class reads oddly in reports.
    return h <= 0 ? 0.0 : static_cast<double>(h);
}

std::string_view to_string(WindowDedup d)
{
    return d == WindowDedup::all_starts ? "all_starts" : "distinct";
}

WindowDedup parse_window_dedup(std::string_view name)
{
    if (name == "all_starts")
        return WindowDedup::all_starts;
    if (name == "distinct")
        return WindowDedup::distinct;
    throw DataError("unknown dedup policy '" + std::string(name) + "'");
}

std::size_t window_start_count(std::int64_t duration_ms, std::int64_t window_ms, std::int64_t stride_ms)
{
    if (window_ms <= 0 || stride_ms < 1)
        throw DataError("window must be positive and stride at least 1 ms");
    if (duration_ms < window_ms)
        return 0;
    return static_cast<std::size_t>((duration_ms - window_ms) / stride_ms) + 1;
}

WindowPopulation enumerate_windows(const Corpus& corpus, std::int64_t window_ms, std::int64_t stride_ms,
                                   WindowDedup dedup)
{
    WindowPopulation pop;
    std::set<std::vector<LineClass>> seen;
    bool any_track = false;
    for (const auto& track : corpus.tracks()) {
        const auto n = window_start_count(track.duration_ms, window_ms, stride_ms);
        any_track = any_track || n > 0;
        for (std::size_t s = 0; s < n; ++s) {
            const auto a = static_cast<std::int64_t>(s) * stride_ms;
            ++pop.starts;
            const auto w = visible_window(track, a, a + window_ms);
            if (!w) {
                ++pop.empty_windows;
                continue;
            }
            auto classes = window_classes(track, w->first, w->second);
            if (dedup == WindowDedup::distinct && !seen.insert(classes).second)
                continue;
            pop.sequences.emplace_back(std::move(classes));
        }
    }
    if (!any_track)
        pop.diagnostics.push_back("window of " + std::to_string(window_ms) + " ms is longer than every track");
    return pop;
}

EntropyStats entropy_stats(std::span<const ClassSequence> population)
{
    if (population.empty())
        throw DataError("entropy of an empty population");
    std::unordered_map<std::string, std::uint64_t> classes;
    for (const auto& seq : population)
        ++classes[feature_key(seq, Feature::spatiotemporal)];

    std::vector<std::uint64_t> sizes;
    sizes.reserve(classes.size());
    for (const auto& [key, n] : classes)
        sizes.push_back(n);
    std::sort(sizes.begin(), sizes.end());

    EntropyStats s;
    s.population = population.size();
    s.classes = sizes.size();
    s.smallest_class = sizes.front();
    s.largest_class = sizes.back();
    s.entropy_bits = entropy_bits(sizes);
    s.max_class_bits = std::log2(static_cast<double>(s.largest_class));
    s.min_class_bits = std::log2(static_cast<double>(s.smallest_class));
    double by_class = 0;
    double by_member = 0;
    for (auto n : sizes) {
        const double bits = std::log2(static_cast<double>(n));
        by_class += bits;
        by_member += bits * static_cast<double>(n);
    }
    s.mean_class_bits = by_class / static_cast<double>(sizes.size());
    s.mean_member_bits = by_member / static_cast<double>(s.population);
    return s;
}

std::vector<TopKRow> aggregate_top_k(std::span<const TrialResult> trials)
{
    std::vector<TopKRow> rows;
    auto row_for = [&](std::int64_t d) -> TopKRow& {
        for (auto& r : rows)
            if (r.duration_ms == d)
                return r;
        rows.push_back({});
        rows.back().duration_ms = d;
        return rows.back();
    };
    std::map<std::int64_t, std::size_t> scored;
    for (const auto& t : trials) {
        auto& row = row_for(t.duration_ms);
        ++row.trials;
        if (!t.error.empty()) {
            ++row.failed;
            continue;
        }
        ++scored[t.duration_ms];
        for (std::size_t i = 0; i < kTopK.size(); ++i) {
            row.title[i] += top_k_accuracy(t.title_candidates, kTopK[i], t.title_hit);
            row.clip[i] += top_k_accuracy(t.clip_candidates, kTopK[i], t.clip_hit);
        }
        row.mean_title_candidates += static_cast<double>(t.title_candidates);
        row.mean_clip_candidates += static_cast<double>(t.clip_candidates);
    }
    for (auto& row : rows) {
        const auto n = scored[row.duration_ms];
        if (n == 0)
            continue;
        for (auto& v : row.title)
            v /= static_cast<double>(n);
        for (auto& v : row.clip)
            v /= static_cast<double>(n);
        row.mean_title_candidates /= static_cast<double>(n);
        row.mean_clip_candidates /= static_cast<double>(n);
    }
    return rows;
}

ClosedWorldResult closed_world_eval(const Corpus& corpus, const ClosedWorldSpec& spec)
{
    if (corpus.empty())
        throw DataError("closed-world evaluation needs a non-empty corpus");
    spec.tolerance.validate();

    struct Job {
        std::size_t id;
        std::int64_t duration;
    };
    std::vector<Job> jobs;
    for (auto d : spec.durations_ms) {
        if (d <= 0)
            throw DataError("recording durations must be positive");
        for (std::size_t t = 0; t < spec.trials; ++t)
            jobs.push_back({jobs.size(), d});
    }

    ClosedWorldResult out;
    out.trials = parallel_map(jobs.size(), spec.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        TrialResult r;
        r.trial_id = job.id;
        r.duration_ms = job.duration;
        const auto pool = long_enough(corpus, job.duration);
        if (pool.empty()) {
            r.error = "no track is long enough";
            return r;
        }
        Rng rng(mix_seed(spec.seed, job.id));
        std::optional<Rendered> rendered;
        const SubtitleTrack* track = nullptr;
        std::string last_error;
        for (int draw = 0; draw < kMaxDraws && !rendered; ++draw) {
            track = pool[rng.below(pool.size())];
            ScenarioSpec sc;
            sc.video_id = track->video_id;
            sc.start_ms = rng.between(0, track->duration_ms - job.duration);
            sc.duration_ms = job.duration;
            auto errors = spec.errors;
            errors.seed = rng.next();
            try {
                rendered = render_observation(*track, sc, errors);
                r.start_ms = sc.start_ms;
            } catch (const DataError& e) {
                last_error = what_of(e);
            }
        }
        if (!rendered) {
            r.error = "no usable clip: " + last_error;
            return r;
        }
        const auto& truth = rendered->truth.clips.front();
        const auto& obs = rendered->capture.clips.front();
        r.video_id = track->video_id;
        r.offset = truth.offset;
        r.length = truth.length;
        r.observed_length = obs.sequence.size();
        try {
            const auto result = correlate(obs, corpus, spec.tolerance, {SearchStrategy::automatic, 1});
            r.clip_candidates = result.candidates.size();
            r.title_candidates = result.title_count();
            for (const auto& c : result.candidates) {
                if (c.video_id != r.video_id)
                    continue;
                r.title_hit = true;
                if (c.offset == r.offset && c.length == r.length)
                    r.clip_hit = true;
            }
        } catch (const std::exception& e) {
            r.error = what_of(e);
        }
        return r;
    });
    out.rows = aggregate_top_k(out.trials);
    return out;
}

std::vector<OpenWorldRow> aggregate_open_world(std::span<const OpenWorldTrial> trials)
{
    std::vector<OpenWorldRow> rows;
    std::map<std::int64_t, std::pair<double, double>> sums;
    for (const auto& t : trials) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.duration_ms == t.duration_ms; });
        if (it == rows.end()) {
            rows.push_back({});
            rows.back().duration_ms = t.duration_ms;
            it = rows.end() - 1;
        }
        if (!t.error.empty())
            continue;
        ++it->clips;
        if (t.false_positive) {
            ++it->fp_clips;
            sums[t.duration_ms].first += static_cast<double>(t.matched_clips);
            sums[t.duration_ms].second += static_cast<double>(t.matched_titles);
        }
    }
    for (auto& row : rows) {
        row.fp_rate = row.clips ? static_cast<double>(row.fp_clips) / static_cast<double>(row.clips) : 0.0;
        if (row.fp_clips) {
            row.mean_matched_clips = sums[row.duration_ms].first / static_cast<double>(row.fp_clips);
            row.mean_matched_titles = sums[row.duration_ms].second / static_cast<double>(row.fp_clips);
        }
    }
    return rows;
}

namespace {

struct OpenJob {
    std::size_t fold;
    std::int64_t duration;
    const SubtitleTrack* target;
    const Corpus* library;
};

std::vector<OpenWorldTrial> run_open_jobs(const std::vector<OpenJob>& jobs, const OpenWorldSpec& spec)
{
    return parallel_map(jobs.size(), spec.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        OpenWorldTrial r;
        r.trial_id = i;
        r.fold = job.fold;
        r.duration_ms = job.duration;
        r.video_id = job.target->video_id;
        if (job.target->duration_ms < job.duration) {
            r.error = "track shorter than the recording";
            return r;
        }
        Rng rng(mix_seed(spec.seed, i));
        std::optional<Rendered> rendered;
        for (int draw = 0; draw < kMaxDraws && !rendered; ++draw) {
            ScenarioSpec sc;
            sc.video_id = r.video_id;
            sc.start_ms = rng.between(0, job.target->duration_ms - job.duration);
            sc.duration_ms = job.duration;
            try {
                rendered = render_observation(*job.target, sc);
                r.start_ms = sc.start_ms;
            } catch (const DataError&) {
            }
        }
        if (!rendered) {
            r.error = "no clip with a visible subtitle";
            return r;
        }
        const auto& obs = rendered->capture.clips.front();
        r.observed_length = obs.sequence.size();
        try {
            const auto result = correlate(obs, *job.library, spec.tolerance, {SearchStrategy::automatic, 1});
            r.matched_clips = result.candidates.size();
            r.matched_titles = result.title_count();
            r.false_positive = r.matched_clips > 0;
        } catch (const std::exception& e) {
            r.error = what_of(e);
        }
        return r;
    });
}

void append_jobs(std::vector<OpenJob>& jobs, std::size_t fold, const Corpus& targets, const Corpus& library,
                 const OpenWorldSpec& spec)
{
    for (auto d : spec.durations_ms) {
        if (d <= 0)
            throw DataError("recording durations must be positive");
        for (const auto& t : targets.tracks())
            for (std::size_t c = 0; c < spec.clips_per_video; ++c)
                jobs.push_back({fold, d, &t, &library});
    }
}

} // namespace

OpenWorldResult open_world_eval(const Corpus& targets, const Corpus& library, const OpenWorldSpec& spec,
                                std::size_t fold)
{
    spec.tolerance.validate();
    if (library.empty())
        throw DataError("open-world library is empty");
    for (const auto& t : targets.tracks())
        if (library.find(t.video_id))
            throw DataError("video '" + t.video_id + "' is in both the target set and the library");
    std::vector<OpenJob> jobs;
    append_jobs(jobs, fold, targets, library, spec);
    OpenWorldResult out;
    out.trials = run_open_jobs(jobs, spec);
    out.rows = aggregate_open_world(out.trials);
    return out;
}

OpenWorldResult open_world_folds(const Corpus& corpus, const OpenWorldSpec& spec)
{
    spec.tolerance.validate();
    if (spec.folds < 2)
        throw DataError("open-world evaluation needs at least two folds");
    if (corpus.size() < spec.folds)
        throw DataError("fewer tracks than folds");

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(spec.seed, 0xF01D));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<Corpus> targets;
    std::vector<Corpus> libraries;
    for (std::size_t f = 0; f < spec.folds; ++f) {
        std::vector<SubtitleTrack> in;
        std::vector<SubtitleTrack> rest;
        for (std::size_t i = 0; i < order.size(); ++i)
            (i % spec.folds == f ? in : rest).push_back(corpus.tracks()[order[i]]);
        targets.emplace_back(std::move(in));
        libraries.emplace_back(std::move(rest));
    }

    std::vector<OpenJob> jobs;
    for (std::size_t f = 0; f < spec.folds; ++f)
        append_jobs(jobs, f, targets[f], libraries[f], spec);
    OpenWorldResult out;
    out.trials = run_open_jobs(jobs, spec);
    out.rows = aggregate_open_world(out.trials);
    return out;
}

std::vector<ClassSequence> sample_clips(const Corpus& corpus, std::span<const std::string> video_ids,
                                        std::int64_t window_ms, std::size_t count, std::uint64_t seed)
{
    std::vector<const SubtitleTrack*> tracks;
    if (video_ids.empty()) {
        for (const auto& t : corpus.tracks())
            tracks.push_back(&t);
    } else {
        for (const auto& id : video_ids)
            tracks.push_back(&corpus.at(id));
    }

    std::vector<std::size_t> prefix{0};
    for (const auto* t : tracks)
        prefix.push_back(prefix.back() + window_start_count(t->duration_ms, window_ms, 1000));
    const auto total = prefix.back();

    std::vector<ClassSequence> out;
    auto take = [&](std::size_t flat) {
        const auto k = static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), flat) - prefix.begin()) - 1;
        const auto a = static_cast<std::int64_t>(flat - prefix[k]) * 1000;
        const auto w = visible_window(*tracks[k], a, a + window_ms);
        if (!w)
            return;
        out.emplace_back(window_classes(*tracks[k], w->first, w->second));
    };

    if (count >= total) {
        for (std::size_t f = 0; f < total; ++f)
            take(f);
        return out;
    }
    Rng rng(seed);
    std::unordered_set<std::size_t> drawn;
    const auto max_draws = 50 * count + 1000;
    for (std::size_t d = 0; d < max_draws && out.size() < count && drawn.size() < total; ++d) {
        const auto f = static_cast<std::size_t>(rng.below(total));
        if (drawn.insert(f).second)
            take(f);
    }
    return out;
}

std::vector<UniquenessRow> uniqueness_sweep(const Corpus& corpus, const UniquenessSpec& spec)
{
    auto sets = spec.sets;
    if (sets.empty())
        sets["all"] = {};
    std::vector<UniquenessRow> rows;
    std::uint64_t stream = 0;
    for (const auto& [name, ids] : sets) {
        for (auto d : spec.durations_ms) {
            if (d <= 0)
                throw DataError("clip durations must be positive");
            const auto clips = sample_clips(corpus, ids, d, spec.clips, mix_seed(spec.seed, stream++));
            for (auto f : {Feature::temporal, Feature::spatial, Feature::spatiotemporal}) {
                UniquenessRow row;
                row.set = name;
                row.feature = f;
                row.duration_ms = d;
                row.clips = clips.size();
                if (!clips.empty()) {
                    row.score = uniqueness_score(clips, f);
                    row.classes = static_cast<std::size_t>(std::llround(row.score * static_cast<double>(clips.size())));
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

ConvergenceResult convergence_eval(const Corpus& corpus, const ConvergenceSpec& spec)
{
    spec.tolerance.validate();
    if (spec.duration_ms <= 0)
        throw DataError("recording duration must be positive");
    const auto pool = long_enough(corpus, spec.duration_ms);
    if (pool.empty())
        throw DataError("no track is long enough for the recording duration");

    ConvergenceResult out;
    out.trials = parallel_map(spec.trials, spec.threads, [&](std::size_t i) {
        ConvergenceTrial r;
        r.trial_id = i;
        Rng rng(mix_seed(spec.seed, i));
        const SubtitleTrack* track = nullptr;
        std::optional<std::pair<std::size_t, std::size_t>> window;
        for (int draw = 0; draw < kMaxDraws && !window; ++draw) {
            track = pool[rng.below(pool.size())];
            r.start_ms = rng.between(0, track->duration_ms - spec.duration_ms);
            window = visible_window(*track, r.start_ms, r.start_ms + spec.duration_ms);
        }
        if (!window) {
            r.error = "no clip with a visible subtitle";
            return r;
        }
        r.video_id = track->video_id;
        r.length = window->second;
        const auto classes = window_classes(*track, window->first, window->second);
        try {
            for (std::size_t k = 1; k <= r.length; ++k) {
                Observation obs;
                obs.sequence = ClassSequence(std::vector<LineClass>(classes.begin(), classes.begin() + k));
                obs.duration_ms = k < r.length ? track->subtitles[window->first + k].start_ms - r.start_ms
                                               : spec.duration_ms;
                const auto result = correlate(obs, corpus, spec.tolerance, {SearchStrategy::automatic, 1});
                r.titles.push_back(result.title_count());
                r.clips.push_back(result.candidates.size());
            }
        } catch (const std::exception& e) {
            r.error = what_of(e);
        }
        return r;
    });

    std::size_t longest = 0;
    for (const auto& t : out.trials) {
        if (!t.error.empty())
            continue;
        ++out.completed;
        longest = std::max(longest, t.titles.size());
        if (t.titles.back() == 1) {
            ++out.unique_title;
            if (t.clips.back() == 1)
                ++out.unique_both;
        }
    }
    out.mean_titles.assign(longest, 0.0);
    out.mean_clips.assign(longest, 0.0);
    for (const auto& t : out.trials) {
        if (!t.error.empty())
            continue;
        for (std::size_t k = 0; k < longest; ++k) {
            const auto at = std::min(k, t.titles.size() - 1);
            out.mean_titles[k] += static_cast<double>(t.titles[at]);
            out.mean_clips[k] += static_cast<double>(t.clips[at]);
        }
    }
    for (std::size_t k = 0; k < longest; ++k) {
        out.mean_titles[k] /= static_cast<double>(out.completed);
        out.mean_clips[k] /= static_cast<double>(out.completed);
    }
    return out;
}

} // namespace subsil
