#include "subsil/error.hpp"
#include "subsil/eval.hpp"
#include "subsil/report.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

using namespace subsil;
using test::make_track;

namespace {

Corpus small_corpus(std::size_t tracks, std::uint64_t seed)
{
    CorpusSynthSpec spec;
    spec.tracks = tracks;
    spec.seed = seed;
    spec.min_duration_ms = 20 * 60'000;
    spec.max_duration_ms = 40 * 60'000;
    return Corpus(synth_corpus(spec));
}

// Classes visible from [a, a + T), found by a plain scan of every subtitle.
std::vector<LineClass> scan_window(const SubtitleTrack& t, std::int64_t a, std::int64_t T)
{
    std::vector<LineClass> out;
    for (const auto& s : t.subtitles)
        if (s.start_ms < a + T && s.end_ms > a)
            out.push_back(line_count(s));
    return out;
}

} // namespace

TEST(TopK, Examples)
{
    EXPECT_EQ(top_k_accuracy(4, 5), 1.0);
    EXPECT_EQ(top_k_accuracy(10, 1), 0.1);
    for (auto k : kTopK)
        EXPECT_EQ(top_k_accuracy(1, k), 1.0);
    EXPECT_EQ(top_k_accuracy(7, 5, false), 0.0);
    EXPECT_EQ(top_k_accuracy(0, 5, false), 0.0);
    EXPECT_THROW(top_k_accuracy(0, 5), DataError);
    EXPECT_THROW(top_k_accuracy(3, 0), DataError);
}

TEST(TopK, MonotoneInKAndOneFromN)
{
    for (std::size_t n = 1; n <= 300; ++n) {
        double prev = 0;
        for (std::size_t k = 1; k <= 320; ++k) {
            const double a = top_k_accuracy(n, k);
            ASSERT_GE(a, prev);
            ASSERT_GT(a, 0.0);
            ASSERT_LE(a, 1.0);
            if (k >= n) {
                ASSERT_EQ(a, 1.0);
            }
            prev = a;
        }
    }
}

TEST(Entropy, Examples)
{
    const std::uint64_t two[] = {3, 3};
    EXPECT_DOUBLE_EQ(entropy_bits(two), 1.0);
    const std::uint64_t one[] = {14'370};
    EXPECT_EQ(entropy_bits(one), 0.0);
    EXPECT_FALSE(std::signbit(entropy_bits(one)));
    const std::vector<std::uint64_t> flat(14'370, 1);
    EXPECT_NEAR(entropy_bits(flat), std::log2(14'370.0), 1e-9);
    EXPECT_NEAR(std::log2(14'370.0), 13.81, 0.005);
}

TEST(Entropy, RejectsEmptyAndZero)
{
    EXPECT_THROW(entropy_bits({}), DataError);
    const std::uint64_t bad[] = {2, 0};
    EXPECT_THROW(entropy_bits(bad), DataError);
}

TEST(Entropy, BoundedAndRelabelInvariant)
{
    Rng rng(3);
    for (int round = 0; round < 500; ++round) {
        std::vector<std::uint64_t> m(1 + rng.below(200));
        for (auto& x : m)
            x = 1 + rng.below(1000);
        const double h = entropy_bits(m);
        ASSERT_GE(h, 0.0);
        ASSERT_LE(h, std::log2(double(m.size())) + 1e-12);
        auto shuffled = m;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        ASSERT_NEAR(entropy_bits(shuffled), h, 1e-12);
    }
}

TEST(Windows, StartCountFormula)
{
    // A 600 s track with 120 s windows on a 1 s grid: 600 - 120 + 1.
    EXPECT_EQ(window_start_count(600'000, 120'000, 1000), 481u);
    EXPECT_EQ(window_start_count(600'000, 600'000, 1000), 1u);
    EXPECT_EQ(window_start_count(600'000, 600'001, 1000), 0u);
    Rng rng(4);
    for (int round = 0; round < 2000; ++round) {
        const auto D = rng.between(1, 500'000);
        const auto T = rng.between(1, 500'000);
        const auto stride = rng.between(1, 20'000);
        std::size_t scanned = 0;
        for (std::int64_t a = 0; a + T <= D; a += stride)
            ++scanned;
        ASSERT_EQ(window_start_count(D, T, stride), scanned) << D << " " << T << " " << stride;
    }
}

TEST(Windows, SequencesMatchAPlainScan)
{
    Rng rng(5);
    for (int round = 0; round < 30; ++round) {
        std::vector<SubtitleTrack> tracks;
        for (int q = 0; q < 2; ++q)
            tracks.push_back(test::random_track(rng, "t" + std::to_string(q), 10 + rng.below(30)));
        const Corpus corpus(tracks);
        const auto T = rng.between(3000, 30'000);
        const auto stride = rng.between(200, 3000);
        const auto pop = enumerate_windows(corpus, T, stride);

        std::vector<ClassSequence> expect;
        std::size_t starts = 0, empty = 0;
        for (const auto& t : corpus.tracks()) {
            for (std::int64_t a = 0; a + T <= t.duration_ms; a += stride) {
                ++starts;
                auto v = scan_window(t, a, T);
                if (v.empty())
                    ++empty;
                else
                    expect.emplace_back(std::move(v));
            }
        }
        ASSERT_EQ(pop.starts, starts);
        ASSERT_EQ(pop.empty_windows, empty);
        ASSERT_EQ(pop.sequences, expect);

        const auto distinct = enumerate_windows(corpus, T, stride, WindowDedup::distinct);
        std::set<std::vector<LineClass>> unique;
        for (const auto& s : expect)
            unique.insert(s.labels);
        ASSERT_EQ(distinct.sequences.size(), unique.size());
    }
}

TEST(Windows, TracksAdd)
{
    const auto a = make_track("a", {{1000, 2000, 1}}, 300'000);
    const auto b = make_track("b", {{1000, 2000, 2}}, 200'000);
    const auto both = enumerate_windows(Corpus({a, b}), 60'000);
    EXPECT_EQ(both.starts, enumerate_windows(Corpus({a}), 60'000).starts + enumerate_windows(Corpus({b}), 60'000).starts);
    EXPECT_EQ(both.starts, 241u + 141u);
}

TEST(Windows, WindowLongerThanEveryTrack)
{
    const auto a = make_track("a", {{1000, 2000, 1}}, 30'000);
    const auto pop = enumerate_windows(Corpus({a}), 60'000);
    EXPECT_TRUE(pop.sequences.empty());
    EXPECT_EQ(pop.starts, 0u);
    ASSERT_FALSE(pop.diagnostics.empty());
    EXPECT_THROW(enumerate_windows(Corpus({a}), 0), DataError);
    EXPECT_THROW(enumerate_windows(Corpus({a}), 1000, 0), DataError);
}

TEST(EntropyStats, MatchesPartitionOracle)
{
    Rng rng(6);
    std::vector<ClassSequence> pop;
    for (int i = 0; i < 3000; ++i) {
        std::vector<LineClass> v(1 + rng.below(4));
        for (auto& c : v)
            c = static_cast<LineClass>(1 + rng.below(2));
        pop.emplace_back(std::move(v));
    }
    std::map<std::vector<std::uint8_t>, std::uint64_t> parts;
    for (const auto& s : pop)
        ++parts[spatiotemporal_vector(s).l];
    std::vector<std::uint64_t> sizes;
    double mean_log = 0, member_log = 0;
    for (const auto& [k, n] : parts) {
        sizes.push_back(n);
        mean_log += std::log2(double(n));
        member_log += double(n) * std::log2(double(n));
    }
    const auto stats = entropy_stats(pop);
    EXPECT_EQ(stats.population, pop.size());
    EXPECT_EQ(stats.classes, parts.size());
    EXPECT_EQ(stats.largest_class, *std::max_element(sizes.begin(), sizes.end()));
    EXPECT_EQ(stats.smallest_class, *std::min_element(sizes.begin(), sizes.end()));
    EXPECT_NEAR(stats.entropy_bits, entropy_bits(sizes), 1e-12);
    EXPECT_NEAR(stats.max_class_bits, std::log2(double(stats.largest_class)), 1e-12);
    EXPECT_NEAR(stats.mean_class_bits, mean_log / double(parts.size()), 1e-9);
    EXPECT_NEAR(stats.mean_member_bits, member_log / double(pop.size()), 1e-9);
    EXPECT_LE(stats.entropy_bits, std::log2(double(stats.classes)) + 1e-12);
}

TEST(TopKAggregate, RecomputableFromTrials)
{
    std::vector<TrialResult> trials;
    Rng rng(7);
    for (std::size_t i = 0; i < 60; ++i) {
        TrialResult t;
        t.trial_id = i;
        t.duration_ms = i % 2 ? 60'000 : 120'000;
        t.title_candidates = 1 + rng.below(30);
        t.clip_candidates = t.title_candidates + rng.below(5);
        t.title_hit = rng.chance(0.9);
        t.clip_hit = t.title_hit && rng.chance(0.9);
        if (i % 17 == 0)
            t.error = "boom";
        trials.push_back(t);
    }
    const auto rows = aggregate_top_k(trials);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) {
        std::size_t n = 0, failed = 0;
        std::array<double, kTopK.size()> title{}, clip{};
        for (const auto& t : trials) {
            if (t.duration_ms != row.duration_ms)
                continue;
            if (!t.error.empty()) {
                ++failed;
                continue;
            }
            ++n;
            for (std::size_t q = 0; q < kTopK.size(); ++q) {
                title[q] += top_k_accuracy(t.title_candidates, kTopK[q], t.title_hit);
                clip[q] += top_k_accuracy(t.clip_candidates, kTopK[q], t.clip_hit);
            }
        }
        EXPECT_EQ(row.trials, n + failed);
        EXPECT_EQ(row.failed, failed);
        for (std::size_t q = 0; q < kTopK.size(); ++q) {
            EXPECT_NEAR(row.title[q], title[q] / double(n), 1e-12);
            EXPECT_NEAR(row.clip[q], clip[q] / double(n), 1e-12);
            if (q > 0) {
                EXPECT_GE(row.title[q], row.title[q - 1]);
            }
        }
    }
}

TEST(ClosedWorld, ErrorFreeTrialsAlwaysHit)
{
    const auto corpus = small_corpus(6, 11);
    ClosedWorldSpec spec;
    spec.durations_ms = {60'000, 120'000};
    spec.trials = 40;
    spec.seed = 5;
    const auto r = closed_world_eval(corpus, spec);
    ASSERT_EQ(r.trials.size(), 80u);
    for (const auto& t : r.trials) {
        ASSERT_TRUE(t.error.empty()) << t.error;
        EXPECT_TRUE(t.title_hit);
        EXPECT_TRUE(t.clip_hit);
        EXPECT_LE(t.title_candidates, t.clip_candidates);
        EXPECT_GE(t.title_candidates, 1u);
    }
    spec.threads = 3;
    const auto again = closed_world_eval(corpus, spec);
    ASSERT_EQ(again.trials.size(), r.trials.size());
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        EXPECT_EQ(again.trials[i].start_ms, r.trials[i].start_ms);
        EXPECT_EQ(again.trials[i].clip_candidates, r.trials[i].clip_candidates);
    }
}

TEST(OpenWorld, OverlappingSplitsRejected)
{
    const auto corpus = small_corpus(4, 12);
    EXPECT_THROW(open_world_eval(corpus, corpus, {}), DataError);
}

TEST(OpenWorld, ZeroFalsePositivesLeaveMeansAbsent)
{
    std::vector<OpenWorldTrial> trials(5);
    for (std::size_t i = 0; i < trials.size(); ++i) {
        trials[i].trial_id = i;
        trials[i].duration_ms = 60'000;
    }
    trials[4].duration_ms = 90'000;
    trials[4].false_positive = true;
    trials[4].matched_clips = 6;
    trials[4].matched_titles = 2;
    const auto rows = aggregate_open_world(trials);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].fp_rate, 0.0);
    EXPECT_FALSE(rows[0].mean_matched_clips.has_value());
    EXPECT_FALSE(rows[0].mean_matched_titles.has_value());
    EXPECT_EQ(rows[1].fp_rate, 1.0);
    EXPECT_EQ(rows[1].mean_matched_clips, 6.0);
}

TEST(OpenWorld, FoldsPartitionTheCorpus)
{
    const auto corpus = small_corpus(10, 13);
    OpenWorldSpec spec;
    spec.folds = 5;
    spec.clips_per_video = 2;
    spec.durations_ms = {60'000};
    const auto r = open_world_folds(corpus, spec);
    std::map<std::string, std::set<std::size_t>> fold_of;
    for (const auto& t : r.trials)
        fold_of[t.video_id].insert(t.fold);
    EXPECT_EQ(fold_of.size(), 10u);
    for (const auto& [id, folds] : fold_of)
        EXPECT_EQ(folds.size(), 1u) << id;
    for (const auto& t : r.trials)
        EXPECT_EQ(t.false_positive, t.matched_clips > 0);
}

TEST(Uniqueness, SweepRowShape)
{
    const auto corpus = small_corpus(6, 14);
    UniquenessSpec spec;
    spec.durations_ms = {60'000, 120'000};
    spec.clips = 300;
    spec.sets["first"] = {"film001", "film002", "film003"};
    spec.sets["rest"] = {"film004", "film005", "film006"};
    const auto rows = uniqueness_sweep(corpus, spec);
    EXPECT_EQ(rows.size(), 2u * 3u * 2u);
    for (const auto& row : rows) {
        EXPECT_GT(row.clips, 0u);
        EXPECT_LE(row.classes, row.clips);
        EXPECT_DOUBLE_EQ(row.score, double(row.classes) / double(row.clips));
    }
    spec.sets["bad"] = {"nope"};
    EXPECT_THROW(uniqueness_sweep(corpus, spec), DataError);
}

TEST(Uniqueness, SampledClipsAreDistinctStarts)
{
    const auto corpus = small_corpus(2, 15);
    const std::vector<std::string> ids{"film001"};
    const auto& t = corpus.at("film001");
    const auto clips = sample_clips(corpus, ids, 60'000, 200, 3);
    EXPECT_EQ(clips.size(), 200u);
    for (const auto& c : clips)
        EXPECT_GT(c.size(), 0u);
    // Asking for more clips than non-empty starts returns all of them.
    const auto all = sample_clips(corpus, ids, 60'000, 1'000'000, 3);
    std::size_t nonempty = 0;
    for (std::int64_t a = 0; a + 60'000 <= t.duration_ms; a += 1000)
        nonempty += !scan_window(t, a, 60'000).empty();
    EXPECT_EQ(all.size(), nonempty);
}

TEST(Convergence, FinalPrefixFindsTheTruth)
{
    const auto corpus = small_corpus(6, 16);
    ConvergenceSpec spec;
    spec.trials = 20;
    spec.seed = 2;
    const auto r = convergence_eval(corpus, spec);
    ASSERT_EQ(r.completed, 20u);
    for (const auto& t : r.trials) {
        ASSERT_TRUE(t.error.empty());
        ASSERT_EQ(t.titles.size(), t.length);
        ASSERT_EQ(t.clips.size(), t.length);
        EXPECT_GE(t.titles.back(), 1u);
        for (std::size_t k = 0; k < t.length; ++k)
            EXPECT_LE(t.titles[k], t.clips[k]);
    }
    EXPECT_LE(r.unique_both, r.unique_title);
}

TEST(Report, SameSeedSameBody)
{
    const auto corpus = small_corpus(5, 17);
    const auto spec_json = Json::parse(R"({
        "seed": 9,
        "closed_world": {"durations_ms": [60000], "trials": 10},
        "open_world": {"durations_ms": [60000, 120000], "folds": 5, "clips_per_video": 2},
        "uniqueness": {"durations_ms": [60000], "clips": 200},
        "entropy": {"window_ms": 120000, "stride_ms": 5000},
        "convergence": {"trials": 5}
    })");
    auto spec = suite_from_json(spec_json);
    spec.threads = 1;
    const auto a = run_suite(corpus, spec);
    spec.threads = 4;
    const auto b = run_suite(corpus, spec);
    EXPECT_EQ(a.body.dump(), b.body.dump());
    EXPECT_EQ(a.body.at("seed"), 9);
    EXPECT_TRUE(a.body.contains("closed_world"));
    EXPECT_TRUE(a.body.contains("entropy"));
    spec.seed = 10;
    spec.closed_world->seed = 10;
    EXPECT_NE(run_suite(corpus, spec).body.dump(), a.body.dump());
}

TEST(Report, SuiteSpecValidation)
{
    EXPECT_THROW(suite_from_json(Json::parse(R"({"sed": 1})")), DataError);
    EXPECT_THROW(suite_from_json(Json::parse(R"({"closed_world": {"trials": -1}})")), DataError);
    const auto s = suite_from_json(Json::parse(R"({"seed": 4, "tolerance": {"max_deletions": 1},
                                                   "closed_world": {}})"));
    EXPECT_EQ(s.closed_world->seed, 4u);
    EXPECT_EQ(s.closed_world->tolerance.max_deletions, 1u);
    const auto back = suite_from_json(to_json(s));
    EXPECT_EQ(to_json(back), to_json(s));
}

TEST(Report, ThresholdViolationsAreListed)
{
    const auto corpus = small_corpus(4, 18);
    auto spec = suite_from_json(Json::parse(R"({
        "closed_world": {"durations_ms": [60000], "trials": 5},
        "thresholds": {"min_top1_title": 1.01}
    })"));
    const auto r = run_suite(corpus, spec);
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_NE(r.summary.find("THRESHOLD"), std::string::npos);
}
