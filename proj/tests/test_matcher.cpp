#include "subsil/error.hpp"
#include "subsil/matcher.hpp"
#include "subsil/simulate.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace subsil;
using test::Cue;
using test::make_track;

namespace {

Observation observe(std::vector<LineClass> classes, std::int64_t duration_ms, std::vector<Pause> pauses = {})
{
    Observation o;
    o.sequence = ClassSequence(std::move(classes));
    o.duration_ms = duration_ms;
    o.pauses = std::move(pauses);
    return o;
}

// Literal reading of the time constraints: some integer start a inside the
// video has t_j^e <= a <= t_{j+1}^e and t_{j+m}^s <= a + T <= t_{j+m+1}^s.
bool scan_feasible(const SubtitleTrack& t, std::size_t j, std::size_t m, std::int64_t T)
{
    auto end_at = [&](std::size_t i) { return i == 0 ? 0 : t.subtitles[i - 1].end_ms; };
    auto start_at = [&](std::size_t i) { return i == t.size() + 1 ? t.duration_ms : t.subtitles[i - 1].start_ms; };
    for (std::int64_t a = 0; a + T <= t.duration_ms; ++a) {
        if (end_at(j) <= a && a <= end_at(j + 1) && start_at(j + m) <= a + T && a + T <= start_at(j + m + 1))
            return true;
    }
    return false;
}

const SubtitleTrack kThree = make_track("v", {{1000, 2000, 1}, {3000, 4000, 2}, {10'000, 11'000, 1}}, 20'000);

} // namespace

TEST(FeasibleWindow, FirstTwoInFiveSeconds)
{
    EXPECT_TRUE(feasible_window(kThree, 0, 2, 5000));
    EXPECT_FALSE(feasible_window(kThree, 0, 2, 12'000));
}

TEST(FeasibleWindow, WholeTrack)
{
    EXPECT_TRUE(feasible_window(kThree, 0, 3, 15'000));
    EXPECT_TRUE(feasible_window(kThree, 0, 3, 20'000));
    EXPECT_FALSE(feasible_window(kThree, 0, 3, 20'001));
}

TEST(FeasibleWindow, OutOfRangeThrows)
{
    EXPECT_THROW(feasible_window(kThree, 2, 2, 1000), DataError);
    EXPECT_THROW(feasible_window(kThree, 0, 0, 1000), DataError);
}

TEST(FeasibleWindow, AgreesWithStartTimeScan)
{
    Rng rng(101);
    int feasible = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto track = test::random_track(rng, "f", 1 + rng.below(12), 4000);
        const auto m = 1 + rng.below(track.size());
        const auto j = rng.below(track.size() - m + 1);
        const auto T = rng.between(1, track.duration_ms);
        const bool expect = scan_feasible(track, j, m, T);
        feasible += expect;
        ASSERT_EQ(feasible_window(track, j, m, T), expect) << "j=" << j << " m=" << m << " T=" << T;
    }
    // Both outcomes must be well represented for the check to mean anything.
    EXPECT_GT(feasible, 1000);
    EXPECT_LT(feasible, 9000);
}

TEST(FeasibleWindow, AgreesWithVisibilityOracle)
{
    Rng rng(102);
    for (int i = 0; i < 300; ++i) {
        const auto track = test::random_track(rng, "g", 1 + rng.below(10), 3000);
        const auto T = rng.between(1, track.duration_ms);
        const auto windows = test::brute_force_windows(track, T);
        for (std::size_t j = 0; j < track.size(); ++j)
            for (std::size_t m = 1; j + m <= track.size(); ++m)
                ASSERT_EQ(feasible_window(track, j, m, T), windows.count({"g", j, m}) == 1);
    }
}

TEST(MatchVectors, PaperBudget)
{
    ToleranceConfig cfg;
    std::vector<std::uint8_t> base(30, 2);
    auto three = base;
    three[1] = three[10] = three[20] = 1;
    auto four = three;
    four[25] = 3;
    EXPECT_TRUE(match_vectors(base, base, cfg));
    EXPECT_TRUE(match_vectors(base, three, cfg));
    EXPECT_FALSE(match_vectors(base, four, cfg));
    EXPECT_EQ(d0_squared(30, cfg), 3);
    EXPECT_EQ(d0_squared(31, cfg), 4);
    EXPECT_EQ(d0_squared(1, cfg), 1);
}

TEST(MatchVectors, WildcardsCostNothing)
{
    const std::vector<std::uint8_t> a{1, kWildcard, 3};
    const std::vector<std::uint8_t> b{1, 3, 3};
    EXPECT_EQ(squared_distance(a, b), 0);
    EXPECT_THROW(squared_distance(a, std::vector<std::uint8_t>{1, 2}), DataError);
}

TEST(Pause, Examples)
{
    EXPECT_EQ(adjust_for_pause(observe({1}, 120'000, {{10'000, 20'000}})), 100'000);
    EXPECT_EQ(adjust_for_pause(observe({1}, 120'000)), 120'000);
    EXPECT_EQ(adjust_for_pause(observe({1}, 120'000, {{0, 10'000}, {50'000, 15'000}})), 95'000);
    EXPECT_THROW(adjust_for_pause(observe({1}, 10'000, {{0, 20'000}})), DataError);
    EXPECT_THROW(observe({1}, 10'000, {{0, 5000}, {4000, 1000}}).validate(), DataError);
}

TEST(TolerateErrors, Counts)
{
    ToleranceConfig cfg;
    EXPECT_EQ(tolerate_errors(observe({1, 2, 1, 1, 2}, 1000), cfg).size(), 1u);
    cfg.max_deletions = 1;
    const auto h = tolerate_errors(observe({1, 2, 1, 1, 2}, 1000), cfg);
    ASSERT_EQ(h.size(), 7u);
    EXPECT_TRUE(h[0].wildcards.empty() && h[0].removed.empty());
    for (std::size_t i = 1; i < h.size(); ++i) {
        EXPECT_EQ(h[i].aligned_length, 6u);
        EXPECT_EQ(h[i].wildcards, std::vector<std::size_t>{i - 1});
    }
}

// sum over d <= D, i <= min(I, m - 1) of C(m - i + d, d) * C(m, i)
TEST(TolerateErrors, CountFormula)
{
    auto choose = [](std::size_t n, std::size_t k) {
        if (k > n)
            return std::size_t{0};
        std::size_t r = 1;
        for (std::size_t i = 1; i <= k; ++i)
            r = r * (n - k + i) / i;
        return r;
    };
    for (std::size_t m = 1; m <= 9; ++m) {
        for (std::size_t D = 0; D <= 2; ++D) {
            for (std::size_t I = 0; I <= 2; ++I) {
                ToleranceConfig cfg;
                cfg.max_deletions = D;
                cfg.max_insertions = I;
                std::size_t expect = 0;
                for (std::size_t d = 0; d <= D; ++d)
                    for (std::size_t i = 0; i <= I && i < m; ++i)
                        expect += choose(m - i + d, d) * choose(m, i);
                std::vector<LineClass> labels(m, 1);
                EXPECT_EQ(tolerate_errors(observe(labels, 1000), cfg).size(), expect) << m << " " << D << " " << I;
            }
        }
    }
}

TEST(TolerateErrors, BudgetsAreBounded)
{
    ToleranceConfig cfg;
    cfg.max_deletions = 3;
    EXPECT_THROW(cfg.validate(), DataError);
}

TEST(ApplyHypothesis, PlacesWildcardsAndDropsElements)
{
    const auto seq = ClassSequence({1, 2, 3, 1});
    const Hypothesis h{4, {0, 3}, {1, 2}};
    EXPECT_EQ(apply_hypothesis(seq, h), (std::vector<std::uint8_t>{kWildcard, 1, 1, kWildcard}));
}

TEST(Correlate, EmptyCorpusThrows)
{
    EXPECT_THROW(correlate(observe({1}, 1000), Corpus{}, {}), DataError);
}

TEST(Correlate, NoMatchIsEmpty)
{
    const Corpus corpus({kThree});
    EXPECT_TRUE(correlate(observe({3, 3}, 5000), corpus, {}).candidates.empty());
}

TEST(Correlate, TooLongObservationGivesDiagnostic)
{
    const Corpus corpus({kThree});
    const auto r = correlate(observe({1, 1, 1, 1, 1}, 5000), corpus, {});
    EXPECT_TRUE(r.candidates.empty());
    ASSERT_EQ(r.diagnostics.size(), 1u);
}

TEST(Correlate, ReportsBoundsOfTheWindow)
{
    const Corpus corpus({kThree});
    const auto r = correlate(observe({1, 2}, 5000), corpus, {});
    ASSERT_EQ(r.candidates.size(), 1u);
    const auto& c = r.candidates[0];
    EXPECT_EQ(c.offset, 0u);
    EXPECT_EQ(c.length, 2u);
    EXPECT_EQ(c.start_bounds, (TimeRange{0, 2000}));
    EXPECT_EQ(c.end_bounds, (TimeRange{3000, 10'000}));
}

TEST(Correlate, PauseShortensTheSearchDuration)
{
    const Corpus corpus({kThree});
    // 12 s of playback covers all three subtitles; with 7 s paused, only 5 s played.
    EXPECT_TRUE(correlate(observe({1, 2}, 12'000), corpus, {}).candidates.empty());
    EXPECT_EQ(correlate(observe({1, 2}, 12'000, {{3000, 7000}}), corpus, {}).candidates.size(), 1u);
}

TEST(Correlate, MatchesBruteForceOracle)
{
    Rng rng(202);
    for (int round = 0; round < 40; ++round) {
        std::vector<SubtitleTrack> tracks;
        const auto k = 1 + rng.below(4);
        for (std::size_t q = 0; q < k; ++q)
            tracks.push_back(test::random_track(rng, "t" + std::to_string(q), 5 + rng.below(40)));
        const Corpus corpus(tracks);
        const auto& src = corpus.tracks()[rng.below(k)];
        const auto T = rng.between(5000, std::min<std::int64_t>(60'000, src.duration_ms));
        ScenarioSpec sc{src.video_id, rng.between(0, src.duration_ms - T), T, {}, {}, {}, 0};
        Observation obs;
        try {
            obs = render_observation(src, sc).capture.clips[0];
        } catch (const DataError&) {
            continue;
        }
        ToleranceConfig cfg;
        cfg.d0_per_mille = static_cast<std::uint32_t>(rng.below(3) * 100);
        ASSERT_EQ(test::keys_of(correlate(obs, corpus, cfg)), test::oracle_candidates(obs, corpus, cfg, false))
            << "round " << round;
    }
}

TEST(Correlate, AlignmentEqualsHypothesisEnumeration)
{
    Rng rng(303);
    for (int round = 0; round < 60; ++round) {
        std::vector<SubtitleTrack> tracks;
        for (std::size_t q = 0; q < 3; ++q)
            tracks.push_back(test::random_track(rng, "t" + std::to_string(q), 20 + rng.below(60)));
        const Corpus corpus(tracks);
        const auto& src = corpus.tracks()[rng.below(3)];
        const auto T = rng.between(8000, 40'000);
        if (T > src.duration_ms)
            continue;
        ScenarioSpec sc{src.video_id, rng.between(0, src.duration_ms - T), T, {}, {}, {}, 0};
        ErrorSpec errors;
        errors.seed = rng.next();
        errors.substitutions = rng.below(2);
        errors.deletions = rng.below(2);
        errors.insertions = rng.below(2);
        Rendered r;
        try {
            r = render_observation(src, sc, errors);
        } catch (const DataError&) {
            continue;
        }
        ToleranceConfig cfg;
        cfg.max_deletions = rng.below(3);
        cfg.max_insertions = rng.below(3);
        const auto& obs = r.capture.clips[0];
        const auto aligned = correlate(obs, corpus, cfg, {SearchStrategy::alignment, 1});
        const auto enumerated = correlate(obs, corpus, cfg, {SearchStrategy::enumerate, 1});
        ASSERT_EQ(aligned.candidates, enumerated.candidates) << "round " << round;
        if (obs.sequence.size() <= 12) {
            ASSERT_EQ(test::keys_of(aligned), test::oracle_candidates(obs, corpus, cfg)) << "round " << round;
        }
    }
}

TEST(Correlate, LargerBudgetsNeverDropCandidates)
{
    Rng rng(404);
    for (int round = 0; round < 40; ++round) {
        const Corpus corpus({test::random_track(rng, "a", 80), test::random_track(rng, "b", 80)});
        const auto& src = corpus.tracks()[0];
        ScenarioSpec sc{src.video_id, rng.between(0, src.duration_ms - 20'000), 20'000, {}, {}, {}, 0};
        Observation obs;
        try {
            obs = render_observation(src, sc).capture.clips[0];
        } catch (const DataError&) {
            continue;
        }
        std::set<test::WindowKey> previous;
        for (std::size_t budget = 0; budget <= 2; ++budget) {
            ToleranceConfig cfg;
            cfg.max_deletions = budget;
            cfg.max_insertions = budget;
            const auto now = test::keys_of(correlate(obs, corpus, cfg));
            EXPECT_TRUE(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
            previous = now;
        }
    }
}

TEST(Correlate, ThreadCountDoesNotChangeTheResult)
{
    CorpusSynthSpec spec;
    spec.tracks = 12;
    spec.seed = 4;
    const Corpus corpus(synth_corpus(spec));
    const auto obs = observe({1, 2, 1, 1, 2, 2, 1}, 30'000);
    ToleranceConfig cfg;
    cfg.max_deletions = 1;
    EXPECT_EQ(correlate(obs, corpus, cfg, {SearchStrategy::automatic, 1}).candidates,
              correlate(obs, corpus, cfg, {SearchStrategy::automatic, 4}).candidates);
}

TEST(Correlate, RankLabelsWithEditsNeedEnumeration)
{
    const Corpus corpus({kThree});
    ToleranceConfig cfg;
    cfg.labels = LabelMode::rank;
    cfg.max_deletions = 1;
    EXPECT_THROW(correlate(observe({1, 2}, 5000), corpus, cfg, {SearchStrategy::alignment, 1}), DataError);
    EXPECT_NO_THROW(correlate(observe({1, 2}, 5000), corpus, cfg, {SearchStrategy::enumerate, 1}));
}

TEST(Correlate, RankLabelsIgnoreAbsoluteHeight)
{
    const Corpus corpus({kThree});
    ToleranceConfig cfg;
    cfg.d0_per_mille = 0;
    cfg.labels = LabelMode::rank;
    // [2, 3] ranks to [1, 2], the same as the track's [1, 2].
    EXPECT_EQ(correlate(observe({2, 3}, 5000), corpus, cfg).candidates.size(), 1u);
    cfg.labels = LabelMode::absolute;
    EXPECT_TRUE(correlate(observe({2, 3}, 5000), corpus, cfg).candidates.empty());
}

namespace {

Corpus joint_corpus()
{
    CorpusSynthSpec spec;
    spec.tracks = 8;
    spec.seed = 77;
    spec.min_duration_ms = 40 * 60'000;
    spec.max_duration_ms = 60 * 60'000;
    return Corpus(synth_corpus(spec));
}

bool has_chain(const ChainResult& r, const GroundTruth& truth)
{
    for (const auto& ch : r.chains) {
        if (ch.video_id() != truth.video_id || ch.links.size() != truth.clips.size())
            continue;
        bool all = true;
        for (std::size_t k = 0; k < ch.links.size(); ++k)
            all = all && ch.links[k].offset == truth.clips[k].offset && ch.links[k].length == truth.clips[k].length;
        if (all)
            return true;
    }
    return false;
}

} // namespace

TEST(Joint, TrueChainSurvivesGeneratorGaps)
{
    const auto corpus = joint_corpus();
    Rng rng(55);
    int checked = 0;
    for (int round = 0; round < 60; ++round) {
        const auto& src = corpus.tracks()[rng.below(corpus.size())];
        ScenarioSpec sc;
        sc.video_id = src.video_id;
        sc.start_ms = rng.between(0, src.duration_ms - 400'000);
        sc.duration_ms = rng.between(20'000, 60'000);
        sc.clips = {{rng.between(0, 60'000), rng.between(20'000, 60'000)},
                    {rng.between(0, 60'000), rng.between(20'000, 60'000)}};
        Rendered r;
        try {
            r = render_observation(src, sc);
        } catch (const DataError&) {
            continue;
        }
        ++checked;
        const auto chains = joint_demodulate(r.capture.clips, r.capture.gaps_ms, corpus, {});
        ASSERT_TRUE(has_chain(chains, r.truth)) << "round " << round;
        for (const auto& ch : chains.chains)
            for (std::size_t k = 1; k < ch.links.size(); ++k)
                EXPECT_EQ(ch.links[k].video_id, ch.links[0].video_id);
    }
    EXPECT_GT(checked, 30);
}

TEST(Joint, PerturbedGapEliminatesTheTrueChain)
{
    const auto corpus = joint_corpus();
    Rng rng(56);
    int checked = 0;
    for (int round = 0; round < 40; ++round) {
        const auto& src = corpus.tracks()[rng.below(corpus.size())];
        ScenarioSpec sc;
        sc.video_id = src.video_id;
        sc.start_ms = rng.between(0, src.duration_ms - 200'000);
        sc.duration_ms = 40'000;
        sc.clips = {{30'000, 40'000}};
        Rendered r;
        try {
            r = render_observation(src, sc);
        } catch (const DataError&) {
            continue;
        }
        const auto& first = r.truth.clips[0];
        const auto& second = r.truth.clips[1];
        const auto a = make_candidate(src, first.offset, first.length);
        const auto b = make_candidate(src, second.offset, second.length);
        const auto delta = a.last_subtitle_ms + b.first_subtitle_ms;
        ASSERT_TRUE(gap_consistent(a, b, r.capture.gaps_ms[0]));
        // Push the reported gap just past the slack.
        const auto bad = b.start_bounds.hi - a.end_bounds.lo + delta + 1;
        EXPECT_TRUE(gap_consistent(a, b, bad - 1));
        EXPECT_FALSE(gap_consistent(a, b, bad));
        const std::int64_t gaps[] = {bad};
        EXPECT_FALSE(has_chain(joint_demodulate(r.capture.clips, gaps, corpus, {}), r.truth));
        ++checked;
    }
    EXPECT_GT(checked, 20);
}

TEST(Joint, DifferentVideosDoNotChain)
{
    const Corpus corpus({make_track("a", {{1000, 2000, 1}, {3000, 4000, 1}}, 10'000),
                         make_track("b", {{1000, 2000, 3}, {3000, 4000, 3}}, 10'000)});
    ToleranceConfig cfg;
    cfg.d0_per_mille = 0;
    const std::vector<Observation> clips{observe({1}, 1500), observe({3}, 1500)};
    const std::int64_t gaps[] = {500};
    const auto r = joint_demodulate(clips, gaps, corpus, cfg);
    EXPECT_TRUE(r.chains.empty());
}

TEST(Joint, ClipWithoutCandidatesIsNamed)
{
    const Corpus corpus({kThree});
    const std::vector<Observation> clips{observe({1}, 1500), observe({3, 3, 3}, 1500)};
    const std::int64_t gaps[] = {500};
    const auto r = joint_demodulate(clips, gaps, corpus, {});
    EXPECT_TRUE(r.chains.empty());
    ASSERT_FALSE(r.diagnostics.empty());
    EXPECT_NE(r.diagnostics.back().find("clip 2"), std::string::npos);
}

TEST(Joint, ArgumentShapes)
{
    const Corpus corpus({kThree});
    const std::vector<Observation> one{observe({1}, 1500)};
    EXPECT_THROW(joint_demodulate(one, {}, corpus, {}), DataError);
    const std::vector<Observation> two{observe({1}, 1500), observe({1}, 1500)};
    EXPECT_THROW(joint_demodulate(two, {}, corpus, {}), DataError);
    const std::int64_t negative[] = {-1};
    EXPECT_THROW(joint_demodulate(two, negative, corpus, {}), DataError);
}

TEST(Seek, TruePairSurvivesBothDirections)
{
    const auto corpus = joint_corpus();
    Rng rng(66);
    int checked = 0;
    for (int round = 0; round < 60; ++round) {
        const auto& src = corpus.tracks()[rng.below(corpus.size())];
        ScenarioSpec sc;
        sc.video_id = src.video_id;
        sc.start_ms = rng.between(600'000, src.duration_ms - 700'000);
        sc.duration_ms = 80'000;
        const auto at = sc.start_ms + rng.between(20'000, 60'000);
        const bool rewind = rng.chance(0.5);
        const auto to = rewind ? at - rng.between(60'000, 500'000) : at + rng.between(60'000, 500'000);
        sc.seeks = {{at, to}};
        Rendered r;
        try {
            r = render_observation(src, sc);
        } catch (const DataError&) {
            continue;
        }
        ASSERT_EQ(r.capture.kind, CaptureKind::seek);
        ASSERT_EQ(*r.capture.seek, rewind ? SeekKind::rewind : SeekKind::fast_forward);
        const auto res = demodulate_with_seek(r.capture.clips[0], r.capture.clips[1], *r.capture.seek, corpus, {});
        ASSERT_TRUE(has_chain(res, r.truth)) << "round " << round;
        ++checked;
    }
    EXPECT_GT(checked, 30);
}

TEST(Seek, OrderingRule)
{
    // Two identical one-line subtitles far apart, so each clip matches both.
    const Corpus corpus({make_track("v", {{10'000, 11'000, 1}, {50'000, 51'000, 1}}, 90'000)});
    ToleranceConfig cfg;
    cfg.d0_per_mille = 0;
    const auto c = observe({1}, 2000);
    auto pairs = [&](SeekKind kind) {
        std::set<std::pair<std::size_t, std::size_t>> out;
        for (const auto& ch : demodulate_with_seek(c, c, kind, corpus, cfg).chains)
            out.emplace(ch.links[0].offset, ch.links[1].offset);
        return out;
    };
    const auto ff = pairs(SeekKind::fast_forward);
    EXPECT_TRUE(ff.count({0, 1}));
    EXPECT_FALSE(ff.count({1, 0}));
    const auto rw = pairs(SeekKind::rewind);
    EXPECT_TRUE(rw.count({1, 0}));
    EXPECT_FALSE(rw.count({0, 1}));
}

TEST(Seek, DifferentVideosOnly)
{
    const Corpus corpus({make_track("a", {{1000, 2000, 1}}, 10'000), make_track("b", {{1000, 2000, 3}}, 10'000)});
    ToleranceConfig cfg;
    cfg.d0_per_mille = 0;
    const auto r = demodulate_with_seek(observe({1}, 1500), observe({3}, 1500), SeekKind::rewind, corpus, cfg);
    EXPECT_TRUE(r.chains.empty());
}
