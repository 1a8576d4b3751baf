#include "subsil/error.hpp"
#include "subsil/matcher.hpp"
#include "subsil/parallel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>

namespace subsil {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Re-index the non-wildcard slots 1..r by class rank.
std::vector<std::uint8_t> rank_labels(std::span<const std::uint8_t> v)
{
    std::array<bool, kMaxLineClass + 1> present{};
    for (auto c : v)
        if (c != kWildcard)
            present[c] = true;
    std::array<std::uint8_t, kMaxLineClass + 1> rank{};
    std::uint8_t next = 0;
    for (LineClass c = 1; c <= kMaxLineClass; ++c)
        if (present[c])
            rank[c] = ++next;
    std::vector<std::uint8_t> out(v.begin(), v.end());
    for (auto& c : out)
        if (c != kWildcard)
            c = rank[c];
    return out;
}

bool within(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, std::int64_t budget)
{
    std::int64_t d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kWildcard || b[i] == kWildcard)
            continue;
        const int diff = int(a[i]) - int(b[i]);
        d2 += diff * diff;
        if (d2 > budget)
            return false;
    }
    return true;
}

// Smallest squared distance over every way of dropping up to `max_removed`
// observed classes and filling up to `max_wild` candidate slots with
// wildcards, restricted to alignments whose edit counts satisfy
// |cand| = |obs| - removed + wildcards. Returns true iff it is <= budget.
class BandedAligner {
public:
    bool aligns(std::span<const std::uint8_t> obs, std::span<const std::uint8_t> cand,
                std::size_t max_wild, std::size_t max_removed, std::int64_t budget)
    {
        const auto m = obs.size();
        const auto L = cand.size();
        const auto R = max_removed + 1;
        cost_.assign((m + 1) * (L + 1) * R, kInf);
        auto at = [&](std::size_t i, std::size_t k, std::size_t r) -> std::int64_t& {
            return cost_[(i * (L + 1) + k) * R + r];
        };

        at(0, 0, 0) = 0;
        for (std::size_t i = 0; i <= m; ++i) {
            const auto k_lo = i > max_removed ? i - max_removed : 0;
            const auto k_hi = std::min(L, i + max_wild);
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                for (std::size_t r = 0; r <= max_removed && r <= i; ++r) {
                    const auto c = at(i, k, r);
                    if (c > budget)
                        continue;
                    const auto matched = i - r;
                    if (k < matched)
                        continue;
                    const auto wild = k - matched;
                    if (i < m && k < L) {
                        const int diff = int(obs[i]) - int(cand[k]);
                        auto& next = at(i + 1, k + 1, r);
                        next = std::min(next, c + diff * diff);
                    }
                    if (i < m && r < max_removed) {
                        auto& next = at(i + 1, k, r + 1);
                        next = std::min(next, c);
                    }
                    if (k < L && wild < max_wild) {
                        auto& next = at(i, k + 1, r);
                        next = std::min(next, c);
                    }
                }
            }
        }
        for (std::size_t r = 0; r <= max_removed; ++r)
            if (at(m, L, r) <= budget)
                return true;
        return false;
    }

private:
    std::vector<std::int64_t> cost_;
};

void check_inputs(const Observation& obs, const Corpus& corpus, const ToleranceConfig& cfg)
{
    obs.validate();
    cfg.validate();
    if (corpus.empty())
        throw DataError("cannot match against an empty corpus");
}

void add_length_diagnostic(MatchResult& result, std::size_t shortest_window, const Corpus& corpus)
{
    if (shortest_window > corpus.max_track_length())
        result.diagnostics.push_back("observation needs at least " + std::to_string(shortest_window)
                                     + " subtitles but the longest track has "
                                     + std::to_string(corpus.max_track_length()));
}

MatchResult merge(std::vector<std::vector<CandidateClip>> per_track)
{
    MatchResult result;
    for (auto& v : per_track)
        for (auto& c : v)
            result.candidates.push_back(std::move(c));
    std::sort(result.candidates.begin(), result.candidates.end());
    result.candidates.erase(std::unique(result.candidates.begin(), result.candidates.end()),
                            result.candidates.end());
    return result;
}

MatchResult correlate_aligned(const Observation& obs, const Corpus& corpus, const ToleranceConfig& cfg,
                              unsigned threads)
{
    const auto T = adjust_for_pause(obs);
    const std::span<const std::uint8_t> observed(obs.sequence.labels);
    const auto m = observed.size();
    const auto D = cfg.max_deletions;
    const auto I = std::min(cfg.max_insertions, m - 1);
    const auto min_len = std::max<std::size_t>(1, m - I);
    const auto max_len = m + D;
    const bool exact = D == 0 && I == 0;

    auto per_track = parallel_map(corpus.size(), threads, [&](std::size_t q) {
        const auto& track = corpus.tracks()[q];
        const auto classes = line_counts(track);
        const std::span<const std::uint8_t> all(classes);
        BandedAligner aligner;
        std::vector<CandidateClip> found;
        for (auto L = min_len; L <= max_len && L <= track.size(); ++L) {
            const auto budget = d0_squared(L, cfg);
            for (std::size_t j = 0; j + L <= track.size(); ++j) {
                if (!feasible_window(track, j, L, T))
                    continue;
                const auto window = all.subspan(j, L);
                const bool ok = exact ? within(observed, window, budget)
                                      : aligner.aligns(observed, window, D, I, budget);
                if (ok)
                    found.push_back(make_candidate(track, j, L));
            }
        }
        return found;
    });

    auto result = merge(std::move(per_track));
    add_length_diagnostic(result, min_len, corpus);
    return result;
}

} // namespace

MatchResult correlate_hypotheses(const Observation& obs, std::span<const Hypothesis> hypotheses,
                                 const Corpus& corpus, const ToleranceConfig& cfg, unsigned threads)
{
    check_inputs(obs, corpus, cfg);
    const auto T = adjust_for_pause(obs);
    const bool ranked = cfg.labels == LabelMode::rank;

    // Distinct aligned vectors grouped by length.
    std::map<std::size_t, std::vector<std::vector<std::uint8_t>>> by_length;
    {
        std::map<std::size_t, std::vector<std::vector<std::uint8_t>>> raw;
        for (const auto& h : hypotheses) {
            auto v = apply_hypothesis(obs.sequence, h);
            if (ranked)
                v = rank_labels(v);
            raw[h.aligned_length].push_back(std::move(v));
        }
        for (auto& [len, vs] : raw) {
            std::sort(vs.begin(), vs.end());
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            by_length[len] = std::move(vs);
        }
    }

    auto per_track = parallel_map(corpus.size(), threads, [&](std::size_t q) {
        const auto& track = corpus.tracks()[q];
        const auto classes = line_counts(track);
        std::vector<CandidateClip> found;
        for (const auto& [L, vectors] : by_length) {
            if (L == 0 || L > track.size())
                continue;
            const auto budget = d0_squared(L, cfg);
            for (std::size_t j = 0; j + L <= track.size(); ++j) {
                if (!feasible_window(track, j, L, T))
                    continue;
                std::span<const std::uint8_t> window(classes.data() + j, L);
                std::vector<std::uint8_t> ranked_window;
                if (ranked) {
                    ranked_window = rank_labels(window);
                    window = ranked_window;
                }
                for (const auto& v : vectors) {
                    if (within(v, window, budget)) {
                        found.push_back(make_candidate(track, j, L));
                        break;
                    }
                }
            }
        }
        return found;
    });

    auto result = merge(std::move(per_track));
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const auto& [len, vs] : by_length)
        shortest = std::min(shortest, len);
    if (!by_length.empty())
        add_length_diagnostic(result, shortest, corpus);
    return result;
}

MatchResult correlate(const Observation& obs, const Corpus& corpus, const ToleranceConfig& cfg,
                      const MatchOptions& opts)
{
    check_inputs(obs, corpus, cfg);
    auto strategy = opts.strategy;
    if (strategy == SearchStrategy::automatic)
        strategy = cfg.labels == LabelMode::absolute ? SearchStrategy::alignment : SearchStrategy::enumerate;
    if (strategy == SearchStrategy::alignment && cfg.labels == LabelMode::rank) {
        if (cfg.max_deletions || cfg.max_insertions)
            throw DataError("rank labels need the enumerating search when deletions or insertions are allowed");
    }

    if (strategy == SearchStrategy::enumerate) {
        const auto hypotheses = tolerate_errors(obs, cfg);
        return correlate_hypotheses(obs, hypotheses, corpus, cfg, opts.threads);
    }
    if (cfg.labels == LabelMode::rank) {
        // Without edits the alignment reduces to one hypothesis.
        const Hypothesis identity{obs.sequence.size(), {}, {}};
        return correlate_hypotheses(obs, std::span(&identity, 1), corpus, cfg, opts.threads);
    }
    return correlate_aligned(obs, corpus, cfg, opts.threads);
}

} // namespace subsil
