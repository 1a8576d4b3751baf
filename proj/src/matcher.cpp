#include "subsil/matcher.hpp"
#include "subsil/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace subsil {

namespace {

// t_i^e with t_0^e = 0; i is 1-based.
std::int64_t end_at(const SubtitleTrack& t, std::size_t i)
{
    return i == 0 ? 0 : t.subtitles[i - 1].end_ms;
}

// t_i^s with t_{w+1}^s = video end; i is 1-based.
std::int64_t start_at(const SubtitleTrack& t, std::size_t i)
{
    return i == t.size() + 1 ? t.duration_ms : t.subtitles[i - 1].start_ms;
}

// Visits every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn)
{
    if (k > n)
        return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1))
            --i;
        if (i == 0)
            return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

// Visits every non-decreasing k-tuple over [0, n] (gap choices for k wildcards
// in a sequence of length n).
template <typename Fn>
void for_each_multiset(std::size_t n, std::size_t k, Fn&& fn)
{
    std::vector<std::size_t> gaps(k, 0);
    while (true) {
        fn(gaps);
        std::size_t i = k;
        while (i > 0 && gaps[i - 1] == n)
            --i;
        if (i == 0)
            return;
        ++gaps[i - 1];
        for (std::size_t j = i; j < k; ++j)
            gaps[j] = gaps[i - 1];
    }
}

} // namespace

void Observation::validate() const
{
    if (sequence.empty())
        throw DataError("observation has no silhouettes");
    if (duration_ms <= 0)
        throw DataError("observation duration must be positive");
    auto sorted = pauses;
    std::sort(sorted.begin(), sorted.end(), [](const Pause& a, const Pause& b) {
        return a.offset_ms < b.offset_ms;
    });
    std::int64_t cursor = 0;
    for (const auto& p : sorted) {
        if (p.length_ms < 0 || p.offset_ms < 0)
            throw DataError("pause offsets and lengths must be non-negative");
        if (p.offset_ms < cursor)
            throw DataError("pauses overlap");
        if (p.offset_ms + p.length_ms > duration_ms)
            throw DataError("pause extends past the end of the recording");
        cursor = p.offset_ms + p.length_ms;
    }
    if (adjust_for_pause(*this) <= 0)
        throw DataError("pauses cover the whole recording");
}

std::int64_t adjust_for_pause(const Observation& obs)
{
    std::int64_t paused = 0;
    for (const auto& p : obs.pauses)
        paused += p.length_ms;
    if (paused > obs.duration_ms)
        throw DataError("total pause length exceeds the recording duration");
    return obs.duration_ms - paused;
}

CandidateClip make_candidate(const SubtitleTrack& track, std::size_t offset, std::size_t length)
{
    if (length == 0 || offset + length > track.size())
        throw DataError("window out of range for track '" + track.video_id + "'");
    CandidateClip c;
    c.video_id = track.video_id;
    c.title = track.title;
    c.offset = offset;
    c.length = length;
    c.start_bounds = {end_at(track, offset), end_at(track, offset + 1)};
    c.end_bounds = {start_at(track, offset + length), start_at(track, offset + length + 1)};
    c.first_subtitle_ms = track.subtitles[offset].duration_ms();
    c.last_subtitle_ms = track.subtitles[offset + length - 1].duration_ms();
    return c;
}

std::string_view to_string(LabelMode m)
{
    return m == LabelMode::absolute ? "absolute" : "rank";
}

LabelMode parse_label_mode(std::string_view name)
{
    if (name == "absolute")
        return LabelMode::absolute;
    if (name == "rank")
        return LabelMode::rank;
    throw DataError("unknown label mode '" + std::string(name) + "'");
}

void ToleranceConfig::validate() const
{
    if (max_deletions > kMaxEdits || max_insertions > kMaxEdits)
        throw DataError("deletion/insertion budgets are limited to " + std::to_string(kMaxEdits));
    if (d0_per_mille > 1000)
        throw DataError("d0 fraction must be within [0, 1]");
}

std::int64_t d0_squared(std::size_t aligned_length, const ToleranceConfig& cfg)
{
    const auto num = static_cast<std::int64_t>(cfg.d0_per_mille) * static_cast<std::int64_t>(aligned_length);
    return (num + 999) / 1000;
}

bool feasible_window(const SubtitleTrack& track, std::size_t offset, std::size_t length,
                     std::int64_t duration_ms)
{
    if (length == 0 || offset + length > track.size())
        throw DataError("window " + std::to_string(offset) + "+" + std::to_string(length)
                        + " out of range for track '" + track.video_id + "'");
    const auto j = offset;
    const auto m = length;
    return start_at(track, j + m + 1) - end_at(track, j) >= duration_ms
        && start_at(track, j + m) - end_at(track, j + 1) <= duration_ms;
}

std::int64_t squared_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    if (a.size() != b.size())
        throw DataError("vector length mismatch: " + std::to_string(a.size()) + " vs "
                        + std::to_string(b.size()));
    std::int64_t d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kWildcard || b[i] == kWildcard)
            continue;
        const int diff = int(a[i]) - int(b[i]);
        d2 += diff * diff;
    }
    return d2;
}

bool match_vectors(std::span<const std::uint8_t> observed,
                   std::span<const std::uint8_t> candidate,
                   const ToleranceConfig& cfg)
{
    return squared_distance(observed, candidate) <= d0_squared(observed.size(), cfg);
}

bool match_vectors(const SpatioTemporalVector& observed,
                   const SpatioTemporalVector& candidate,
                   const ToleranceConfig& cfg)
{
    return match_vectors(std::span<const std::uint8_t>(observed.l), std::span<const std::uint8_t>(candidate.l), cfg);
}

std::vector<Hypothesis> tolerate_errors(const Observation& obs, const ToleranceConfig& cfg)
{
    cfg.validate();
    const auto m = obs.sequence.size();

    std::vector<std::pair<std::size_t, std::size_t>> budgets;  // (deletions, insertions)
    budgets.emplace_back(0, 0);
    for (std::size_t d = 1; d <= cfg.max_deletions; ++d)
        budgets.emplace_back(d, 0);
    for (std::size_t i = 1; i <= cfg.max_insertions; ++i)
        budgets.emplace_back(0, i);
    for (std::size_t d = 1; d <= cfg.max_deletions; ++d)
        for (std::size_t i = 1; i <= cfg.max_insertions; ++i)
            budgets.emplace_back(d, i);

    std::vector<Hypothesis> out;
    for (auto [d, i] : budgets) {
        // At least one observed silhouette has to be real.
        if (i >= m)
            continue;
        const auto reduced = m - i;
        for_each_combination(m, i, [&](const std::vector<std::size_t>& removed) {
            for_each_multiset(reduced, d, [&](const std::vector<std::size_t>& gaps) {
                Hypothesis h;
                h.aligned_length = reduced + d;
                h.removed = removed;
                h.wildcards.reserve(d);
                for (std::size_t k = 0; k < d; ++k)
                    h.wildcards.push_back(gaps[k] + k);
                out.push_back(std::move(h));
            });
        });
    }
    return out;
}

std::vector<std::uint8_t> apply_hypothesis(const ClassSequence& seq, const Hypothesis& h)
{
    std::vector<std::uint8_t> kept;
    kept.reserve(seq.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (r < h.removed.size() && h.removed[r] == i) {
            ++r;
            continue;
        }
        kept.push_back(seq.labels[i]);
    }
    if (r != h.removed.size() || kept.size() + h.wildcards.size() != h.aligned_length)
        throw DataError("hypothesis does not fit the observation");

    std::vector<std::uint8_t> aligned;
    aligned.reserve(h.aligned_length);
    std::size_t w = 0;
    std::size_t k = 0;
    for (std::size_t pos = 0; pos < h.aligned_length; ++pos) {
        if (w < h.wildcards.size() && h.wildcards[w] == pos) {
            aligned.push_back(kWildcard);
            ++w;
        } else {
            aligned.push_back(kept[k++]);
        }
    }
    return aligned;
}

std::size_t MatchResult::title_count() const
{
    std::set<std::string_view> titles;
    for (const auto& c : candidates)
        titles.insert(c.video_id);
    return titles.size();
}

std::size_t ChainResult::title_count() const
{
    std::set<std::string_view> titles;
    for (const auto& c : chains)
        titles.insert(c.video_id());
    return titles.size();
}

std::string_view to_string(SeekKind k)
{
    return k == SeekKind::rewind ? "rewind" : "fast_forward";
}

SeekKind parse_seek_kind(std::string_view name)
{
    if (name == "rewind")
        return SeekKind::rewind;
    if (name == "fast_forward" || name == "fast-forward")
        return SeekKind::fast_forward;
    throw DataError("unknown seek kind '" + std::string(name) + "'");
}

} // namespace subsil
