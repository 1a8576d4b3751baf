#pragma once

// Builders and brute-force oracles shared by the test binaries. Nothing here
// calls into the matcher's search code.

#include "subsil/corpus.hpp"
#include "subsil/matcher.hpp"
#include "subsil/simulate.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace subsil::test {

struct Cue {
    std::int64_t start_ms;
    std::int64_t end_ms;
    int lines;
};

inline SubtitleTrack make_track(std::string id, const std::vector<Cue>& cues, std::int64_t duration_ms)
{
    SubtitleTrack t;
    t.video_id = id;
    t.title = "Title " + id;
    t.duration_ms = duration_ms;
    std::uint32_t index = 1;
    for (const auto& c : cues) {
        Subtitle s;
        s.index = index++;
        s.start_ms = c.start_ms;
        s.end_ms = c.end_ms;
        for (int k = 0; k < c.lines; ++k)
            s.lines.push_back("line " + std::to_string(k + 1) + " of cue " + std::to_string(index - 1));
        t.subtitles.push_back(std::move(s));
    }
    return t;
}

// Small random track. Gaps are sometimes zero so subtitles touch, which is
// where the boundary rules matter.
inline SubtitleTrack random_track(Rng& rng, std::string id, std::size_t n, std::int64_t max_gap_ms = 6000)
{
    std::vector<Cue> cues;
    std::int64_t t = rng.between(0, 3000);
    for (std::size_t i = 0; i < n; ++i) {
        const auto shown = rng.between(300, 6000);
        const int lines = static_cast<int>(1 + rng.below(3));
        cues.push_back({t, t + shown, lines});
        t += shown;
        if (!rng.chance(0.15))
            t += rng.between(0, max_gap_ms);
    }
    return make_track(std::move(id), cues, t + rng.between(0, 8000));
}

using WindowKey = std::tuple<std::string, std::size_t, std::size_t>;  // video, offset, length

// Windows some integer-ms recording [a, a + T] inside the video can show.
// A subtitle is definitely visible when it overlaps the recording with
// positive length and possibly visible when it merely touches it; a window is
// any contiguous run containing every definitely visible subtitle and only
// possibly visible ones.
inline std::set<WindowKey> brute_force_windows(const SubtitleTrack& track, std::int64_t T)
{
    std::set<WindowKey> out;
    const auto& s = track.subtitles;
    const auto n = s.size();
    for (std::int64_t a = 0; a + T <= track.duration_ms; ++a) {
        const auto b = a + T;
        std::size_t p_lo = n, p_hi = 0, d_lo = n, d_hi = 0;
        bool any_p = false, any_d = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (s[i].start_ms > b)
                break;
            if (s[i].end_ms < a)
                continue;
            if (!any_p)
                p_lo = i;
            p_hi = i;
            any_p = true;
            if (s[i].start_ms < b && s[i].end_ms > a) {
                if (!any_d)
                    d_lo = i;
                d_hi = i;
                any_d = true;
            }
        }
        if (!any_p)
            continue;
        for (auto lo = p_lo; lo <= p_hi; ++lo)
            for (auto hi = lo; hi <= p_hi; ++hi)
                if (!any_d || (lo <= d_lo && hi >= d_hi))
                    out.emplace(track.video_id, lo, hi - lo + 1);
    }
    return out;
}

// Same scan, but each start only looks at the few subtitles near it; used
// for long tracks.
inline std::set<WindowKey> brute_force_windows_fast(const SubtitleTrack& track, std::int64_t T)
{
    std::set<WindowKey> out;
    const auto& s = track.subtitles;
    const auto n = s.size();
    std::size_t first = 0;  // first subtitle with end >= a
    std::size_t last = 0;   // one past the last subtitle with start <= a + T
    for (std::int64_t a = 0; a + T <= track.duration_ms; ++a) {
        const auto b = a + T;
        while (first < n && s[first].end_ms < a)
            ++first;
        while (last < n && s[last].start_ms <= b)
            ++last;
        if (first >= last)
            continue;
        std::size_t d_lo = n, d_hi = 0;
        bool any_d = false;
        for (auto i = first; i < last; ++i) {
            if (s[i].start_ms < b && s[i].end_ms > a) {
                if (!any_d)
                    d_lo = i;
                d_hi = i;
                any_d = true;
            }
        }
        for (auto lo = first; lo < last; ++lo) {
            if (any_d && lo > d_lo)
                break;
            for (auto hi = any_d ? std::max(lo, d_hi) : lo; hi < last; ++hi)
                out.emplace(track.video_id, lo, hi - lo + 1);
        }
    }
    return out;
}

inline std::int64_t oracle_budget(std::size_t aligned_length, std::uint32_t per_mille)
{
    // ceil(per_mille * L / 1000) without floating point.
    const auto num = static_cast<std::int64_t>(per_mille) * static_cast<std::int64_t>(aligned_length);
    return num / 1000 + (num % 1000 != 0);
}

inline std::int64_t plain_sq_distance(const std::vector<int>& a, const std::vector<int>& b)
{
    std::int64_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

template <typename Fn>
void each_subset(std::size_t n, std::size_t k, std::vector<std::size_t>& cur, std::size_t from, Fn&& fn)
{
    if (cur.size() == k) {
        fn(cur);
        return;
    }
    for (auto i = from; i < n; ++i) {
        cur.push_back(i);
        each_subset(n, k, cur, i + 1, fn);
        cur.pop_back();
    }
}

inline std::vector<int> without(const std::vector<int>& v, const std::vector<std::size_t>& drop)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::binary_search(drop.begin(), drop.end(), i))
            out.push_back(v[i]);
    return out;
}

// An observation explains a window when dropping at most `max_removed`
// observed silhouettes and at most `max_missing` window subtitles leaves two
// equal-length sequences within ceil(per_mille * |window| / 1000).
inline bool oracle_explains(const std::vector<int>& observed, const std::vector<int>& window,
                            std::size_t max_missing, std::size_t max_removed, std::uint32_t per_mille)
{
    const auto budget = oracle_budget(window.size(), per_mille);
    for (std::size_t r = 0; r <= max_removed && r < observed.size(); ++r) {
        bool found = false;
        std::vector<std::size_t> rs;
        each_subset(observed.size(), r, rs, 0, [&](const std::vector<std::size_t>& removed) {
            if (found)
                return;
            const auto kept = without(observed, removed);
            if (kept.size() > window.size() || window.size() - kept.size() > max_missing)
                return;
            std::vector<std::size_t> ws;
            each_subset(window.size(), window.size() - kept.size(), ws, 0, [&](const std::vector<std::size_t>& missing) {
                if (!found && plain_sq_distance(kept, without(window, missing)) <= budget)
                    found = true;
            });
        });
        if (found)
            return true;
    }
    return false;
}

inline std::vector<int> as_ints(const std::vector<LineClass>& v)
{
    return {v.begin(), v.end()};
}

inline std::vector<int> window_ints(const SubtitleTrack& track, std::size_t offset, std::size_t length)
{
    std::vector<int> out;
    for (auto i = offset; i < offset + length; ++i)
        out.push_back(line_count(track.subtitles[i]));
    return out;
}

// Candidate set by exhaustive scan: every window some recording of the
// observation's playback length shows, filtered by oracle_explains.
inline std::set<WindowKey> oracle_candidates(const Observation& obs, const Corpus& corpus,
                                             const ToleranceConfig& cfg, bool fast = true)
{
    std::int64_t T = obs.duration_ms;
    for (const auto& p : obs.pauses)
        T -= p.length_ms;
    const auto observed = as_ints(obs.sequence.labels);
    std::set<WindowKey> out;
    for (const auto& track : corpus.tracks()) {
        const auto windows = fast ? brute_force_windows_fast(track, T) : brute_force_windows(track, T);
        for (const auto& w : windows) {
            const auto& [id, off, len] = w;
            if (len + cfg.max_insertions < observed.size() || len > observed.size() + cfg.max_deletions)
                continue;
            if (oracle_explains(observed, window_ints(track, off, len), cfg.max_deletions, cfg.max_insertions,
                                cfg.d0_per_mille))
                out.insert(w);
        }
    }
    return out;
}

inline std::set<WindowKey> keys_of(const MatchResult& r)
{
    std::set<WindowKey> out;
    for (const auto& c : r.candidates)
        out.emplace(c.video_id, c.offset, c.length);
    return out;
}

} // namespace subsil::test
