#include "subsil/error.hpp"
#include "subsil/matcher.hpp"

#include <cmath>
#include <map>

namespace subsil {

namespace {

using ByVideo = std::map<std::string_view, std::vector<const CandidateClip*>>;

ByVideo group_by_video(const MatchResult& r)
{
    ByVideo out;
    for (const auto& c : r.candidates)
        out[c.video_id].push_back(&c);
    return out;
}

// Per-clip candidates; returns false (with a diagnostic) if a clip matched nothing.
bool match_clips(std::span<const Observation> clips, const Corpus& corpus, const ToleranceConfig& cfg,
                 const MatchOptions& opts, std::vector<MatchResult>& out, ChainResult& result)
{
    out.clear();
    for (std::size_t k = 0; k < clips.size(); ++k) {
        out.push_back(correlate(clips[k], corpus, cfg, opts));
        for (const auto& d : out.back().diagnostics)
            result.diagnostics.push_back("clip " + std::to_string(k + 1) + ": " + d);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k].candidates.empty()) {
            result.diagnostics.push_back("clip " + std::to_string(k + 1) + " has no candidates");
            return false;
        }
    }
    return true;
}

} // namespace

bool gap_consistent(const CandidateClip& earlier, const CandidateClip& later, std::int64_t gap_ms)
{
    const auto delta = earlier.last_subtitle_ms + later.first_subtitle_ms;
    const auto shortest = later.start_bounds.lo - earlier.end_bounds.hi;
    const auto longest = later.start_bounds.hi - earlier.end_bounds.lo;
    return gap_ms >= shortest - delta && gap_ms <= longest + delta;
}

ChainResult joint_demodulate(std::span<const Observation> clips, std::span<const std::int64_t> gaps_ms,
                             const Corpus& corpus, const ToleranceConfig& cfg, const MatchOptions& opts)
{
    if (clips.size() < 2)
        throw DataError("joint demodulation needs at least two clips");
    if (gaps_ms.size() + 1 != clips.size())
        throw DataError("expected " + std::to_string(clips.size() - 1) + " inter-clip gaps, got "
                        + std::to_string(gaps_ms.size()));
    for (auto g : gaps_ms)
        if (g < 0)
            throw DataError("inter-clip gaps must be non-negative");

    ChainResult result;
    std::vector<MatchResult> per_clip;
    if (!match_clips(clips, corpus, cfg, opts, per_clip, result))
        return result;

    for (const auto& c : per_clip[0].candidates)
        result.chains.push_back({{c}});

    for (std::size_t j = 1; j < clips.size(); ++j) {
        const auto later = group_by_video(per_clip[j]);
        std::vector<CandidateChain> extended;
        for (const auto& chain : result.chains) {
            const auto& tail = chain.links.back();
            auto it = later.find(tail.video_id);
            if (it == later.end())
                continue;
            for (const auto* next : it->second) {
                if (!gap_consistent(tail, *next, gaps_ms[j - 1]))
                    continue;
                auto grown = chain;
                grown.links.push_back(*next);
                extended.push_back(std::move(grown));
            }
        }
        result.chains = std::move(extended);
        if (result.chains.empty()) {
            result.diagnostics.push_back("no chain survives clip " + std::to_string(j + 1));
            break;
        }
    }
    return result;
}

ChainResult demodulate_with_seek(const Observation& first, const Observation& second, SeekKind kind,
                                 const Corpus& corpus, const ToleranceConfig& cfg, const MatchOptions& opts)
{
    ChainResult result;
    const Observation clips[] = {first, second};
    std::vector<MatchResult> per_clip;
    if (!match_clips(clips, corpus, cfg, opts, per_clip, result))
        return result;

    const auto later = group_by_video(per_clip[1]);
    for (const auto& g1 : per_clip[0].candidates) {
        auto it = later.find(g1.video_id);
        if (it == later.end())
            continue;
        const double end1 = g1.end_bounds.midpoint();
        for (const auto* g2 : it->second) {
            const double start2 = g2->start_bounds.midpoint();
            const bool ordered = kind == SeekKind::rewind ? start2 < end1 : start2 > end1;
            if (ordered)
                result.chains.push_back({{g1, *g2}});
        }
    }
    return result;
}

} // namespace subsil
