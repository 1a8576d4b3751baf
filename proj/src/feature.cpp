#include "subsil/feature.hpp"
#include "subsil/error.hpp"

#include <array>
#include <unordered_set>

namespace subsil {

namespace {

void require_non_empty(const ClassSequence& seq)
{
    if (seq.empty())
        throw DataError("feature extraction needs a non-empty sequence");
}

// Rank of each class 1..3 among the present classes; 0 for absent ones.
std::array<std::uint8_t, kMaxLineClass + 1> class_ranks(const ClassSequence& seq)
{
    std::array<bool, kMaxLineClass + 1> present{};
    for (auto c : seq.labels)
        present[c] = true;
    std::array<std::uint8_t, kMaxLineClass + 1> rank{};
    std::uint8_t next = 0;
    for (LineClass c = 1; c <= kMaxLineClass; ++c)
        if (present[c])
            rank[c] = ++next;
    return rank;
}

} // namespace

ClassSequence::ClassSequence(std::vector<LineClass> l) : labels(std::move(l))
{
    for (auto c : labels)
        if (c < 1 || c > kMaxLineClass)
            throw DataError("class label " + std::to_string(int(c)) + " outside 1..3");
}

std::string_view to_string(Feature f)
{
    switch (f) {
    case Feature::temporal:
        return "temporal";
    case Feature::spatial:
        return "spatial";
    case Feature::spatiotemporal:
        return "spatiotemporal";
    }
    return "?";
}

Feature parse_feature(std::string_view name)
{
    if (name == "temporal" || name == "Tp")
        return Feature::temporal;
    if (name == "spatial" || name == "Sp")
        return Feature::spatial;
    if (name == "spatiotemporal" || name == "St")
        return Feature::spatiotemporal;
    throw DataError("unknown feature '" + std::string(name) + "'");
}

SpatioTemporalVector spatiotemporal_vector(const ClassSequence& seq)
{
    require_non_empty(seq);
    const auto rank = class_ranks(seq);
    SpatioTemporalVector v;
    v.l.reserve(seq.size());
    for (auto c : seq.labels) {
        v.l.push_back(rank[c]);
        v.r = std::max<int>(v.r, rank[c]);
    }
    return v;
}

HeightSimilarity height_similarity(const ClassSequence& seq)
{
    require_non_empty(seq);
    std::array<std::uint32_t, kMaxLineClass + 1> counts{};
    for (auto c : seq.labels)
        ++counts[c];
    HeightSimilarity hs;
    for (LineClass c = 1; c <= kMaxLineClass; ++c)
        if (counts[c])
            hs.counts.push_back(counts[c]);
    return hs;
}

std::string feature_key(const ClassSequence& seq, Feature feature)
{
    switch (feature) {
    case Feature::temporal:
        return std::to_string(sequence_length(seq));
    case Feature::spatial: {
        std::string key;
        for (auto c : height_similarity(seq).counts)
            key += std::to_string(c) + ',';
        return key;
    }
    case Feature::spatiotemporal: {
        const auto v = spatiotemporal_vector(seq);
        return std::string(v.l.begin(), v.l.end());
    }
    }
    throw DataError("unknown feature");
}

double uniqueness_score(std::span<const ClassSequence> clips, Feature feature)
{
    if (clips.empty())
        throw DataError("uniqueness score needs at least one clip");
    std::unordered_set<std::string> classes;
    classes.reserve(clips.size());
    for (const auto& clip : clips) {
        require_non_empty(clip);
        classes.insert(feature_key(clip, feature));
    }
    return static_cast<double>(classes.size()) / static_cast<double>(clips.size());
}

} // namespace subsil
