#pragma once

#include "subsil/corpus.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subsil {

// Ordered line-count classes of a subtitle or silhouette sequence.
struct ClassSequence {
    std::vector<LineClass> labels;

    ClassSequence() = default;
    // Throws DataError if a label is outside 1..3.
    explicit ClassSequence(std::vector<LineClass> labels);

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    bool operator==(const ClassSequence&) const = default;
};

// Each element replaced by the rank (1..r) of its class among the classes
// present in the sequence.
struct SpatioTemporalVector {
    std::vector<std::uint8_t> l;
    int r = 0;

    bool operator==(const SpatioTemporalVector&) const = default;
};

// Occurrences of each present class, ascending by class.
struct HeightSimilarity {
    std::vector<std::uint32_t> counts;

    bool operator==(const HeightSimilarity&) const = default;
};

enum class Feature { temporal, spatial, spatiotemporal };

std::string_view to_string(Feature f);
Feature parse_feature(std::string_view name);

// Both throw DataError on an empty sequence.
SpatioTemporalVector spatiotemporal_vector(const ClassSequence& seq);
HeightSimilarity height_similarity(const ClassSequence& seq);

inline std::size_t sequence_length(const ClassSequence& seq) { return seq.size(); }

// Opaque key whose equality is the equality of the chosen feature.
std::string feature_key(const ClassSequence& seq, Feature feature);

// C_s / C_0: number of distinct feature values over number of clips.
// Throws DataError on an empty clip list or an empty clip.
double uniqueness_score(std::span<const ClassSequence> clips, Feature feature);

} // namespace subsil
