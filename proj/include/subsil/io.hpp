#pragma once

#include "subsil/matcher.hpp"
#include "subsil/silhouette.hpp"
#include "subsil/simulate.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string_view>

namespace subsil {

using Json = nlohmann::json;

// Throws DataError naming `where` if `j` is not an object or carries a key
// outside `allowed`.
void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

Json to_json(const ToleranceConfig& cfg);
ToleranceConfig tolerance_from_json(const Json& j, ToleranceConfig base = {});

Json to_json(const SeparationConfig& cfg);
SeparationConfig separation_from_json(const Json& j, SeparationConfig base = {});

Json to_json(const ErrorSpec& spec);
ErrorSpec errors_from_json(const Json& j);

Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j);

// Observation file: {"format": "subsil-observation", "kind", "clips", ...}.
Json to_json(const Capture& capture);
Capture capture_from_json(const Json& j);

Json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j);

Json to_json(const CandidateClip& c);
Json to_json(const MatchResult& r);
Json to_json(const ChainResult& r);

// Parses text, turning JSON syntax errors into DataError mentioning `source`.
Json parse_json(std::string_view text, std::string_view source);

} // namespace subsil
