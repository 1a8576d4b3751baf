#include "subsil/io.hpp"
#include "subsil/error.hpp"

#include <algorithm>

namespace subsil {

namespace {

constexpr std::string_view kObservationFormat = "subsil-observation";
constexpr std::string_view kTruthFormat = "subsil-truth";

std::int64_t get_int(const Json& j, std::string_view key, std::string_view where)
{
    const auto it = j.find(key);
    if (it == j.end())
        throw DataError(std::string(where) + ": missing '" + std::string(key) + "'");
    if (!it->is_number_integer())
        throw DataError(std::string(where) + ": '" + std::string(key) + "' must be an integer");
    return it->get<std::int64_t>();
}

std::int64_t get_int(const Json& j, std::string_view key, std::string_view where, std::int64_t fallback)
{
    return j.contains(key) ? get_int(j, key, where) : fallback;
}

std::size_t get_count(const Json& j, std::string_view key, std::string_view where, std::size_t fallback)
{
    const auto v = get_int(j, key, where, static_cast<std::int64_t>(fallback));
    if (v < 0)
        throw DataError(std::string(where) + ": '" + std::string(key) + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

ClassSequence classes_from_json(const Json& j, std::string_view where)
{
    if (!j.is_array())
        throw DataError(std::string(where) + ": 'classes' must be an array");
    std::vector<LineClass> labels;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > kMaxLineClass)
            throw DataError(std::string(where) + ": classes must be integers in 1..3");
        labels.push_back(static_cast<LineClass>(v.get<int>()));
    }
    return ClassSequence(std::move(labels));
}

Json pauses_to_json(const std::vector<Pause>& pauses)
{
    Json arr = Json::array();
    for (const auto& p : pauses)
        arr.push_back({{"offset_ms", p.offset_ms}, {"length_ms", p.length_ms}});
    return arr;
}

std::vector<Pause> pauses_from_json(const Json& j, std::string_view where)
{
    std::vector<Pause> out;
    if (!j.is_array())
        throw DataError(std::string(where) + ": 'pauses' must be an array");
    for (const auto& p : j) {
        check_keys(p, {"offset_ms", "length_ms"}, where);
        out.push_back({get_int(p, "offset_ms", where), get_int(p, "length_ms", where)});
    }
    return out;
}

Json edits_to_json(const EditRecord& e)
{
    return {{"substituted", e.substituted}, {"deleted", e.deleted}, {"inserted", e.inserted}};
}

} // namespace

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!j.is_object())
        throw DataError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw DataError(std::string(where) + ": unknown key '" + key + "'");
    }
}

Json to_json(const ToleranceConfig& cfg)
{
    return {{"d0_per_mille", cfg.d0_per_mille},
            {"max_deletions", cfg.max_deletions},
            {"max_insertions", cfg.max_insertions},
            {"labels", std::string(to_string(cfg.labels))}};
}

ToleranceConfig tolerance_from_json(const Json& j, ToleranceConfig base)
{
    constexpr std::string_view where = "tolerance";
    check_keys(j, {"d0_per_mille", "max_deletions", "max_insertions", "labels"}, where);
    base.d0_per_mille = static_cast<unsigned>(get_count(j, "d0_per_mille", where, base.d0_per_mille));
    base.max_deletions = get_count(j, "max_deletions", where, base.max_deletions);
    base.max_insertions = get_count(j, "max_insertions", where, base.max_insertions);
    if (j.contains("labels"))
        base.labels = parse_label_mode(j.at("labels").get<std::string>());
    base.validate();
    return base;
}

Json to_json(const SeparationConfig& cfg)
{
    return {{"iou_threshold", cfg.iou_threshold}, {"t0", cfg.t0}};
}

SeparationConfig separation_from_json(const Json& j, SeparationConfig base)
{
    check_keys(j, {"iou_threshold", "t0"}, "separation");
    base.iou_threshold = j.value("iou_threshold", base.iou_threshold);
    base.t0 = j.value("t0", base.t0);
    base.validate();
    return base;
}

Json to_json(const ErrorSpec& spec)
{
    return {{"substitutions", spec.substitutions},
            {"shift", std::string(to_string(spec.shift))},
            {"deletions", spec.deletions},
            {"insertions", spec.insertions},
            {"seed", spec.seed}};
}

ErrorSpec errors_from_json(const Json& j)
{
    constexpr std::string_view where = "errors";
    check_keys(j, {"substitutions", "shift", "deletions", "insertions", "seed"}, where);
    ErrorSpec s;
    s.substitutions = get_count(j, "substitutions", where, 0);
    s.deletions = get_count(j, "deletions", where, 0);
    s.insertions = get_count(j, "insertions", where, 0);
    if (j.contains("shift"))
        s.shift = parse_shift_rule(j.at("shift").get<std::string>());
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            throw DataError("errors: 'seed' must be a non-negative integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    return s;
}

Json to_json(const ScenarioSpec& spec)
{
    Json seeks = Json::array();
    for (const auto& s : spec.seeks)
        seeks.push_back({{"at_ms", s.at_ms}, {"to_ms", s.to_ms}});
    Json clips = Json::array();
    for (const auto& c : spec.clips)
        clips.push_back({{"gap_ms", c.gap_ms}, {"duration_ms", c.duration_ms}});
    return {{"video_id", spec.video_id},
            {"start_ms", spec.start_ms},
            {"duration_ms", spec.duration_ms},
            {"pauses", pauses_to_json(spec.pauses)},
            {"seeks", seeks},
            {"clips", clips},
            {"min_overlap_ms", spec.min_overlap_ms}};
}

ScenarioSpec scenario_from_json(const Json& j)
{
    constexpr std::string_view where = "scenario";
    check_keys(j, {"video_id", "start_ms", "duration_ms", "pauses", "seeks", "clips", "min_overlap_ms"}, where);
    ScenarioSpec s;
    if (!j.contains("video_id") || !j.at("video_id").is_string())
        throw DataError("scenario: missing string 'video_id'");
    s.video_id = j.at("video_id").get<std::string>();
    s.start_ms = get_int(j, "start_ms", where);
    s.duration_ms = get_int(j, "duration_ms", where);
    s.min_overlap_ms = get_int(j, "min_overlap_ms", where, 0);
    if (j.contains("pauses"))
        s.pauses = pauses_from_json(j.at("pauses"), where);
    for (const auto& k : j.value("seeks", Json::array())) {
        check_keys(k, {"at_ms", "to_ms"}, "scenario seek");
        s.seeks.push_back({get_int(k, "at_ms", where), get_int(k, "to_ms", where)});
    }
    for (const auto& c : j.value("clips", Json::array())) {
        check_keys(c, {"gap_ms", "duration_ms"}, "scenario clip");
        s.clips.push_back({get_int(c, "gap_ms", where), get_int(c, "duration_ms", where)});
    }
    return s;
}

Json to_json(const Capture& capture)
{
    Json clips = Json::array();
    for (const auto& o : capture.clips) {
        clips.push_back({{"classes", o.sequence.labels},
                         {"duration_ms", o.duration_ms},
                         {"pauses", pauses_to_json(o.pauses)}});
    }
    Json j = {{"format", kObservationFormat},
              {"version", 1},
              {"kind", std::string(to_string(capture.kind))},
              {"clips", clips}};
    if (capture.kind == CaptureKind::joint)
        j["gaps_ms"] = capture.gaps_ms;
    if (capture.seek)
        j["seek"] = std::string(to_string(*capture.seek));
    return j;
}

Capture capture_from_json(const Json& j)
{
    constexpr std::string_view where = "observation";
    check_keys(j, {"format", "version", "kind", "clips", "gaps_ms", "seek", "config"}, where);
    if (j.value("format", std::string()) != kObservationFormat)
        throw DataError("observation: not a subsil-observation file");
    Capture c;
    c.kind = parse_capture_kind(j.value("kind", std::string("single")));
    const auto& clips = j.at("clips");
    if (!clips.is_array() || clips.empty())
        throw DataError("observation: 'clips' must be a non-empty array");
    for (const auto& o : clips) {
        check_keys(o, {"classes", "duration_ms", "pauses"}, where);
        Observation obs;
        obs.sequence = classes_from_json(o.at("classes"), where);
        obs.duration_ms = get_int(o, "duration_ms", where);
        if (o.contains("pauses"))
            obs.pauses = pauses_from_json(o.at("pauses"), where);
        obs.validate();
        c.clips.push_back(std::move(obs));
    }
    if (j.contains("gaps_ms")) {
        for (const auto& g : j.at("gaps_ms")) {
            if (!g.is_number_integer())
                throw DataError("observation: gaps must be integers");
            c.gaps_ms.push_back(g.get<std::int64_t>());
        }
    }
    if (j.contains("seek"))
        c.seek = parse_seek_kind(j.at("seek").get<std::string>());

    switch (c.kind) {
    case CaptureKind::single:
        if (c.clips.size() != 1)
            throw DataError("observation: a single capture holds exactly one clip");
        break;
    case CaptureKind::joint:
        if (c.clips.size() < 2 || c.gaps_ms.size() + 1 != c.clips.size())
            throw DataError("observation: a joint capture needs M >= 2 clips and M-1 gaps");
        break;
    case CaptureKind::seek:
        if (c.clips.size() != 2 || !c.seek)
            throw DataError("observation: a seek capture needs two clips and a seek kind");
        break;
    }
    return c;
}

Json to_json(const GroundTruth& truth)
{
    Json clips = Json::array();
    for (const auto& c : truth.clips) {
        clips.push_back({{"offset", c.offset},
                         {"length", c.length},
                         {"play_start_ms", c.play_start_ms},
                         {"play_end_ms", c.play_end_ms},
                         {"edits", edits_to_json(c.edits)}});
    }
    return {{"format", kTruthFormat}, {"version", 1}, {"video_id", truth.video_id}, {"clips", clips}};
}

GroundTruth truth_from_json(const Json& j)
{
    constexpr std::string_view where = "ground truth";
    check_keys(j, {"format", "version", "video_id", "clips", "config"}, where);
    if (j.value("format", std::string()) != kTruthFormat)
        throw DataError("not a subsil-truth file");
    GroundTruth t;
    t.video_id = j.at("video_id").get<std::string>();
    for (const auto& c : j.at("clips")) {
        ClipTruth ct;
        ct.offset = get_count(c, "offset", where, 0);
        ct.length = get_count(c, "length", where, 0);
        ct.play_start_ms = get_int(c, "play_start_ms", where);
        ct.play_end_ms = get_int(c, "play_end_ms", where);
        const auto& e = c.at("edits");
        ct.edits.substituted = e.at("substituted").get<std::vector<std::size_t>>();
        ct.edits.deleted = e.at("deleted").get<std::vector<std::size_t>>();
        ct.edits.inserted = e.at("inserted").get<std::vector<std::size_t>>();
        t.clips.push_back(std::move(ct));
    }
    return t;
}

Json to_json(const CandidateClip& c)
{
    return {{"video_id", c.video_id},
            {"title", c.title},
            {"offset", c.offset},
            {"length", c.length},
            {"first_subtitle", c.offset + 1},
            {"last_subtitle", c.offset + c.length},
            {"start_bounds_ms", {c.start_bounds.lo, c.start_bounds.hi}},
            {"end_bounds_ms", {c.end_bounds.lo, c.end_bounds.hi}}};
}

Json to_json(const MatchResult& r)
{
    Json cands = Json::array();
    for (const auto& c : r.candidates)
        cands.push_back(to_json(c));
    return {{"clip_count", r.candidates.size()},
            {"title_count", r.title_count()},
            {"candidates", cands},
            {"diagnostics", r.diagnostics}};
}

Json to_json(const ChainResult& r)
{
    Json chains = Json::array();
    for (const auto& ch : r.chains) {
        Json links = Json::array();
        for (const auto& c : ch.links)
            links.push_back(to_json(c));
        chains.push_back({{"video_id", ch.video_id()}, {"links", links}});
    }
    return {{"chain_count", r.chains.size()},
            {"title_count", r.title_count()},
            {"chains", chains},
            {"diagnostics", r.diagnostics}};
}

Json parse_json(std::string_view text, std::string_view source)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw DataError(std::string(source) + ": invalid JSON (" + e.what() + ")");
    }
}

} // namespace subsil
