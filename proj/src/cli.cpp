#include "subsil/cli.hpp"
#include "subsil/error.hpp"
#include "subsil/frame_dump.hpp"
#include "subsil/io.hpp"
#include "subsil/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace subsil {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct CorpusArgs {
    std::string index;
    std::string dir;
    std::string manifest;
};

void add_corpus_args(CLI::App* cmd, CorpusArgs& a)
{
    cmd->add_option("--index", a.index, "Index file written by ingest");
    cmd->add_option("--corpus", a.dir, "Directory of .srt files (alternative to --index)");
    cmd->add_option("--manifest", a.manifest, "Manifest for --corpus (default <corpus>/manifest.tsv)");
}

Corpus open_corpus(const CorpusArgs& a, std::ostream& err)
{
    if (!a.index.empty() && !a.dir.empty())
        throw UsageError("give either --index or --corpus, not both");
    if (!a.index.empty())
        return load_index(a.index);
    if (a.dir.empty())
        throw UsageError("a corpus is required (--index or --corpus)");
    const fs::path manifest = a.manifest.empty() ? fs::path(a.dir) / "manifest.tsv" : fs::path(a.manifest);
    auto load = load_corpus(a.dir, manifest);
    for (const auto& w : load.warnings)
        err << "warning: " << w << "\n";
    return std::move(load.corpus);
}

struct ToleranceArgs {
    std::optional<std::uint32_t> d0_per_mille;
    std::optional<std::size_t> deletions;
    std::optional<std::size_t> insertions;
    std::string labels;
    std::string strategy = "auto";
    unsigned threads = 0;
};

void add_tolerance_args(CLI::App* cmd, ToleranceArgs& a)
{
    cmd->add_option("--d0-per-mille", a.d0_per_mille, "Squared-distance budget: ceil(value * length / 1000)");
    cmd->add_option("--deletions", a.deletions, "Missed silhouettes tolerated (D, 0..2)");
    cmd->add_option("--insertions", a.insertions, "Spurious silhouettes tolerated (I, 0..2)");
    cmd->add_option("--labels", a.labels, "Class labels compared: absolute | rank");
}

ToleranceConfig tolerance_from_args(const ToleranceArgs& a, ToleranceConfig base = {})
{
    if (a.d0_per_mille)
        base.d0_per_mille = *a.d0_per_mille;
    if (a.deletions)
        base.max_deletions = *a.deletions;
    if (a.insertions)
        base.max_insertions = *a.insertions;
    if (!a.labels.empty())
        base.labels = parse_label_mode(a.labels);
    base.validate();
    return base;
}

SearchStrategy parse_strategy(const std::string& s)
{
    if (s == "auto")
        return SearchStrategy::automatic;
    if (s == "align")
        return SearchStrategy::alignment;
    if (s == "enumerate")
        return SearchStrategy::enumerate;
    throw UsageError("unknown strategy '" + s + "' (auto | align | enumerate)");
}

void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << text;
    else
        write_file(path, text);
}

std::string pretty(const Json& j)
{
    return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

int cmd_ingest(const CorpusArgs& a, const std::string& index_out, std::ostream& out, std::ostream& err)
{
    if (a.dir.empty())
        throw UsageError("ingest needs --corpus");
    const fs::path manifest = a.manifest.empty() ? fs::path(a.dir) / "manifest.tsv" : fs::path(a.manifest);
    const auto load = load_corpus(a.dir, manifest);
    for (const auto& w : load.warnings)
        err << "warning: " << w << "\n";
    for (const auto& f : load.skipped_files)
        err << "skipped (not in manifest): " << f << "\n";
    if (!index_out.empty())
        save_index(load.corpus, index_out);
    out << "K=" << load.corpus.size() << "\n";
    for (const auto& t : load.corpus.tracks())
        out << t.video_id << "\t" << t.size() << "\n";
    return kExitOk;
}

struct SimulateArgs {
    std::string scenario;
    std::string errors;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> substitutions;
    std::optional<std::size_t> deletions;
    std::optional<std::size_t> insertions;
    std::string shift;
    std::string out;
    std::string truth;
    std::string frames_out;
    FrameGeometry geometry;
};

int cmd_simulate(const Corpus& corpus, const SimulateArgs& a, std::ostream& out)
{
    if (a.scenario.empty())
        throw UsageError("simulate needs --scenario");
    const auto doc = parse_json(read_file(a.scenario), a.scenario);
    ScenarioSpec scenario;
    ErrorSpec errors;
    if (doc.contains("scenario")) {
        check_keys(doc, {"scenario", "errors"}, a.scenario);
        scenario = scenario_from_json(doc.at("scenario"));
        if (doc.contains("errors"))
            errors = errors_from_json(doc.at("errors"));
    } else {
        scenario = scenario_from_json(doc);
    }
    if (!a.errors.empty())
        errors = errors_from_json(parse_json(read_file(a.errors), a.errors));
    if (a.seed)
        errors.seed = *a.seed;
    if (a.substitutions)
        errors.substitutions = *a.substitutions;
    if (a.deletions)
        errors.deletions = *a.deletions;
    if (a.insertions)
        errors.insertions = *a.insertions;
    if (!a.shift.empty())
        errors.shift = parse_shift_rule(a.shift);

    const auto& track = corpus.at(scenario.video_id);
    const auto rendered = render_observation(track, scenario, errors);
    const Json config = {{"scenario", to_json(scenario)}, {"errors", to_json(errors)}};

    auto obs = to_json(rendered.capture);
    obs["config"] = config;
    emit(a.out, pretty(obs), out);

    auto truth = to_json(rendered.truth);
    truth["config"] = config;
    std::string truth_path = a.truth;
    if (truth_path.empty() && !a.out.empty() && a.out != "-")
        truth_path = a.out + ".truth.json";
    if (!truth_path.empty())
        write_file(truth_path, pretty(truth));

    if (!a.frames_out.empty()) {
        for (std::size_t k = 0; k < rendered.truth.clips.size(); ++k) {
            const auto& clip = rendered.truth.clips[k];
            const auto spans = clip_spans(track, clip);
            const auto frames = synth_frames(spans, clip.play_start_ms, clip.play_end_ms, a.geometry,
                                             mix_seed(errors.seed, k));
            const auto path = rendered.truth.clips.size() == 1 ? a.frames_out
                                                                : a.frames_out + "." + std::to_string(k + 1);
            write_file(path, write_frame_dump(frames));
        }
    }
    return kExitOk;
}

int cmd_extract(const std::string& frames_path, const FrameGeometry& geometry, const SeparationConfig& sep,
                std::optional<double> unit_height, const std::string& out_path, std::ostream& out)
{
    if (frames_path.empty())
        throw UsageError("extract needs --frames");
    const auto frames = read_frame_dump(read_file(frames_path));
    if (frames.empty())
        throw DataError(frames_path + ": no frames");
    const auto obs = observation_from_frames(frames, geometry, sep, unit_height);
    Capture capture;
    capture.clips.push_back(obs);
    auto j = to_json(capture);
    j["config"] = {{"separation", to_json(sep)}, {"fps", geometry.fps}};
    emit(out_path, pretty(j), out);
    return kExitOk;
}

int cmd_match(const Corpus& corpus, const std::string& obs_path, const ToleranceArgs& ta,
              const std::string& out_path, std::ostream& out)
{
    if (obs_path.empty())
        throw UsageError("match needs --observation");
    const auto text = read_file(obs_path);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw UsageError(obs_path + ": observation is empty");
    const auto doc = parse_json(text, obs_path);
    if (doc.is_object() && doc.contains("clips") && doc.at("clips").is_array()) {
        if (doc.at("clips").empty())
            throw UsageError(obs_path + ": observation has no clips");
        for (const auto& c : doc.at("clips"))
            if (c.is_object() && c.contains("classes") && c.at("classes").is_array() && c.at("classes").empty())
                throw UsageError(obs_path + ": observation has no silhouettes");
    }
    const auto capture = capture_from_json(doc);
    const auto cfg = tolerance_from_args(ta);
    const MatchOptions opts{parse_strategy(ta.strategy), ta.threads};

    Json report = {{"format", "subsil-match"},
                   {"version", 1},
                   {"kind", std::string(to_string(capture.kind))},
                   {"config", {{"tolerance", to_json(cfg)}, {"strategy", ta.strategy}}}};
    if (doc.contains("config"))
        report["config"]["observation"] = doc.at("config");

    switch (capture.kind) {
    case CaptureKind::single:
        report["result"] = to_json(correlate(capture.clips[0], corpus, cfg, opts));
        break;
    case CaptureKind::joint:
        report["result"] = to_json(joint_demodulate(capture.clips, capture.gaps_ms, corpus, cfg, opts));
        break;
    case CaptureKind::seek:
        report["seek"] = std::string(to_string(*capture.seek));
        report["result"] = to_json(demodulate_with_seek(capture.clips[0], capture.clips[1], *capture.seek,
                                                        corpus, cfg, opts));
        break;
    }
    emit(out_path, pretty(report), out);
    return kExitOk;
}

int cmd_eval(const Corpus& corpus, const std::string& suite_path, std::optional<std::uint64_t> seed,
             std::optional<unsigned> threads, const ToleranceArgs& ta, const std::string& out_path,
             const std::string& summary_path, std::ostream& out, std::ostream& err)
{
    if (suite_path.empty())
        throw UsageError("eval needs --suite");
    auto doc = parse_json(read_file(suite_path), suite_path);
    // Flags override the file before section defaults are resolved.
    if (seed)
        doc["seed"] = *seed;
    if (threads)
        doc["threads"] = *threads;
    auto tol = doc.contains("tolerance") ? tolerance_from_json(doc.at("tolerance")) : ToleranceConfig{};
    tol = tolerance_from_args(ta, tol);
    doc["tolerance"] = to_json(tol);

    const auto spec = suite_from_json(doc);
    const auto rep = run_suite(corpus, spec);
    emit(out_path, pretty(rep.body), out);
    if (!summary_path.empty())
        write_file(summary_path, rep.summary);
    err << rep.summary;
    return rep.violations.empty() ? kExitOk : kExitThreshold;
}

int cmd_synth(const std::string& out_dir, const CorpusSynthSpec& spec, std::ostream& out)
{
    if (out_dir.empty())
        throw UsageError("synth-corpus needs --out");
    fs::create_directories(out_dir);
    const auto tracks = synth_corpus(spec);
    std::vector<ManifestEntry> manifest;
    for (const auto& t : tracks) {
        const auto file = t.video_id + ".srt";
        write_file(fs::path(out_dir) / file, write_srt(t));
        manifest.push_back({t.video_id, t.title, file, t.duration_ms});
    }
    write_file(fs::path(out_dir) / "manifest.tsv", write_manifest(manifest));
    out << "wrote " << tracks.size() << " tracks to " << out_dir << " (seed " << spec.seed << ")\n";
    return kExitOk;
}

void add_geometry_args(CLI::App* cmd, FrameGeometry& g)
{
    cmd->add_option("--width", g.width, "Frame width in pixels");
    cmd->add_option("--height", g.height, "Frame height in pixels");
    cmd->add_option("--line-height", g.line_height_px, "Rendered subtitle line height in pixels");
    cmd->add_option("--fps", g.fps, "Frames per second");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Subtitle silhouette video identification toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "subsil 1.0");

    CorpusArgs corpus_args;
    ToleranceArgs tol;

    auto* ingest = app.add_subcommand("ingest", "Parse a directory of .srt files into an index");
    std::string index_out;
    ingest->add_option("--corpus", corpus_args.dir, "Directory of .srt files")->required();
    ingest->add_option("--manifest", corpus_args.manifest, "Manifest (default <corpus>/manifest.tsv)");
    ingest->add_option("--out", index_out, "Index file to write");

    auto* simulate = app.add_subcommand("simulate", "Render an observation and its ground truth from a scenario");
    SimulateArgs sim;
    add_corpus_args(simulate, corpus_args);
    simulate->add_option("--scenario", sim.scenario, "Scenario JSON (optionally with an \"errors\" section)");
    simulate->add_option("--errors", sim.errors, "Error spec JSON");
    simulate->add_option("--seed", sim.seed, "Error generator seed");
    simulate->add_option("--substitutions", sim.substitutions, "Substitution errors to inject");
    simulate->add_option("--deletions", sim.deletions, "Deletion errors to inject");
    simulate->add_option("--insertions", sim.insertions, "Insertion errors to inject");
    simulate->add_option("--shift", sim.shift, "Substitution class shift: adjacent | any");
    simulate->add_option("--out", sim.out, "Observation file (default stdout)");
    simulate->add_option("--truth", sim.truth, "Ground-truth file (default <out>.truth.json)");
    simulate->add_option("--frames-out", sim.frames_out, "Also write synthetic frames of each error-free clip");
    add_geometry_args(simulate, sim.geometry);

    auto* extract = app.add_subcommand("extract", "Turn a frame dump into an observation");
    std::string frames_path;
    std::string extract_out;
    FrameGeometry geometry;
    SeparationConfig sep;
    std::optional<double> unit_height;
    extract->add_option("--frames", frames_path, "Frame dump");
    extract->add_option("--fps", geometry.fps, "Frames per second of the dump");
    extract->add_option("--iou-threshold", sep.iou_threshold, "Masks below this IoU are different subtitles");
    extract->add_option("--t0", sep.t0, "Mean per-pixel difference allowance for the same subtitle");
    extract->add_option("--unit-height", unit_height, "Pixel height of a one-line silhouette, if known");
    extract->add_option("--out", extract_out, "Observation file (default stdout)");

    auto* match = app.add_subcommand("match", "Search the corpus for an observation");
    std::string obs_path;
    std::string match_out;
    add_corpus_args(match, corpus_args);
    add_tolerance_args(match, tol);
    match->add_option("--observation", obs_path, "Observation file");
    match->add_option("--strategy", tol.strategy, "auto | align | enumerate");
    match->add_option("--threads", tol.threads, "Worker threads (0: all cores)");
    match->add_option("--out", match_out, "Candidate report (default stdout)");

    auto* eval = app.add_subcommand("eval", "Run an evaluation suite");
    std::string suite_path;
    std::string eval_out;
    std::string summary_path;
    std::optional<std::uint64_t> eval_seed;
    std::optional<unsigned> eval_threads;
    add_corpus_args(eval, corpus_args);
    add_tolerance_args(eval, tol);
    eval->add_option("--suite", suite_path, "Suite JSON");
    eval->add_option("--seed", eval_seed, "Overrides the suite seed");
    eval->add_option("--threads", eval_threads, "Worker threads (0: all cores)");
    eval->add_option("--out", eval_out, "Report JSON (default stdout)");
    eval->add_option("--summary", summary_path, "Also write the text summary here");

    auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic subtitle corpus with a manifest");
    std::string synth_out;
    CorpusSynthSpec synth_spec;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--tracks", synth_spec.tracks, "Number of tracks");
    synth->add_option("--seed", synth_spec.seed, "Generator seed");
    synth->add_option("--prefix", synth_spec.id_prefix, "Video id prefix");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest->parsed())
            return cmd_ingest(corpus_args, index_out, out, err);
        if (extract->parsed())
            return cmd_extract(frames_path, geometry, sep, unit_height, extract_out, out);
        if (synth->parsed())
            return cmd_synth(synth_out, synth_spec, out);
        if (simulate->parsed())
            return cmd_simulate(open_corpus(corpus_args, err), sim, out);
        if (match->parsed())
            return cmd_match(open_corpus(corpus_args, err), obs_path, tol, match_out, out);
        if (eval->parsed())
            return cmd_eval(open_corpus(corpus_args, err), suite_path, eval_seed, eval_threads, tol, eval_out,
                            summary_path, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

} // namespace subsil
