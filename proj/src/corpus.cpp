#include "subsil/corpus.hpp"
#include "subsil/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace subsil {

Corpus::Corpus(std::vector<SubtitleTrack> tracks) : tracks_(std::move(tracks))
{
    std::sort(tracks_.begin(), tracks_.end(), [](const auto& a, const auto& b) {
        return a.video_id < b.video_id;
    });
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        validate_track(tracks_[i]);
        if (!by_id_.emplace(tracks_[i].video_id, i).second)
            throw DataError("duplicate video_id '" + tracks_[i].video_id + "'");
    }
}

const SubtitleTrack* Corpus::find(std::string_view video_id) const
{
    auto it = by_id_.find(video_id);
    return it == by_id_.end() ? nullptr : &tracks_[it->second];
}

const SubtitleTrack& Corpus::at(std::string_view video_id) const
{
    if (const auto* t = find(video_id))
        return *t;
    throw DataError("unknown video_id '" + std::string(video_id) + "'");
}

std::size_t Corpus::max_track_length() const
{
    std::size_t n = 0;
    for (const auto& t : tracks_)
        n = std::max(n, t.size());
    return n;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw DataError("write failed for '" + path.string() + "'");
}

std::vector<ManifestEntry> parse_manifest(std::string_view content)
{
    std::vector<ManifestEntry> out;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;

        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            auto tab = line.find('\t', pos);
            fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos)
                break;
            pos = tab + 1;
        }
        if (out.empty() && fields[0] == "video_id")
            continue;
        if (fields.size() < 3 || fields.size() > 4)
            throw ParseError("manifest record needs 3 or 4 tab-separated fields", line_no);
        if (fields[0].empty() || fields[2].empty())
            throw ParseError("manifest record has an empty video_id or filename", line_no);

        ManifestEntry e{fields[0], fields[1], fields[2], std::nullopt};
        if (fields.size() == 4 && !fields[3].empty()) {
            try {
                std::size_t used = 0;
                auto v = std::stoll(fields[3], &used);
                if (used != fields[3].size() || v <= 0)
                    throw std::invalid_argument("duration");
                e.duration_ms = v;
            } catch (const std::exception&) {
                throw ParseError("manifest duration_ms is not a positive integer", line_no);
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::string write_manifest(const std::vector<ManifestEntry>& entries)
{
    std::string out = "video_id\ttitle\tfilename\tduration_ms\n";
    for (const auto& e : entries) {
        out += e.video_id + '\t' + e.title + '\t' + e.filename + '\t';
        if (e.duration_ms)
            out += std::to_string(*e.duration_ms);
        out += '\n';
    }
    return out;
}

CorpusLoad load_corpus(const std::filesystem::path& directory,
                       const std::filesystem::path& manifest)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory))
        throw DataError("'" + directory.string() + "' is not a directory");

    const auto entries = parse_manifest(read_file(manifest));

    CorpusLoad result;
    std::set<std::string> listed;
    std::vector<SubtitleTrack> tracks;
    for (const auto& e : entries) {
        listed.insert(e.filename);
        const auto path = directory / e.filename;
        if (!fs::exists(path))
            throw DataError("manifest lists missing file '" + path.string() + "'");
        std::vector<std::string> warnings;
        try {
            tracks.push_back(parse_srt(read_file(path), e.video_id, e.title, e.duration_ms, &warnings));
        } catch (const DataError& err) {
            throw DataError("'" + path.string() + "': " + err.what());
        }
        for (auto& w : warnings)
            result.warnings.push_back(e.filename + ": " + w);
    }

    std::vector<std::string> unlisted;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file())
            continue;
        auto name = entry.path().filename().string();
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".srt" && !listed.count(name))
            unlisted.push_back(name);
    }
    std::sort(unlisted.begin(), unlisted.end());
    result.skipped_files = std::move(unlisted);

    if (tracks.empty())
        result.warnings.push_back("corpus is empty");
    result.corpus = Corpus(std::move(tracks));
    return result;
}

void save_index(const Corpus& corpus, const std::filesystem::path& path)
{
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto& t : corpus.tracks()) {
        nlohmann::json subs = nlohmann::json::array();
        for (const auto& s : t.subtitles)
            subs.push_back({s.index, s.start_ms, s.end_ms, s.lines});
        tracks.push_back({{"video_id", t.video_id},
                          {"title", t.title},
                          {"duration_ms", t.duration_ms},
                          {"subtitles", std::move(subs)}});
    }
    nlohmann::json doc = {{"format", "subsil-index"}, {"version", 1}, {"tracks", std::move(tracks)}};
    // Invalid UTF-8 in subtitle text is replaced by U+FFFD.
    write_file(path, doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

Corpus load_index(const std::filesystem::path& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("index '" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        if (doc.at("format") != "subsil-index")
            throw DataError("'" + path.string() + "' is not a subsil index");
        if (doc.at("version") != 1)
            throw DataError("unsupported index version " + doc.at("version").dump());

        std::vector<SubtitleTrack> tracks;
        for (const auto& jt : doc.at("tracks")) {
            SubtitleTrack t;
            t.video_id = jt.at("video_id").get<std::string>();
            t.title = jt.at("title").get<std::string>();
            t.duration_ms = jt.at("duration_ms").get<std::int64_t>();
            for (const auto& js : jt.at("subtitles")) {
                Subtitle s;
                s.index = js.at(0).get<std::uint32_t>();
                s.start_ms = js.at(1).get<std::int64_t>();
                s.end_ms = js.at(2).get<std::int64_t>();
                s.lines = js.at(3).get<std::vector<std::string>>();
                t.subtitles.push_back(std::move(s));
            }
            tracks.push_back(std::move(t));
        }
        return Corpus(std::move(tracks));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("index '" + path.string() + "' is malformed: " + e.what());
    }
}

} // namespace subsil
