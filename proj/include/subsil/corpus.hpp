#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subsil {

// Line-count class of a subtitle or silhouette: 1, 2 or 3.
using LineClass = std::uint8_t;

inline constexpr LineClass kMaxLineClass = 3;

// Video end used when the manifest does not provide a duration.
inline constexpr std::int64_t kDefaultTailMs = 5000;

struct Subtitle {
    std::uint32_t index = 0;  // as numbered in the file
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::vector<std::string> lines;

    std::int64_t duration_ms() const { return end_ms - start_ms; }

    bool operator==(const Subtitle&) const = default;
};

struct SubtitleTrack {
    std::string video_id;
    std::string title;
    std::int64_t duration_ms = 0;
    std::vector<Subtitle> subtitles;  // sorted, non-overlapping

    std::size_t size() const { return subtitles.size(); }

    bool operator==(const SubtitleTrack&) const = default;
};

// Throws DataError when the ordering/overlap/duration invariants do not hold.
void validate_track(const SubtitleTrack& track);

// "HH:MM:SS,mmm" (a '.' fraction separator is accepted). Throws DataError.
std::int64_t parse_timecode(std::string_view text);
std::string format_timecode(std::int64_t ms);

// Parses SubRip content. Overlapping entries are repaired by truncating the
// earlier end to the later start; blocks with end <= start are skipped. Both
// events are appended to `warnings` when it is given.
//
// Throws ParseError on a malformed timing line and DataError when no
// subtitle survives.
SubtitleTrack parse_srt(std::string_view content,
                        std::string video_id,
                        std::string title,
                        std::optional<std::int64_t> duration_ms = std::nullopt,
                        std::vector<std::string>* warnings = nullptr);

std::string write_srt(const SubtitleTrack& track);

// Number of text lines clamped to 1..3.
LineClass line_count(const Subtitle& s);

std::vector<LineClass> line_counts(const SubtitleTrack& track);

class Corpus {
public:
    Corpus() = default;
    // Sorts tracks by video_id. Throws DataError on duplicate ids or an
    // invalid track.
    explicit Corpus(std::vector<SubtitleTrack> tracks);

    const std::vector<SubtitleTrack>& tracks() const { return tracks_; }
    std::size_t size() const { return tracks_.size(); }
    bool empty() const { return tracks_.empty(); }

    const SubtitleTrack* find(std::string_view video_id) const;
    const SubtitleTrack& at(std::string_view video_id) const;

    // Longest track, in subtitles.
    std::size_t max_track_length() const;

    bool operator==(const Corpus& other) const { return tracks_ == other.tracks_; }

private:
    std::vector<SubtitleTrack> tracks_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

// One manifest record. duration_ms is optional in the file.
struct ManifestEntry {
    std::string video_id;
    std::string title;
    std::string filename;
    std::optional<std::int64_t> duration_ms;
};

// Tab-separated, one record per line:
//   video_id <TAB> title <TAB> filename <TAB> duration_ms
// Blank lines and lines starting with '#' are ignored; a first line whose
// first field is literally "video_id" is treated as a header.
std::vector<ManifestEntry> parse_manifest(std::string_view content);
std::string write_manifest(const std::vector<ManifestEntry>& entries);

struct CorpusLoad {
    Corpus corpus;
    std::vector<std::string> skipped_files;  // .srt files without a manifest record
    std::vector<std::string> warnings;
};

// Loads every manifest record from `directory`. Throws DataError (naming the
// file) when a listed file is missing or fails to parse, and on duplicate
// video ids.
CorpusLoad load_corpus(const std::filesystem::path& directory,
                       const std::filesystem::path& manifest);

// Index files are JSON documents:
//   {"format": "subsil-index", "version": 1,
//    "tracks": [{"video_id", "title", "duration_ms",
//                "subtitles": [[index, start_ms, end_ms, [lines...]], ...]}]}
void save_index(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_index(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace subsil
