#include "subsil/corpus.hpp"
#include "subsil/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace subsil {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
    });
}

std::int64_t digits_value(std::string_view s)
{
    std::int64_t v = 0;
    for (char c : s)
        v = v * 10 + (c - '0');
    return v;
}

// Splits on '\n', dropping a trailing '\r' from every line.
std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

struct RawBlock {
    std::size_t first_line = 0;  // 1-based
    std::vector<std::string_view> lines;
};

std::vector<RawBlock> split_blocks(const std::vector<std::string_view>& lines)
{
    std::vector<RawBlock> blocks;
    RawBlock current;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) {
            if (!current.lines.empty())
                blocks.push_back(std::move(current));
            current = RawBlock{};
            continue;
        }
        if (current.lines.empty())
            current.first_line = i + 1;
        current.lines.push_back(lines[i]);
    }
    if (!current.lines.empty())
        blocks.push_back(std::move(current));
    return blocks;
}

} // namespace

std::int64_t parse_timecode(std::string_view text)
{
    auto s = trim(text);
    // H+:MM:SS[,.]mmm
    auto c1 = s.find(':');
    if (c1 == std::string_view::npos)
        throw DataError("malformed timecode '" + std::string(text) + "'");
    auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
        throw DataError("malformed timecode '" + std::string(text) + "'");
    auto frac = s.find_first_of(",.", c2 + 1);
    if (frac == std::string_view::npos)
        throw DataError("malformed timecode '" + std::string(text) + "'");

    auto hh = s.substr(0, c1);
    auto mm = s.substr(c1 + 1, c2 - c1 - 1);
    auto ss = s.substr(c2 + 1, frac - c2 - 1);
    auto ms = s.substr(frac + 1);
    if (!all_digits(hh) || hh.size() > 3 || !all_digits(mm) || mm.size() != 2
        || !all_digits(ss) || ss.size() != 2 || !all_digits(ms) || ms.size() != 3)
        throw DataError("malformed timecode '" + std::string(text) + "'");

    auto minutes = digits_value(mm);
    auto seconds = digits_value(ss);
    if (minutes >= 60 || seconds >= 60)
        throw DataError("timecode field out of range '" + std::string(text) + "'");
    return ((digits_value(hh) * 60 + minutes) * 60 + seconds) * 1000 + digits_value(ms);
}

std::string format_timecode(std::int64_t ms)
{
    if (ms < 0)
        throw DataError("negative timecode");
    const auto hours = ms / 3'600'000;
    const auto minutes = (ms / 60'000) % 60;
    const auto seconds = (ms / 1000) % 60;
    const auto millis = ms % 1000;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld,%03lld",
                  static_cast<long long>(hours), static_cast<long long>(minutes),
                  static_cast<long long>(seconds), static_cast<long long>(millis));
    return buf;
}

SubtitleTrack parse_srt(std::string_view content,
                        std::string video_id,
                        std::string title,
                        std::optional<std::int64_t> duration_ms,
                        std::vector<std::string>* warnings)
{
    auto warn = [&](std::string msg) {
        if (warnings)
            warnings->push_back(std::move(msg));
    };

    if (content.size() >= 3 && static_cast<unsigned char>(content[0]) == 0xEF
        && static_cast<unsigned char>(content[1]) == 0xBB
        && static_cast<unsigned char>(content[2]) == 0xBF)
        content.remove_prefix(3);

    const auto lines = split_lines(content);
    const auto blocks = split_blocks(lines);
    if (blocks.empty())
        throw DataError("empty subtitle track for '" + video_id + "'");

    std::vector<Subtitle> subs;
    subs.reserve(blocks.size());
    for (const auto& block : blocks) {
        std::size_t cursor = 0;
        Subtitle sub;
        sub.index = static_cast<std::uint32_t>(subs.size() + 1);

        auto first = trim(block.lines[0]);
        if (all_digits(first)) {
            sub.index = static_cast<std::uint32_t>(digits_value(first));
            cursor = 1;
        }
        if (cursor >= block.lines.size())
            throw ParseError("missing timing line after index", block.first_line);

        const auto timing_line_no = block.first_line + cursor;
        const auto timing = trim(block.lines[cursor]);
        const auto arrow = timing.find("-->");
        if (arrow == std::string_view::npos)
            throw ParseError("expected 'HH:MM:SS,mmm --> HH:MM:SS,mmm'", timing_line_no);
        auto rhs = trim(timing.substr(arrow + 3));
        // Some writers append positioning (X1:.. Y2:..) after the end time.
        if (auto sp = rhs.find_first_of(" \t"); sp != std::string_view::npos)
            rhs = rhs.substr(0, sp);
        try {
            sub.start_ms = parse_timecode(timing.substr(0, arrow));
            sub.end_ms = parse_timecode(rhs);
        } catch (const DataError& e) {
            throw ParseError(e.what(), timing_line_no);
        }
        ++cursor;

        for (; cursor < block.lines.size(); ++cursor)
            sub.lines.emplace_back(block.lines[cursor]);

        if (sub.end_ms <= sub.start_ms) {
            warn("line " + std::to_string(timing_line_no) + ": end <= start, block skipped");
            continue;
        }
        if (sub.lines.empty()) {
            warn("line " + std::to_string(timing_line_no) + ": block has no text, skipped");
            continue;
        }
        subs.push_back(std::move(sub));
    }

    std::stable_sort(subs.begin(), subs.end(), [](const Subtitle& a, const Subtitle& b) {
        return a.start_ms < b.start_ms;
    });

    std::vector<Subtitle> repaired;
    repaired.reserve(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto& s = subs[i];
        if (i + 1 < subs.size() && s.end_ms > subs[i + 1].start_ms) {
            if (subs[i + 1].start_ms <= s.start_ms) {
                warn("subtitle " + std::to_string(s.index)
                     + " starts together with the next one, dropped");
                continue;
            }
            warn("subtitle " + std::to_string(s.index) + " overlaps the next one, end truncated");
            s.end_ms = subs[i + 1].start_ms;
        }
        repaired.push_back(std::move(s));
    }

    if (repaired.empty())
        throw DataError("empty subtitle track for '" + video_id + "'");

    SubtitleTrack track;
    track.video_id = std::move(video_id);
    track.title = std::move(title);
    track.subtitles = std::move(repaired);

    const auto last_end = track.subtitles.back().end_ms;
    if (!duration_ms) {
        track.duration_ms = last_end + kDefaultTailMs;
    } else if (*duration_ms < last_end) {
        warn("duration " + std::to_string(*duration_ms) + " ms ends before the last subtitle, extended");
        track.duration_ms = last_end;
    } else {
        track.duration_ms = *duration_ms;
    }
    return track;
}

std::string write_srt(const SubtitleTrack& track)
{
    std::string out;
    for (std::size_t i = 0; i < track.subtitles.size(); ++i) {
        const auto& s = track.subtitles[i];
        if (i)
            out += '\n';
        out += std::to_string(s.index) + '\n';
        out += format_timecode(s.start_ms) + " --> " + format_timecode(s.end_ms) + '\n';
        for (const auto& line : s.lines)
            out += line + '\n';
    }
    return out;
}

LineClass line_count(const Subtitle& s)
{
    const auto n = std::clamp<std::size_t>(s.lines.size(), 1, kMaxLineClass);
    return static_cast<LineClass>(n);
}

std::vector<LineClass> line_counts(const SubtitleTrack& track)
{
    std::vector<LineClass> out;
    out.reserve(track.subtitles.size());
    for (const auto& s : track.subtitles)
        out.push_back(line_count(s));
    return out;
}

void validate_track(const SubtitleTrack& track)
{
    const auto& subs = track.subtitles;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i].start_ms < 0 || subs[i].start_ms >= subs[i].end_ms)
            throw DataError("track '" + track.video_id + "': subtitle "
                            + std::to_string(i + 1) + " has end <= start");
        if (subs[i].lines.empty())
            throw DataError("track '" + track.video_id + "': subtitle "
                            + std::to_string(i + 1) + " has no text lines");
        if (i + 1 < subs.size() && subs[i].end_ms > subs[i + 1].start_ms)
            throw DataError("track '" + track.video_id + "': subtitles "
                            + std::to_string(i + 1) + " and " + std::to_string(i + 2) + " overlap");
    }
    if (!subs.empty() && track.duration_ms < subs.back().end_ms)
        throw DataError("track '" + track.video_id + "': duration ends before the last subtitle");
}

} // namespace subsil
