#include "subsil/frame_dump.hpp"
#include "subsil/error.hpp"

#include <sstream>

namespace subsil {

namespace {

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::string_view next()
    {
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of frame dump", line_ + 1);
        auto nl = text_.find('\n', pos_);
        if (nl == std::string_view::npos)
            nl = text_.size();
        auto line = text_.substr(pos_, nl - pos_);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        pos_ = nl + 1;
        ++line_;
        return line;
    }

    std::size_t line() const { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

} // namespace

std::string write_frame_dump(std::span<const Frame> frames)
{
    std::ostringstream out;
    const int w = frames.empty() ? 1 : frames[0].region.width();
    const int h = frames.empty() ? 1 : frames[0].region.height();
    out << "subsil-frames 1\n" << w << ' ' << h << ' ' << frames.size() << '\n';
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& f = frames[k];
        if (f.region.width() != w || f.region.height() != h || f.mask.width() != w
            || f.mask.height() != h)
            throw DataError("frame " + std::to_string(k) + " does not share the stream geometry");
        out << "frame " << k << '\n';
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const auto v = f.region.at(x, y);
                out << kHex[v >> 4] << kHex[v & 0xF];
            }
            out << '\n';
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x)
                out << (f.mask.at(x, y) ? '#' : '.');
            out << '\n';
        }
    }
    return out.str();
}

std::vector<Frame> read_frame_dump(std::string_view text)
{
    LineReader in(text);
    if (in.next() != "subsil-frames 1")
        throw ParseError("expected header 'subsil-frames 1'", in.line());

    int w = 0;
    int h = 0;
    std::size_t count = 0;
    {
        std::istringstream dims{std::string(in.next())};
        if (!(dims >> w >> h >> count) || w <= 0 || h <= 0)
            throw ParseError("expected '<width> <height> <count>'", in.line());
    }

    std::vector<Frame> frames;
    frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (in.next() != "frame " + std::to_string(k))
            throw ParseError("expected 'frame " + std::to_string(k) + "'", in.line());

        std::vector<std::uint8_t> pixels;
        pixels.reserve(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y) {
            auto row = in.next();
            if (row.size() != static_cast<std::size_t>(2 * w))
                throw ParseError("pixel row must have " + std::to_string(2 * w) + " hex digits", in.line());
            for (int x = 0; x < w; ++x) {
                const int hi = hex_value(row[2 * x]);
                const int lo = hex_value(row[2 * x + 1]);
                if (hi < 0 || lo < 0)
                    throw ParseError("invalid hex digit in pixel row", in.line());
                pixels.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
            }
        }

        std::vector<std::uint8_t> bits;
        bits.reserve(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y) {
            auto row = in.next();
            if (row.size() != static_cast<std::size_t>(w))
                throw ParseError("mask row must have " + std::to_string(w) + " characters", in.line());
            for (char c : row) {
                if (c != '#' && c != '.')
                    throw ParseError("mask rows use '#' and '.' only", in.line());
                bits.push_back(c == '#' ? 1 : 0);
            }
        }
        frames.push_back({FrameRegion(w, h, std::move(pixels)), SilhouetteMask(w, h, std::move(bits))});
    }
    return frames;
}

} // namespace subsil
