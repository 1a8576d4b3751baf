#pragma once

#include "subsil/silhouette.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subsil {

// Plain-text frame stream, all frames sharing one geometry:
//
//   subsil-frames 1
//   <width> <height> <count>
//   frame <k>
//   <height rows of 2*width lowercase hex digits: pixel intensities>
//   <height rows of width characters: '#' silhouette, '.' background>
//   ... repeated <count> times
std::string write_frame_dump(std::span<const Frame> frames);

// Throws ParseError naming the offending line.
std::vector<Frame> read_frame_dump(std::string_view text);

} // namespace subsil
