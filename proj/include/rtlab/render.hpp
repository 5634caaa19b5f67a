#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rtlab/track.hpp"

namespace rtlab {

struct RenderTrace {
    std::string label;
    std::vector<std::pair<int, int>> positions;
};

// Grid plus one polyline per trace; walls dark, start purple, goal green.
// Output bytes are deterministic for identical inputs.
std::string render_svg(const TrackMap& map, const std::vector<RenderTrace>& traces);

}  // namespace rtlab
