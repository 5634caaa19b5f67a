#pragma once

#include <string>

#include "rtlab/track.hpp"

namespace rtlab::testing {

// 7x5 corridor: start column x=1, free x=2..4, goal column x=5, wall border.
inline const char* kCorr7 =
    "#######\n"
    "#s...g#\n"
    "#s...g#\n"
    "#s...g#\n"
    "#######\n";

inline TrackMap corr7() { return parse_map(kCorr7, "corr7"); }

inline std::string maps_dir() {
#ifdef RTLAB_MAPS_DIR
    return RTLAB_MAPS_DIR;
#else
    return "maps";
#endif
}

inline TrackMap load_bundled(const std::string& name) {
    return load_map_file(maps_dir() + "/" + name + ".txt");
}

}  // namespace rtlab::testing
