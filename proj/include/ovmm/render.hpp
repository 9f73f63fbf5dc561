#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovmm/mapping.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

class UnsupportedFormat : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class RenderFormat { Ascii, Pgm };

/// "ascii" or "pgm"; anything else throws UnsupportedFormat.
RenderFormat parse_render_format(const std::string& name);

/// Things drawn on top of the map.
struct MapOverlay {
    std::optional<Pose> robot;
    std::vector<Cell> goal_cells;
    std::optional<Cell> chosen_goal;
};

/// Glyph table for map and replay renders, one "glyph  meaning" per line.
const std::string& render_legend();

/// ASCII: one glyph per cell, one line per row, '\n' after every row.
/// Pgm: the obstacle/explored view as a binary P5 image (0 unexplored, 128 free, 255 obstacle).
std::string render_map(const SemanticMap& map, const MapOverlay& overlay, RenderFormat format);

/// One binary P5 image of a map channel: "obstacle", "explored", "collision" or a tracked
/// class name (probabilities scaled to 0..255). Throws std::invalid_argument for an unknown channel.
std::string render_channel_pgm(const SemanticMap& map, const std::string& channel);

/// Names accepted by render_channel_pgm for this map, geometry first.
std::vector<std::string> channel_names(const SemanticMap& map);

/// Ground-truth scene with the robot's path: '+' visited, 'S' first pose, '@' last pose.
std::string render_replay(const Scene& scene, const std::vector<Pose>& poses, RenderFormat format);

}  // namespace ovmm
