#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ovmm/geometry.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

class NoGoals : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Unreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Multi-source shortest-path distances, 8-connected, straight steps cost 1 and diagonal steps sqrt(2).
struct DistanceField {
    Grid<double> dist;
    std::vector<Cell> sources;

    double at(Cell c) const { return dist.in_bounds(c) ? dist[c] : kInf; }
    bool reachable(Cell c) const { return at(c) < kInf; }
};

/// Dijkstra wavefront over cells where blocked == 0. Blocked sources stay at infinity.
/// Throws NoGoals when goals is empty.
DistanceField distance_field(const Grid<std::uint8_t>& blocked, std::span<const Cell> goals);

/// Obstacle dilation by `radius` cells (Chebyshev). Radius 0 returns a copy.
Grid<std::uint8_t> inflate(const Grid<std::uint8_t>& blocked, int radius);

/// Cell of minimal distance within `lookahead` (Euclidean) of the pose; ties go to the
/// cell whose bearing is closest to the heading, then to the lowest row-major index.
/// Throws Unreachable when the pose itself has infinite distance.
Cell short_term_goal(const DistanceField& field, const Pose& pose, double lookahead);

/// Neighbour of `from` with the lowest distance (ties: bearing closest to heading, then direction order).
/// Returns `from` when no neighbour improves on it.
Cell descent_step(const DistanceField& field, const Pose& pose);

/// Single primitive that brings the robot toward `waypoint` (waypoint != pose.cell).
/// Moves when the rounded heading already points along the chosen direction, otherwise
/// turns 30 degrees toward it (ties turn left). With a `blocked` grid, a blocked direction
/// is replaced by the free neighbour closest to the waypoint, so known obstacles are never entered.
Action next_nav_action(const Pose& pose, Cell waypoint, const Grid<std::uint8_t>* blocked = nullptr);

struct OscillationParams {
    int window = 20;          // H: arrivals remembered
    int repeats = 3;          // R: arrivals at one cell that count as oscillation
    int blacklist_steps = 50; // T
};

/// Arrival history for the current navigation goal plus a goal blacklist.
/// Only changes of cell are recorded: turning in place does not count as revisiting.
struct NavHistory {
    std::deque<Cell> arrivals;
    int goal_id = -1;
    std::map<int, int> blacklist;  // goal id -> step at which it expires
    std::map<int, int> offences;   // goal id -> times blacklisted
    std::map<std::pair<int, Cell>, int> totals;  // (goal id, cell) -> arrivals this episode

    void set_goal(int id);
    bool is_blacklisted(int id, int step) const;
};

enum class NavDecision { Continue, SwitchToFrontier };

/// Records the pose; when a cell has been entered `repeats` times within the last
/// `window` arrivals under one goal, blacklists that goal for `blacklist_steps` steps
/// (permanently on a second offence) and asks the caller to explore instead.
/// A cell entered `repeats + 1` times under one goal over the whole episode
/// blacklists the goal permanently, so no (cell, goal) pair ever exceeds that count.
NavDecision oscillation_check(NavHistory& history, const Pose& pose, int step, const OscillationParams& params);

}  // namespace ovmm
