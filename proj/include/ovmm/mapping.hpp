#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "ovmm/perception.hpp"
#include "ovmm/planning.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

class UnknownCluster : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A 4-connected component of one tracked class's probability channel.
struct Cluster {
    int id = 0;
    ClassId cls = kNoClass;
    std::vector<Cell> cells;  // row-major
    double prob = 0.0;        // max cell probability
    double cx = 0.0;          // centroid
    double cy = 0.0;
    bool inspected = false;
    std::uint8_t viewed_sides = 0;  // bit k: seen from sector k of the centroid

    int sides_seen() const;
};

enum class Fusion { Max, Average };

/// Bird's-eye-view belief: geometry channels, per-class probabilities, clusters.
class SemanticMap {
public:
    SemanticMap() = default;
    SemanticMap(int width, int height, std::vector<ClassId> tracked, Fusion fusion = Fusion::Max);

    int width() const { return obstacle.width(); }
    int height() const { return obstacle.height(); }

    /// Channel index of a tracked class, or -1.
    int channel(ClassId cls) const;
    const std::vector<ClassId>& tracked() const { return tracked_; }

    const Cluster* find_cluster(int id) const;
    Cluster* find_cluster(int id);
    const std::vector<Cluster>& clusters() const { return clusters_; }
    std::vector<const Cluster*> clusters_of(ClassId cls) const;

    /// Bumped whenever an obstacle cell is added; lets planners cache fields.
    std::uint64_t obstacle_version() const { return obstacle_version_; }

    Grid<std::uint8_t> obstacle;
    Grid<std::uint8_t> explored;
    Grid<std::uint8_t> collision_marks;
    std::vector<Grid<double>> class_prob;

private:
    friend void integrate(SemanticMap&, const Pose&, const std::vector<VisibleCell>&, const std::vector<Detection>&);
    friend void mark_collision(SemanticMap&, Cell, std::optional<Cell>);
    void rebuild_channel(int ch);
    void refresh_geometry(Cluster& c) const;

    std::vector<ClassId> tracked_;
    Fusion fusion_ = Fusion::Max;
    std::vector<Grid<std::uint16_t>> observations_;  // per-cell detection counts, Average fusion only
    std::vector<Grid<int>> labels_;                  // per channel: cluster id or -1
    std::vector<Cluster> clusters_;                  // sorted by id
    int next_cluster_id_ = 0;
    std::uint64_t obstacle_version_ = 0;
};

/// Folds one frame into the map: visible cells become explored, visible walls and
/// receptacles become obstacles, detections fuse into their class channel, clusters
/// are refreshed, and clusters in view record the side they were seen from.
/// The robot's own cell counts as explored.
void integrate(SemanticMap& map, const Pose& pose, const std::vector<VisibleCell>& visible,
               const std::vector<Detection>& detections);

/// Explored, non-obstacle cells with at least one unexplored 4-neighbour.
std::vector<Cell> frontier(const SemanticMap& map);

/// Blocks the last short-term goal and, when given, the cell the robot bumped into.
void mark_collision(SemanticMap& map, Cell last_short_term_goal, std::optional<Cell> ahead = std::nullopt);

/// Forces a cluster to inspected. Throws UnknownCluster.
void mark_inspected(SemanticMap& map, int cluster_id);

enum class GoalKind { Object, StartInspection, EndReceptacle };

struct GoalCell {
    Cell cell;
    int cluster = -1;  // -1 for frontier cells
    int side = -1;     // approach sector for inspection cells

    friend bool operator==(const GoalCell&, const GoalCell&) = default;
};

struct GoalMap {
    std::vector<GoalCell> cells;
    std::optional<Cell> chosen;

    bool empty() const { return cells.empty(); }
};

/// Goal cells for a target kind, skipping clusters listed in `excluded`.
/// Inspection goals are explored free cells within 2 cells (Chebyshev) of a
/// non-inspected start-receptacle cluster, tagged with their side of the cluster.
GoalMap build_goal_map(const SemanticMap& map, GoalKind kind, const EpisodeGoal& goal,
                       const std::set<int>& excluded = {});

/// Goal map made of the current frontier.
GoalMap frontier_goal_map(const SemanticMap& map);

struct SelectMode {
    bool prob_ranking = true;
    bool center_alignment = true;
    double reach = 1.5;  // a goal counts as reachable from free cells this close to it

    static constexpr SelectMode baseline() { return {false, false}; }
    static constexpr SelectMode improved() { return {true, true}; }
};

struct GoalChoice {
    Cell cell;
    int cluster = -1;
    double distance = kInf;

    friend bool operator==(const GoalChoice&, const GoalChoice&) = default;
};

/// Travel cost from the field's source to `c`: the field value when finite, otherwise
/// the cheapest field(q) + |q - c| over cells q within `reach` of c.
double approach_cost(const DistanceField& from_pose, Cell c, double reach = 1.5);

/// Picks a navigation goal. With prob_ranking the cluster with the highest probability
/// among those having a reachable cell wins (ties: nearer, then lower id); otherwise the
/// nearest reachable goal cell wins. With center_alignment the chosen cluster's
/// reachable cell nearest its centroid is returned.
std::optional<GoalChoice> select_goal(const GoalMap& goals, const SemanticMap& map, const DistanceField& from_pose,
                                      SelectMode mode);

/// Obstacle grid of the map, optionally with some cells cleared (a goal cluster the
/// planner must be allowed to grow through).
Grid<std::uint8_t> planning_grid(const SemanticMap& map, std::span<const Cell> carve = {}, int inflation = 0);

}  // namespace ovmm
