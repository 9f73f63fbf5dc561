#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ovmm/classes.hpp"
#include "ovmm/geometry.hpp"

namespace ovmm {

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidAction : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class SceneParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CellKind : std::uint8_t { Free, Wall, Receptacle };

inline constexpr std::int32_t kFreeCell = -1;
inline constexpr std::int32_t kWallCell = -2;

struct Pose {
    Cell cell;
    int heading = 0;  // degrees, a multiple of 30 in [0, 360)

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Heading rounded to the nearest of the 8 grid directions.
inline int heading_dir(int heading) { return nearest_dir(heading); }
inline int normalize_heading(int h) { return ((h % 360) + 360) % 360; }

struct ReceptacleInstance {
    int id = 0;
    ClassId cls = kNoClass;
    std::vector<Cell> cells;
    double surface_height = 0.0;

    friend bool operator==(const ReceptacleInstance&, const ReceptacleInstance&) = default;
};

enum class ObjectState : std::uint8_t { OnReceptacle, Held, OnFloor, Fallen };

struct ObjectInstance {
    int id = 0;
    ClassId cls = kNoClass;
    Cell cell;
    SizeClass size = SizeClass::Small;
    ObjectState state = ObjectState::OnReceptacle;
    int receptacle = -1;  // valid while OnReceptacle

    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

/// Fixed simulator conventions for reach, camera, and placement.
struct PhysicsRules {
    double reach = 6.0;     // cells, Euclidean
    double fov_degrees = 90.0;
    int view_range = 20;    // cells
    int fall_margin = 1;    // placements this close to a receptacle boundary fall off

    friend bool operator==(const PhysicsRules&, const PhysicsRules&) = default;
};

struct Scene {
    int width = 0;
    int height = 0;
    Grid<std::int32_t> cells;  // kFreeCell, kWallCell or receptacle index
    std::vector<ReceptacleInstance> receptacles;
    std::vector<ObjectInstance> objects;
    Pose start_pose;
    EpisodeGoal goal;
    int goal_object = 0;  // index into objects
    PhysicsRules rules;

    CellKind kind(Cell c) const {
        const auto v = cells[c];
        if (v == kFreeCell) return CellKind::Free;
        if (v == kWallCell) return CellKind::Wall;
        return CellKind::Receptacle;
    }
    bool in_bounds(Cell c) const { return cells.in_bounds(c); }
    bool is_free(Cell c) const { return in_bounds(c) && cells[c] == kFreeCell; }
    bool is_opaque(Cell c) const { return in_bounds(c) && cells[c] != kFreeCell; }
    /// Receptacle index at c, or -1.
    int receptacle_at(Cell c) const { return in_bounds(c) && cells[c] >= 0 ? cells[c] : -1; }

    const ObjectInstance& target_object() const { return objects.at(static_cast<std::size_t>(goal_object)); }

    friend bool operator==(const Scene&, const Scene&) = default;
};

// ---------------------------------------------------------------- actions

struct MoveForward {
    friend bool operator==(MoveForward, MoveForward) = default;
};
struct TurnLeft30 {
    friend bool operator==(TurnLeft30, TurnLeft30) = default;
};
struct TurnRight30 {
    friend bool operator==(TurnRight30, TurnRight30) = default;
};
struct Pick {
    Cell target;
    friend bool operator==(Pick, Pick) = default;
};
struct Place {
    Cell target;
    bool drop_from_height = false;
    friend bool operator==(Place, Place) = default;
};
struct Stop {
    friend bool operator==(Stop, Stop) = default;
};

using Action = std::variant<MoveForward, TurnLeft30, TurnRight30, Pick, Place, Stop>;

std::string to_string(const Action& a);

// ---------------------------------------------------------------- events

enum class EventKind : std::uint8_t {
    None,
    Collision,
    PickSuccess,
    PickFailure,
    PlaceSuccess,
    PlaceFallen,
    PlaceCollision,
    PlaceFailure,
};

enum class FailureReason : std::uint8_t { None, OutOfRange, NotInView, NoObject, NotReceptacle };

struct Event {
    EventKind kind = EventKind::None;
    int object_id = -1;
    FailureReason reason = FailureReason::None;

    friend bool operator==(const Event&, const Event&) = default;
};

std::string to_string(EventKind k);
std::string to_string(FailureReason r);
std::string to_string(ObjectState s);

struct RobotState {
    Pose pose;
    std::optional<int> held;  // object id

    friend bool operator==(const RobotState&, const RobotState&) = default;
};

// ---------------------------------------------------------------- generation

struct SceneConfig {
    int width = 48;
    int height = 48;
    int rooms_min = 3;
    int rooms_max = 6;
    int min_room_side = 7;
    // Goal classes; kNoClass means "draw at random".
    EpisodeGoal goal;
    std::vector<ClassId> object_classes;      // empty: every object class
    std::vector<ClassId> start_classes;       // empty: every receptacle class
    std::vector<ClassId> end_classes;         // empty: receptacles with a >=3 footprint
    int start_instances_min = 1;
    int start_instances_max = 2;
    int end_instances_min = 2;
    int end_instances_max = 3;
    int distractors_min = 2;
    int distractors_max = 5;
    int max_retries = 64;
    PhysicsRules rules;
};

/// Builds a solvable scene. Identical (seed, config) gives an identical scene.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config);

/// Free cells reachable from `from` by 8-connected motion over free cells.
Grid<std::uint8_t> reachable_free(const Scene& scene, Cell from);

/// Chebyshev distance from a receptacle cell to the nearest cell outside its instance.
int edge_depth(const Scene& scene, Cell c);

// ---------------------------------------------------------------- dynamics

bool in_view_cone(Pose pose, Cell target, double fov_degrees);

/// Applies one action. Mutates robot and scene objects; returns the resulting event.
/// Throws InvalidAction for Pick while holding or Place while empty-handed.
Event step(Scene& scene, RobotState& robot, const Action& action);

// ---------------------------------------------------------------- observation

struct VisibleCell {
    Cell cell;
    double distance = 0.0;  // cells
    CellKind kind = CellKind::Free;
    int receptacle = -1;
    ClassId semantic = kNoClass;
    double surface_height = 0.0;  // meters; walls report kWallHeight

    friend bool operator==(const VisibleCell&, const VisibleCell&) = default;
};

inline constexpr double kWallHeight = 2.5;

struct VisibleObject {
    int id = 0;
    ClassId cls = kNoClass;
    Cell cell;
    double surface_height = 0.0;

    friend bool operator==(const VisibleObject&, const VisibleObject&) = default;
};

struct Observation {
    Pose pose;
    std::vector<VisibleCell> cells;  // row-major order
    std::vector<VisibleObject> objects;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Ray-cast egocentric view: cone and range from the rules, walls and other receptacles occlude.
/// A receptacle's own top surface never hides its other cells.
Observation observe(const Scene& scene, const Pose& pose);

// ---------------------------------------------------------------- serialization

std::string serialize_scene(const Scene& scene);
Scene parse_scene(const std::string& text);

}  // namespace ovmm
