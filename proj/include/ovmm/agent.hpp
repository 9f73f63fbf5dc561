#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ovmm/mapping.hpp"
#include "ovmm/perception.hpp"
#include "ovmm/planning.hpp"
#include "ovmm/rng.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Phase : std::uint8_t {
    FindObject,
    NavigateToObject,
    PickObject,
    FindEndReceptacle,
    NavigateToEndReceptacle,
    PlaceObject,
};

std::string to_string(Phase p);
Phase parse_phase(std::string_view name);

/// Edges of the skill graph, including PickObject -> FindObject and self-loops.
bool legal_transition(Phase from, Phase to);

struct AgentFlags {
    bool dynamic_thresholds = false;
    bool height_filter = false;
    bool prob_goal_selection = false;
    bool oscillation_guard = false;
    bool collision_marking = false;
    bool center_alignment = false;
    bool pick_retry = false;
    bool pick_verify = false;
    bool incremental_approach = false;
    bool edge_safe_placement = false;
    bool surface_fallback = false;
    bool drop_from_height = false;

    static AgentFlags baseline() { return {}; }
    static AgentFlags uniteam();

    /// Flag names in declaration order.
    static const std::vector<std::string>& names();
    bool get(std::string_view name) const;
    /// Throws ConfigError for an unknown name.
    void set(std::string_view name, bool value);

    friend bool operator==(const AgentFlags&, const AgentFlags&) = default;
};

struct AgentConfig {
    AgentFlags flags;
    NoiseConfig noise;
    ThresholdDefaults thresholds;
    double height_floor = 0.10;     // meters
    double lookahead = 8.0;         // cells
    int inflation = 0;              // cells
    OscillationParams oscillation;
    double arrive_radius = 3.0;     // navigation stops this close to an object or receptacle target
    double place_radius = 2.0;      // incremental approach stops this close to the placement cell
    double goal_reach = 6.0;        // a cluster cell is a candidate goal when a reachable cell lies this close
    int scan_turns = 12;
    int pick_scan_left = 2;
    int pick_scan_right = 4;
    int edge_margin = 2;
    int survey_turns = 6;           // turns spent looking for a surface interior before placing
    int approach_max_steps = 15;
    int fallback_turns = 3;
    Fusion fusion = Fusion::Max;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Per-episode skill memory.
struct SkillState {
    Phase phase = Phase::FindObject;
    int scan_turns_remaining = 0;
    std::vector<Action> pick_scan_plan;  // remaining retry turns, front first
    int approach_step_count = 0;
    NavHistory nav;
    std::optional<int> held;              // set on PickSuccess
    bool believes_holding = false;        // also set by an unverified pick
    std::optional<Cell> placement_cell;
    int target_cluster = -1;
    int step = 0;                         // decisions taken so far

    // Skill-local counters.
    bool pick_started = false;
    int face_turns = 0;
    int blind_moves_left = -1;            // -1: not planned yet
    int fallback_turns_used = 0;
    int survey_turns = 0;
    bool place_issued = false;
    std::optional<Cell> pick_target;
};

/// What the agent decided and why, for traces.
struct StepInfo {
    Phase phase = Phase::FindObject;
    std::optional<Cell> goal;
    int goal_cluster = -1;
    std::optional<Cell> short_term_goal;
    bool exploring = false;
    std::vector<Phase> entered;  // phases entered during this step, in order
};

class Agent {
public:
    /// Same as reset(). Throws ConfigError.
    Agent(const EpisodeGoal& goal, const AgentConfig& config, int width, int height, std::uint64_t seed);

    /// Fresh state: FindObject, a full scan pending, an empty map, the perception
    /// stream for `seed`. Throws ConfigError on a malformed goal or config.
    void reset(const EpisodeGoal& goal, const AgentConfig& config, int width, int height, std::uint64_t seed);

    /// One pipeline step: detect, filter, integrate, then run the current skill.
    /// `last_event` is the world's answer to the previous action.
    Action act(const Observation& obs, const Event& last_event, StepInfo* info = nullptr);

    const SkillState& state() const { return state_; }
    const SemanticMap& map() const { return map_; }
    const EpisodeGoal& goal() const { return goal_; }
    const AgentConfig& config() const { return config_; }
    const std::vector<Detection>& detections() const { return detections_; }

private:
    struct NavStep {
        enum class Kind { Move, Arrived, Unreachable } kind = Kind::Unreachable;
        Action action = TurnLeft30{};
    };

    Action decide();
    std::optional<Action> find_object();
    std::optional<Action> navigate_to_object();
    std::optional<Action> pick_object();
    std::optional<Action> find_end_receptacle();
    std::optional<Action> navigate_to_end_receptacle();
    std::optional<Action> place_object();

    void transition(Phase to);
    void after_pick();
    std::optional<Action> explore();
    std::optional<Action> face(Cell target);
    NavStep nav_to_cells(const std::vector<Cell>& goals, const std::vector<Cell>& carve = {});
    NavStep nav_to_target(Cell target, double radius);
    std::optional<GoalChoice> choose_cluster_target(GoalKind kind, bool ignore_blacklist = false);
    bool guard_trips(int cluster);
    std::set<int> blacklisted() const;
    bool has_cluster(ClassId cls, bool ignore_blacklist = false) const;
    std::optional<Cell> placement_cell(int cluster_id, bool* deep = nullptr) const;
    std::optional<Cell> unseen_rim(int cluster_id) const;
    Action final_place(Cell target);
    const DistanceField& field_from_pose();
    const DistanceField& field_to(const std::vector<Cell>& goals, const std::vector<Cell>& carve);
    std::optional<Cell> detected(ClassId cls) const;

    EpisodeGoal goal_;
    AgentConfig config_;
    ThresholdTable thresholds_;
    Rng rng_;
    SemanticMap map_;
    SkillState state_;
    Pose pose_;
    std::optional<Action> last_action_;
    std::optional<Cell> last_stg_;
    Event last_event_;
    std::vector<Detection> detections_;
    StepInfo info_;

    struct FieldCache {
        std::uint64_t version = ~0ull;
        std::vector<Cell> goals;
        std::vector<Cell> carve;
        DistanceField field;
    };
    std::vector<FieldCache> cache_;
    std::size_t cache_next_ = 0;
};

}  // namespace ovmm
