#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ovmm/agent.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

enum class Termination : std::uint8_t { Stop, Budget, Error };
std::string to_string(Termination t);

struct Stages {
    bool found_object = false;
    bool picked = false;
    bool found_end_receptacle = false;
    bool placed_correctly = false;

    int count() const { return int(found_object) + int(picked) + int(found_end_receptacle) + int(placed_correctly); }
    friend bool operator==(const Stages&, const Stages&) = default;
};

/// One decision and its outcome. `pose` is where the decision was made.
struct TraceRecord {
    int step = 0;
    Phase phase = Phase::FindObject;
    std::vector<Phase> entered;
    Action action = Stop{};
    Event event;
    Pose pose;
    std::optional<Cell> goal;
    int goal_cluster = -1;
    bool exploring = false;
    bool holding = false;  // world state when the decision was made
    int explored = 0;      // explored cells in the agent map after this frame
};

/// Counters the targeted experiments look at.
struct EpisodeCounters {
    int floor_goals = 0;             // steps whose chosen cluster goal is a free floor cell
    int empty_handed_navigation = 0; // steps in NavigateToEndReceptacle while holding nothing
    int place_fallen = 0;
    int place_collision_large = 0;
    int max_arrivals_per_goal = 0;   // most arrivals at one cell under one cluster goal
};

struct EpisodeResult {
    std::uint64_t seed = 0;
    bool overall_success = false;
    Stages stages;
    double partial_success = 0.0;
    int steps = 0;
    Termination termination = Termination::Budget;
    Phase final_phase = Phase::FindObject;
    std::string error;
    EpisodeCounters counters;
    std::vector<TraceRecord> trace;
};

/// Goal object resting on any instance of the end class.
bool placed_on_end_class(const Scene& scene);

/// Full episode on a generated scene. Throws ConfigError or GenerationFailed.
/// When `final_map` is given it receives the agent's map at termination.
EpisodeResult run_episode(std::uint64_t seed, const SceneConfig& scene_config, const AgentConfig& agent_config,
                          int budget, bool keep_trace = true, SemanticMap* final_map = nullptr);

/// Full episode on a given scene; `seed` drives perception.
EpisodeResult run_scene(Scene scene, std::uint64_t seed, const AgentConfig& agent_config, int budget,
                        bool keep_trace = true, SemanticMap* final_map = nullptr);

/// Runs an arbitrary policy; stages that need an agent map stay false.
using Policy = std::function<Action(const Observation&, const Event&)>;
EpisodeResult run_policy(Scene scene, const Policy& policy, int budget);

/// Counters recomputed from a trace (used for the per-goal arrival bound).
int max_arrivals_per_goal(const std::vector<TraceRecord>& trace);

struct Variant {
    std::string name;
    AgentConfig config;
};

struct VariantRow {
    std::string name;
    int episodes = 0;
    double overall = 0.0;  // percent
    double partial = 0.0;  // percent
    double mean_steps = 0.0;
};

struct SuiteReport {
    std::string fingerprint;
    std::vector<VariantRow> rows;
    std::vector<std::vector<EpisodeResult>> results;  // per variant, seed order
};

/// Exact means over the per-episode results.
VariantRow aggregate(const std::string& name, const std::vector<EpisodeResult>& results);

/// Every (seed, variant) pair, seeds ascending. Throws std::invalid_argument on duplicate names.
SuiteReport run_suite(std::uint64_t first_seed, std::uint64_t last_seed, const SceneConfig& scene_config,
                      const std::vector<Variant>& variants, int budget, const std::string& fingerprint,
                      bool keep_trace = false);

std::string report_csv(const SuiteReport& report);
std::string report_text(const SuiteReport& report);

/// Reference figures of the original challenge entry, for documentation only.
std::string reference_rows_text();

// ---------------------------------------------------------------- traces

/// Line-delimited JSON: a header with the scene, one line per step, a result line.
std::string trace_jsonl(const Scene& scene, const EpisodeResult& result, const std::string& variant,
                        const std::string& fingerprint);

struct ParsedTrace {
    Scene scene;
    std::string variant;
    std::vector<Pose> poses;
    std::vector<Phase> phases;
    EpisodeResult result;  // summary fields only
};

/// Throws std::runtime_error on malformed input.
ParsedTrace parse_trace(const std::string& text);

}  // namespace ovmm
