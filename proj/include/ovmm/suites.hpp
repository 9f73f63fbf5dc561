#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovmm/eval.hpp"

namespace ovmm {

/// A set of scenes built to provoke one failure mode, plus the perception noise it runs with.
struct FailureSuite {
    std::string name;  // floor, pick, edge, corridor, drop
    std::string flag;  // the improvement that addresses it
    NoiseConfig noise;
    std::uint64_t seed_base = 0;
    std::vector<Scene> scenes;
};

const std::vector<std::string>& failure_suite_names();

/// Throws std::invalid_argument for an unknown name.
FailureSuite make_failure_suite(const std::string& name, int count = 30);

/// Start room with a 9x9 end receptacle, a 2-wide corridor, and a second room with a
/// regular end receptacle. Object on a chair in the start room.
Scene corridor_scene(std::uint64_t index);

struct SuiteOutcome {
    int episodes = 0;
    int floor_goal_episodes = 0;       // episodes that chose a floor cell as a cluster goal
    int empty_handed_episodes = 0;     // episodes that navigated to the end receptacle holding nothing
    int place_fallen = 0;
    int place_collision_large = 0;
    int budget_in_navigate = 0;        // budget terminations in a Navigate phase
    int max_arrivals_per_goal = 0;
    int successes = 0;
    std::vector<EpisodeResult> results;
};

/// Runs every scene of the suite once; episode i uses perception seed seed_base + i.
SuiteOutcome run_failure_suite(const FailureSuite& suite, AgentConfig config, int budget, bool keep_traces = false);

}  // namespace ovmm
