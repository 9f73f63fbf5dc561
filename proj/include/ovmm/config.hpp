#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovmm/agent.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

/// Everything a run needs besides the seed range and variant list.
struct RunConfig {
    SceneConfig scene;
    AgentConfig agent;
    int budget = 1250;
};

/// Every accepted key, sorted.
const std::vector<std::string>& config_keys();

/// Applies one key. Throws ConfigError for an unknown key or a malformed value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Flat "key = value" text. Blank lines and lines starting with '#' are ignored.
/// Keys not mentioned keep their value from `base`. Throws ConfigError (with the line number).
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

struct SeedRange {
    std::uint64_t first = 0;
    std::uint64_t last = 0;
};

/// "A..B" with A <= B, or a single seed "A". Throws ConfigError.
SeedRange parse_seed_range(const std::string& text);

/// Agent flags for a named preset: baseline (all off), uniteam (all on), custom (as configured).
/// Throws ConfigError for another name.
AgentFlags preset_flags(const std::string& agent, const AgentFlags& configured);

/// "FLAG=on" or "FLAG=off". Throws ConfigError.
void apply_ablation(AgentFlags& flags, const std::string& spec);

/// All keys in sorted order, one "key = value" per line.
std::string canonical_text(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string fingerprint(const RunConfig& config);
std::string fnv1a_hex(const std::string& text);

}  // namespace ovmm
