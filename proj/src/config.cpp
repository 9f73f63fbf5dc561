#include "ovmm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ovmm/rng.hpp"

namespace ovmm {

namespace {

struct Key {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ConfigError("expected on/off: '" + s + "'");
}

ClassId parse_class(const std::string& s) {
    if (auto c = find_class(s)) return *c;
    throw ConfigError("unknown class '" + s + "'");
}

std::string fmt_goal_class(ClassId c) { return c == kNoClass ? "random" : std::string(class_name(c)); }
ClassId parse_goal_class(const std::string& s) { return s == "random" ? kNoClass : parse_class(s); }

std::string fmt_classes(const std::vector<ClassId>& v) {
    if (v.empty()) return "default";
    std::string out;
    for (ClassId c : v) out += (out.empty() ? "" : ",") + std::string(class_name(c));
    return out;
}

std::vector<ClassId> parse_classes(const std::string& s) {
    std::vector<ClassId> out;
    if (s == "default") return out;
    for (const auto& p : split(s, ',')) out.push_back(parse_class(p));
    return out;
}

std::string fmt_pairs(const std::vector<ClassPair>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (auto [a, b] : v) out += (out.empty() ? "" : ",") + std::string(class_name(a)) + ":" + std::string(class_name(b));
    return out;
}

std::vector<ClassPair> parse_pairs(const std::string& s) {
    std::vector<ClassPair> out;
    if (s == "none") return out;
    for (const auto& p : split(s, ',')) {
        const auto colon = p.find(':');
        if (colon == std::string::npos) throw ConfigError("expected a:b in '" + p + "'");
        out.emplace_back(parse_class(trim(p.substr(0, colon))), parse_class(trim(p.substr(colon + 1))));
    }
    return out;
}

template <class F>
Key int_key(F field) {
    return {[field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); },
            [field](RunConfig& c, const std::string& v) { field(c) = parse_int(v); }};
}

template <class F>
Key double_key(F field) {
    return {[field](const RunConfig& c) { return fmt_double(field(const_cast<RunConfig&>(c))); },
            [field](RunConfig& c, const std::string& v) { field(c) = parse_double(v); }};
}

const std::map<std::string, Key>& registry() {
    static const std::map<std::string, Key> keys = [] {
        std::map<std::string, Key> k;
        k["budget"] = int_key([](RunConfig& c) -> int& { return c.budget; });

        k["scene.width"] = int_key([](RunConfig& c) -> int& { return c.scene.width; });
        k["scene.height"] = int_key([](RunConfig& c) -> int& { return c.scene.height; });
        k["scene.rooms_min"] = int_key([](RunConfig& c) -> int& { return c.scene.rooms_min; });
        k["scene.rooms_max"] = int_key([](RunConfig& c) -> int& { return c.scene.rooms_max; });
        k["scene.min_room_side"] = int_key([](RunConfig& c) -> int& { return c.scene.min_room_side; });
        k["scene.start_instances_min"] = int_key([](RunConfig& c) -> int& { return c.scene.start_instances_min; });
        k["scene.start_instances_max"] = int_key([](RunConfig& c) -> int& { return c.scene.start_instances_max; });
        k["scene.end_instances_min"] = int_key([](RunConfig& c) -> int& { return c.scene.end_instances_min; });
        k["scene.end_instances_max"] = int_key([](RunConfig& c) -> int& { return c.scene.end_instances_max; });
        k["scene.distractors_min"] = int_key([](RunConfig& c) -> int& { return c.scene.distractors_min; });
        k["scene.distractors_max"] = int_key([](RunConfig& c) -> int& { return c.scene.distractors_max; });
        k["scene.max_retries"] = int_key([](RunConfig& c) -> int& { return c.scene.max_retries; });
        k["scene.goal_object"] = {[](const RunConfig& c) { return fmt_goal_class(c.scene.goal.object); },
                                  [](RunConfig& c, const std::string& v) { c.scene.goal.object = parse_goal_class(v); }};
        k["scene.goal_start_receptacle"] = {
            [](const RunConfig& c) { return fmt_goal_class(c.scene.goal.start_receptacle); },
            [](RunConfig& c, const std::string& v) { c.scene.goal.start_receptacle = parse_goal_class(v); }};
        k["scene.goal_end_receptacle"] = {
            [](const RunConfig& c) { return fmt_goal_class(c.scene.goal.end_receptacle); },
            [](RunConfig& c, const std::string& v) { c.scene.goal.end_receptacle = parse_goal_class(v); }};
        k["scene.object_classes"] = {[](const RunConfig& c) { return fmt_classes(c.scene.object_classes); },
                                     [](RunConfig& c, const std::string& v) { c.scene.object_classes = parse_classes(v); }};
        k["scene.start_classes"] = {[](const RunConfig& c) { return fmt_classes(c.scene.start_classes); },
                                    [](RunConfig& c, const std::string& v) { c.scene.start_classes = parse_classes(v); }};
        k["scene.end_classes"] = {[](const RunConfig& c) { return fmt_classes(c.scene.end_classes); },
                                  [](RunConfig& c, const std::string& v) { c.scene.end_classes = parse_classes(v); }};
        k["physics.reach"] = double_key([](RunConfig& c) -> double& { return c.scene.rules.reach; });
        k["physics.fov_degrees"] = double_key([](RunConfig& c) -> double& { return c.scene.rules.fov_degrees; });
        k["physics.view_range"] = int_key([](RunConfig& c) -> int& { return c.scene.rules.view_range; });
        k["physics.fall_margin"] = int_key([](RunConfig& c) -> int& { return c.scene.rules.fall_margin; });

        k["noise.p_miss"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.p_miss; });
        k["noise.p_confuse"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.p_confuse; });
        k["noise.p_floor_fp"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.p_floor_fp; });
        k["noise.confusion_pairs"] = {
            [](const RunConfig& c) { return fmt_pairs(c.agent.noise.confusion_pairs); },
            [](RunConfig& c, const std::string& v) { c.agent.noise.confusion_pairs = parse_pairs(v); }};
        k["noise.true_object_lo"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.true_object.lo; });
        k["noise.true_object_hi"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.true_object.hi; });
        k["noise.true_receptacle_lo"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.true_receptacle.lo; });
        k["noise.true_receptacle_hi"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.true_receptacle.hi; });
        k["noise.confused_lo"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.confused.lo; });
        k["noise.confused_hi"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.confused.hi; });
        k["noise.floor_lo"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.floor.lo; });
        k["noise.floor_hi"] = double_key([](RunConfig& c) -> double& { return c.agent.noise.floor.hi; });

        k["thresholds.goal_object"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.goal_object; });
        k["thresholds.start_receptacle"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.start_receptacle; });
        k["thresholds.end_receptacle"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.end_receptacle; });
        k["thresholds.other_object"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.other_object; });
        k["thresholds.other_receptacle"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.other_receptacle; });
        k["thresholds.legacy"] = double_key([](RunConfig& c) -> double& { return c.agent.thresholds.legacy; });

        k["agent.height_floor"] = double_key([](RunConfig& c) -> double& { return c.agent.height_floor; });
        k["agent.lookahead"] = double_key([](RunConfig& c) -> double& { return c.agent.lookahead; });
        k["agent.inflation"] = int_key([](RunConfig& c) -> int& { return c.agent.inflation; });
        k["agent.arrive_radius"] = double_key([](RunConfig& c) -> double& { return c.agent.arrive_radius; });
        k["agent.place_radius"] = double_key([](RunConfig& c) -> double& { return c.agent.place_radius; });
        k["agent.goal_reach"] = double_key([](RunConfig& c) -> double& { return c.agent.goal_reach; });
        k["agent.scan_turns"] = int_key([](RunConfig& c) -> int& { return c.agent.scan_turns; });
        k["agent.pick_scan_left"] = int_key([](RunConfig& c) -> int& { return c.agent.pick_scan_left; });
        k["agent.pick_scan_right"] = int_key([](RunConfig& c) -> int& { return c.agent.pick_scan_right; });
        k["agent.edge_margin"] = int_key([](RunConfig& c) -> int& { return c.agent.edge_margin; });
        k["agent.survey_turns"] = int_key([](RunConfig& c) -> int& { return c.agent.survey_turns; });
        k["agent.approach_max_steps"] = int_key([](RunConfig& c) -> int& { return c.agent.approach_max_steps; });
        k["agent.fallback_turns"] = int_key([](RunConfig& c) -> int& { return c.agent.fallback_turns; });
        k["agent.fusion"] = {[](const RunConfig& c) { return std::string(c.agent.fusion == Fusion::Max ? "max" : "average"); },
                             [](RunConfig& c, const std::string& v) {
                                 if (v == "max") c.agent.fusion = Fusion::Max;
                                 else if (v == "average") c.agent.fusion = Fusion::Average;
                                 else throw ConfigError("fusion must be max or average");
                             }};
        k["oscillation.h"] = int_key([](RunConfig& c) -> int& { return c.agent.oscillation.window; });
        k["oscillation.r"] = int_key([](RunConfig& c) -> int& { return c.agent.oscillation.repeats; });
        k["oscillation.t"] = int_key([](RunConfig& c) -> int& { return c.agent.oscillation.blacklist_steps; });

        for (const auto& name : AgentFlags::names())
            k["flags." + name] = {[name](const RunConfig& c) { return std::string(c.agent.flags.get(name) ? "on" : "off"); },
                                  [name](RunConfig& c, const std::string& v) { c.agent.flags.set(name, parse_bool(v)); }};
        return k;
    }();
    return keys;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : registry()) v.push_back(k);
        return v;
    }();
    return names;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    const auto it = registry().find(key);
    if (it == registry().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) {
    const auto it = registry().find(key);
    if (it == registry().end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second.get(config);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        try {
            set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    if (base.budget < 1) throw ConfigError("budget must be at least 1");
    base.agent.validate();
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string canonical_text(const RunConfig& config) {
    std::string out;
    for (const auto& [k, key] : registry()) out += k + " = " + key.get(config) + "\n";
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

SeedRange parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    auto number = [&](const std::string& s) {
        std::uint64_t v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
            throw ConfigError("bad seed range '" + text + "'");
        return v;
    };
    SeedRange r;
    if (dots == std::string::npos) {
        r.first = r.last = number(text);
    } else {
        r.first = number(text.substr(0, dots));
        r.last = number(text.substr(dots + 2));
    }
    if (r.first > r.last) throw ConfigError("empty seed range '" + text + "'");
    return r;
}

AgentFlags preset_flags(const std::string& agent, const AgentFlags& configured) {
    if (agent == "baseline") return AgentFlags::baseline();
    if (agent == "uniteam") return AgentFlags::uniteam();
    if (agent == "custom") return configured;
    throw ConfigError("unknown agent '" + agent + "' (baseline, uniteam or custom)");
}

void apply_ablation(AgentFlags& flags, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("ablation must look like FLAG=on or FLAG=off: '" + spec + "'");
    flags.set(trim(spec.substr(0, eq)), parse_bool(trim(spec.substr(eq + 1))));
}

std::string fingerprint(const RunConfig& config) { return fnv1a_hex(canonical_text(config)); }

}  // namespace ovmm
