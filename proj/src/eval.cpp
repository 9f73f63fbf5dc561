#include "ovmm/eval.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ovmm {

using nlohmann::json;

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Stop: return "stop";
        case Termination::Budget: return "budget";
        case Termination::Error: return "error";
    }
    return "?";
}

bool placed_on_end_class(const Scene& scene) {
    const auto& obj = scene.target_object();
    if (obj.state != ObjectState::OnReceptacle) return false;
    const int r = scene.receptacle_at(obj.cell);
    return r >= 0 && scene.receptacles[static_cast<std::size_t>(r)].cls == scene.goal.end_receptacle;
}

namespace {

bool is_navigate(Phase p) { return p == Phase::NavigateToObject || p == Phase::NavigateToEndReceptacle; }

int explored_count(const SemanticMap& map) {
    int n = 0;
    for (auto v : map.explored.data()) n += v != 0;
    return n;
}

EpisodeResult run_loop(Scene& scene, int budget, Agent* agent, const Policy* policy, bool keep_trace) {
    if (budget < 1) throw ConfigError("budget must be at least 1");
    EpisodeResult res;
    RobotState robot{scene.start_pose, std::nullopt};
    Event last{};
    bool placed_once = false;
    res.termination = Termination::Budget;

    auto update_stages = [&]() {
        const auto& obj = scene.target_object();
        if (agent && !res.stages.found_object && obj.state != ObjectState::Held)
            for (const Cluster* c : agent->map().clusters_of(scene.goal.object))
                if (std::find(c->cells.begin(), c->cells.end(), obj.cell) != c->cells.end()) res.stages.found_object = true;
        if (obj.state == ObjectState::Held) res.stages.picked = true;
        if (agent && robot.held && agent->state().phase == Phase::PlaceObject && agent->state().placement_cell) {
            const int r = scene.receptacle_at(*agent->state().placement_cell);
            if (r >= 0 && scene.receptacles[static_cast<std::size_t>(r)].cls == scene.goal.end_receptacle)
                res.stages.found_end_receptacle = true;
        }
        if (placed_on_end_class(scene)) {
            res.stages.placed_correctly = true;
            res.stages.found_end_receptacle = true;
        }
    };

    for (int step = 0; step < budget; ++step) {
        const Observation obs = observe(scene, robot.pose);
        StepInfo info;
        const Action action = agent ? agent->act(obs, last, &info) : (*policy)(obs, last);
        TraceRecord rec;
        rec.step = step;
        rec.action = action;
        rec.pose = robot.pose;
        rec.holding = robot.held.has_value();
        if (agent) {
            rec.phase = info.phase;
            rec.entered = info.entered;
            rec.goal = info.goal;
            rec.goal_cluster = info.goal_cluster;
            rec.exploring = info.exploring;
            rec.explored = explored_count(agent->map());

            if (info.goal && info.goal_cluster >= 0 && !info.exploring) {
                const Cluster* c = agent->map().find_cluster(info.goal_cluster);
                if (c && std::find(c->cells.begin(), c->cells.end(), *info.goal) != c->cells.end() &&
                    scene.is_free(*info.goal))
                    ++res.counters.floor_goals;
            }
            if (info.phase == Phase::NavigateToEndReceptacle && !robot.held && !placed_once)
                ++res.counters.empty_handed_navigation;
        }
        res.steps = step + 1;
        update_stages();
        if (std::holds_alternative<Stop>(action)) {
            res.termination = Termination::Stop;
            if (keep_trace) res.trace.push_back(std::move(rec));
            break;
        }
        if (std::holds_alternative<Place>(action)) placed_once = true;
        try {
            last = ovmm::step(scene, robot, action);
        } catch (const InvalidAction& e) {
            res.termination = Termination::Error;
            res.error = e.what();
            if (keep_trace) res.trace.push_back(std::move(rec));
            break;
        }
        rec.event = last;
        if (last.kind == EventKind::PlaceFallen) ++res.counters.place_fallen;
        if (last.kind == EventKind::PlaceCollision && scene.target_object().size == SizeClass::Large)
            ++res.counters.place_collision_large;
        update_stages();
        if (keep_trace) res.trace.push_back(std::move(rec));
    }
    if (agent) res.final_phase = agent->state().phase;
    res.overall_success = placed_on_end_class(scene);
    res.partial_success = res.stages.count() / 4.0;
    if (keep_trace) res.counters.max_arrivals_per_goal = max_arrivals_per_goal(res.trace);
    return res;
}

}  // namespace

int max_arrivals_per_goal(const std::vector<TraceRecord>& trace) {
    std::map<std::pair<int, Cell>, int> counts;
    int best = 0;
    std::optional<Cell> prev;
    for (const auto& r : trace) {
        const bool arrived = !prev || *prev != r.pose.cell;
        prev = r.pose.cell;
        if (!arrived || !is_navigate(r.phase) || r.exploring || r.goal_cluster < 0) continue;
        best = std::max(best, ++counts[{r.goal_cluster, r.pose.cell}]);
    }
    return best;
}

EpisodeResult run_scene(Scene scene, std::uint64_t seed, const AgentConfig& agent_config, int budget, bool keep_trace,
                        SemanticMap* final_map) {
    Agent agent(scene.goal, agent_config, scene.width, scene.height, seed);
    EpisodeResult r = run_loop(scene, budget, &agent, nullptr, keep_trace);
    r.seed = seed;
    if (final_map) *final_map = agent.map();
    return r;
}

EpisodeResult run_episode(std::uint64_t seed, const SceneConfig& scene_config, const AgentConfig& agent_config,
                          int budget, bool keep_trace, SemanticMap* final_map) {
    return run_scene(generate_scene(seed, scene_config), seed, agent_config, budget, keep_trace, final_map);
}

EpisodeResult run_policy(Scene scene, const Policy& policy, int budget) {
    return run_loop(scene, budget, nullptr, &policy, true);
}

VariantRow aggregate(const std::string& name, const std::vector<EpisodeResult>& results) {
    VariantRow row;
    row.name = name;
    row.episodes = static_cast<int>(results.size());
    if (results.empty()) return row;
    long overall = 0;
    long quarters = 0;
    long steps = 0;
    for (const auto& r : results) {
        overall += r.overall_success;
        quarters += r.stages.count();
        steps += r.steps;
    }
    const double n = static_cast<double>(results.size());
    row.overall = 100.0 * overall / n;
    row.partial = 100.0 * quarters / (4.0 * n);
    row.mean_steps = steps / n;
    return row;
}

SuiteReport run_suite(std::uint64_t first_seed, std::uint64_t last_seed, const SceneConfig& scene_config,
                      const std::vector<Variant>& variants, int budget, const std::string& fingerprint,
                      bool keep_trace) {
    std::set<std::string> names;
    for (const auto& v : variants)
        if (!names.insert(v.name).second) throw std::invalid_argument("duplicate variant name '" + v.name + "'");
    SuiteReport rep;
    rep.fingerprint = fingerprint;
    for (const auto& v : variants) {
        std::vector<EpisodeResult> results;
        for (std::uint64_t s = first_seed; s <= last_seed; ++s)
            results.push_back(run_episode(s, scene_config, v.config, budget, keep_trace));
        rep.rows.push_back(aggregate(v.name, results));
        rep.results.push_back(std::move(results));
    }
    return rep;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

const char* kWeightNote = "partial success = 4 equal stages (found object, picked, found end receptacle, placed)";

}  // namespace

std::string report_csv(const SuiteReport& report) {
    std::ostringstream out;
    out << "# fingerprint " << report.fingerprint << '\n';
    out << "# " << kWeightNote << '\n';
    out << "variant,episodes,overall_success_pct,partial_success_pct,mean_steps\n";
    for (const auto& r : report.rows)
        out << r.name << ',' << r.episodes << ',' << fixed(r.overall, 2) << ',' << fixed(r.partial, 2) << ','
            << fixed(r.mean_steps, 2) << '\n';
    return out.str();
}

std::string report_text(const SuiteReport& report) {
    std::ostringstream out;
    out << "fingerprint " << report.fingerprint << '\n';
    out << kWeightNote << '\n';
    std::size_t w = 7;
    for (const auto& r : report.rows) w = std::max(w, r.name.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s %8s %10s %10s %10s\n", int(w), "variant", "episodes", "overall%",
                  "partial%", "steps");
    out << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%-*s %8d %10.2f %10.2f %10.2f\n", int(w), r.name.c_str(), r.episodes,
                      r.overall, r.partial, r.mean_steps);
        out << line;
    }
    return out.str();
}

std::string reference_rows_text() {
    return "reference (challenge test phase, not reproducible in this simulator)\n"
           "UniTeam   overall 2.0%  partial 18.6%  steps 1140.54\n"
           "baseline  overall 0.0%  partial 10.5%  steps 1063.74\n";
}

// ---------------------------------------------------------------- traces

namespace {

json cell_json(Cell c) { return json::array({c.x, c.y}); }

json action_json(const Action& a) {
    json j;
    j["type"] = to_string(a);
    if (const auto* p = std::get_if<Pick>(&a)) j["target"] = cell_json(p->target);
    if (const auto* p = std::get_if<Place>(&a)) {
        j["target"] = cell_json(p->target);
        j["drop"] = p->drop_from_height;
    }
    return j;
}

json stages_json(const Stages& s) {
    return {{"found_object", s.found_object},
            {"picked", s.picked},
            {"found_end_receptacle", s.found_end_receptacle},
            {"placed_correctly", s.placed_correctly}};
}

}  // namespace

std::string trace_jsonl(const Scene& scene, const EpisodeResult& result, const std::string& variant,
                        const std::string& fingerprint) {
    std::ostringstream out;
    json header = {{"kind", "header"},
                   {"seed", result.seed},
                   {"variant", variant},
                   {"fingerprint", fingerprint},
                   {"scene", serialize_scene(scene)}};
    out << header.dump() << '\n';
    for (const auto& r : result.trace) {
        json j = {{"kind", "step"},
                  {"step", r.step},
                  {"phase", to_string(r.phase)},
                  {"action", action_json(r.action)},
                  {"event", to_string(r.event.kind)},
                  {"pose", {r.pose.cell.x, r.pose.cell.y, r.pose.heading}},
                  {"holding", r.holding},
                  {"explored", r.explored}};
        if (r.event.reason != FailureReason::None) j["reason"] = to_string(r.event.reason);
        if (!r.entered.empty()) {
            json e = json::array();
            for (Phase p : r.entered) e.push_back(to_string(p));
            j["entered"] = e;
        }
        if (r.goal) {
            j["goal"] = cell_json(*r.goal);
            j["goal_cluster"] = r.goal_cluster;
            if (r.exploring) j["exploring"] = true;
        }
        out << j.dump() << '\n';
    }
    json tail = {{"kind", "result"},
                 {"overall_success", result.overall_success},
                 {"partial_success", result.partial_success},
                 {"stages", stages_json(result.stages)},
                 {"steps", result.steps},
                 {"termination", to_string(result.termination)}};
    if (!result.error.empty()) tail["error"] = result.error;
    out << tail.dump() << '\n';
    return out.str();
}

ParsedTrace parse_trace(const std::string& text) {
    ParsedTrace t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    bool have_result = false;
    int lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const json j = json::parse(line);
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "header") {
                t.scene = parse_scene(j.at("scene").get<std::string>());
                t.variant = j.at("variant").get<std::string>();
                t.result.seed = j.at("seed").get<std::uint64_t>();
                have_header = true;
            } else if (kind == "step") {
                const auto& p = j.at("pose");
                t.poses.push_back({{p.at(0).get<int>(), p.at(1).get<int>()}, p.at(2).get<int>()});
                t.phases.push_back(parse_phase(j.at("phase").get<std::string>()));
            } else if (kind == "result") {
                t.result.overall_success = j.at("overall_success").get<bool>();
                t.result.partial_success = j.at("partial_success").get<double>();
                t.result.steps = j.at("steps").get<int>();
                const std::string term = j.at("termination").get<std::string>();
                if (term == "stop") t.result.termination = Termination::Stop;
                else if (term == "budget") t.result.termination = Termination::Budget;
                else if (term == "error") t.result.termination = Termination::Error;
                else throw std::runtime_error("unknown termination '" + term + "'");
                if (j.contains("error")) t.result.error = j.at("error").get<std::string>();
                const auto& s = j.at("stages");
                t.result.stages = {s.at("found_object").get<bool>(), s.at("picked").get<bool>(),
                                   s.at("found_end_receptacle").get<bool>(), s.at("placed_correctly").get<bool>()};
                have_result = true;
            } else {
                throw std::runtime_error("unknown record kind '" + kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header || !have_result) throw std::runtime_error("trace needs a header and a result line");
    return t;
}

}  // namespace ovmm
