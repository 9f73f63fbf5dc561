#include "ovmm/agent.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ovmm {

namespace {

constexpr std::array<const char*, 6> kPhaseNames = {
    "FindObject", "NavigateToObject", "PickObject", "FindEndReceptacle", "NavigateToEndReceptacle", "PlaceObject",
};

using FlagMember = bool AgentFlags::*;
constexpr std::array<std::pair<const char*, FlagMember>, 12> kFlagTable = {{
    {"dynamic_thresholds", &AgentFlags::dynamic_thresholds},
    {"height_filter", &AgentFlags::height_filter},
    {"prob_goal_selection", &AgentFlags::prob_goal_selection},
    {"oscillation_guard", &AgentFlags::oscillation_guard},
    {"collision_marking", &AgentFlags::collision_marking},
    {"center_alignment", &AgentFlags::center_alignment},
    {"pick_retry", &AgentFlags::pick_retry},
    {"pick_verify", &AgentFlags::pick_verify},
    {"incremental_approach", &AgentFlags::incremental_approach},
    {"edge_safe_placement", &AgentFlags::edge_safe_placement},
    {"surface_fallback", &AgentFlags::surface_fallback},
    {"drop_from_height", &AgentFlags::drop_from_height},
}};

Cell ahead_of(const Pose& p) { return p.cell + kDirs[static_cast<std::size_t>(heading_dir(p.heading))]; }

// Chebyshev distance from each cell of `cells` to the nearest cell outside the set.
std::vector<int> set_depths(const std::vector<Cell>& cells) {
    std::set<Cell> in(cells.begin(), cells.end());
    std::vector<int> out;
    out.reserve(cells.size());
    for (Cell c : cells) {
        int depth = 1;
        for (;; ++depth) {
            bool ring_inside = true;
            for (int dy = -depth; dy <= depth && ring_inside; ++dy)
                for (int dx = -depth; dx <= depth && ring_inside; ++dx)
                    if (std::max(std::abs(dx), std::abs(dy)) == depth && !in.count({c.x + dx, c.y + dy}))
                        ring_inside = false;
            if (!ring_inside) break;
        }
        out.push_back(depth);
    }
    return out;
}

// Nearest cell to `from` among `cells` whose depth reaches `min_depth`; row-major order breaks ties.
std::optional<Cell> nearest_deep_cell(const std::vector<Cell>& cells, Cell from, int min_depth) {
    const auto depth = set_depths(cells);
    std::optional<Cell> best;
    double best_d = kInf;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (depth[i] < min_depth) continue;
        const double d = euclid(cells[i], from);
        if (d < best_d) {
            best = cells[i];
            best_d = d;
        }
    }
    return best;
}

}  // namespace

std::string to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

Phase parse_phase(std::string_view name) {
    for (std::size_t i = 0; i < kPhaseNames.size(); ++i)
        if (name == kPhaseNames[i]) return static_cast<Phase>(i);
    throw std::invalid_argument("unknown phase '" + std::string(name) + "'");
}

bool legal_transition(Phase from, Phase to) {
    using P = Phase;
    if (from == to) return true;
    switch (from) {
        case P::FindObject: return to == P::NavigateToObject;
        case P::NavigateToObject: return to == P::PickObject;
        case P::PickObject:
            return to == P::FindEndReceptacle || to == P::NavigateToEndReceptacle || to == P::FindObject;
        case P::FindEndReceptacle: return to == P::NavigateToEndReceptacle;
        case P::NavigateToEndReceptacle: return to == P::PlaceObject;
        case P::PlaceObject: return false;
    }
    return false;
}

AgentFlags AgentFlags::uniteam() {
    AgentFlags f;
    for (const auto& [name, member] : kFlagTable) f.*member = true;
    return f;
}

const std::vector<std::string>& AgentFlags::names() {
    static const std::vector<std::string> n = [] {
        std::vector<std::string> v;
        for (const auto& [name, member] : kFlagTable) v.emplace_back(name);
        return v;
    }();
    return n;
}

bool AgentFlags::get(std::string_view name) const {
    for (const auto& [n, member] : kFlagTable)
        if (name == n) return this->*member;
    throw ConfigError("unknown flag '" + std::string(name) + "'");
}

void AgentFlags::set(std::string_view name, bool value) {
    for (const auto& [n, member] : kFlagTable)
        if (name == n) {
            this->*member = value;
            return;
        }
    throw ConfigError("unknown flag '" + std::string(name) + "'");
}

void AgentConfig::validate() const {
    try {
        noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    require(lookahead >= 1.0, "lookahead must be at least 1");
    require(inflation >= 0, "inflation must be non-negative");
    require(oscillation.window >= 1 && oscillation.repeats >= 2 && oscillation.blacklist_steps >= 1,
            "oscillation parameters out of range");
    require(arrive_radius >= 1.0 && place_radius >= 1.0 && goal_reach >= 1.0, "radii must be at least 1");
    require(scan_turns >= 0 && scan_turns <= 12, "scan_turns must be in [0, 12]");
    require(pick_scan_left >= 0 && pick_scan_right >= 0, "pick scan turns must be non-negative");
    require(edge_margin >= 1, "edge_margin must be at least 1");
    require(approach_max_steps >= 0 && fallback_turns >= 0 && survey_turns >= 0, "step limits must be non-negative");
    require(height_floor >= 0.0, "height_floor must be non-negative");
}

Agent::Agent(const EpisodeGoal& goal, const AgentConfig& config, int width, int height, std::uint64_t seed) {
    reset(goal, config, width, height, seed);
}

void Agent::reset(const EpisodeGoal& goal, const AgentConfig& config, int width, int height, std::uint64_t seed) {
    try {
        validate_goal(goal);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    config.validate();
    if (width <= 0 || height <= 0) throw ConfigError("map size must be positive");
    goal_ = goal;
    config_ = config;
    thresholds_ = ThresholdTable::for_goal(goal, config.thresholds);
    rng_ = Rng::stream(seed, "perception");
    std::vector<ClassId> tracked;
    for (int c = 0; c < kNumClasses; ++c) tracked.push_back(c);
    map_ = SemanticMap(width, height, tracked, config.fusion);
    state_ = SkillState{};
    state_.scan_turns_remaining = config.scan_turns;
    pose_ = {};
    last_action_.reset();
    last_event_ = {};
    last_stg_.reset();
    detections_.clear();
    cache_.assign(6, FieldCache{});
    cache_next_ = 0;
}

Action Agent::act(const Observation& obs, const Event& last_event, StepInfo* info) {
    pose_ = obs.pose;
    last_event_ = last_event;
    const auto raw = simulate_detections(obs, config_.noise, rng_);
    detections_ = filter_detections(raw, thresholds_, config_.height_floor,
                                    FilterMode{config_.flags.dynamic_thresholds, config_.flags.height_filter});
    integrate(map_, obs.pose, obs.cells, detections_);

    if (last_event.kind == EventKind::Collision && config_.flags.collision_marking) {
        const Cell ahead = ahead_of(pose_);
        mark_collision(map_, last_stg_ && *last_stg_ != pose_.cell ? *last_stg_ : ahead, ahead);
    }
    if (last_event.kind == EventKind::PlaceSuccess || last_event.kind == EventKind::PlaceFallen) {
        state_.held.reset();
        state_.believes_holding = false;
    }

    info_ = StepInfo{};
    const Action a = decide();
    info_.phase = state_.phase;
    last_action_ = a;
    ++state_.step;
    if (info) *info = info_;
    return a;
}

Action Agent::decide() {
    if (state_.scan_turns_remaining > 0) {
        --state_.scan_turns_remaining;
        return TurnLeft30{};
    }
    for (int guard = 0; guard < 16; ++guard) {
        std::optional<Action> a;
        switch (state_.phase) {
            case Phase::FindObject: a = find_object(); break;
            case Phase::NavigateToObject: a = navigate_to_object(); break;
            case Phase::PickObject: a = pick_object(); break;
            case Phase::FindEndReceptacle: a = find_end_receptacle(); break;
            case Phase::NavigateToEndReceptacle: a = navigate_to_end_receptacle(); break;
            case Phase::PlaceObject: a = place_object(); break;
        }
        if (a) return *a;
    }
    return TurnLeft30{};
}

void Agent::transition(Phase to) {
    if (!legal_transition(state_.phase, to))
        throw std::logic_error("illegal transition " + to_string(state_.phase) + " -> " + to_string(to));
    state_.phase = to;
    info_.entered.push_back(to);
    state_.face_turns = 0;
    state_.nav.set_goal(-1);
    if (to == Phase::PickObject) {
        state_.pick_started = false;
        state_.pick_scan_plan.clear();
        for (int i = 0; i < config_.pick_scan_left; ++i) state_.pick_scan_plan.emplace_back(TurnLeft30{});
        for (int i = 0; i < config_.pick_scan_left + config_.pick_scan_right; ++i)
            state_.pick_scan_plan.emplace_back(TurnRight30{});
    }
    if (to == Phase::PlaceObject) {
        state_.approach_step_count = 0;
        state_.blind_moves_left = -1;
        state_.fallback_turns_used = 0;
        state_.survey_turns = 0;
        state_.place_issued = false;
        state_.placement_cell.reset();
    }
}

// ---------------------------------------------------------------- helpers

std::set<int> Agent::blacklisted() const {
    std::set<int> out;
    for (const auto& [id, until] : state_.nav.blacklist)
        if (state_.nav.is_blacklisted(id, state_.step)) out.insert(id);
    return out;
}

bool Agent::has_cluster(ClassId cls, bool ignore_blacklist) const {
    const auto banned = ignore_blacklist ? std::set<int>{} : blacklisted();
    for (const Cluster* c : map_.clusters_of(cls))
        if (!banned.count(c->id)) return true;
    return false;
}

std::optional<Cell> Agent::detected(ClassId cls) const {
    const Detection* best = nullptr;
    for (const auto& d : detections_)
        if (d.cls == cls && (!best || d.confidence > best->confidence)) best = &d;
    if (!best || best->cells.empty()) return std::nullopt;
    return best->cells.front();
}

const DistanceField& Agent::field_to(const std::vector<Cell>& goals, const std::vector<Cell>& carve) {
    for (const auto& e : cache_)
        if (e.version == map_.obstacle_version() && e.goals == goals && e.carve == carve) return e.field;
    FieldCache& slot = cache_[cache_next_];
    cache_next_ = (cache_next_ + 1) % cache_.size();
    slot.version = map_.obstacle_version();
    slot.goals = goals;
    slot.carve = carve;
    slot.field = distance_field(planning_grid(map_, carve, config_.inflation), goals);
    return slot.field;
}

const DistanceField& Agent::field_from_pose() { return field_to({pose_.cell}, {}); }

std::optional<Action> Agent::face(Cell target) {
    if (target == pose_.cell || in_view_cone(pose_, target, 90.0)) return std::nullopt;
    const double bearing =
        std::atan2(double(target.y - pose_.cell.y), double(target.x - pose_.cell.x)) * 180.0 / M_PI;
    const double err = wrap_degrees(bearing - pose_.heading);
    if (err > 0.0 || err == 180.0) return TurnLeft30{};
    return TurnRight30{};
}

Agent::NavStep Agent::nav_to_cells(const std::vector<Cell>& goals, const std::vector<Cell>& carve) {
    const DistanceField& field = field_to(goals, carve);
    if (!field.reachable(pose_.cell)) return {};
    if (field.at(pose_.cell) == 0.0) return {NavStep::Kind::Arrived};
    const Cell stg = short_term_goal(field, pose_, config_.lookahead);
    info_.short_term_goal = stg;
    last_stg_ = stg;
    const Cell waypoint = descent_step(field, pose_);
    if (waypoint == pose_.cell) return {NavStep::Kind::Arrived};
    return {NavStep::Kind::Move, next_nav_action(pose_, waypoint, &map_.obstacle)};
}

// Drives to any cell within `radius` of the target. When no such cell can be reached
// the planner aims at the target itself through its own obstacle blob, which is what
// an agent committed to an unattainable goal ends up doing.
Agent::NavStep Agent::nav_to_target(Cell target, double radius) {
    if (euclid(pose_.cell, target) <= radius) return {NavStep::Kind::Arrived};
    const auto grid = planning_grid(map_, {}, config_.inflation);
    std::vector<Cell> region;
    const int r = static_cast<int>(std::floor(radius));
    for (int y = target.y - r; y <= target.y + r; ++y)
        for (int x = target.x - r; x <= target.x + r; ++x) {
            const Cell c{x, y};
            if (grid.in_bounds(c) && !grid[c] && euclid(c, target) <= radius) region.push_back(c);
        }
    if (!region.empty()) {
        NavStep s = nav_to_cells(region);
        if (s.kind != NavStep::Kind::Unreachable) return s;
    }
    std::vector<Cell> blob{target};
    if (map_.obstacle.in_bounds(target) && map_.obstacle[target]) {
        std::set<Cell> seen{target};
        for (std::size_t i = 0; i < blob.size() && blob.size() < 400; ++i)
            for (Cell d : kDirs4) {
                const Cell n = blob[i] + d;
                if (map_.obstacle.in_bounds(n) && map_.obstacle[n] && seen.insert(n).second) blob.push_back(n);
            }
        std::sort(blob.begin(), blob.end());
    }
    NavStep s = nav_to_cells({target}, blob);
    if (s.kind == NavStep::Kind::Arrived) s.kind = NavStep::Kind::Unreachable;
    return s;
}

std::optional<GoalChoice> Agent::choose_cluster_target(GoalKind kind, bool ignore_blacklist) {
    const auto gm = build_goal_map(map_, kind, goal_, ignore_blacklist ? std::set<int>{} : blacklisted());
    if (gm.empty()) return std::nullopt;
    const SelectMode mode{config_.flags.prob_goal_selection, config_.flags.center_alignment, config_.goal_reach};
    return select_goal(gm, map_, field_from_pose(), mode);
}

bool Agent::guard_trips(int cluster) {
    if (!config_.flags.oscillation_guard) return false;
    state_.nav.set_goal(cluster);
    return oscillation_check(state_.nav, pose_, state_.step, config_.oscillation) == NavDecision::SwitchToFrontier;
}

// Descends a field grown from the whole frontier, which heads for the nearest frontier cell.
std::optional<Action> Agent::explore() {
    state_.nav.set_goal(-1);
    const auto gm = frontier_goal_map(map_);
    if (gm.empty()) return std::nullopt;
    std::vector<Cell> cells;
    cells.reserve(gm.cells.size());
    for (const auto& g : gm.cells) cells.push_back(g.cell);
    const DistanceField& field = field_to(cells, {});
    if (!field.reachable(pose_.cell)) return std::nullopt;
    info_.exploring = true;
    info_.goal_cluster = -1;
    Pose walker = pose_;
    for (int guard = 0; guard < field.dist.width() * field.dist.height() && field.at(walker.cell) > 0.0; ++guard)
        walker.cell = descent_step(field, walker);
    info_.goal = walker.cell;
    if (walker.cell == pose_.cell) return TurnLeft30{};
    const NavStep s = nav_to_cells(cells);
    if (s.kind == NavStep::Kind::Move) return s.action;
    return TurnLeft30{};
}

std::optional<Cell> Agent::placement_cell(int cluster_id, bool* deep_out) const {
    const Cluster* c = map_.find_cluster(cluster_id);
    if (!c || c->cells.empty()) return std::nullopt;
    if (deep_out) *deep_out = true;
    if (config_.flags.edge_safe_placement) {
        if (auto deep = nearest_deep_cell(c->cells, pose_.cell, config_.edge_margin)) return deep;
        // Only part of the surface carries the label: measure depth on the mapped obstacle blob instead.
        std::vector<Cell> blob;
        std::set<Cell> seen;
        for (Cell p : c->cells)
            if (map_.obstacle[p] && seen.insert(p).second) blob.push_back(p);
        for (std::size_t i = 0; i < blob.size() && blob.size() < 400; ++i)
            for (Cell d : kDirs4) {
                const Cell n = blob[i] + d;
                if (map_.obstacle.in_bounds(n) && map_.obstacle[n] && seen.insert(n).second) blob.push_back(n);
            }
        std::sort(blob.begin(), blob.end(), [](Cell a, Cell b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
        if (auto deep = nearest_deep_cell(blob, pose_.cell, config_.edge_margin)) return deep;
    }
    if (deep_out) *deep_out = false;
    return nearest_deep_cell(c->cells, pose_.cell, 0);
}

// Nearest unexplored cell touching the cluster, or nothing when its surroundings are all mapped.
std::optional<Cell> Agent::unseen_rim(int cluster_id) const {
    const Cluster* c = map_.find_cluster(cluster_id);
    if (!c) return std::nullopt;
    std::optional<Cell> best;
    double best_d = kInf;
    for (Cell p : c->cells)
        for (Cell d : kDirs) {
            const Cell n = p + d;
            if (!map_.explored.in_bounds(n) || map_.explored[n]) continue;
            const double dist = euclid(pose_.cell, n);
            if (dist < best_d) {
                best = n;
                best_d = dist;
            }
        }
    return best;
}

void Agent::after_pick() {
    transition(has_cluster(goal_.end_receptacle) ? Phase::NavigateToEndReceptacle : Phase::FindEndReceptacle);
}

// ---------------------------------------------------------------- skills

std::optional<Action> Agent::find_object() {
    if (has_cluster(goal_.object)) {
        transition(Phase::NavigateToObject);
        return std::nullopt;
    }

    GoalMap gm = build_goal_map(map_, GoalKind::StartInspection, goal_, blacklisted());
    std::erase_if(gm.cells, [&](const GoalCell& g) {
        const Cluster* c = map_.find_cluster(g.cluster);
        return c && (c->viewed_sides >> g.side) & 1u;
    });
    if (!gm.empty()) {
        const SelectMode mode{config_.flags.prob_goal_selection, false, 1.5};
        if (const auto choice = select_goal(gm, map_, field_from_pose(), mode)) {
            info_.goal = choice->cell;
            info_.goal_cluster = choice->cluster;
            if (choice->cell == pose_.cell) {
                Cluster* c = map_.find_cluster(choice->cluster);
                const Cell centroid{static_cast<int>(std::lround(c->cx)), static_cast<int>(std::lround(c->cy))};
                if (auto turn = face(centroid)) return turn;
                // Looked at it from here: this side is done.
                for (const auto& g : gm.cells)
                    if (g.cell == choice->cell && g.cluster == choice->cluster)
                        c->viewed_sides |= static_cast<std::uint8_t>(1u << g.side);
                return std::nullopt;
            }
            const NavStep s = nav_to_cells({choice->cell});
            if (s.kind == NavStep::Kind::Move) return s.action;
        }
    }
    if (auto a = explore()) return a;

    // Everything explored and no object seen: look at the start receptacles again.
    for (const Cluster* c : map_.clusters_of(goal_.start_receptacle)) {
        Cluster* m = map_.find_cluster(c->id);
        m->inspected = false;
        m->viewed_sides = 0;
    }
    return TurnLeft30{};
}

std::optional<Action> Agent::navigate_to_object() {
    const auto choice = choose_cluster_target(GoalKind::Object);
    if (!choice) {
        if (auto a = explore()) return a;
        const auto any = choose_cluster_target(GoalKind::Object);
        state_.pick_target = any ? std::optional<Cell>(any->cell) : std::nullopt;
        transition(Phase::PickObject);
        return std::nullopt;
    }
    info_.goal = choice->cell;
    info_.goal_cluster = choice->cluster;
    state_.target_cluster = choice->cluster;
    if (guard_trips(choice->cluster)) {
        if (auto a = explore()) return a;
        return TurnLeft30{};
    }
    const NavStep s = nav_to_target(choice->cell, config_.arrive_radius);
    if (s.kind == NavStep::Kind::Arrived) {
        state_.pick_target = choice->cell;
        transition(Phase::PickObject);
        return std::nullopt;
    }
    if (s.kind == NavStep::Kind::Move) return s.action;
    if (auto a = explore()) return a;
    return TurnLeft30{};
}

std::optional<Action> Agent::pick_object() {
    auto exhausted = [&]() -> std::optional<Action> {
        if (config_.flags.pick_verify) {
            // Not here after all: stay away from this cluster for a while and look elsewhere.
            if (state_.pick_target) {
                const Cell t = *state_.pick_target;
                for (const Cluster* c : map_.clusters_of(goal_.object))
                    if (std::find(c->cells.begin(), c->cells.end(), t) != c->cells.end())
                        state_.nav.blacklist[c->id] = state_.step + config_.oscillation.blacklist_steps;
                for (const Cluster* c : map_.clusters_of(goal_.start_receptacle))
                    for (Cell p : c->cells)
                        if (chebyshev(p, t) <= 1) {
                            mark_inspected(map_, c->id);
                            break;
                        }
            }
            transition(Phase::FindObject);
            return std::nullopt;
        }
        state_.believes_holding = true;
        after_pick();
        return std::nullopt;
    };
    auto pick_now = [&]() -> Action {
        const auto seen = detected(goal_.object);
        return Pick{seen ? *seen : ahead_of(pose_)};
    };
    auto next_turn = [&]() -> std::optional<Action> {
        if (!config_.flags.pick_retry || state_.pick_scan_plan.empty()) return exhausted();
        const Action turn = state_.pick_scan_plan.front();
        state_.pick_scan_plan.erase(state_.pick_scan_plan.begin());
        return turn;
    };

    const bool picked_last = state_.pick_started && last_action_ && std::holds_alternative<Pick>(*last_action_);
    if (picked_last) {
        if (last_event_.kind == EventKind::PickSuccess) {
            state_.held = last_event_.object_id;
            state_.believes_holding = true;
            after_pick();
            return std::nullopt;
        }
        return next_turn();
    }
    if (!state_.pick_started) {
        const auto target = detected(goal_.object) ? detected(goal_.object) : state_.pick_target;
        if (target && state_.face_turns < 12)
            if (auto turn = face(*target)) {
                ++state_.face_turns;
                return turn;
            }
        state_.pick_started = true;
        return pick_now();
    }
    if (detected(goal_.object)) return pick_now();
    return next_turn();
}

std::optional<Action> Agent::find_end_receptacle() {
    if (has_cluster(goal_.end_receptacle)) {
        transition(Phase::NavigateToEndReceptacle);
        return std::nullopt;
    }
    if (auto a = explore()) return a;
    return TurnLeft30{};
}

std::optional<Action> Agent::navigate_to_end_receptacle() {
    const auto choice = choose_cluster_target(GoalKind::EndReceptacle);
    if (!choice) {
        if (auto a = explore()) return a;
        const auto any = choose_cluster_target(GoalKind::EndReceptacle);
        state_.target_cluster = any ? any->cluster : -1;
        transition(Phase::PlaceObject);
        return std::nullopt;
    }
    info_.goal = choice->cell;
    info_.goal_cluster = choice->cluster;
    state_.target_cluster = choice->cluster;
    if (guard_trips(choice->cluster)) {
        if (auto a = explore()) return a;
        return TurnLeft30{};
    }
    const NavStep s = nav_to_target(choice->cell, config_.arrive_radius);
    if (s.kind == NavStep::Kind::Arrived) {
        transition(Phase::PlaceObject);
        return std::nullopt;
    }
    if (s.kind == NavStep::Kind::Move) return s.action;
    if (auto a = explore()) return a;
    return TurnLeft30{};
}

std::optional<Action> Agent::place_object() {
    if (state_.place_issued) return Stop{};
    const AgentFlags& f = config_.flags;

    // Incremental approach re-reads the map every step; the baseline commits once.
    std::optional<Cell> target = state_.placement_cell;
    bool deep = true;
    if (!target || f.incremental_approach) {
        auto fresh = placement_cell(state_.target_cluster, &deep);
        if (!fresh) {
            // The cluster was merged into another one: follow the cell we were heading for.
            for (const Cluster* c : map_.clusters_of(goal_.end_receptacle))
                if (target && std::find(c->cells.begin(), c->cells.end(), *target) != c->cells.end()) {
                    state_.target_cluster = c->id;
                    fresh = placement_cell(c->id, &deep);
                    break;
                }
        }
        if (fresh) target = fresh;
    }
    if (!target) {
        state_.place_issued = true;
        return final_place(ahead_of(pose_));
    }
    state_.placement_cell = target;
    info_.goal = *target;
    info_.goal_cluster = state_.target_cluster;
    const Cell p = *target;

    if (f.incremental_approach) {
        if (euclid(pose_.cell, p) > config_.place_radius && state_.approach_step_count < config_.approach_max_steps) {
            const NavStep s = nav_to_target(p, config_.place_radius);
            if (s.kind == NavStep::Kind::Move) {
                ++state_.approach_step_count;
                return s.action;
            }
        }
        // No interior cell known yet: look at the unmapped rim of the surface before committing.
        if (f.edge_safe_placement && !deep && state_.survey_turns < config_.survey_turns)
            if (auto rim = unseen_rim(state_.target_cluster))
                if (auto turn = face(*rim)) {
                    ++state_.survey_turns;
                    return turn;
                }
    } else {
        if (state_.blind_moves_left < 0) {
            if (state_.face_turns < 12)
                if (auto turn = face(p)) {
                    ++state_.face_turns;
                    return turn;
                }
            state_.blind_moves_left = std::max(0, static_cast<int>(std::lround(euclid(pose_.cell, p))) - 1);
            state_.face_turns = 0;
        }
        if (state_.blind_moves_left > 0) {
            --state_.blind_moves_left;
            return MoveForward{};
        }
    }

    if (state_.face_turns < 12)
        if (auto turn = face(p)) {
            ++state_.face_turns;
            return turn;
        }

    const bool confirmed = std::any_of(detections_.begin(), detections_.end(), [&](const Detection& d) {
        return d.cls == goal_.end_receptacle && std::find(d.cells.begin(), d.cells.end(), p) != d.cells.end();
    });
    if (confirmed) {
        state_.place_issued = true;
        return final_place(p);
    }
    if (!f.surface_fallback) {
        // No receptacle in sight: the gripper opens over whatever is in front.
        state_.place_issued = true;
        return final_place(ahead_of(pose_));
    }

    // Any receptacle surface in the current frame will do, the mapped target first.
    std::optional<Cell> surface;
    for (const auto& d : detections_)
        if (is_receptacle_class(d.cls) && std::find(d.cells.begin(), d.cells.end(), p) != d.cells.end()) surface = p;
    if (!surface) {
        double best = kInf;
        for (const auto& d : detections_) {
            if (!is_receptacle_class(d.cls)) continue;
            const auto c = nearest_deep_cell(d.cells, pose_.cell, f.edge_safe_placement ? config_.edge_margin : 0);
            if (c && euclid(*c, pose_.cell) < best) {
                best = euclid(*c, pose_.cell);
                surface = c;
            }
        }
    }
    if (surface) {
        state_.place_issued = true;
        return final_place(*surface);
    }
    if (state_.fallback_turns_used < config_.fallback_turns) {
        ++state_.fallback_turns_used;
        return state_.fallback_turns_used % 2 == 1 ? Action{TurnLeft30{}} : Action{TurnRight30{}};
    }
    state_.place_issued = true;
    return final_place(p);
}

Action Agent::final_place(Cell target) {
    info_.goal = target;
    const bool large = class_info(goal_.object).size == SizeClass::Large;
    return Place{target, config_.flags.drop_from_height && large};
}

}  // namespace ovmm
