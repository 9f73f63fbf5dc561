#include "ovmm/mapping.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace ovmm {

int Cluster::sides_seen() const { return std::popcount(static_cast<unsigned>(viewed_sides)); }

SemanticMap::SemanticMap(int width, int height, std::vector<ClassId> tracked, Fusion fusion)
    : obstacle(width, height, 0),
      explored(width, height, 0),
      collision_marks(width, height, 0),
      tracked_(std::move(tracked)),
      fusion_(fusion) {
    for (std::size_t i = 0; i < tracked_.size(); ++i) {
        class_prob.emplace_back(width, height, 0.0);
        labels_.emplace_back(width, height, -1);
        if (fusion_ == Fusion::Average) observations_.emplace_back(width, height, 0);
    }
}

int SemanticMap::channel(ClassId cls) const {
    for (std::size_t i = 0; i < tracked_.size(); ++i)
        if (tracked_[i] == cls) return static_cast<int>(i);
    return -1;
}

const Cluster* SemanticMap::find_cluster(int id) const {
    auto it = std::lower_bound(clusters_.begin(), clusters_.end(), id,
                               [](const Cluster& c, int v) { return c.id < v; });
    return (it != clusters_.end() && it->id == id) ? &*it : nullptr;
}

Cluster* SemanticMap::find_cluster(int id) {
    return const_cast<Cluster*>(static_cast<const SemanticMap*>(this)->find_cluster(id));
}

std::vector<const Cluster*> SemanticMap::clusters_of(ClassId cls) const {
    std::vector<const Cluster*> out;
    for (const auto& c : clusters_)
        if (c.cls == cls) out.push_back(&c);
    return out;
}

void SemanticMap::refresh_geometry(Cluster& c) const {
    const int ch = channel(c.cls);
    c.prob = 0.0;
    double sx = 0.0, sy = 0.0;
    for (Cell cell : c.cells) {
        c.prob = std::max(c.prob, class_prob[static_cast<std::size_t>(ch)][cell]);
        sx += cell.x;
        sy += cell.y;
    }
    c.cx = sx / static_cast<double>(c.cells.size());
    c.cy = sy / static_cast<double>(c.cells.size());
}

// Recomputes the components of one channel. A component inherits the smallest id
// among the clusters it overlaps, their inspected flag, and the union of their sides.
void SemanticMap::rebuild_channel(int ch) {
    const auto& prob = class_prob[static_cast<std::size_t>(ch)];
    auto& labels = labels_[static_cast<std::size_t>(ch)];
    const ClassId cls = tracked_[static_cast<std::size_t>(ch)];

    std::vector<Cluster> old;
    std::vector<Cluster> kept;
    for (auto& c : clusters_) (c.cls == cls ? old : kept).push_back(std::move(c));
    auto old_by_id = [&](int id) -> const Cluster* {
        for (const auto& c : old)
            if (c.id == id) return &c;
        return nullptr;
    };

    Grid<int> fresh(labels.width(), labels.height(), -1);
    std::vector<Cluster> built;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const Cell start = prob.cell_at(i);
        if (prob[start] <= 0.0 || fresh[start] >= 0) continue;
        Cluster c;
        c.cls = cls;
        std::vector<Cell> stack{start};
        fresh[start] = 0;
        std::set<int> previous;
        while (!stack.empty()) {
            const Cell p = stack.back();
            stack.pop_back();
            c.cells.push_back(p);
            if (labels[p] >= 0) previous.insert(labels[p]);
            for (Cell d : kDirs4) {
                const Cell n = p + d;
                if (prob.in_bounds(n) && prob[n] > 0.0 && fresh[n] < 0) {
                    fresh[n] = 0;
                    stack.push_back(n);
                }
            }
        }
        std::sort(c.cells.begin(), c.cells.end(), [](Cell a, Cell b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
        if (previous.empty()) {
            c.id = next_cluster_id_++;
        } else {
            c.id = *previous.begin();
            if (const Cluster* base = old_by_id(c.id)) c.inspected = base->inspected;
            for (int id : previous)
                if (const Cluster* o = old_by_id(id)) c.viewed_sides |= o->viewed_sides;
        }
        refresh_geometry(c);
        built.push_back(std::move(c));
    }
    labels.fill(-1);
    for (const auto& c : built)
        for (Cell p : c.cells) labels[p] = c.id;

    clusters_ = std::move(kept);
    for (auto& c : built) clusters_.push_back(std::move(c));
    std::sort(clusters_.begin(), clusters_.end(), [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
}

void integrate(SemanticMap& map, const Pose& pose, const std::vector<VisibleCell>& visible,
               const std::vector<Detection>& detections) {
    Grid<std::uint8_t> in_view(map.width(), map.height(), 0);
    if (map.explored.in_bounds(pose.cell)) map.explored[pose.cell] = 1;
    for (const auto& vc : visible) {
        if (!map.explored.in_bounds(vc.cell)) continue;
        map.explored[vc.cell] = 1;
        in_view[vc.cell] = 1;
        if (vc.kind != CellKind::Free && !map.obstacle[vc.cell]) {
            map.obstacle[vc.cell] = 1;
            ++map.obstacle_version_;
        }
    }

    std::vector<bool> changed(map.tracked_.size(), false);
    for (const auto& d : detections) {
        const int ch = map.channel(d.cls);
        if (ch < 0) continue;
        auto& prob = map.class_prob[static_cast<std::size_t>(ch)];
        for (Cell c : d.cells) {
            if (!prob.in_bounds(c)) continue;
            const double before = prob[c];
            if (map.fusion_ == Fusion::Max) {
                prob[c] = std::max(before, d.confidence);
            } else {
                auto& n = map.observations_[static_cast<std::size_t>(ch)][c];
                ++n;
                prob[c] = before + (d.confidence - before) / n;
            }
            if (prob[c] != before) changed[static_cast<std::size_t>(ch)] = true;
        }
    }
    for (std::size_t ch = 0; ch < changed.size(); ++ch)
        if (changed[ch]) map.rebuild_channel(static_cast<int>(ch));

    for (auto& c : map.clusters_) {
        const bool seen = std::any_of(c.cells.begin(), c.cells.end(), [&](Cell p) { return in_view[p] != 0; });
        if (seen) {
            const double dx = pose.cell.x - c.cx;
            const double dy = pose.cell.y - c.cy;
            if (dx != 0.0 || dy != 0.0) c.viewed_sides |= static_cast<std::uint8_t>(1u << nearest_dir(std::atan2(dy, dx) * 180.0 / M_PI));
        }
        if (!c.inspected && c.sides_seen() >= 2 &&
            std::all_of(c.cells.begin(), c.cells.end(), [&](Cell p) { return map.explored[p] != 0; }))
            c.inspected = true;
    }
}

std::vector<Cell> frontier(const SemanticMap& map) {
    std::vector<Cell> out;
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            const Cell c{x, y};
            if (!map.explored[c] || map.obstacle[c]) continue;
            for (Cell d : kDirs4) {
                const Cell n = c + d;
                if (map.explored.in_bounds(n) && !map.explored[n]) {
                    out.push_back(c);
                    break;
                }
            }
        }
    return out;
}

void mark_collision(SemanticMap& map, Cell last_short_term_goal, std::optional<Cell> ahead) {
    for (std::optional<Cell> c : {std::optional<Cell>(last_short_term_goal), ahead}) {
        if (!c || !map.obstacle.in_bounds(*c)) continue;
        map.collision_marks[*c] = 1;
        if (!map.obstacle[*c]) {
            map.obstacle[*c] = 1;
            ++map.obstacle_version_;
        }
    }
}

void mark_inspected(SemanticMap& map, int cluster_id) {
    Cluster* c = map.find_cluster(cluster_id);
    if (!c) throw UnknownCluster("no cluster with id " + std::to_string(cluster_id));
    c->inspected = true;
}

GoalMap build_goal_map(const SemanticMap& map, GoalKind kind, const EpisodeGoal& goal, const std::set<int>& excluded) {
    GoalMap gm;
    if (kind == GoalKind::StartInspection) {
        for (const Cluster* c : map.clusters_of(goal.start_receptacle)) {
            if (c->inspected || excluded.count(c->id)) continue;
            int x0 = map.width(), y0 = map.height(), x1 = -1, y1 = -1;
            for (Cell p : c->cells) {
                x0 = std::min(x0, p.x);
                y0 = std::min(y0, p.y);
                x1 = std::max(x1, p.x);
                y1 = std::max(y1, p.y);
            }
            for (int y = std::max(0, y0 - 2); y <= std::min(map.height() - 1, y1 + 2); ++y)
                for (int x = std::max(0, x0 - 2); x <= std::min(map.width() - 1, x1 + 2); ++x) {
                    const Cell q{x, y};
                    if (!map.explored[q] || map.obstacle[q]) continue;
                    const bool near = std::any_of(c->cells.begin(), c->cells.end(),
                                                  [&](Cell p) { return chebyshev(p, q) <= 2; });
                    if (!near) continue;
                    const int side = nearest_dir(std::atan2(y - c->cy, x - c->cx) * 180.0 / M_PI);
                    gm.cells.push_back({q, c->id, side});
                }
        }
        return gm;
    }
    const ClassId cls = kind == GoalKind::Object ? goal.object : goal.end_receptacle;
    for (const Cluster* c : map.clusters_of(cls)) {
        if (excluded.count(c->id)) continue;
        for (Cell p : c->cells) gm.cells.push_back({p, c->id, -1});
    }
    return gm;
}

GoalMap frontier_goal_map(const SemanticMap& map) {
    GoalMap gm;
    for (Cell c : frontier(map)) gm.cells.push_back({c, -1, -1});
    return gm;
}

double approach_cost(const DistanceField& from_pose, Cell c, double reach) {
    double best = from_pose.at(c);
    if (best < kInf) return best;
    const int r = static_cast<int>(std::floor(reach));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double d = std::sqrt(double(dx * dx + dy * dy));
            if (d > reach) continue;
            const double v = from_pose.at({c.x + dx, c.y + dy});
            if (v < kInf) best = std::min(best, v + d);
        }
    return best;
}

std::optional<GoalChoice> select_goal(const GoalMap& goals, const SemanticMap& map, const DistanceField& from_pose,
                                      SelectMode mode) {
    struct Candidate {
        GoalCell goal;
        double cost;
        std::size_t index;
    };
    std::vector<Candidate> reachable;
    for (const auto& g : goals.cells) {
        const double cost = approach_cost(from_pose, g.cell, mode.reach);
        if (cost < kInf) reachable.push_back({g, cost, map.obstacle.index(g.cell)});
    }
    if (reachable.empty()) return std::nullopt;

    auto nearest_less = [](const Candidate& a, const Candidate& b) {
        return std::tie(a.cost, a.goal.cluster, a.index) < std::tie(b.cost, b.goal.cluster, b.index);
    };

    int cluster = -1;
    const Candidate* pick = nullptr;
    if (mode.prob_ranking) {
        // Best (prob, -distance, -id) over clusters with a reachable cell.
        double best_prob = -1.0;
        double best_cost = kInf;
        for (const auto& c : reachable) {
            const Cluster* cl = map.find_cluster(c.goal.cluster);
            const double prob = cl ? cl->prob : 0.0;
            if (prob > best_prob || (prob == best_prob && c.cost < best_cost) ||
                (prob == best_prob && c.cost == best_cost && c.goal.cluster < cluster)) {
                best_prob = prob;
                best_cost = c.cost;
                cluster = c.goal.cluster;
            }
        }
        for (const auto& c : reachable)
            if (c.goal.cluster == cluster && (!pick || nearest_less(c, *pick))) pick = &c;
    } else {
        pick = &*std::min_element(reachable.begin(), reachable.end(), nearest_less);
        cluster = pick->goal.cluster;
    }

    const Cluster* cl = cluster >= 0 ? map.find_cluster(cluster) : nullptr;
    if (mode.center_alignment && cl) {
        const Candidate* centered = nullptr;
        double best = kInf;
        for (const auto& c : reachable) {
            if (c.goal.cluster != cluster) continue;
            const double d = std::hypot(c.goal.cell.x - cl->cx, c.goal.cell.y - cl->cy);
            if (!centered || d < best - 1e-12 || (std::abs(d - best) <= 1e-12 && nearest_less(c, *centered))) {
                centered = &c;
                best = d;
            }
        }
        pick = centered;
    }
    return GoalChoice{pick->goal.cell, pick->goal.cluster, pick->cost};
}

Grid<std::uint8_t> planning_grid(const SemanticMap& map, std::span<const Cell> carve, int inflation) {
    Grid<std::uint8_t> g = inflate(map.obstacle, inflation);
    for (Cell c : carve)
        if (g.in_bounds(c)) g[c] = 0;
    return g;
}

}  // namespace ovmm
