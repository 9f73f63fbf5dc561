#include "ovmm/planning.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace ovmm {

DistanceField distance_field(const Grid<std::uint8_t>& blocked, std::span<const Cell> goals) {
    if (goals.empty()) throw NoGoals("distance field needs at least one goal cell");
    DistanceField f;
    const int w = blocked.width();
    const int h = blocked.height();
    f.dist = Grid<double>(w, h, kInf);
    f.sources.assign(goals.begin(), goals.end());
    double* dist = f.dist.data().data();
    const std::uint8_t* wall = blocked.data().data();

    struct Entry {
        double d;
        int idx;
        bool operator>(const Entry& o) const { return d > o.d || (d == o.d && idx > o.idx); }
    };
    std::vector<Entry> heap;
    heap.reserve(static_cast<std::size_t>(w * h));
    auto push = [&](double d, int idx) {
        heap.push_back({d, idx});
        std::push_heap(heap.begin(), heap.end(), std::greater<>{});
    };
    for (Cell g : goals) {
        if (!blocked.in_bounds(g) || blocked[g]) continue;
        const int idx = g.y * w + g.x;
        if (dist[idx] != 0.0) {
            dist[idx] = 0.0;
            push(0.0, idx);
        }
    }
    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
        const Entry e = heap.back();
        heap.pop_back();
        if (e.d > dist[e.idx]) continue;
        const int x = e.idx % w;
        const int y = e.idx / w;
        for (int k = 0; k < 8; ++k) {
            const Cell d = kDirs[static_cast<std::size_t>(k)];
            const int nx = x + d.x;
            const int ny = y + d.y;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const int n = ny * w + nx;
            if (wall[n]) continue;
            const double nd = e.d + ((k & 1) ? kSqrt2 : 1.0);
            if (nd < dist[n]) {
                dist[n] = nd;
                push(nd, n);
            }
        }
    }
    return f;
}

Grid<std::uint8_t> inflate(const Grid<std::uint8_t>& blocked, int radius) {
    if (radius <= 0) return blocked;
    Grid<std::uint8_t> out(blocked.width(), blocked.height(), 0);
    for (int y = 0; y < blocked.height(); ++y)
        for (int x = 0; x < blocked.width(); ++x) {
            if (!blocked[{x, y}]) continue;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const Cell n{x + dx, y + dy};
                    if (out.in_bounds(n)) out[n] = 1;
                }
        }
    return out;
}

namespace {

double bearing_error(const Pose& pose, Cell target) {
    if (target == pose.cell) return 0.0;
    const double bearing =
        std::atan2(double(target.y - pose.cell.y), double(target.x - pose.cell.x)) * 180.0 / M_PI;
    return std::abs(wrap_degrees(bearing - pose.heading));
}

}  // namespace

Cell short_term_goal(const DistanceField& field, const Pose& pose, double lookahead) {
    if (!field.reachable(pose.cell)) throw Unreachable("pose has no path to the goal");
    const int r = static_cast<int>(std::floor(lookahead));
    Cell best = pose.cell;
    double best_d = field.at(pose.cell);
    double best_err = 0.0;
    for (int y = pose.cell.y - r; y <= pose.cell.y + r; ++y) {
        for (int x = pose.cell.x - r; x <= pose.cell.x + r; ++x) {
            const Cell c{x, y};
            if (!field.dist.in_bounds(c)) continue;
            const int dx = x - pose.cell.x;
            const int dy = y - pose.cell.y;
            if (double(dx * dx + dy * dy) > lookahead * lookahead) continue;
            const double d = field.at(c);
            if (d == kInf) continue;
            const double err = bearing_error(pose, c);
            // Row-major scan order already breaks the final tie toward the lowest index.
            if (d < best_d || (d == best_d && err < best_err) ||
                (d == best_d && err == best_err && field.dist.index(c) < field.dist.index(best))) {
                best = c;
                best_d = d;
                best_err = err;
            }
        }
    }
    return best;
}

Cell descent_step(const DistanceField& field, const Pose& pose) {
    Cell best = pose.cell;
    double best_d = field.at(pose.cell);
    double best_err = kInf;
    for (Cell d : kDirs) {
        const Cell n = pose.cell + d;
        const double v = field.at(n);
        if (v == kInf) continue;
        const double err = bearing_error(pose, n);
        if (v < best_d || (v == best_d && best != pose.cell && err < best_err)) {
            best = n;
            best_d = v;
            best_err = err;
        }
    }
    return best;
}

Action next_nav_action(const Pose& pose, Cell waypoint, const Grid<std::uint8_t>* blocked) {
    const double want = std::atan2(double(waypoint.y - pose.cell.y), double(waypoint.x - pose.cell.x)) * 180.0 / M_PI;
    int dir = nearest_dir(want);
    auto is_blocked = [&](int d) {
        const Cell n = pose.cell + kDirs[static_cast<std::size_t>(d)];
        return blocked && (!blocked->in_bounds(n) || (*blocked)[n]);
    };
    if (is_blocked(dir)) {
        int best = -1;
        double best_dist = kInf;
        double best_err = kInf;
        for (int k = 0; k < 8; ++k) {
            if (is_blocked(k)) continue;
            const double d = octile(pose.cell + kDirs[static_cast<std::size_t>(k)], waypoint);
            const double err = std::abs(wrap_degrees(45.0 * k - want));
            if (d < best_dist - 1e-12 || (std::abs(d - best_dist) <= 1e-12 && err < best_err)) {
                best = k;
                best_dist = d;
                best_err = err;
            }
        }
        if (best < 0) return TurnLeft30{};
        dir = best;
    }
    if (heading_dir(pose.heading) == dir) return MoveForward{};
    const double err = wrap_degrees(45.0 * dir - pose.heading);
    if (err > 0.0 || err == 180.0) return TurnLeft30{};
    return TurnRight30{};
}

void NavHistory::set_goal(int id) {
    if (id != goal_id) {
        goal_id = id;
        arrivals.clear();
    }
}

bool NavHistory::is_blacklisted(int id, int step) const {
    auto it = blacklist.find(id);
    return it != blacklist.end() && step < it->second;
}

NavDecision oscillation_check(NavHistory& history, const Pose& pose, int step, const OscillationParams& params) {
    if (!history.arrivals.empty() && history.arrivals.back() == pose.cell) return NavDecision::Continue;
    history.arrivals.push_back(pose.cell);
    while (static_cast<int>(history.arrivals.size()) > params.window) history.arrivals.pop_front();
    const int total = ++history.totals[{history.goal_id, pose.cell}];
    const auto visits = std::count(history.arrivals.begin(), history.arrivals.end(), pose.cell);
    if (visits < params.repeats && total <= params.repeats) return NavDecision::Continue;
    const int offences = ++history.offences[history.goal_id];
    history.blacklist[history.goal_id] =
        (offences > 1 || total > params.repeats) ? std::numeric_limits<int>::max() : step + params.blacklist_steps;
    history.arrivals.clear();
    return NavDecision::SwitchToFrontier;
}

}  // namespace ovmm
