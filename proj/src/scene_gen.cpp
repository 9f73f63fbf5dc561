#include <algorithm>
#include <cassert>

#include "ovmm/rng.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

namespace {

struct Rect {
    int x0, y0, x1, y1;  // inclusive interior bounds
    int w() const { return x1 - x0 + 1; }
    int h() const { return y1 - y0 + 1; }
};

struct SplitWall {
    bool vertical;  // wall along x = at
    int at;
    int lo, hi;
};

std::vector<ClassId> classes_of_kind(ClassKind kind, int min_side = 0) {
    std::vector<ClassId> out;
    for (int c = 0; c < kNumClasses; ++c)
        if (class_info(c).kind == kind && class_info(c).min_side >= min_side) out.push_back(c);
    return out;
}

ClassId pick_class(Rng& rng, const std::vector<ClassId>& pool) {
    return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
}

class Builder {
public:
    Builder(Rng& rng, const SceneConfig& cfg) : rng_(rng), cfg_(cfg) {}

    std::optional<Scene> attempt(const EpisodeGoal& goal) {
        Scene s;
        s.width = cfg_.width;
        s.height = cfg_.height;
        s.rules = cfg_.rules;
        s.goal = goal;
        s.cells = Grid<std::int32_t>(s.width, s.height, kFreeCell);
        for (int x = 0; x < s.width; ++x) {
            s.cells[{x, 0}] = kWallCell;
            s.cells[{x, s.height - 1}] = kWallCell;
        }
        for (int y = 0; y < s.height; ++y) {
            s.cells[{0, y}] = kWallCell;
            s.cells[{s.width - 1, y}] = kWallCell;
        }

        std::vector<Rect> rooms{{1, 1, s.width - 2, s.height - 2}};
        std::vector<SplitWall> walls;
        const int target_rooms = rng_.uniform_int(cfg_.rooms_min, cfg_.rooms_max);
        const int m = cfg_.min_room_side;
        while (static_cast<int>(rooms.size()) < target_rooms) {
            // Split the largest splittable room along its longer side.
            int best = -1;
            for (int i = 0; i < static_cast<int>(rooms.size()); ++i) {
                const Rect& r = rooms[static_cast<std::size_t>(i)];
                if (std::max(r.w(), r.h()) < 2 * m + 1) continue;
                if (best < 0 || r.w() * r.h() > rooms[static_cast<std::size_t>(best)].w() * rooms[static_cast<std::size_t>(best)].h())
                    best = i;
            }
            if (best < 0) break;
            const Rect r = rooms[static_cast<std::size_t>(best)];
            const bool vertical = r.w() >= r.h();
            if (vertical) {
                const int at = rng_.uniform_int(r.x0 + m, r.x1 - m);
                for (int y = r.y0; y <= r.y1; ++y) s.cells[{at, y}] = kWallCell;
                walls.push_back({true, at, r.y0, r.y1});
                rooms[static_cast<std::size_t>(best)] = {r.x0, r.y0, at - 1, r.y1};
                rooms.push_back({at + 1, r.y0, r.x1, r.y1});
            } else {
                const int at = rng_.uniform_int(r.y0 + m, r.y1 - m);
                for (int x = r.x0; x <= r.x1; ++x) s.cells[{x, at}] = kWallCell;
                walls.push_back({false, at, r.x0, r.x1});
                rooms[static_cast<std::size_t>(best)] = {r.x0, r.y0, r.x1, at - 1};
                rooms.push_back({r.x0, at + 1, r.x1, r.y1});
            }
        }

        // Doorways are cut after every wall exists so a later wall can never seal one.
        for (const SplitWall& w : walls) {
            auto door_cell = [&](int p) { return w.vertical ? Cell{w.at, p} : Cell{p, w.at}; };
            auto usable = [&](int p) {
                if (p < w.lo || p > w.hi) return false;
                const Cell c = door_cell(p);
                const Cell a = w.vertical ? Cell{c.x - 1, c.y} : Cell{c.x, c.y - 1};
                const Cell b = w.vertical ? Cell{c.x + 1, c.y} : Cell{c.x, c.y + 1};
                return s.cells[c] == kWallCell && s.is_free(a) && s.is_free(b);
            };
            std::vector<int> candidates;
            for (int p = w.lo; p <= w.hi; ++p)
                if (usable(p)) candidates.push_back(p);
            if (candidates.empty()) return std::nullopt;
            const int p = candidates[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
            s.cells[door_cell(p)] = kFreeCell;
            if (rng_.bernoulli(0.5) && usable(p + 1)) s.cells[door_cell(p + 1)] = kFreeCell;
        }

        // Receptacle requests: start instances, end instances, distractors.
        std::vector<ClassId> requests;
        const int n_start = rng_.uniform_int(cfg_.start_instances_min, cfg_.start_instances_max);
        const int n_end = rng_.uniform_int(cfg_.end_instances_min, cfg_.end_instances_max);
        for (int i = 0; i < n_start; ++i) requests.push_back(goal.start_receptacle);
        for (int i = 0; i < n_end; ++i) requests.push_back(goal.end_receptacle);
        const int n_distract = rng_.uniform_int(cfg_.distractors_min, cfg_.distractors_max);
        std::vector<ClassId> others;
        for (ClassId c : classes_of_kind(ClassKind::Receptacle))
            if (c != goal.start_receptacle && c != goal.end_receptacle) others.push_back(c);
        const ClassId partner = confusion_partner(goal.end_receptacle, default_confusion_pairs());
        for (int i = 0; i < n_distract; ++i) {
            if (i == 0 && partner != kNoClass && partner != goal.start_receptacle)
                requests.push_back(partner);
            else
                requests.push_back(pick_class(rng_, others));
        }

        for (ClassId cls : requests)
            if (!place_receptacle(s, rooms, cls)) return std::nullopt;

        // Goal object on a start-class instance.
        std::vector<int> starts;
        for (const auto& r : s.receptacles)
            if (r.cls == goal.start_receptacle) starts.push_back(r.id);
        const auto& host = s.receptacles[static_cast<std::size_t>(starts[static_cast<std::size_t>(
            rng_.uniform_int(0, static_cast<int>(starts.size()) - 1))])];
        ObjectInstance obj;
        obj.id = 0;
        obj.cls = goal.object;
        obj.size = class_info(goal.object).size;
        obj.cell = host.cells[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(host.cells.size()) - 1))];
        obj.state = ObjectState::OnReceptacle;
        obj.receptacle = host.id;
        s.objects.push_back(obj);
        s.goal_object = 0;

        std::vector<Cell> free_cells;
        for (std::size_t i = 0; i < s.cells.size(); ++i)
            if (s.cells.data()[i] == kFreeCell) free_cells.push_back(s.cells.cell_at(i));
        s.start_pose.cell = free_cells[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(free_cells.size()) - 1))];
        s.start_pose.heading = 30 * rng_.uniform_int(0, 11);

        if (!solvable(s)) return std::nullopt;
        return s;
    }

private:
    bool place_receptacle(Scene& s, const std::vector<Rect>& rooms, ClassId cls) {
        const ClassInfo& info = class_info(cls);
        for (int tries = 0; tries < 200; ++tries) {
            const Rect& room = rooms[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(rooms.size()) - 1))];
            int w = rng_.uniform_int(info.min_side, info.max_side);
            int h = rng_.uniform_int(info.min_side, info.max_side);
            if (rng_.bernoulli(0.5)) std::swap(w, h);
            // One free cell of margin to the room walls.
            if (room.w() < w + 2 || room.h() < h + 2) continue;
            const int x = rng_.uniform_int(room.x0 + 1, room.x1 - w);
            const int y = rng_.uniform_int(room.y0 + 1, room.y1 - h);
            bool ok = true;
            for (int yy = y - 1; yy <= y + h && ok; ++yy)
                for (int xx = x - 1; xx <= x + w && ok; ++xx)
                    if (!s.is_free({xx, yy})) ok = false;
            if (!ok) continue;
            ReceptacleInstance r;
            r.id = static_cast<int>(s.receptacles.size());
            r.cls = cls;
            r.surface_height = info.surface_height;
            for (int yy = y; yy < y + h; ++yy)
                for (int xx = x; xx < x + w; ++xx) {
                    r.cells.push_back({xx, yy});
                    s.cells[{xx, yy}] = r.id;
                }
            s.receptacles.push_back(std::move(r));
            return true;
        }
        return false;
    }

    // Every free cell is 4-connected to the start, and every receptacle has a free neighbor.
    static bool solvable(const Scene& s) {
        Grid<std::uint8_t> seen(s.width, s.height, 0);
        std::vector<Cell> stack{s.start_pose.cell};
        seen[s.start_pose.cell] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const Cell c = stack.back();
            stack.pop_back();
            for (Cell d : kDirs4) {
                const Cell n = c + d;
                if (s.is_free(n) && !seen[n]) {
                    seen[n] = 1;
                    ++count;
                    stack.push_back(n);
                }
            }
        }
        std::size_t free_total = 0;
        for (auto v : s.cells.data()) free_total += (v == kFreeCell);
        if (count != free_total) return false;
        for (const auto& r : s.receptacles) {
            bool touches = false;
            for (Cell c : r.cells)
                for (Cell d : kDirs4)
                    if (s.is_free(c + d) && seen[c + d]) touches = true;
            if (!touches) return false;
        }
        return true;
    }

    Rng& rng_;
    const SceneConfig& cfg_;
};

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
    if (config.width < 12 || config.height < 12) throw GenerationFailed("scene must be at least 12x12");
    if (config.rooms_min < 1 || config.rooms_max < config.rooms_min)
        throw GenerationFailed("bad room count range");
    if (config.start_instances_min < 1 || config.end_instances_min < 1)
        throw GenerationFailed("need at least one start and one end receptacle");
    Rng rng = Rng::stream(seed, "scene");

    const auto objects = config.object_classes.empty() ? classes_of_kind(ClassKind::Object) : config.object_classes;
    const auto starts = config.start_classes.empty() ? classes_of_kind(ClassKind::Receptacle) : config.start_classes;
    const auto ends = config.end_classes.empty() ? classes_of_kind(ClassKind::Receptacle, 3) : config.end_classes;

    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        EpisodeGoal goal = config.goal;
        if (goal.object == kNoClass) goal.object = pick_class(rng, objects);
        if (goal.start_receptacle == kNoClass) goal.start_receptacle = pick_class(rng, starts);
        if (goal.end_receptacle == kNoClass) {
            std::vector<ClassId> pool;
            for (ClassId c : ends)
                if (c != goal.start_receptacle) pool.push_back(c);
            if (pool.empty()) continue;
            goal.end_receptacle = pick_class(rng, pool);
        }
        try {
            validate_goal(goal);
        } catch (const std::invalid_argument& e) {
            throw GenerationFailed(e.what());
        }
        Builder builder(rng, config);
        if (auto scene = builder.attempt(goal)) return std::move(*scene);
    }
    throw GenerationFailed("scene constraints unsatisfiable after " + std::to_string(config.max_retries) + " attempts");
}

}  // namespace ovmm
