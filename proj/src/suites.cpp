#include "ovmm/suites.hpp"

#include <stdexcept>

#include "ovmm/rng.hpp"

namespace ovmm {

namespace {

void add_receptacle(Scene& s, ClassId cls, int x0, int y0, int w, int h) {
    ReceptacleInstance r;
    r.id = static_cast<int>(s.receptacles.size());
    r.cls = cls;
    r.surface_height = class_info(cls).surface_height;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
            if (!s.is_free({x, y})) throw std::logic_error("receptacle overlaps a non-free cell");
            s.cells[{x, y}] = r.id;
            r.cells.push_back({x, y});
        }
    s.receptacles.push_back(std::move(r));
}

}  // namespace

Scene corridor_scene(std::uint64_t index) {
    Rng rng = Rng::stream(index, "corridor");
    Scene s;
    s.width = 40;
    s.height = 22;
    s.cells = Grid<std::int32_t>(s.width, s.height, kFreeCell);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x)
            if (x == 0 || y == 0 || x == s.width - 1 || y == s.height - 1 || (x >= 25 && x <= 31))
                s.cells[{x, y}] = kWallCell;
    const int corridor_y = rng.uniform_int(3, 17);
    for (int x = 25; x <= 31; ++x) {
        s.cells[{x, corridor_y}] = kFreeCell;
        s.cells[{x, corridor_y + 1}] = kFreeCell;
    }

    const ClassId table = class_id("table");
    const ClassId chair = class_id("chair");
    const int gx = rng.uniform_int(12, 14);
    const int gy = rng.uniform_int(2, 10);
    add_receptacle(s, table, gx, gy, 9, 9);
    const int cy = rng.uniform_int(2, 17);
    add_receptacle(s, chair, 3, cy, 2, 2);
    const int ty = rng.uniform_int(2, 16);
    add_receptacle(s, table, 34, ty, 3, 3);

    ObjectInstance obj;
    obj.cls = class_id("cup");
    obj.size = class_info(obj.cls).size;
    obj.cell = {3 + rng.uniform_int(0, 1), cy + rng.uniform_int(0, 1)};
    obj.receptacle = 1;
    s.objects.push_back(obj);
    s.goal = {obj.cls, chair, table};
    s.goal_object = 0;

    do {
        s.start_pose.cell = {rng.uniform_int(2, 9), rng.uniform_int(2, 19)};
    } while (!s.is_free(s.start_pose.cell));
    s.start_pose.heading = 30 * rng.uniform_int(0, 11);
    return s;
}

const std::vector<std::string>& failure_suite_names() {
    static const std::vector<std::string> names = {"floor", "pick", "edge", "corridor", "drop"};
    return names;
}

FailureSuite make_failure_suite(const std::string& name, int count) {
    FailureSuite suite;
    suite.name = name;
    SceneConfig sc;
    if (name == "floor") {
        suite.flag = "height_filter";
        suite.seed_base = 2000;
        suite.noise.p_floor_fp = 0.30;
    } else if (name == "pick") {
        suite.flag = "pick_verify";
        suite.seed_base = 3000;
        suite.noise.p_miss = 0.60;
    } else if (name == "edge") {
        suite.flag = "edge_safe_placement";
        suite.seed_base = 4000;
        suite.noise.p_floor_fp = 0.0;
    } else if (name == "corridor") {
        suite.flag = "oscillation_guard";
        suite.seed_base = 5000;
    } else if (name == "drop") {
        suite.flag = "drop_from_height";
        suite.seed_base = 6000;
        sc.object_classes = {class_id("backpack"), class_id("box")};
    } else {
        throw std::invalid_argument("unknown failure suite '" + name + "'");
    }
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = suite.seed_base + static_cast<std::uint64_t>(i);
        suite.scenes.push_back(name == "corridor" ? corridor_scene(seed) : generate_scene(seed, sc));
    }
    return suite;
}

SuiteOutcome run_failure_suite(const FailureSuite& suite, AgentConfig config, int budget, bool keep_traces) {
    config.noise = suite.noise;
    SuiteOutcome out;
    for (std::size_t i = 0; i < suite.scenes.size(); ++i) {
        EpisodeResult r = run_scene(suite.scenes[i], suite.seed_base + i, config, budget, true);
        ++out.episodes;
        out.floor_goal_episodes += r.counters.floor_goals > 0;
        out.empty_handed_episodes += r.counters.empty_handed_navigation > 0;
        out.place_fallen += r.counters.place_fallen;
        out.place_collision_large += r.counters.place_collision_large;
        out.budget_in_navigate += r.termination == Termination::Budget &&
                                  (r.final_phase == Phase::NavigateToObject ||
                                   r.final_phase == Phase::NavigateToEndReceptacle);
        out.max_arrivals_per_goal = std::max(out.max_arrivals_per_goal, r.counters.max_arrivals_per_goal);
        out.successes += r.overall_success;
        if (!keep_traces) r.trace.clear();
        out.results.push_back(std::move(r));
    }
    return out;
}

}  // namespace ovmm
