#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "ovmm/mapping.hpp"

using namespace ovmm;

namespace {

std::vector<ClassId> all_classes() {
    std::vector<ClassId> v;
    for (int c = 0; c < kNumClasses; ++c) v.push_back(c);
    return v;
}

std::vector<Cell> rect(int x0, int y0, int w, int h) {
    std::vector<Cell> out;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) out.push_back({x, y});
    return out;
}

// Marks a rectangle explored and free.
void reveal(SemanticMap& m, int x0, int y0, int w, int h) {
    for (Cell c : rect(x0, y0, w, h)) m.explored[c] = 1;
}

const ClassId kTable = class_id("table");
const ClassId kChair = class_id("chair");
const ClassId kCup = class_id("cup");

// 4-connected components of the cells with positive probability, each sorted row-major.
std::vector<std::vector<Cell>> components(const Grid<double>& prob) {
    Grid<int> seen(prob.width(), prob.height(), 0);
    std::vector<std::vector<Cell>> out;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const Cell s = prob.cell_at(i);
        if (prob[s] <= 0.0 || seen[s]) continue;
        std::vector<Cell> comp{s}, stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const Cell c = stack.back();
            stack.pop_back();
            for (Cell d : kDirs4) {
                const Cell n = c + d;
                if (prob.in_bounds(n) && prob[n] > 0.0 && !seen[n]) {
                    seen[n] = 1;
                    comp.push_back(n);
                    stack.push_back(n);
                }
            }
        }
        std::sort(comp.begin(), comp.end(), [](Cell a, Cell b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
        out.push_back(comp);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(Integrate, SingleFrameCluster) {
    SemanticMap m(10, 10, all_classes());
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.7, rect(3, 3, 2, 2), 0.75}});
    const auto cl = m.clusters_of(kTable);
    ASSERT_EQ(cl.size(), 1u);
    EXPECT_DOUBLE_EQ(cl[0]->prob, 0.7);
    EXPECT_EQ(cl[0]->cells.size(), 4u);
    EXPECT_DOUBLE_EQ(cl[0]->cx, 3.5);
}

TEST(Integrate, MaxFusionKeepsHigher) {
    SemanticMap m(10, 10, all_classes());
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.7, rect(3, 3, 2, 2), 0.75}});
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.4, rect(3, 3, 2, 2), 0.75}});
    EXPECT_DOUBLE_EQ(m.clusters_of(kTable)[0]->prob, 0.7);
}

TEST(Integrate, AverageFusion) {
    SemanticMap m(10, 10, all_classes(), Fusion::Average);
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.8, {{2, 2}}, 0.75}});
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.4, {{2, 2}}, 0.75}});
    EXPECT_NEAR((m.class_prob[static_cast<std::size_t>(m.channel(kTable))][Cell{2, 2}]), 0.6, 1e-12);
}

TEST(Integrate, MergedClusterKeepsOldestId) {
    SemanticMap m(12, 6, all_classes());
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.5, rect(1, 1, 2, 2), 0.75}});
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.6, rect(6, 1, 2, 2), 0.75}});
    auto cl = m.clusters_of(kTable);
    ASSERT_EQ(cl.size(), 2u);
    const int first = std::min(cl[0]->id, cl[1]->id);
    integrate(m, {{0, 0}, 0}, {}, {{kTable, 0.3, rect(3, 1, 3, 1), 0.75}});
    cl = m.clusters_of(kTable);
    ASSERT_EQ(cl.size(), 1u);
    EXPECT_EQ(cl[0]->id, first);
    EXPECT_DOUBLE_EQ(cl[0]->prob, 0.6);
}

TEST(Integrate, ExploredEqualsUnionOfViews) {
    const Scene s = generate_scene(4, SceneConfig{});
    SemanticMap m(s.width, s.height, all_classes());
    Grid<std::uint8_t> acc(s.width, s.height, 0);
    Rng rng(8);
    std::vector<Cell> free;
    for (std::size_t i = 0; i < s.cells.size(); ++i)
        if (s.is_free(s.cells.cell_at(i))) free.push_back(s.cells.cell_at(i));
    for (int f = 0; f < 50; ++f) {
        const Pose pose{free[static_cast<std::size_t>(rng.uniform_int(0, int(free.size()) - 1))], 30 * rng.uniform_int(0, 11)};
        const Observation obs = observe(s, pose);
        integrate(m, pose, obs.cells, {});
        acc[pose.cell] = 1;
        for (const auto& vc : obs.cells) acc[vc.cell] = 1;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const Cell c = acc.cell_at(i);
            ASSERT_EQ(m.explored[c], acc[c]) << "frame " << f;
            if (m.obstacle[c]) {
                ASSERT_TRUE(acc[c] && !s.is_free(c));
            }
        }
    }
}

TEST(Integrate, ClustersAreComponents) {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        SemanticMap m(16, 16, all_classes());
        const ClassId classes[] = {kTable, kChair, kCup};
        for (int k = 0; k < 12; ++k) {
            const ClassId cls = classes[rng.uniform_int(0, 2)];
            const auto cells = rect(rng.uniform_int(0, 13), rng.uniform_int(0, 13), rng.uniform_int(1, 3), rng.uniform_int(1, 3));
            integrate(m, {{0, 0}, 0}, {}, {{cls, rng.uniform(0.05, 1.0), cells, 0.5}});
            for (ClassId cls2 : classes) {
                std::vector<std::vector<Cell>> got;
                for (const Cluster* c : m.clusters_of(cls2)) {
                    got.push_back(c->cells);
                    double mx = 0.0;
                    for (Cell p : c->cells) mx = std::max(mx, m.class_prob[std::size_t(m.channel(cls2))][p]);
                    EXPECT_DOUBLE_EQ(c->prob, mx);
                }
                std::sort(got.begin(), got.end());
                ASSERT_EQ(got, components(m.class_prob[std::size_t(m.channel(cls2))])) << "trial " << trial;
            }
        }
    }
}

TEST(Frontier, Trivial) {
    SemanticMap m(5, 5, all_classes());
    EXPECT_TRUE(frontier(m).empty());
    m.explored[{2, 2}] = 1;
    EXPECT_EQ(frontier(m), (std::vector<Cell>{Cell{2, 2}}));
}

TEST(Frontier, RandomMapsMatchOracle) {
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        SemanticMap m(20, 17, all_classes());
        const double pe = rng.uniform(0.1, 0.9), po = rng.uniform(0.0, 0.4);
        for (std::size_t k = 0; k < m.explored.size(); ++k) {
            const Cell c = m.explored.cell_at(k);
            m.explored[c] = rng.bernoulli(pe);
            m.obstacle[c] = rng.bernoulli(po);
        }
        const auto f = frontier(m);
        ASSERT_EQ(f, oracle::frontier(m)) << "map " << i;
        for (Cell c : f) ASSERT_TRUE(m.explored[c] && !m.obstacle[c]);
    }
}

TEST(Collision, MarksBlockPlanning) {
    SemanticMap m(10, 10, all_classes());
    reveal(m, 0, 0, 10, 10);
    const auto v0 = m.obstacle_version();
    mark_collision(m, {5, 5}, Cell{4, 5});
    mark_collision(m, {7, 2});
    EXPECT_GT(m.obstacle_version(), v0);
    for (Cell c : {Cell{5, 5}, Cell{4, 5}, Cell{7, 2}}) {
        EXPECT_TRUE(m.collision_marks[c]);
        EXPECT_TRUE(m.obstacle[c]);
    }
    // A path planned afterwards never steps on a marked cell.
    const std::vector<Cell> goal = {{9, 5}};
    const auto f = distance_field(planning_grid(m), goal);
    Pose p{{0, 5}, 0};
    for (int i = 0; i < 40 && f.at(p.cell) > 0; ++i) {
        p.cell = descent_step(f, p);
        EXPECT_FALSE(m.collision_marks[p.cell]);
    }
    EXPECT_EQ(f.at(p.cell), 0.0);
}

TEST(GoalMap, InspectionCellsOnOpenSides) {
    // Chair at (4..5, 4..5) against a wall on its west side.
    SemanticMap m(10, 10, all_classes());
    reveal(m, 0, 0, 10, 10);
    for (int y = 0; y < 10; ++y) m.obstacle[{2, y}] = m.obstacle[{3, y}] = 1;
    for (Cell c : rect(4, 4, 2, 2)) m.obstacle[c] = 1;
    integrate(m, {{8, 8}, 0}, {}, {{kChair, 0.9, rect(4, 4, 2, 2), 0.45}});
    const EpisodeGoal goal{kCup, kChair, kTable};
    const auto gm = build_goal_map(m, GoalKind::StartInspection, goal);
    std::set<int> sides;
    for (const auto& g : gm.cells) {
        EXPECT_TRUE(m.explored[g.cell] && !m.obstacle[g.cell]);
        EXPECT_LE(std::min({chebyshev(g.cell, {4, 4}), chebyshev(g.cell, {5, 4}), chebyshev(g.cell, {4, 5}),
                            chebyshev(g.cell, {5, 5})}),
                  2);
        sides.insert(g.side);
    }
    // Brute-force adjacency scan.
    std::vector<Cell> expect;
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            const Cell q{x, y};
            if (m.obstacle[q]) continue;
            for (Cell p : rect(4, 4, 2, 2))
                if (chebyshev(p, q) <= 2) {
                    expect.push_back(q);
                    break;
                }
        }
    std::vector<Cell> got;
    for (const auto& g : gm.cells) got.push_back(g.cell);
    EXPECT_EQ(got, expect);
    EXPECT_FALSE(sides.count(4));  // nothing on the walled west side
    EXPECT_TRUE(sides.count(0) && sides.count(2) && sides.count(6));
}

TEST(GoalMap, InspectedClustersExcluded) {
    SemanticMap m(10, 10, all_classes());
    reveal(m, 0, 0, 10, 10);
    integrate(m, {{8, 8}, 0}, {}, {{kChair, 0.9, rect(4, 4, 2, 2), 0.45}});
    const EpisodeGoal goal{kCup, kChair, kTable};
    const int id = m.clusters_of(kChair)[0]->id;
    EXPECT_FALSE(build_goal_map(m, GoalKind::StartInspection, goal).empty());
    EXPECT_TRUE(build_goal_map(m, GoalKind::StartInspection, goal, {id}).empty());
    mark_inspected(m, id);
    EXPECT_TRUE(build_goal_map(m, GoalKind::StartInspection, goal).empty());
    EXPECT_THROW(mark_inspected(m, 999), UnknownCluster);
}

TEST(Inspection, TwoSidesAndAllCellsSeen) {
    const std::string text =
        "9 9\n"
        "#########\n"
        "#.......#\n"
        "#.......#\n"
        "#...AA..#\n"
        "#...AA..#\n"
        "#.......#\n"
        "#.......#\n"
        "#.......#\n"
        "#########\n"
        "R 1\n"
        "0 chair 0.45 4,3 5,3 4,4 5,4\n"
        "O 1\n"
        "0 cup small 4 3 on_receptacle 0\n"
        "start 1 4 0\n"
        "goal cup chair table 0\n"
        "rules 6.00 90.00 20 1\n";
    const Scene s = parse_scene(text);
    SemanticMap m(s.width, s.height, all_classes());
    auto look = [&](Pose p) {
        const Observation o = observe(s, p);
        integrate(m, p, o.cells, {{kChair, 0.9, s.receptacles[0].cells, 0.45}});
    };
    look({{1, 4}, 0});
    ASSERT_EQ(m.clusters_of(kChair).size(), 1u);
    EXPECT_EQ(m.clusters_of(kChair)[0]->sides_seen(), 1);
    EXPECT_FALSE(m.clusters_of(kChair)[0]->inspected);
    look({{4, 7}, 270});
    EXPECT_EQ(m.clusters_of(kChair)[0]->sides_seen(), 2);
    EXPECT_TRUE(m.clusters_of(kChair)[0]->inspected);
}

// ---------------------------------------------------------------- goal selection

TEST(SelectGoal, ReachabilityGate) {
    SemanticMap m(20, 10, all_classes());
    reveal(m, 0, 0, 20, 10);
    // A sealed box around cluster A.
    for (int i = 12; i <= 18; ++i) m.obstacle[{i, 1}] = m.obstacle[{i, 8}] = 1;
    for (int j = 1; j <= 8; ++j) m.obstacle[{12, j}] = m.obstacle[{18, j}] = 1;
    integrate(m, {{1, 1}, 0}, {}, {{kTable, 0.9, rect(14, 4, 2, 2), 0.75}, {kTable, 0.6, rect(4, 4, 2, 2), 0.75}});
    const std::vector<Cell> src = {{1, 1}};
    const auto f = distance_field(planning_grid(m), src);
    const auto gm = build_goal_map(m, GoalKind::EndReceptacle, {kCup, kChair, kTable});
    const auto pick = select_goal(gm, m, f, SelectMode::improved());
    ASSERT_TRUE(pick);
    EXPECT_NE(std::find(gm.cells.begin(), gm.cells.end(), GoalCell{pick->cell, pick->cluster, -1}), gm.cells.end());
    EXPECT_LT(pick->cell.x, 10);
}

TEST(SelectGoal, ProbabilityVersusDistance) {
    SemanticMap m(48, 6, all_classes());
    reveal(m, 0, 0, 48, 6);
    integrate(m, {{1, 2}, 0}, {}, {{kTable, 0.9, rect(41, 2, 2, 2), 0.75}, {kTable, 0.5, rect(4, 2, 2, 2), 0.75}});
    const std::vector<Cell> src = {{1, 2}};
    const auto f = distance_field(planning_grid(m), src);
    const auto gm = build_goal_map(m, GoalKind::EndReceptacle, {kCup, kChair, kTable});
    const auto improved = select_goal(gm, m, f, SelectMode::improved());
    const auto baseline = select_goal(gm, m, f, SelectMode::baseline());
    ASSERT_TRUE(improved && baseline);
    EXPECT_GT(improved->cell.x, 40);
    EXPECT_EQ(baseline->cell, (Cell{4, 2}));
}

TEST(SelectGoal, NothingReachable) {
    SemanticMap m(10, 10, all_classes());
    const std::vector<Cell> src = {{0, 0}};
    const auto f = distance_field(planning_grid(m), src);
    EXPECT_FALSE(select_goal(GoalMap{}, m, f, SelectMode::improved()));
}

namespace {

struct Instance {
    SemanticMap map;
    GoalMap goals;
    DistanceField field;
};

Instance random_instance(Rng& rng, double scale = 1.0, std::uint64_t* seed_out = nullptr) {
    const std::uint64_t seed = rng.next();
    if (seed_out) *seed_out = seed;
    Rng r(seed);
    Instance in{SemanticMap(18, 18, all_classes()), {}, {}};
    reveal(in.map, 0, 0, 18, 18);
    for (std::size_t k = 0; k < in.map.obstacle.size(); ++k)
        if (r.bernoulli(0.18)) in.map.obstacle[in.map.obstacle.cell_at(k)] = 1;
    const int n = r.uniform_int(1, 5);
    std::vector<Detection> dets;
    for (int i = 0; i < n; ++i) {
        const auto cells = rect(r.uniform_int(0, 15), r.uniform_int(0, 15), r.uniform_int(1, 3), r.uniform_int(1, 3));
        // Coarse confidences make probability ties common.
        dets.push_back({kTable, scale * 0.1 * r.uniform_int(1, 9), cells, 0.75});
        for (Cell c : cells) in.map.obstacle[c] = r.bernoulli(0.5);
    }
    integrate(in.map, {{0, 0}, 0}, {}, dets);
    Cell start;
    do start = {r.uniform_int(0, 17), r.uniform_int(0, 17)};
    while (in.map.obstacle[start]);
    const std::vector<Cell> src = {start};
    in.field = distance_field(planning_grid(in.map), src);
    in.goals = build_goal_map(in.map, GoalKind::EndReceptacle, {kCup, kChair, kTable});
    return in;
}

double cost_oracle(const DistanceField& f, Cell c, double reach) {
    if (f.at(c) < kInf) return f.at(c);
    double best = kInf;
    for (std::size_t k = 0; k < f.dist.size(); ++k) {
        const Cell q = f.dist.cell_at(k);
        const double d = euclid(q, c);
        if (d <= reach && f.at(q) < kInf) best = std::min(best, f.at(q) + d);
    }
    return best;
}

std::optional<GoalChoice> select_oracle(const Instance& in, SelectMode mode) {
    struct C {
        Cell cell;
        int cluster;
        double cost;
        std::size_t index;
    };
    std::vector<C> cands;
    for (const auto& g : in.goals.cells) {
        const double cost = cost_oracle(in.field, g.cell, mode.reach);
        if (cost < kInf) cands.push_back({g.cell, g.cluster, cost, in.map.obstacle.index(g.cell)});
    }
    if (cands.empty()) return std::nullopt;
    auto key = [](const C& c) { return std::make_tuple(c.cost, c.cluster, c.index); };
    int cluster;
    if (mode.prob_ranking) {
        // argmax over (prob, -distance, -id); a cluster's distance is its nearest reachable cell.
        std::map<int, double> dist;
        for (const auto& c : cands) dist[c.cluster] = std::min(dist.count(c.cluster) ? dist[c.cluster] : kInf, c.cost);
        std::tuple<double, double, int> best{-1, 0, 0};
        cluster = -1;
        for (auto [id, d] : dist) {
            double prob = 0.0;
            for (const auto& g : in.goals.cells)
                if (g.cluster == id) prob = std::max(prob, in.map.class_prob[std::size_t(in.map.channel(kTable))][g.cell]);
            const std::tuple<double, double, int> k{prob, -d, -id};
            if (cluster < 0 || k > best) {
                best = k;
                cluster = id;
            }
        }
    } else {
        cluster = std::min_element(cands.begin(), cands.end(), [&](const C& a, const C& b) { return key(a) < key(b); })->cluster;
    }
    std::vector<C> mine;
    for (const auto& c : cands)
        if (c.cluster == cluster) mine.push_back(c);
    if (!mode.center_alignment) {
        const C& c = *std::min_element(mine.begin(), mine.end(), [&](const C& a, const C& b) { return key(a) < key(b); });
        return GoalChoice{c.cell, c.cluster, c.cost};
    }
    double cx = 0, cy = 0;
    int n = 0;
    for (const auto& g : in.goals.cells)
        if (g.cluster == cluster) {
            cx += g.cell.x;
            cy += g.cell.y;
            ++n;
        }
    cx /= n;
    cy /= n;
    const C* best = nullptr;
    double bd = kInf;
    for (const auto& c : mine) {
        const double d = std::hypot(c.cell.x - cx, c.cell.y - cy);
        if (!best || d < bd - 1e-9 || (std::abs(d - bd) <= 1e-9 && key(c) < key(*best))) {
            best = &c;
            bd = d;
        }
    }
    return GoalChoice{best->cell, best->cluster, best->cost};
}

}  // namespace

TEST(SelectGoal, RandomInstancesMatchOracle) {
    Rng rng(404);
    int nonempty = 0;
    for (int i = 0; i < 100; ++i) {
        const Instance in = random_instance(rng);
        for (SelectMode mode : {SelectMode::improved(), SelectMode::baseline(), SelectMode{true, false, 1.5},
                                SelectMode{false, true, 6.0}}) {
            const auto got = select_goal(in.goals, in.map, in.field, mode);
            const auto want = select_oracle(in, mode);
            ASSERT_EQ(got.has_value(), want.has_value()) << "instance " << i;
            if (!got) continue;
            ++nonempty;
            EXPECT_EQ(got->cell, want->cell) << "instance " << i;
            EXPECT_EQ(got->cluster, want->cluster) << "instance " << i;
            EXPECT_DOUBLE_EQ(got->distance, want->distance) << "instance " << i;
        }
    }
    EXPECT_GT(nonempty, 200);
}

TEST(SelectGoal, ScalingProbabilitiesKeepsChoice) {
    Rng a(77), b(77);
    for (int i = 0; i < 50; ++i) {
        const Instance x = random_instance(a, 1.0);
        const Instance y = random_instance(b, 0.5);
        const auto gx = select_goal(x.goals, x.map, x.field, SelectMode::improved());
        const auto gy = select_goal(y.goals, y.map, y.field, SelectMode::improved());
        ASSERT_EQ(gx.has_value(), gy.has_value());
        if (gx) {
            EXPECT_EQ(*gx, *gy) << "instance " << i;
        }
    }
}
