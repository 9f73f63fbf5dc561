#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ovmm/planning.hpp"

using namespace ovmm;

TEST(DistanceField, OctileOnEmptyGrid) {
    const Grid<std::uint8_t> free(20, 15, 0);
    const std::vector<Cell> goal = {{7, 4}};
    const auto f = distance_field(free, goal);
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 20; ++x) EXPECT_NEAR(f.at({x, y}), octile({x, y}, {7, 4}), 1e-9);
}

TEST(DistanceField, EnclosedGoalUnreachable) {
    Grid<std::uint8_t> g(10, 10, 0);
    for (int i = 2; i <= 6; ++i) g[{i, 2}] = g[{i, 6}] = g[{2, i}] = g[{6, i}] = 1;
    const std::vector<Cell> goal = {{4, 4}};
    const auto f = distance_field(g, goal);
    EXPECT_EQ(f.at({4, 4}), 0.0);
    EXPECT_NEAR(f.at({5, 5}), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(f.at({0, 0}), kInf);
    EXPECT_EQ(f.at({8, 4}), kInf);
    EXPECT_FALSE(f.reachable({2, 2}));
}

TEST(DistanceField, NoGoalsThrows) {
    const Grid<std::uint8_t> g(4, 4, 0);
    EXPECT_THROW(distance_field(g, {}), NoGoals);
}

TEST(DistanceField, BlockedGoalStaysInfinite) {
    Grid<std::uint8_t> g(4, 4, 0);
    g[{1, 1}] = 1;
    const std::vector<Cell> goal = {{1, 1}};
    const auto f = distance_field(g, goal);
    for (double v : f.dist.data()) EXPECT_EQ(v, kInf);
}

TEST(DistanceField, RandomMapsMatchOracle) {
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        const auto m = oracle::random_map(rng, 32, 32);
        const auto f = distance_field(m.blocked, m.goals);
        const auto ref = oracle::shortest_paths(m.blocked, m.goals);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const Cell c = ref.cell_at(k);
            const double a = f.at(c), b = ref[c];
            if (b == kInf) {
                ASSERT_EQ(a, kInf) << "map " << i << " cell " << c.x << "," << c.y;
            } else {
                ASSERT_NEAR(a, b, 1e-9) << "map " << i << " cell " << c.x << "," << c.y;
            }
        }
    }
}

TEST(Inflate, ChebyshevDilation) {
    Grid<std::uint8_t> g(7, 7, 0);
    g[{3, 3}] = 1;
    const auto out = inflate(g, 1);
    int n = 0;
    for (auto v : out.data()) n += v;
    EXPECT_EQ(n, 9);
    EXPECT_TRUE((out[Cell{2, 4}]));
    EXPECT_FALSE((out[Cell{1, 3}]));
    EXPECT_EQ(inflate(g, 0).data(), g.data());
}

namespace {

Cell stg_oracle(const DistanceField& f, const Pose& pose, double lookahead) {
    struct Cand {
        double d, err;
        std::size_t index;
        Cell c;
    };
    std::vector<Cand> cands;
    for (std::size_t k = 0; k < f.dist.size(); ++k) {
        const Cell c = f.dist.cell_at(k);
        const double dx = c.x - pose.cell.x, dy = c.y - pose.cell.y;
        if (dx * dx + dy * dy > lookahead * lookahead || f.at(c) == kInf) continue;
        double err = 0.0;
        if (c != pose.cell) {
            double a = std::atan2(dy, dx) * 180.0 / M_PI - pose.heading;
            a = std::fmod(a, 360.0);
            if (a <= -180.0) a += 360.0;
            if (a > 180.0) a -= 360.0;
            err = std::abs(a);
        }
        cands.push_back({f.at(c), err, k, c});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.d, a.err, a.index) < std::tie(b.d, b.err, b.index);
    });
    return cands.front().c;
}

}  // namespace

TEST(ShortTermGoal, MatchesScanOracle) {
    Rng rng(99);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const auto m = oracle::random_map(rng, 32, 32);
        const auto f = distance_field(m.blocked, m.goals);
        for (int j = 0; j < 20; ++j) {
            const Pose pose{{rng.uniform_int(0, 31), rng.uniform_int(0, 31)}, 30 * rng.uniform_int(0, 11)};
            const double lookahead = rng.uniform_int(1, 10);
            if (!f.reachable(pose.cell)) {
                EXPECT_THROW(short_term_goal(f, pose, lookahead), Unreachable);
                continue;
            }
            ASSERT_EQ(short_term_goal(f, pose, lookahead), stg_oracle(f, pose, lookahead));
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(NextNavAction, TurnsThenMoves) {
    const Pose east{{5, 5}, 0};
    EXPECT_TRUE(std::holds_alternative<MoveForward>(next_nav_action(east, {9, 5})));
    EXPECT_TRUE(std::holds_alternative<TurnLeft30>(next_nav_action(east, {5, 9})));   // +y is +90
    EXPECT_TRUE(std::holds_alternative<TurnRight30>(next_nav_action(east, {5, 1})));  // -y is -90
    EXPECT_TRUE(std::holds_alternative<TurnLeft30>(next_nav_action(east, {1, 5})));   // 180 ties left
}

TEST(NextNavAction, AvoidsKnownObstacle) {
    Grid<std::uint8_t> g(10, 10, 0);
    g[{6, 5}] = 1;
    const Action a = next_nav_action({{5, 5}, 0}, {9, 5}, &g);
    EXPECT_FALSE(std::holds_alternative<MoveForward>(a));
}

TEST(NextNavAction, RolloutReachesGoal) {
    // Following short-term goals on a known map reaches the goal, never enters a blocked
    // cell, and needs at most 7 primitives (6 turns plus a move) per cell of path length.
    Rng rng(5);
    int rollouts = 0;
    for (int i = 0; i < 60; ++i) {
        const auto m = oracle::random_map(rng, 32, 32);
        const auto f = distance_field(m.blocked, m.goals);
        Pose pose{{rng.uniform_int(0, 31), rng.uniform_int(0, 31)}, 30 * rng.uniform_int(0, 11)};
        if (!f.reachable(pose.cell) || f.at(pose.cell) == 0.0) continue;
        const int bound = 7 * static_cast<int>(std::ceil(f.at(pose.cell) * 1.5 + 1));
        int steps = 0;
        while (f.at(pose.cell) > 0.0 && steps < bound) {
            const Cell wp = descent_step(f, pose);
            ASSERT_NE(wp, pose.cell);
            const Action a = next_nav_action(pose, wp, &m.blocked);
            if (std::holds_alternative<MoveForward>(a)) {
                const Cell n = pose.cell + kDirs[static_cast<std::size_t>(heading_dir(pose.heading))];
                ASSERT_FALSE(m.blocked[n]);
                pose.cell = n;
            } else {
                pose.heading = normalize_heading(pose.heading + (std::holds_alternative<TurnLeft30>(a) ? 30 : -30));
            }
            ++steps;
        }
        EXPECT_EQ(f.at(pose.cell), 0.0) << "map " << i;
        ++rollouts;
    }
    EXPECT_GT(rollouts, 20);
}

TEST(Oscillation, RepeatsTriggerTemporaryBlacklist) {
    NavHistory h;
    h.set_goal(4);
    const OscillationParams p{20, 3, 50};
    const Cell a{1, 1}, b{2, 1};
    int step = 0;
    NavDecision d = NavDecision::Continue;
    for (int i = 0; i < 5 && d == NavDecision::Continue; ++i) {
        d = oscillation_check(h, {i % 2 ? b : a, 0}, step++, p);
    }
    EXPECT_EQ(d, NavDecision::SwitchToFrontier);  // a visited the third time at i = 4
    EXPECT_TRUE(h.is_blacklisted(4, step));
    EXPECT_TRUE(h.is_blacklisted(4, 4 + 49));
    EXPECT_FALSE(h.is_blacklisted(4, 4 + 50));
}

TEST(Oscillation, TurningInPlaceIsNotArrival) {
    NavHistory h;
    h.set_goal(1);
    const OscillationParams p{20, 3, 50};
    for (int i = 0; i < 10; ++i) EXPECT_EQ(oscillation_check(h, {{3, 3}, 30 * i}, i, p), NavDecision::Continue);
    EXPECT_EQ(h.arrivals.size(), 1u);
}

TEST(Oscillation, WindowForgetsOldArrivals) {
    NavHistory h;
    h.set_goal(2);
    const OscillationParams p{3, 3, 50};
    // a . . a . . : the window of 3 never holds a twice.
    const Cell seq[] = {{0, 0}, {1, 0}, {2, 0}, {0, 0}, {1, 1}, {2, 1}};
    int step = 0;
    for (Cell c : seq) EXPECT_EQ(oscillation_check(h, {c, 0}, step++, p), NavDecision::Continue);
}

TEST(Oscillation, SecondOffenceAndTotalArePermanent) {
    NavHistory h;
    h.set_goal(7);
    const OscillationParams p{20, 2, 10};
    int step = 0;
    EXPECT_EQ(oscillation_check(h, {{0, 0}, 0}, step++, p), NavDecision::Continue);
    EXPECT_EQ(oscillation_check(h, {{1, 0}, 0}, step++, p), NavDecision::Continue);
    EXPECT_EQ(oscillation_check(h, {{0, 0}, 0}, step++, p), NavDecision::SwitchToFrontier);
    EXPECT_FALSE(h.is_blacklisted(7, 2 + 10));
    // Total for (7, {0,0}) reaches 3 > R: permanent.
    EXPECT_EQ(oscillation_check(h, {{0, 0}, 0}, 20, p), NavDecision::SwitchToFrontier);
    EXPECT_TRUE(h.is_blacklisted(7, 1000000));
}

TEST(Oscillation, NewGoalClearsWindow) {
    NavHistory h;
    h.set_goal(1);
    const OscillationParams p{20, 3, 50};
    oscillation_check(h, {{0, 0}, 0}, 0, p);
    oscillation_check(h, {{1, 0}, 0}, 1, p);
    h.set_goal(2);
    EXPECT_TRUE(h.arrivals.empty());
}
