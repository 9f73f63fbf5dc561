#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ovmm/eval.hpp"
#include "ovmm/render.hpp"

using namespace ovmm;

namespace {

std::string read_file(const std::string& name) {
    std::ifstream in(std::string(OVMM_TEST_DATA) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count(const std::string& s, char c) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), c)); }

}  // namespace

TEST(RenderMap, EmptyMapIsUnexplored) {
    const SemanticMap m(4, 4, {});
    EXPECT_EQ(render_map(m, {}, RenderFormat::Ascii), "????\n????\n????\n????\n");
}

TEST(RenderMap, SingleObstacle) {
    SemanticMap m(4, 4, {});
    for (auto& v : m.explored.data()) v = 1;
    m.obstacle[{2, 1}] = 1;
    const std::string out = render_map(m, {}, RenderFormat::Ascii);
    EXPECT_EQ(count(out, '#'), 1u);
    EXPECT_EQ(count(out, '.'), 15u);
    EXPECT_EQ(out.substr(5, 4), "..#.");
}

TEST(RenderMap, OverlayOrder) {
    SemanticMap m(3, 1, {});
    for (auto& v : m.explored.data()) v = 1;
    MapOverlay ov;
    ov.goal_cells = {{0, 0}, {1, 0}};
    ov.chosen_goal = Cell{1, 0};
    ov.robot = Pose{{2, 0}, 0};
    EXPECT_EQ(render_map(m, ov, RenderFormat::Ascii), "oO@\n");
}

TEST(RenderMap, PgmHeaderAndValues) {
    SemanticMap m(3, 2, {});
    m.explored[{0, 0}] = 1;
    m.explored[{1, 0}] = 1;
    m.obstacle[{1, 0}] = 1;
    const std::string pgm = render_map(m, {}, RenderFormat::Pgm);
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(pgm.size(), header.size() + 6);
    EXPECT_EQ(pgm.substr(0, header.size()), header);
    const auto* px = reinterpret_cast<const unsigned char*>(pgm.data() + header.size());
    EXPECT_EQ(px[0], 128);
    EXPECT_EQ(px[1], 255);
    EXPECT_EQ(px[2], 0);
}

TEST(RenderMap, Formats) {
    EXPECT_EQ(parse_render_format("ascii"), RenderFormat::Ascii);
    EXPECT_EQ(parse_render_format("pgm"), RenderFormat::Pgm);
    EXPECT_THROW(parse_render_format("svg"), UnsupportedFormat);
}

TEST(RenderMap, Channels) {
    const SemanticMap m(2, 2, {class_id("table")});
    const auto names = channel_names(m);
    EXPECT_NE(std::find(names.begin(), names.end(), "table"), names.end());
    EXPECT_EQ(render_channel_pgm(m, "table").substr(0, 3), "P5\n");
    EXPECT_THROW(render_channel_pgm(m, "sofa"), std::invalid_argument);
}

TEST(RenderMap, GoldenMidEpisode) {
    const Scene scene = parse_scene(read_file("golden_scene.txt"));
    AgentConfig c;
    c.flags = AgentFlags::uniteam();
    c.noise = NoiseConfig::noiseless();
    SemanticMap m;
    const auto r = run_scene(scene, 0, c, 30, true, &m);
    MapOverlay ov;
    ov.robot = r.trace.back().pose;
    ov.chosen_goal = r.trace.back().goal;
    EXPECT_EQ(render_map(m, ov, RenderFormat::Ascii), read_file("golden_map_step30.txt"));
}

TEST(RenderReplay, MarksPath) {
    const Scene scene = parse_scene(read_file("golden_scene.txt"));
    const std::vector<Pose> poses = {{{8, 2}, 90}, {{7, 3}, 120}, {{6, 3}, 180}};
    const std::string out = render_replay(scene, poses, RenderFormat::Ascii);
    EXPECT_EQ(count(out, 'S'), 1u);
    EXPECT_EQ(count(out, '@'), 1u);
    EXPECT_EQ(count(out, '+'), 1u);
    EXPECT_EQ(count(out, 'g'), 1u);
    EXPECT_EQ(count(out, '\n'), 12u);
}

TEST(Legend, ListsEveryGlyph) {
    for (char g : std::string("?.#x*+oO@S=gb")) EXPECT_NE(render_legend().find(std::string(1, g) + "  "), std::string::npos) << g;
}
