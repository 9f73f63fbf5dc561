#include "ovmm/render.hpp"

#include <algorithm>
#include <cmath>

namespace ovmm {

namespace {

std::string pgm(int width, int height, const std::vector<unsigned char>& pixels) {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(pixels.begin(), pixels.end());
    return out;
}

std::string rows_to_text(const std::vector<std::string>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r;
        out += '\n';
    }
    return out;
}

}  // namespace

RenderFormat parse_render_format(const std::string& name) {
    if (name == "ascii") return RenderFormat::Ascii;
    if (name == "pgm") return RenderFormat::Pgm;
    throw UnsupportedFormat("unsupported render format '" + name + "'");
}

const std::string& render_legend() {
    static const std::string legend =
        "?  unexplored\n"
        ".  explored free\n"
        "#  obstacle\n"
        "x  collision mark\n"
        "*  object cluster\n"
        "+  receptacle cluster (map) / visited cell (replay)\n"
        "o  goal cell\n"
        "O  chosen goal\n"
        "@  robot (map) / final pose (replay)\n"
        "S  start pose (replay)\n"
        "=  receptacle (replay)\n"
        "g  goal object (replay)\n"
        "b  other object (replay)\n";
    return legend;
}

std::string render_map(const SemanticMap& map, const MapOverlay& overlay, RenderFormat format) {
    const int w = map.width();
    const int h = map.height();
    if (format == RenderFormat::Pgm) {
        std::vector<unsigned char> px(static_cast<std::size_t>(w) * h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Cell c{x, y};
                if (map.obstacle[c]) px[map.obstacle.index(c)] = 255;
                else if (map.explored[c]) px[map.obstacle.index(c)] = 128;
            }
        return pgm(w, h, px);
    }

    std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), '?'));
    auto put = [&](Cell c, char g) {
        if (c.x >= 0 && c.y >= 0 && c.x < w && c.y < h) rows[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] = g;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Cell c{x, y};
            if (map.obstacle[c]) put(c, '#');
            else if (map.explored[c]) put(c, '.');
        }
    for (const Cluster& cl : map.clusters()) {
        const char g = is_object_class(cl.cls) ? '*' : '+';
        for (Cell c : cl.cells) put(c, g);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (map.collision_marks[{x, y}]) put({x, y}, 'x');
    for (Cell c : overlay.goal_cells) put(c, 'o');
    if (overlay.chosen_goal) put(*overlay.chosen_goal, 'O');
    if (overlay.robot) put(overlay.robot->cell, '@');
    return rows_to_text(rows);
}

std::vector<std::string> channel_names(const SemanticMap& map) {
    std::vector<std::string> names = {"obstacle", "explored", "collision"};
    for (ClassId c : map.tracked()) names.emplace_back(class_name(c));
    return names;
}

std::string render_channel_pgm(const SemanticMap& map, const std::string& channel) {
    const int w = map.width();
    const int h = map.height();
    std::vector<unsigned char> px(static_cast<std::size_t>(w) * h, 0);
    const Grid<std::uint8_t>* binary = nullptr;
    if (channel == "obstacle") binary = &map.obstacle;
    else if (channel == "explored") binary = &map.explored;
    else if (channel == "collision") binary = &map.collision_marks;
    if (binary) {
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = (*binary)[binary->cell_at(i)] ? 255 : 0;
        return pgm(w, h, px);
    }
    const auto cls = find_class(channel);
    const int ch = cls ? map.channel(*cls) : -1;
    if (ch < 0) throw std::invalid_argument("unknown map channel '" + channel + "'");
    const auto& prob = map.class_prob[static_cast<std::size_t>(ch)];
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double p = std::clamp(prob[prob.cell_at(i)], 0.0, 1.0);
        px[i] = static_cast<unsigned char>(std::lround(p * 255.0));
    }
    return pgm(w, h, px);
}

std::string render_replay(const Scene& scene, const std::vector<Pose>& poses, RenderFormat format) {
    const int w = scene.width;
    const int h = scene.height;
    if (format == RenderFormat::Pgm) {
        std::vector<unsigned char> px(static_cast<std::size_t>(w) * h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const auto k = scene.kind({x, y});
                px[scene.cells.index({x, y})] = k == CellKind::Free ? 255 : k == CellKind::Wall ? 0 : 96;
            }
        for (const Pose& p : poses)
            if (scene.in_bounds(p.cell)) px[scene.cells.index(p.cell)] = 192;
        return pgm(w, h, px);
    }

    std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), '.'));
    auto put = [&](Cell c, char g) {
        if (scene.in_bounds(c)) rows[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] = g;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto k = scene.kind({x, y});
            if (k == CellKind::Wall) put({x, y}, '#');
            else if (k == CellKind::Receptacle) put({x, y}, '=');
        }
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        put(scene.objects[i].cell, static_cast<int>(i) == scene.goal_object ? 'g' : 'b');
    for (const Pose& p : poses) put(p.cell, '+');
    if (!poses.empty()) {
        put(poses.front().cell, 'S');
        put(poses.back().cell, '@');
    }
    return rows_to_text(rows);
}

}  // namespace ovmm
