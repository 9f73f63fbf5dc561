#include <cstdio>
#include <sstream>

#include "ovmm/world.hpp"

namespace ovmm {

namespace {

char receptacle_glyph(int id) {
    if (id < 26) return static_cast<char>('A' + id);
    if (id < 52) return static_cast<char>('a' + id - 26);
    return '&';
}

std::string format_height(double h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", h);
    return buf;
}

ObjectState parse_state(const std::string& s) {
    for (auto st : {ObjectState::OnReceptacle, ObjectState::Held, ObjectState::OnFloor, ObjectState::Fallen})
        if (to_string(st) == s) return st;
    throw SceneParseError("unknown object state '" + s + "'");
}

ClassId parse_class(const std::string& name) {
    auto c = find_class(name);
    if (!c) throw SceneParseError("unknown class '" + name + "'");
    return *c;
}

}  // namespace

std::string serialize_scene(const Scene& s) {
    std::ostringstream out;
    out << s.width << ' ' << s.height << '\n';
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            const auto v = s.cells[{x, y}];
            out << (v == kFreeCell ? '.' : v == kWallCell ? '#' : receptacle_glyph(v));
        }
        out << '\n';
    }
    out << "R " << s.receptacles.size() << '\n';
    for (const auto& r : s.receptacles) {
        out << r.id << ' ' << class_name(r.cls) << ' ' << format_height(r.surface_height);
        for (Cell c : r.cells) out << ' ' << c.x << ',' << c.y;
        out << '\n';
    }
    out << "O " << s.objects.size() << '\n';
    for (const auto& o : s.objects) {
        out << o.id << ' ' << class_name(o.cls) << ' ' << (o.size == SizeClass::Large ? "large" : "small") << ' '
            << o.cell.x << ' ' << o.cell.y << ' ' << to_string(o.state) << ' ' << o.receptacle << '\n';
    }
    out << "start " << s.start_pose.cell.x << ' ' << s.start_pose.cell.y << ' ' << s.start_pose.heading << '\n';
    out << "goal " << class_name(s.goal.object) << ' ' << class_name(s.goal.start_receptacle) << ' '
        << class_name(s.goal.end_receptacle) << ' ' << s.goal_object << '\n';
    out << "rules " << format_height(s.rules.reach) << ' ' << format_height(s.rules.fov_degrees) << ' '
        << s.rules.view_range << ' ' << s.rules.fall_margin << '\n';
    return out.str();
}

Scene parse_scene(const std::string& text) {
    std::istringstream in(text);
    Scene s;
    if (!(in >> s.width >> s.height) || s.width <= 0 || s.height <= 0) throw SceneParseError("bad header");
    s.cells = Grid<std::int32_t>(s.width, s.height, kFreeCell);
    std::string row;
    std::getline(in, row);
    std::vector<std::string> rows;
    for (int y = 0; y < s.height; ++y) {
        if (!std::getline(in, row) || static_cast<int>(row.size()) != s.width)
            throw SceneParseError("row " + std::to_string(y) + " has wrong width");
        rows.push_back(row);
    }

    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "R") throw SceneParseError("expected receptacle section");
    for (std::size_t i = 0; i < n; ++i) {
        ReceptacleInstance r;
        std::string cls;
        if (!(in >> r.id >> cls >> r.surface_height)) throw SceneParseError("bad receptacle line");
        r.cls = parse_class(cls);
        if (r.id != static_cast<int>(i)) throw SceneParseError("receptacle ids must be consecutive");
        if (r.surface_height <= 0) throw SceneParseError("receptacle height must be positive");
        std::string rest;
        std::getline(in, rest);
        std::istringstream cells(rest);
        std::string pair;
        while (cells >> pair) {
            Cell c;
            if (std::sscanf(pair.c_str(), "%d,%d", &c.x, &c.y) != 2 || !s.cells.in_bounds(c))
                throw SceneParseError("bad cell '" + pair + "'");
            s.cells[c] = r.id;
            r.cells.push_back(c);
        }
        if (r.cells.empty()) throw SceneParseError("receptacle without cells");
        s.receptacles.push_back(std::move(r));
    }

    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            const char g = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            const auto v = s.cells[{x, y}];
            if (g == '.' || g == '#') {
                if (v != kFreeCell) throw SceneParseError("glyph disagrees with receptacle cell list");
                s.cells[{x, y}] = g == '.' ? kFreeCell : kWallCell;
            } else if (v < 0 || (receptacle_glyph(v) != g)) {
                throw SceneParseError("unexpected glyph '" + std::string(1, g) + "'");
            }
        }
    }

    if (!(in >> tag >> n) || tag != "O") throw SceneParseError("expected object section");
    for (std::size_t i = 0; i < n; ++i) {
        ObjectInstance o;
        std::string cls, size, state;
        if (!(in >> o.id >> cls >> size >> o.cell.x >> o.cell.y >> state >> o.receptacle))
            throw SceneParseError("bad object line");
        o.cls = parse_class(cls);
        if (size != "small" && size != "large") throw SceneParseError("bad object size");
        o.size = size == "large" ? SizeClass::Large : SizeClass::Small;
        o.state = parse_state(state);
        s.objects.push_back(o);
    }

    std::string obj, start, end;
    if (!(in >> tag >> s.start_pose.cell.x >> s.start_pose.cell.y >> s.start_pose.heading) || tag != "start")
        throw SceneParseError("expected start line");
    if (!(in >> tag >> obj >> start >> end >> s.goal_object) || tag != "goal") throw SceneParseError("expected goal line");
    s.goal = {parse_class(obj), parse_class(start), parse_class(end)};
    if (in >> tag) {
        if (tag != "rules" ||
            !(in >> s.rules.reach >> s.rules.fov_degrees >> s.rules.view_range >> s.rules.fall_margin))
            throw SceneParseError("bad rules line");
    }
    if (s.goal_object < 0 || s.goal_object >= static_cast<int>(s.objects.size()))
        throw SceneParseError("goal object index out of range");
    if (!s.is_free(s.start_pose.cell) || s.start_pose.heading % 30 != 0)
        throw SceneParseError("start pose must be a free cell with a heading multiple of 30");
    return s;
}

}  // namespace ovmm
