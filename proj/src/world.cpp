#include "ovmm/world.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>

namespace ovmm {

namespace {

// Exact cosine/sine for headings that are multiples of 30 degrees.
void heading_unit(int heading, double& c, double& s) {
    if (heading % 30 == 0 && heading >= 0 && heading < 360) {
        static const auto table = [] {
            std::array<std::pair<double, double>, 12> t{};
            const double h = std::sqrt(3.0) / 2.0;
            const double cs[12] = {1, h, 0.5, 0, -0.5, -h, -1, -h, -0.5, 0, 0.5, h};
            for (int i = 0; i < 12; ++i) t[static_cast<std::size_t>(i)] = {cs[i], cs[(i + 9) % 12]};
            return t;
        }();
        std::tie(c, s) = table[static_cast<std::size_t>(heading / 30)];
        return;
    }
    const double rad = heading * M_PI / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string to_string(const Action& a) {
    return std::visit(Overloaded{
                          [](MoveForward) { return std::string("MoveForward"); },
                          [](TurnLeft30) { return std::string("TurnLeft30"); },
                          [](TurnRight30) { return std::string("TurnRight30"); },
                          [](const Pick& p) {
                              return "Pick(" + std::to_string(p.target.x) + "," + std::to_string(p.target.y) + ")";
                          },
                          [](const Place& p) {
                              return "Place(" + std::to_string(p.target.x) + "," + std::to_string(p.target.y) +
                                     (p.drop_from_height ? ",drop)" : ")");
                          },
                          [](Stop) { return std::string("Stop"); },
                      },
                      a);
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::None: return "None";
        case EventKind::Collision: return "Collision";
        case EventKind::PickSuccess: return "PickSuccess";
        case EventKind::PickFailure: return "PickFailure";
        case EventKind::PlaceSuccess: return "PlaceSuccess";
        case EventKind::PlaceFallen: return "PlaceFallen";
        case EventKind::PlaceCollision: return "PlaceCollision";
        case EventKind::PlaceFailure: return "PlaceFailure";
    }
    return "?";
}

std::string to_string(FailureReason r) {
    switch (r) {
        case FailureReason::None: return "none";
        case FailureReason::OutOfRange: return "out_of_range";
        case FailureReason::NotInView: return "not_in_view";
        case FailureReason::NoObject: return "no_object";
        case FailureReason::NotReceptacle: return "not_receptacle";
    }
    return "?";
}

std::string to_string(ObjectState s) {
    switch (s) {
        case ObjectState::OnReceptacle: return "on_receptacle";
        case ObjectState::Held: return "held";
        case ObjectState::OnFloor: return "on_floor";
        case ObjectState::Fallen: return "fallen";
    }
    return "?";
}

bool in_view_cone(Pose pose, Cell target, double fov_degrees) {
    const Cell v = target - pose.cell;
    if (v.x == 0 && v.y == 0) return false;
    double c, s;
    heading_unit(pose.heading, c, s);
    const double dot = v.x * c + v.y * s;
    const double half = fov_degrees / 2.0;
    const double norm2 = double(v.x) * v.x + double(v.y) * v.y;
    if (half < 90.0) {
        if (dot <= 0.0) return false;
        const double ch = std::cos(half * M_PI / 180.0);
        return dot * dot >= norm2 * ch * ch - 1e-9;
    }
    return std::acos(std::clamp(dot / std::sqrt(norm2), -1.0, 1.0)) <= half * M_PI / 180.0 + 1e-9;
}

int edge_depth(const Scene& scene, Cell c) {
    const int rid = scene.receptacle_at(c);
    if (rid < 0) return 0;
    const int limit = std::max(scene.width, scene.height);
    for (int r = 1; r <= limit; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const Cell n{c.x + dx, c.y + dy};
                if (scene.receptacle_at(n) != rid) return r;
            }
        }
    }
    return limit;
}

Event step(Scene& scene, RobotState& robot, const Action& action) {
    const PhysicsRules& rules = scene.rules;
    return std::visit(
        Overloaded{
            [&](MoveForward) {
                const Cell target = robot.pose.cell + kDirs[static_cast<std::size_t>(heading_dir(robot.pose.heading))];
                if (!scene.is_free(target)) return Event{EventKind::Collision};
                robot.pose.cell = target;
                return Event{};
            },
            [&](TurnLeft30) {
                robot.pose.heading = normalize_heading(robot.pose.heading + 30);
                return Event{};
            },
            [&](TurnRight30) {
                robot.pose.heading = normalize_heading(robot.pose.heading - 30);
                return Event{};
            },
            [&](const Pick& p) {
                if (robot.held) throw InvalidAction("Pick while holding an object");
                Event fail{EventKind::PickFailure};
                if (euclid(robot.pose.cell, p.target) > rules.reach) {
                    fail.reason = FailureReason::OutOfRange;
                    return fail;
                }
                if (!in_view_cone(robot.pose, p.target, rules.fov_degrees)) {
                    fail.reason = FailureReason::NotInView;
                    return fail;
                }
                auto& obj = scene.objects.at(static_cast<std::size_t>(scene.goal_object));
                if (obj.state == ObjectState::Held || obj.cell != p.target) {
                    fail.reason = FailureReason::NoObject;
                    return fail;
                }
                obj.state = ObjectState::Held;
                obj.receptacle = -1;
                robot.held = obj.id;
                return Event{EventKind::PickSuccess, obj.id};
            },
            [&](const Place& p) {
                if (!robot.held) throw InvalidAction("Place while not holding an object");
                auto& obj = scene.objects.at(static_cast<std::size_t>(*robot.held));
                Event fail{EventKind::PlaceFailure, obj.id};
                if (euclid(robot.pose.cell, p.target) > rules.reach) {
                    fail.reason = FailureReason::OutOfRange;
                    return fail;
                }
                if (!in_view_cone(robot.pose, p.target, rules.fov_degrees)) {
                    fail.reason = FailureReason::NotInView;
                    return fail;
                }
                const int rid = scene.receptacle_at(p.target);
                if (rid < 0) {
                    fail.reason = FailureReason::NotReceptacle;
                    return fail;
                }
                if (edge_depth(scene, p.target) <= rules.fall_margin) {
                    obj.state = ObjectState::Fallen;
                    obj.cell = p.target;
                    obj.receptacle = -1;
                    robot.held.reset();
                    return Event{EventKind::PlaceFallen, obj.id};
                }
                if (obj.size == SizeClass::Large && !p.drop_from_height)
                    return Event{EventKind::PlaceCollision, obj.id};
                obj.state = ObjectState::OnReceptacle;
                obj.cell = p.target;
                obj.receptacle = rid;
                robot.held.reset();
                return Event{EventKind::PlaceSuccess, obj.id};
            },
            [&](Stop) { return Event{}; },
        },
        action);
}

Observation observe(const Scene& scene, const Pose& pose) {
    Observation obs;
    obs.pose = pose;
    const PhysicsRules& rules = scene.rules;
    const int range = rules.view_range;
    const Cell origin = pose.cell;
    for (int y = std::max(0, origin.y - range); y <= std::min(scene.height - 1, origin.y + range); ++y) {
        for (int x = std::max(0, origin.x - range); x <= std::min(scene.width - 1, origin.x + range); ++x) {
            const Cell c{x, y};
            const int dx = x - origin.x;
            const int dy = y - origin.y;
            if (dx * dx + dy * dy > range * range) continue;
            if (!in_view_cone(pose, c, rules.fov_degrees)) continue;
            const int own = scene.receptacle_at(c);
            const bool clear = for_each_cell_between(origin, c, [&](Cell between) {
                if (!scene.is_opaque(between)) return true;
                return own >= 0 && scene.receptacle_at(between) == own;
            });
            if (!clear) continue;
            VisibleCell vc;
            vc.cell = c;
            vc.distance = std::sqrt(double(dx * dx + dy * dy));
            vc.kind = scene.kind(c);
            if (vc.kind == CellKind::Receptacle) {
                const auto& r = scene.receptacles[static_cast<std::size_t>(own)];
                vc.receptacle = own;
                vc.semantic = r.cls;
                vc.surface_height = r.surface_height;
            } else if (vc.kind == CellKind::Wall) {
                vc.surface_height = kWallHeight;
            }
            obs.cells.push_back(vc);
        }
    }
    if (obs.cells.empty()) return obs;
    Grid<std::uint8_t> visible(scene.width, scene.height, 0);
    for (const auto& vc : obs.cells) visible[vc.cell] = 1;
    for (const auto& o : scene.objects) {
        if (o.state == ObjectState::Held || !visible[o.cell]) continue;
        VisibleObject vo{o.id, o.cls, o.cell, 0.0};
        if (o.state == ObjectState::OnReceptacle && o.receptacle >= 0)
            vo.surface_height = scene.receptacles[static_cast<std::size_t>(o.receptacle)].surface_height;
        obs.objects.push_back(vo);
    }
    return obs;
}

Grid<std::uint8_t> reachable_free(const Scene& scene, Cell from) {
    Grid<std::uint8_t> seen(scene.width, scene.height, 0);
    if (!scene.is_free(from)) return seen;
    std::vector<Cell> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (Cell d : kDirs) {
            const Cell n = c + d;
            if (scene.is_free(n) && !seen[n]) {
                seen[n] = 1;
                stack.push_back(n);
            }
        }
    }
    return seen;
}

}  // namespace ovmm
