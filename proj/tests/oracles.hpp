#pragma once

// Independent reference implementations shared by unit tests and the acceptance runner.

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ovmm/mapping.hpp"
#include "ovmm/perception.hpp"
#include "ovmm/planning.hpp"
#include "ovmm/world.hpp"

namespace oracle {

using namespace ovmm;

/// Bellman-Ford style relaxation until nothing changes. Slow and obviously correct.
inline Grid<double> shortest_paths(const Grid<std::uint8_t>& blocked, const std::vector<Cell>& goals) {
    Grid<double> d(blocked.width(), blocked.height(), kInf);
    for (Cell g : goals)
        if (blocked.in_bounds(g) && !blocked[g]) d[g] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < blocked.height(); ++y)
            for (int x = 0; x < blocked.width(); ++x) {
                const Cell c{x, y};
                if (blocked[c]) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy) continue;
                        const Cell n{x + dx, y + dy};
                        if (!blocked.in_bounds(n) || blocked[n] || d[n] == kInf) continue;
                        const double cand = d[n] + ((dx && dy) ? std::sqrt(2.0) : 1.0);
                        if (cand < d[c] - 1e-12) {
                            d[c] = cand;
                            changed = true;
                        }
                    }
            }
    }
    return d;
}

/// Random obstacle map with rectangles and scattered cells, plus 1-3 goal cells.
struct RandomMap {
    Grid<std::uint8_t> blocked;
    std::vector<Cell> goals;
};

inline RandomMap random_map(Rng& rng, int w, int h) {
    RandomMap m{Grid<std::uint8_t>(w, h, 0), {}};
    const int rects = rng.uniform_int(0, 8);
    for (int i = 0; i < rects; ++i) {
        const int x0 = rng.uniform_int(0, w - 1), y0 = rng.uniform_int(0, h - 1);
        const int x1 = std::min(w - 1, x0 + rng.uniform_int(0, 10)), y1 = std::min(h - 1, y0 + rng.uniform_int(0, 2));
        const bool vertical = rng.bernoulli(0.5);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const Cell c = vertical ? Cell{std::min(w - 1, x0 + (y - y0)), std::min(h - 1, y0 + (x - x0))} : Cell{x, y};
                m.blocked[c] = 1;
            }
    }
    const double density = rng.uniform(0.0, 0.3);
    for (auto& v : m.blocked.data())
        if (rng.bernoulli(density)) v = 1;
    const int goals = rng.uniform_int(1, 3);
    for (int i = 0; i < goals; ++i) m.goals.push_back({rng.uniform_int(0, w - 1), rng.uniform_int(0, h - 1)});
    return m;
}

/// Explored, non-obstacle cells with an unexplored 4-neighbour, row-major.
inline std::vector<Cell> frontier(const SemanticMap& m) {
    std::vector<Cell> out;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            const Cell c{x, y};
            if (!m.explored[c] || m.obstacle[c]) continue;
            const Cell ns[4] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
            bool edge = false;
            for (Cell n : ns) edge = edge || (m.explored.in_bounds(n) && !m.explored[n]);
            if (edge) out.push_back(c);
        }
    return out;
}

/// Whether one detection survives the filter.
inline bool keeps(const Detection& d, const ThresholdTable& t, double height_floor, FilterMode mode) {
    const double threshold = mode.per_class_thresholds ? t.per_class.at(d.cls) : t.legacy_threshold;
    if (d.confidence < threshold) return false;
    const bool receptacle = class_info(d.cls).kind == ClassKind::Receptacle;
    if (mode.height_filter && receptacle && d.estimated_height <= height_floor) return false;
    return true;
}

inline std::vector<Detection> filter(const std::vector<Detection>& raw, const ThresholdTable& t, double height_floor,
                                     FilterMode mode) {
    std::vector<Detection> out;
    for (const auto& d : raw)
        if (keeps(d, t, height_floor, mode)) out.push_back(d);
    return out;
}

/// Random detection batch with heights on, below and above the floor limit.
inline std::vector<Detection> random_batch(Rng& rng, double height_floor) {
    std::vector<Detection> batch(static_cast<std::size_t>(rng.uniform_int(0, 12)));
    for (auto& d : batch) {
        d.cls = rng.uniform_int(0, kNumClasses - 1);
        d.confidence = rng.uniform_int(0, 4) == 0 ? 0.05 * rng.uniform_int(0, 20) : rng.uniform();
        const int h = rng.uniform_int(0, 3);
        d.estimated_height = h == 0 ? 0.0 : h == 1 ? height_floor : rng.uniform(0.0, 1.2);
        d.cells = {{rng.uniform_int(0, 9), rng.uniform_int(0, 9)}};
    }
    return batch;
}

/// A view of a generated scene with several receptacles and at least one object in sight.
inline Observation busy_view(const Scene& s) {
    Observation best;
    std::size_t best_score = 0;
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            if (!s.is_free({x, y})) continue;
            for (int h = 0; h < 360; h += 30) {
                Observation o = observe(s, {{x, y}, h});
                std::set<int> recs;
                for (const auto& vc : o.cells)
                    if (vc.receptacle >= 0) recs.insert(vc.receptacle);
                const std::size_t score = recs.size() * 10 + o.objects.size();
                if (!o.objects.empty() && score > best_score) {
                    best_score = score;
                    best = std::move(o);
                }
            }
        }
    return best;
}

struct PerceptionStats {
    long truths = 0;
    long missed = 0;
    long confusable = 0;  // detected truths whose class has a partner
    long confused = 0;
    long frames = 0;
    long floor_fp_frames = 0;
};

/// Counts outcomes of simulate_detections over `frames` frames of a fixed observation,
/// matching detections to ground truth by their cells.
inline PerceptionStats measure(const Observation& obs, const NoiseConfig& noise, Rng& rng, int frames) {
    std::map<int, std::vector<Cell>> rec_cells;
    std::map<int, ClassId> rec_cls;
    std::set<Cell> floor;
    for (const auto& vc : obs.cells) {
        if (vc.kind == CellKind::Receptacle) {
            rec_cells[vc.receptacle].push_back(vc.cell);
            rec_cls[vc.receptacle] = vc.semantic;
        } else if (vc.kind == CellKind::Free) {
            floor.insert(vc.cell);
        }
    }
    auto partner_of = [&](ClassId c) {
        for (auto [a, b] : noise.confusion_pairs) {
            if (a == c) return b;
            if (b == c) return a;
        }
        return kNoClass;
    };
    PerceptionStats s;
    for (int f = 0; f < frames; ++f) {
        const auto dets = simulate_detections(obs, noise, rng);
        ++s.frames;
        std::vector<char> used(dets.size(), 0);
        auto match = [&](const std::vector<Cell>& cells, ClassId truth) {
            ++s.truths;
            for (std::size_t i = 0; i < dets.size(); ++i) {
                if (used[i] || dets[i].cells != cells) continue;
                if (dets[i].estimated_height == 0.0 && floor.count(cells.front())) continue;
                used[i] = 1;
                if (partner_of(truth) != kNoClass) {
                    ++s.confusable;
                    s.confused += dets[i].cls != truth;
                }
                return;
            }
            ++s.missed;
        };
        for (const auto& [id, cells] : rec_cells) match(cells, rec_cls[id]);
        for (const auto& o : obs.objects) match({o.cell}, o.cls);
        bool fp = false;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (used[i]) continue;
            bool all_floor = dets[i].estimated_height == 0.0;
            for (Cell c : dets[i].cells) all_floor = all_floor && floor.count(c);
            fp = fp || all_floor;
        }
        s.floor_fp_frames += fp;
    }
    return s;
}

}  // namespace oracle
