#include "ovmm/perception.hpp"

#include <string>

namespace ovmm {

NoiseConfig NoiseConfig::noiseless() {
    NoiseConfig n;
    n.p_miss = 0.0;
    n.p_confuse = 0.0;
    n.p_floor_fp = 0.0;
    n.true_object = {1.0, 1.0};
    n.true_receptacle = {1.0, 1.0};
    n.confused = {1.0, 1.0};
    n.floor = {1.0, 1.0};
    return n;
}

void NoiseConfig::validate() const {
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0,1]");
    };
    prob(p_miss, "p_miss");
    prob(p_confuse, "p_confuse");
    prob(p_floor_fp, "p_floor_fp");
    for (const ConfidenceRange* r : {&true_object, &true_receptacle, &confused, &floor}) {
        prob(r->lo, "confidence range");
        prob(r->hi, "confidence range");
        if (r->lo > r->hi) throw std::invalid_argument("confidence range lo > hi");
    }
    for (auto [a, b] : confusion_pairs)
        if (!valid_class(a) || !valid_class(b)) throw std::invalid_argument("confusion pair with unknown class");
}

std::vector<Detection> simulate_detections(const Observation& obs, const NoiseConfig& noise, Rng& rng) {
    std::map<int, Detection> receptacles;  // ordered by instance id
    std::vector<Cell> floor_cells;
    for (const auto& vc : obs.cells) {
        if (vc.kind == CellKind::Receptacle) {
            auto& d = receptacles[vc.receptacle];
            d.cls = vc.semantic;
            d.estimated_height = vc.surface_height;
            d.cells.push_back(vc.cell);
        } else if (vc.kind == CellKind::Free) {
            floor_cells.push_back(vc.cell);
        }
    }

    std::vector<Detection> out;
    auto emit = [&](Detection d, const ConfidenceRange& truth) {
        const double u_miss = rng.uniform();
        const double u_confuse = rng.uniform();
        const double u_conf = rng.uniform();
        if (u_miss < noise.p_miss) return;
        const ClassId partner = confusion_partner(d.cls, noise.confusion_pairs);
        const ConfidenceRange* range = &truth;
        if (partner != kNoClass && u_confuse < noise.p_confuse) {
            d.cls = partner;
            range = &noise.confused;
        }
        d.confidence = range->lo + (range->hi - range->lo) * u_conf;
        out.push_back(std::move(d));
    };
    for (auto& [id, d] : receptacles) emit(std::move(d), noise.true_receptacle);
    for (const auto& o : obs.objects) emit(Detection{o.cls, 0.0, {o.cell}, o.surface_height}, noise.true_object);

    const double u_fp = rng.uniform();
    const double u_cell = rng.uniform();
    const double u_cls = rng.uniform();
    const double u_conf = rng.uniform();
    if (u_fp < noise.p_floor_fp && !floor_cells.empty()) {
        std::vector<ClassId> receptacle_classes;
        for (int c = 0; c < kNumClasses; ++c)
            if (is_receptacle_class(c)) receptacle_classes.push_back(c);
        const auto pick = [](double u, std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(u * n)); };
        const Cell seed = floor_cells[pick(u_cell, floor_cells.size())];
        Detection fp;
        fp.cls = receptacle_classes[pick(u_cls, receptacle_classes.size())];
        fp.confidence = noise.floor.lo + (noise.floor.hi - noise.floor.lo) * u_conf;
        fp.estimated_height = 0.0;
        // The seed cell plus whichever of its 4-neighbours are visible floor.
        fp.cells.push_back(seed);
        for (Cell d : kDirs4)
            for (Cell f : floor_cells)
                if (f == seed + d) fp.cells.push_back(f);
        out.push_back(std::move(fp));
    }
    return out;
}

ThresholdTable ThresholdTable::for_goal(const EpisodeGoal& goal, const ThresholdDefaults& d) {
    ThresholdTable t;
    t.legacy_threshold = d.legacy;
    for (int c = 0; c < kNumClasses; ++c) t.per_class[c] = is_object_class(c) ? d.other_object : d.other_receptacle;
    if (valid_class(goal.object)) t.per_class[goal.object] = d.goal_object;
    if (valid_class(goal.start_receptacle)) t.per_class[goal.start_receptacle] = d.start_receptacle;
    if (valid_class(goal.end_receptacle)) t.per_class[goal.end_receptacle] = d.end_receptacle;
    return t;
}

double ThresholdTable::at(ClassId c) const {
    auto it = per_class.find(c);
    if (it == per_class.end()) throw UnknownClass("no threshold for class " + std::to_string(c));
    return it->second;
}

std::vector<Detection> filter_detections(const std::vector<Detection>& raw, const ThresholdTable& thresholds,
                                         double height_floor, FilterMode mode) {
    std::vector<Detection> out;
    for (const auto& d : raw) {
        const double threshold = mode.per_class_thresholds ? thresholds.at(d.cls) : thresholds.legacy_threshold;
        if (d.confidence < threshold) continue;
        if (mode.height_filter && !is_object_class(d.cls) && !(d.estimated_height > height_floor)) continue;
        out.push_back(d);
    }
    return out;
}

}  // namespace ovmm
