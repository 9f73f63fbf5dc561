#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "ovmm/classes.hpp"
#include "ovmm/rng.hpp"
#include "ovmm/world.hpp"

namespace ovmm {

class UnknownClass : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Detection {
    ClassId cls = kNoClass;
    double confidence = 0.0;
    std::vector<Cell> cells;
    double estimated_height = 0.0;  // meters

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct ConfidenceRange {
    double lo = 1.0;
    double hi = 1.0;
    friend bool operator==(const ConfidenceRange&, const ConfidenceRange&) = default;
};

struct NoiseConfig {
    double p_miss = 0.15;
    double p_confuse = 0.15;
    double p_floor_fp = 0.08;
    std::vector<ClassPair> confusion_pairs = default_confusion_pairs();
    ConfidenceRange true_object{0.15, 0.55};
    ConfidenceRange true_receptacle{0.45, 1.0};
    ConfidenceRange confused{0.30, 0.60};
    ConfidenceRange floor{0.40, 0.80};

    /// Ground truth with confidence 1.
    static NoiseConfig noiseless();
    /// Throws std::invalid_argument when a probability or range leaves [0, 1].
    void validate() const;

    friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

/// Draws one frame of detections. Clusters are visited in a fixed order
/// (receptacle instances by id, then objects by id) and each consumes exactly
/// three draws, so the stream position never depends on earlier outcomes.
std::vector<Detection> simulate_detections(const Observation& obs, const NoiseConfig& noise, Rng& rng);

struct ThresholdDefaults {
    double goal_object = 0.25;
    double start_receptacle = 0.35;
    double end_receptacle = 0.50;
    double other_object = 0.25;
    double other_receptacle = 0.50;
    double legacy = 0.40;

    friend bool operator==(const ThresholdDefaults&, const ThresholdDefaults&) = default;
};

struct ThresholdTable {
    std::map<ClassId, double> per_class;
    double legacy_threshold = 0.40;

    /// Entries for the whole vocabulary, with the goal triple's roles applied last.
    static ThresholdTable for_goal(const EpisodeGoal& goal, const ThresholdDefaults& d = {});
    double at(ClassId c) const;
};

struct FilterMode {
    bool per_class_thresholds = true;
    bool height_filter = true;

    static constexpr FilterMode baseline() { return {false, false}; }
    static constexpr FilterMode improved() { return {true, true}; }
};

/// Keeps detections passing the confidence rule and, when enabled, drops receptacle
/// detections at or below height_floor. Order is preserved; nothing is modified.
std::vector<Detection> filter_detections(const std::vector<Detection>& raw, const ThresholdTable& thresholds,
                                         double height_floor, FilterMode mode);

}  // namespace ovmm
