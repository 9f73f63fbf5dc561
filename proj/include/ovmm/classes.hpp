#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ovmm {

/// Semantic class id, an index into the built-in vocabulary.
using ClassId = int;
inline constexpr ClassId kNoClass = -1;

enum class ClassKind { Object, Receptacle };
enum class SizeClass { Small, Large };

struct ClassInfo {
    std::string_view name;
    ClassKind kind;
    double surface_height;  // meters; receptacles only
    SizeClass size;         // objects only
    int min_side;           // receptacle footprint range in cells
    int max_side;
};

// Receptacles first, then objects. Footprints of at least 3x3 leave interior cells
// that are safe to place on.
inline constexpr std::array<ClassInfo, 12> kVocabulary = {{
    {"table", ClassKind::Receptacle, 0.75, SizeClass::Small, 3, 5},
    {"counter", ClassKind::Receptacle, 0.90, SizeClass::Small, 3, 6},
    {"cabinet", ClassKind::Receptacle, 0.90, SizeClass::Small, 3, 4},
    {"drawer", ClassKind::Receptacle, 0.80, SizeClass::Small, 3, 3},
    {"chair", ClassKind::Receptacle, 0.45, SizeClass::Small, 2, 2},
    {"sofa", ClassKind::Receptacle, 0.45, SizeClass::Small, 2, 4},
    {"cup", ClassKind::Object, 0.0, SizeClass::Small, 0, 0},
    {"bowl", ClassKind::Object, 0.0, SizeClass::Small, 0, 0},
    {"book", ClassKind::Object, 0.0, SizeClass::Small, 0, 0},
    {"knife", ClassKind::Object, 0.0, SizeClass::Small, 0, 0},
    {"backpack", ClassKind::Object, 0.0, SizeClass::Large, 0, 0},
    {"box", ClassKind::Object, 0.0, SizeClass::Large, 0, 0},
}};

inline constexpr int kNumClasses = static_cast<int>(kVocabulary.size());

inline bool valid_class(ClassId c) { return c >= 0 && c < kNumClasses; }

inline const ClassInfo& class_info(ClassId c) {
    if (!valid_class(c)) throw std::out_of_range("unknown class id " + std::to_string(c));
    return kVocabulary[static_cast<std::size_t>(c)];
}

inline bool is_object_class(ClassId c) { return class_info(c).kind == ClassKind::Object; }
inline bool is_receptacle_class(ClassId c) { return class_info(c).kind == ClassKind::Receptacle; }
inline std::string_view class_name(ClassId c) { return class_info(c).name; }

inline std::optional<ClassId> find_class(std::string_view name) {
    for (int i = 0; i < kNumClasses; ++i)
        if (kVocabulary[static_cast<std::size_t>(i)].name == name) return i;
    return std::nullopt;
}

inline ClassId class_id(std::string_view name) {
    if (auto c = find_class(name)) return *c;
    throw std::invalid_argument("unknown class '" + std::string(name) + "'");
}

using ClassPair = std::pair<ClassId, ClassId>;

/// Plausible open-vocabulary confusions: chair/sofa, table/counter, cabinet/drawer.
inline std::vector<ClassPair> default_confusion_pairs() {
    return {{class_id("chair"), class_id("sofa")},
            {class_id("table"), class_id("counter")},
            {class_id("cabinet"), class_id("drawer")}};
}

inline ClassId confusion_partner(ClassId c, const std::vector<ClassPair>& pairs) {
    for (auto [a, b] : pairs) {
        if (a == c) return b;
        if (b == c) return a;
    }
    return kNoClass;
}

/// Object, start receptacle, end receptacle.
struct EpisodeGoal {
    ClassId object = kNoClass;
    ClassId start_receptacle = kNoClass;
    ClassId end_receptacle = kNoClass;

    friend bool operator==(const EpisodeGoal&, const EpisodeGoal&) = default;
};

/// Throws std::invalid_argument unless the triple names an object and two distinct receptacles.
inline void validate_goal(const EpisodeGoal& g) {
    if (!valid_class(g.object) || !is_object_class(g.object))
        throw std::invalid_argument("goal object must be an object class");
    if (!valid_class(g.start_receptacle) || !is_receptacle_class(g.start_receptacle))
        throw std::invalid_argument("start receptacle must be a receptacle class");
    if (!valid_class(g.end_receptacle) || !is_receptacle_class(g.end_receptacle))
        throw std::invalid_argument("end receptacle must be a receptacle class");
    if (g.start_receptacle == g.end_receptacle)
        throw std::invalid_argument("start and end receptacle classes must differ");
}

}  // namespace ovmm
