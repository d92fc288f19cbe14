#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kploc {

/// Number of keypoints annotated per bird in CUB-format datasets.
inline constexpr std::size_t kNumKeypoints = 15;

/// CUB part ordering; index i corresponds to part id i+1 in part_locs.txt.
inline constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "back",      "beak",      "belly",    "breast",    "crown",
    "forehead",  "left_eye",  "left_leg", "left_wing", "nape",
    "right_eye", "right_leg", "right_wing", "tail",    "throat",
};

/// Resolves a keypoint name to its index. Spaces are treated as
/// underscores so both "left eye" and "left_eye" match.
inline std::size_t keypoint_index(std::string_view name) {
    std::string key(name);
    for (char& c : key) {
        if (c == ' ') c = '_';
    }
    for (std::size_t i = 0; i < kKeypointNames.size(); ++i) {
        if (kKeypointNames[i] == key) return i;
    }
    throw std::invalid_argument("unknown keypoint name: " + std::string(name));
}

/// A named keypoint subset, e.g. the head or torso region.
struct PartDefinition {
    std::string name;
    std::vector<std::size_t> members;
};

/// Involution pairing orientation-sensitive keypoints for mirror
/// augmentation; non-lateral keypoints map to themselves.
struct FlipMap {
    std::vector<std::size_t> permutation;
};

inline const FlipMap& cub_flip_map() {
    static const FlipMap fm = [] {
        FlipMap m;
        m.permutation.resize(kNumKeypoints);
        for (std::size_t i = 0; i < kNumKeypoints; ++i) m.permutation[i] = i;
        const auto swap_pair = [&m](std::string_view a, std::string_view b) {
            const std::size_t ia = keypoint_index(a);
            const std::size_t ib = keypoint_index(b);
            m.permutation[ia] = ib;
            m.permutation[ib] = ia;
        };
        swap_pair("left_eye", "right_eye");
        swap_pair("left_leg", "right_leg");
        swap_pair("left_wing", "right_wing");
        return m;
    }();
    return fm;
}

/// Head: tightest region around beak, crown, forehead, eyes, nape, throat.
inline const PartDefinition& cub_head_definition() {
    static const PartDefinition def = {
        "head",
        {keypoint_index("beak"), keypoint_index("crown"), keypoint_index("forehead"),
         keypoint_index("left_eye"), keypoint_index("right_eye"), keypoint_index("nape"),
         keypoint_index("throat")},
    };
    return def;
}

/// Torso: back, breast, wings, tail, throat, belly, legs.
inline const PartDefinition& cub_torso_definition() {
    static const PartDefinition def = {
        "torso",
        {keypoint_index("back"), keypoint_index("breast"), keypoint_index("left_wing"),
         keypoint_index("right_wing"), keypoint_index("tail"), keypoint_index("throat"),
         keypoint_index("belly"), keypoint_index("left_leg"), keypoint_index("right_leg")},
    };
    return def;
}

inline std::vector<PartDefinition> cub_part_definitions() {
    return {cub_head_definition(), cub_torso_definition()};
}

/// Report groups that merge left/right pairs (eye, leg, wing), giving the
/// 12 per-part columns conventional for CUB keypoint evaluation.
inline const std::vector<std::pair<std::string, std::vector<std::size_t>>>& cub_merged_groups() {
    static const std::vector<std::pair<std::string, std::vector<std::size_t>>> groups = [] {
        std::vector<std::pair<std::string, std::vector<std::size_t>>> g;
        g.emplace_back("back", std::vector<std::size_t>{keypoint_index("back")});
        g.emplace_back("beak", std::vector<std::size_t>{keypoint_index("beak")});
        g.emplace_back("belly", std::vector<std::size_t>{keypoint_index("belly")});
        g.emplace_back("breast", std::vector<std::size_t>{keypoint_index("breast")});
        g.emplace_back("crown", std::vector<std::size_t>{keypoint_index("crown")});
        g.emplace_back("forehead", std::vector<std::size_t>{keypoint_index("forehead")});
        g.emplace_back("eye", std::vector<std::size_t>{keypoint_index("left_eye"),
                                                       keypoint_index("right_eye")});
        g.emplace_back("leg", std::vector<std::size_t>{keypoint_index("left_leg"),
                                                       keypoint_index("right_leg")});
        g.emplace_back("wing", std::vector<std::size_t>{keypoint_index("left_wing"),
                                                        keypoint_index("right_wing")});
        g.emplace_back("nape", std::vector<std::size_t>{keypoint_index("nape")});
        g.emplace_back("tail", std::vector<std::size_t>{keypoint_index("tail")});
        g.emplace_back("throat", std::vector<std::size_t>{keypoint_index("throat")});
        return g;
    }();
    return groups;
}

}  // namespace kploc
