#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kploc/consensus.hpp"
#include "kploc/geometry.hpp"
#include "kploc/keypoints.hpp"

namespace kploc {

/// A candidate object box with its objectness score.
struct ScoredBox {
    Rect rect;
    double score = 0.0;
};

/// Tightest box around the inlier locations of the definition's visible
/// member keypoints. With single-medoid consensus the inlier set is the
/// reported location itself, so this covers both modes. Returns nothing
/// when no member keypoint is visible.
inline std::optional<Rect> part_box(std::span<const ConsensusResult> results,
                                    const PartDefinition& def, double min_side = 1.0) {
    std::vector<Point> points;
    for (const std::size_t idx : def.members) {
        if (idx >= results.size()) {
            throw std::invalid_argument("part_box: member keypoint index out of range");
        }
        const ConsensusResult& r = results[idx];
        if (!r.visible) continue;
        if (!r.inliers.empty()) {
            for (const KeypointObservation& o : r.inliers) points.push_back(o.location);
        } else if (r.location) {
            points.push_back(*r.location);
        }
    }
    if (points.empty()) return std::nullopt;
    return tightest_box(points, min_side);
}

/// Whole-body box heuristic: seed with the tightest box around the head
/// and torso boxes, then let the box expand to the highest-scored
/// candidate that contains at least `containment_min` of the seed and
/// overlaps it with at least `iou_min` IOU. Falls back to the seed when no
/// candidate qualifies.
inline Rect whole_body_box(const std::optional<Rect>& head, const std::optional<Rect>& torso,
                           std::span<const ScoredBox> candidates, double containment_min = 0.9,
                           double iou_min = 0.5) {
    if (!head && !torso) {
        throw std::invalid_argument("whole_body_box: need at least one of head/torso");
    }
    Rect seed = head ? (torso ? rect_union(*head, *torso) : *head) : *torso;
    const ScoredBox* best = nullptr;
    for (const ScoredBox& c : candidates) {
        if (containment_fraction(seed, c.rect) < containment_min) continue;
        if (iou(seed, c.rect) < iou_min) continue;
        if (best == nullptr || c.score > best->score) best = &c;
    }
    return best ? best->rect : seed;
}

}  // namespace kploc
