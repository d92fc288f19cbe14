#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kploc/annotation.hpp"
#include "kploc/geometry.hpp"
#include "kploc/keypoints.hpp"
#include "kploc/rng.hpp"

namespace kploc {

/// One training crop: the un-padded box, its padded counterpart, and the
/// visibility/location targets. Location targets exist only where the
/// visibility target is 1; background crops carry all-zero targets.
struct TrainingExample {
    Rect box;
    Rect padded_box;
    std::vector<std::uint8_t> targets_v;
    std::vector<std::optional<NormalizedPoint>> targets_l;
    bool is_background = false;
    bool flipped = false;
};

/// Splits proposals into positives (containing at least `containment_min`
/// of their area inside the ground-truth box with at least `iou_min` IOU)
/// and up to `max_background` proposals disjoint from the ground-truth box,
/// sampled uniformly with the given seed. The positive set does not depend
/// on the seed; output order is positives first, then sampled backgrounds
/// in their original order.
inline std::vector<std::pair<Rect, bool>> select_training_boxes(
    std::span<const Rect> proposals, const Rect& gt_box, std::uint64_t seed,
    std::size_t max_background = 50, double containment_min = 0.5, double iou_min = 0.2) {
    std::vector<std::pair<Rect, bool>> selected;
    std::vector<std::size_t> background_candidates;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const Rect& p = proposals[i];
        if (containment_fraction(p, gt_box) >= containment_min && iou(p, gt_box) >= iou_min) {
            selected.emplace_back(p, false);
        } else if (intersection_area(p, gt_box) == 0.0) {
            background_candidates.push_back(i);
        }
    }
    if (background_candidates.size() > max_background) {
        // Partial Fisher-Yates over the candidate indices.
        Rng rng(derive_seed(seed, 0x6b67ULL));
        for (std::size_t i = 0; i < max_background; ++i) {
            const std::size_t j = i + rng.uniform_index(background_candidates.size() - i);
            std::swap(background_candidates[i], background_candidates[j]);
        }
        background_candidates.resize(max_background);
        std::sort(background_candidates.begin(), background_candidates.end());
    }
    for (const std::size_t i : background_candidates) {
        selected.emplace_back(proposals[i], true);
    }
    return selected;
}

/// Builds per-crop targets: a keypoint's visibility target is 1 iff it is
/// annotated visible and lies inside the un-padded box (boundary
/// inclusive); its location target is then the box-normalized coordinate.
/// Background crops get all-zero targets regardless of geometry.
inline TrainingExample make_targets(const Rect& box, const ImageAnnotation& annotation,
                                    bool is_background = false, double crop_side = 227.0,
                                    double buffer = 16.0) {
    const std::size_t n = annotation.keypoints.size();
    TrainingExample ex{box, pad_box(box, crop_side, buffer),
                       std::vector<std::uint8_t>(n, 0),
                       std::vector<std::optional<NormalizedPoint>>(n), is_background};
    if (is_background) return ex;
    for (std::size_t i = 0; i < n; ++i) {
        const AnnotatedKeypoint& kp = annotation.keypoints[i];
        if (kp.visible && box.contains(kp.location)) {
            ex.targets_v[i] = 1;
            ex.targets_l[i] = to_normalized(kp.location, box);
        }
    }
    return ex;
}

/// Mirrors an example about the vertical image axis: the box reflects,
/// targets permute through the flip map, and normalized u maps to 1 - u.
/// Applying the flip twice restores the original targets.
inline TrainingExample flip_example(const TrainingExample& ex, double image_width,
                                    const FlipMap& fm) {
    const std::size_t n = ex.targets_v.size();
    if (fm.permutation.size() != n) {
        throw std::invalid_argument("flip_example: flip map size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (fm.permutation[i] >= n || fm.permutation[fm.permutation[i]] != i) {
            throw std::invalid_argument("flip_example: flip map is not an involution");
        }
    }
    const auto mirror = [image_width](const Rect& r) {
        return Rect{image_width - (r.x + r.w), r.y, r.w, r.h};
    };
    TrainingExample out{mirror(ex.box), mirror(ex.padded_box),
                        std::vector<std::uint8_t>(n, 0),
                        std::vector<std::optional<NormalizedPoint>>(n), ex.is_background};
    out.flipped = !ex.flipped;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = fm.permutation[i];
        out.targets_v[i] = ex.targets_v[src];
        if (ex.targets_l[src]) {
            out.targets_l[i] = NormalizedPoint{1.0 - ex.targets_l[src]->u, ex.targets_l[src]->v};
        }
    }
    return out;
}

namespace detail {

inline void check_loss_lengths(std::span<const double> v, std::span<const double> v_hat,
                               std::span<const NormalizedPoint> l,
                               std::span<const NormalizedPoint> l_hat) {
    if (v.size() != v_hat.size() || v.size() != l.size() || v.size() != l_hat.size()) {
        throw std::invalid_argument("loss: vector length mismatch");
    }
}

}  // namespace detail

/// Squared Euclidean distance between visibility target and prediction.
inline double loss_vis(std::span<const double> v, std::span<const double> v_hat) {
    if (v.size() != v_hat.size()) {
        throw std::invalid_argument("loss_vis: vector length mismatch");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - v_hat[i];
        loss += d * d;
    }
    return loss;
}

/// Masked squared location loss: keypoints with a zero visibility target
/// contribute nothing, whatever their predicted location.
inline double loss_loc(std::span<const double> v, std::span<const NormalizedPoint> l,
                       std::span<const NormalizedPoint> l_hat) {
    if (v.size() != l.size() || v.size() != l_hat.size()) {
        throw std::invalid_argument("loss_loc: vector length mismatch");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double du = l[i].u - l_hat[i].u;
        const double dv = l[i].v - l_hat[i].v;
        loss += v[i] * (du * du + dv * dv);
    }
    return loss;
}

inline double loss_net(std::span<const double> v, std::span<const double> v_hat,
                       std::span<const NormalizedPoint> l,
                       std::span<const NormalizedPoint> l_hat) {
    detail::check_loss_lengths(v, v_hat, l, l_hat);
    return loss_vis(v, v_hat) + loss_loc(v, l, l_hat);
}

struct LossGradients {
    std::vector<double> vis;           // d loss_net / d v_hat
    std::vector<NormalizedPoint> loc;  // d loss_net / d l_hat
};

/// Analytic gradients of loss_net with respect to the predictions. Masked
/// keypoints get an exactly-zero location gradient.
inline LossGradients loss_gradients(std::span<const double> v, std::span<const double> v_hat,
                                    std::span<const NormalizedPoint> l,
                                    std::span<const NormalizedPoint> l_hat) {
    detail::check_loss_lengths(v, v_hat, l, l_hat);
    LossGradients g;
    g.vis.resize(v.size());
    g.loc.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        g.vis[i] = -2.0 * (v[i] - v_hat[i]);
        if (v[i] != 0.0) {
            g.loc[i] = {-2.0 * v[i] * (l[i].u - l_hat[i].u), -2.0 * v[i] * (l[i].v - l_hat[i].v)};
        } else {
            g.loc[i] = {0.0, 0.0};
        }
    }
    return g;
}

}  // namespace kploc
