#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kploc/annotation.hpp"
#include "kploc/consensus.hpp"
#include "kploc/geometry.hpp"
#include "kploc/keypoints.hpp"
#include "kploc/metrics.hpp"
#include "kploc/partbox.hpp"
#include "kploc/rng.hpp"

namespace kploc {

struct BetaParams {
    double alpha = 2.0;
    double beta = 2.0;
};

/// Parametric error model for synthetic per-proposal predictions. The
/// confidence distributions are Beta-shaped; a zero beta (resp. alpha)
/// parameter degenerates to a point mass at 1 (resp. 0). This is a
/// verification instrument, not a claim about any particular predictor.
struct NoiseModel {
    double loc_sigma = 3.0;       // Gaussian location noise
    bool sigma_relative = false;  // if true, loc_sigma scales the box diagonal
    double outlier_rate = 0.1;    // chance a covered keypoint predicts uniformly
    double outlier_conf = 0.95;   // confidence attached to outlier predictions
    // Per-box chance an uncovered keypoint looks confident. Keypoint-level
    // false visibility compounds over hundreds of proposals, so the default
    // is small.
    double false_vis_rate = 0.0001;
    // Sharp so that enough genuine predictions survive even the aggressive
    // no-box visibility threshold; outliers must not dominate the pool.
    BetaParams conf_visible{24.0, 2.0};
    BetaParams conf_invisible{1.5, 8.0};
    std::uint64_t seed = 0;
};

/// Draws one prediction set per box. Keypoints covered by a box predict
/// the ground truth plus Gaussian noise (or, at `outlier_rate`, a uniform
/// in-box location with high confidence); keypoints invisible or outside
/// the box draw a low confidence, except for occasional confident false
/// visibles. Every draw derives its stream from (seed, image, box,
/// keypoint) indices, so results are bit-identical however the loop is
/// scheduled.
inline std::vector<PredictionSet> simulate_predictions(const ImageAnnotation& annotation,
                                                       std::span<const Rect> boxes,
                                                       const NoiseModel& nm) {
    std::vector<PredictionSet> out;
    out.reserve(boxes.size());
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        const Rect& box = boxes[b];
        PredictionSet ps(annotation.image_id, box, 0.0);
        ps.loc.reserve(annotation.keypoints.size());
        ps.vis.reserve(annotation.keypoints.size());
        const double dx = box.w;
        const double dy = box.h;
        const double sigma =
            nm.sigma_relative ? nm.loc_sigma * std::sqrt(dx * dx + dy * dy) : nm.loc_sigma;
        for (std::size_t k = 0; k < annotation.keypoints.size(); ++k) {
            Rng rng(derive_seed(nm.seed, static_cast<std::uint64_t>(annotation.image_id), b, k));
            const AnnotatedKeypoint& kp = annotation.keypoints[k];
            const bool covered = kp.visible && box.contains(kp.location);
            Point loc{0.0, 0.0};
            double conf = 0.0;
            if (covered) {
                if (rng.uniform01() < nm.outlier_rate) {
                    loc = {rng.uniform(box.x, box.right()), rng.uniform(box.y, box.bottom())};
                    conf = nm.outlier_conf;
                } else {
                    loc = {kp.location.x + sigma * rng.normal(),
                           kp.location.y + sigma * rng.normal()};
                    conf = rng.beta(nm.conf_visible.alpha, nm.conf_visible.beta);
                }
            } else {
                loc = {rng.uniform(box.x, box.right()), rng.uniform(box.y, box.bottom())};
                conf = rng.uniform01() < nm.false_vis_rate
                           ? nm.outlier_conf
                           : rng.beta(nm.conf_invisible.alpha, nm.conf_invisible.beta);
            }
            ps.loc.push_back(to_normalized(loc, box));
            ps.vis.push_back(conf);
        }
        out.push_back(std::move(ps));
    }
    return out;
}

/// Random scored proposals: half jittered around the reference box, half
/// uniform clutter, scored by IOU against the reference plus observation
/// noise. Per-index seeding keeps the list stable under any truncation.
inline std::vector<ScoredBox> generate_proposals(const Rect& reference, double image_w,
                                                 double image_h, std::size_t count,
                                                 std::uint64_t seed) {
    std::vector<ScoredBox> boxes;
    boxes.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        Rng rng(derive_seed(seed, 0x70726fULL, j));
        double x, y, w, h;
        if (j % 2 == 0) {
            const Point c = reference.center();
            const double cx = c.x + 0.15 * reference.w * rng.normal();
            const double cy = c.y + 0.15 * reference.h * rng.normal();
            w = reference.w * std::exp(0.25 * rng.normal());
            h = reference.h * std::exp(0.25 * rng.normal());
            x = cx - w / 2.0;
            y = cy - h / 2.0;
        } else {
            x = rng.uniform(0.0, image_w * 0.8);
            y = rng.uniform(0.0, image_h * 0.8);
            w = rng.uniform(10.0, image_w / 2.0);
            h = rng.uniform(10.0, image_h / 2.0);
        }
        w = std::clamp(w, 5.0, image_w);
        h = std::clamp(h, 5.0, image_h);
        x = std::clamp(x, -w / 2.0, image_w - w / 2.0);
        y = std::clamp(y, -h / 2.0, image_h - h / 2.0);
        const Rect rect{x, y, w, h};
        boxes.push_back({rect, iou(rect, reference) + 0.05 * rng.normal()});
    }
    return boxes;
}

struct SyntheticDatasetConfig {
    std::size_t images = 24;
    double width = 500.0;
    double height = 375.0;
    double visible_prob = 0.85;
    std::uint64_t seed = 1;
};

/// CUB-shaped synthetic ground truth: one object box per image, head
/// keypoints clustered tightly in one corner region of the box, torso
/// keypoints spread wider around the box center.
inline std::vector<ImageAnnotation> generate_synthetic_annotations(
    const SyntheticDatasetConfig& cfg) {
    const PartDefinition& head = cub_head_definition();
    std::vector<ImageAnnotation> out;
    out.reserve(cfg.images);
    for (std::size_t i = 0; i < cfg.images; ++i) {
        Rng rng(derive_seed(cfg.seed, 0x616e6eULL, i));
        const double w = rng.uniform(0.4, 0.65) * cfg.width;
        const double h = rng.uniform(0.4, 0.62) * cfg.height;
        const double x = rng.uniform(0.02, 0.95 - w / cfg.width) * cfg.width;
        const double y = rng.uniform(0.02, 0.95 - h / cfg.height) * cfg.height;
        ImageAnnotation ann(static_cast<long long>(i + 1), Rect{x, y, w, h});
        ann.path = "synthetic/" + std::to_string(i + 1) + ".png";
        ann.class_label = "synthetic";
        ann.width = cfg.width;
        ann.height = cfg.height;

        const bool head_left = rng.uniform01() < 0.5;
        const Point head_center{x + (head_left ? 0.22 : 0.78) * w, y + rng.uniform(0.15, 0.3) * h};
        const Point body_center{x + 0.5 * w, y + 0.6 * h};
        const double head_spread = 0.06 * std::min(w, h);
        const double body_spread = 0.16 * std::min(w, h);

        ann.keypoints.resize(kNumKeypoints);
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            const bool is_head =
                std::find(head.members.begin(), head.members.end(), k) != head.members.end();
            const Point c = is_head ? head_center : body_center;
            const double spread = is_head ? head_spread : body_spread;
            Point p{c.x + spread * rng.normal(), c.y + spread * rng.normal()};
            p.x = std::clamp(p.x, x, x + w);
            p.y = std::clamp(p.y, y, y + h);
            ann.keypoints[k] = {p, rng.uniform01() < cfg.visible_prob};
        }
        out.push_back(std::move(ann));
    }
    return out;
}

struct SweepRow {
    std::size_t box_count = 0;
    Fraction head_acc;
    Fraction torso_acc;
    Fraction body_acc;
};

/// Part box computed from ground-truth keypoints with the same tightest-box
/// rule used for predictions.
inline std::optional<Rect> gt_part_box(const ImageAnnotation& annotation,
                                       const PartDefinition& def, double min_side = 1.0) {
    std::vector<Point> pts;
    for (const std::size_t k : def.members) {
        const AnnotatedKeypoint& kp = annotation.keypoints.at(k);
        if (kp.visible) pts.push_back(kp.location);
    }
    if (pts.empty()) return std::nullopt;
    return tightest_box(pts, min_side);
}

/// Part-localization accuracy as a function of how many top-scored
/// proposals survive. For each count the per-image proposal list is
/// truncated by score before prediction consensus and box construction.
/// `box_counts` must be sorted descending; the first entry sets how many
/// proposals are generated per image.
inline std::vector<SweepRow> run_sweep(std::span<const ImageAnnotation> dataset,
                                       const NoiseModel& nm,
                                       std::span<const std::size_t> box_counts,
                                       const ConsensusConfig& cfg,
                                       double body_containment_min = 0.9,
                                       double body_iou_min = 0.5) {
    if (box_counts.empty()) {
        throw std::invalid_argument("run_sweep: no box counts");
    }
    if (!std::is_sorted(box_counts.begin(), box_counts.end(), std::greater<>())) {
        throw std::invalid_argument("run_sweep: box counts must be sorted descending");
    }
    const PartDefinition& head = cub_head_definition();
    const PartDefinition& torso = cub_torso_definition();
    const std::size_t max_count = box_counts[0];

    struct PerImage {
        std::vector<ScoredBox> boxes;
        std::vector<PredictionSet> predictions;
    };
    std::vector<PerImage> prepared(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const ImageAnnotation& ann = dataset[i];
        std::vector<ScoredBox> boxes = generate_proposals(
            ann.object_box, ann.width, ann.height, max_count,
            derive_seed(nm.seed, 0x626f78ULL, static_cast<std::uint64_t>(ann.image_id)));
        std::stable_sort(boxes.begin(), boxes.end(),
                         [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
        std::vector<Rect> rects;
        rects.reserve(boxes.size());
        for (const ScoredBox& sb : boxes) rects.push_back(sb.rect);
        prepared[i] = {std::move(boxes), simulate_predictions(ann, rects, nm)};
    }

    std::vector<SweepRow> rows;
    rows.reserve(box_counts.size());
    for (const std::size_t count : box_counts) {
        SweepRow row;
        row.box_count = count;
        std::vector<std::optional<Rect>> pred_head, pred_torso, pred_body;
        std::vector<std::optional<Rect>> gt_head, gt_torso, gt_body;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const ImageAnnotation& ann = dataset[i];
            const std::size_t used = std::min(count, prepared[i].boxes.size());
            std::span<const ScoredBox> candidates(prepared[i].boxes.data(), used);
            std::span<const PredictionSet> preds(prepared[i].predictions.data(), used);
            std::vector<Rect> rects;
            rects.reserve(used);
            for (const ScoredBox& sb : candidates) rects.push_back(sb.rect);

            const std::vector<ConsensusResult> results =
                consensus_image(preds, rects, cfg, ann.keypoints.size());
            const std::optional<Rect> ph = part_box(results, head);
            const std::optional<Rect> pt = part_box(results, torso);
            pred_head.push_back(ph);
            pred_torso.push_back(pt);
            if (ph || pt) {
                pred_body.push_back(
                    whole_body_box(ph, pt, candidates, body_containment_min, body_iou_min));
            } else {
                pred_body.push_back(std::nullopt);
            }
            gt_head.push_back(gt_part_box(ann, head));
            gt_torso.push_back(gt_part_box(ann, torso));
            gt_body.push_back(ann.object_box);
        }
        row.head_acc = part_localization_accuracy(pred_head, gt_head);
        row.torso_acc = part_localization_accuracy(pred_torso, gt_torso);
        row.body_acc = part_localization_accuracy(pred_body, gt_body);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace kploc
