#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kploc/annotation.hpp"
#include "kploc/consensus.hpp"
#include "kploc/geometry.hpp"

namespace kploc {

/// An exact tally. Every reported ratio is reconstructible from these
/// integers, so boundary conventions can be re-audited after the fact.
struct Fraction {
    long long num = 0;
    long long den = 0;

    std::optional<double> value() const {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

/// Per-keypoint annotator standard deviations (pixels), all positive.
struct AnnotatorStd {
    std::vector<double> sigma;
};

namespace detail {

inline void check_aligned(std::span<const std::vector<ConsensusResult>> preds,
                          std::span<const ImageAnnotation> gts) {
    if (preds.size() != gts.size()) {
        throw std::invalid_argument("metric inputs: prediction/annotation image count mismatch");
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != gts[i].keypoints.size()) {
            throw std::invalid_argument("metric inputs: keypoint count mismatch");
        }
    }
}

inline void check_sigma(const AnnotatorStd& std_dev, std::size_t n) {
    if (std_dev.sigma.size() != n) {
        throw std::invalid_argument("missing sigma: need one annotator std per keypoint");
    }
    for (const double s : std_dev.sigma) {
        if (!(s > 0.0)) throw std::invalid_argument("missing sigma: values must be positive");
    }
}

}  // namespace detail

struct PcpResult {
    std::vector<Fraction> per_keypoint;
    std::vector<std::pair<std::string, Fraction>> merged;
    Fraction total;
};

/// Percent correct parts. A ground-truth-visible keypoint counts as
/// correct when it is predicted visible within 1.5 annotator standard
/// deviations (boundary inclusive); predicted-invisible counts as
/// incorrect. Optional merge groups pool tallies for paired keypoints.
inline PcpResult pcp(std::span<const std::vector<ConsensusResult>> preds,
                     std::span<const ImageAnnotation> gts, const AnnotatorStd& std_dev,
                     std::span<const std::pair<std::string, std::vector<std::size_t>>>
                         merge_groups = {}) {
    detail::check_aligned(preds, gts);
    const std::size_t n = gts.empty() ? std_dev.sigma.size() : gts[0].keypoints.size();
    detail::check_sigma(std_dev, n);

    PcpResult result;
    result.per_keypoint.assign(n, Fraction{});
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const AnnotatedKeypoint& gt = gts[i].keypoints[k];
            if (!gt.visible) continue;
            Fraction& f = result.per_keypoint[k];
            f.den += 1;
            const ConsensusResult& p = preds[i][k];
            if (p.visible && p.location &&
                distance(*p.location, gt.location) <= 1.5 * std_dev.sigma[k]) {
                f.num += 1;
            }
        }
    }
    for (const Fraction& f : result.per_keypoint) {
        result.total.num += f.num;
        result.total.den += f.den;
    }
    for (const auto& [name, members] : merge_groups) {
        Fraction pooled;
        for (const std::size_t k : members) {
            pooled.num += result.per_keypoint.at(k).num;
            pooled.den += result.per_keypoint.at(k).den;
        }
        result.merged.emplace_back(name, pooled);
    }
    return result;
}

struct AeOptions {
    double cap = 5.0;
    // Errors in annotator-std units by default; false reports raw pixels.
    bool std_normalized = true;
};

struct AeResult {
    double sum = 0.0;
    long long count = 0;
    double value = 0.0;
};

/// Mean capped localization error over pairs where both a prediction and a
/// ground-truth location exist.
inline AeResult average_error(std::span<const std::vector<ConsensusResult>> preds,
                              std::span<const ImageAnnotation> gts, const AnnotatorStd& std_dev,
                              const AeOptions& opts = {}) {
    detail::check_aligned(preds, gts);
    const std::size_t n = gts.empty() ? std_dev.sigma.size() : gts[0].keypoints.size();
    detail::check_sigma(std_dev, n);

    AeResult result;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const AnnotatedKeypoint& gt = gts[i].keypoints[k];
            const ConsensusResult& p = preds[i][k];
            if (!gt.visible || !p.visible || !p.location) continue;
            double err = distance(*p.location, gt.location);
            if (opts.std_normalized) err /= std_dev.sigma[k];
            result.sum += std::min(opts.cap, err);
            result.count += 1;
        }
    }
    if (result.count == 0) {
        throw std::runtime_error("empty evaluation set");
    }
    result.value = result.sum / static_cast<double>(result.count);
    return result;
}

struct VisibilityRates {
    Fraction fvr;  // predicted visible among ground-truth invisible
    Fraction fir;  // predicted invisible among ground-truth visible
};

inline VisibilityRates visibility_rates(std::span<const std::vector<ConsensusResult>> preds,
                                        std::span<const ImageAnnotation> gts) {
    detail::check_aligned(preds, gts);
    VisibilityRates rates;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t k = 0; k < gts[i].keypoints.size(); ++k) {
            const bool gt_visible = gts[i].keypoints[k].visible;
            const bool pred_visible = preds[i][k].visible;
            if (gt_visible) {
                rates.fir.den += 1;
                if (!pred_visible) rates.fir.num += 1;
            } else {
                rates.fvr.den += 1;
                if (pred_visible) rates.fvr.num += 1;
            }
        }
    }
    return rates;
}

/// Fraction of part boxes localized with IOU strictly above 0.5. Pairs
/// without a ground-truth box are skipped; a missing predicted box counts
/// as a failure when the ground-truth box exists.
inline Fraction part_localization_accuracy(std::span<const std::optional<Rect>> pred_boxes,
                                           std::span<const std::optional<Rect>> gt_boxes) {
    if (pred_boxes.size() != gt_boxes.size()) {
        throw std::invalid_argument("part_localization_accuracy: length mismatch");
    }
    Fraction acc;
    for (std::size_t i = 0; i < gt_boxes.size(); ++i) {
        if (!gt_boxes[i]) continue;
        acc.den += 1;
        if (pred_boxes[i] && iou(*pred_boxes[i], *gt_boxes[i]) > 0.5) acc.num += 1;
    }
    return acc;
}

/// Everything the evaluation emits, tallies included.
struct EvalReport {
    PcpResult pcp;
    std::optional<AeResult> ae;  // absent when no pair qualifies
    AeOptions ae_options;
    VisibilityRates visibility;
    std::vector<std::pair<std::string, Fraction>> part_accuracy;
};

}  // namespace kploc
