#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kploc/annotation.hpp"
#include "kploc/geometry.hpp"

namespace kploc {

/// One keypoint prediction contributed by one proposal.
struct KeypointObservation {
    Point location;
    double confidence = 0.0;  // visibility confidence in [0,1]
    int source_box_id = -1;
};

enum class ConsensusMethod {
    MedoidOnly,   // report the medoid of the visibility-filtered set
    InlierSet,    // additionally keep the modified-Z inliers
    MedoidShift,  // report the medoid of the largest medoid-shift cluster
};

/// Thresholds and method selection for combining multiple predictions.
/// The two presets below carry the tuned values for the with-box and
/// without-box protocols.
struct ConsensusConfig {
    double visibility_threshold = 0.6;
    double z_threshold = 0.35;
    double lambda = 0.6745;  // modified Z-score scale constant
    ConsensusMethod method = ConsensusMethod::MedoidOnly;
    // InlierSet reports the medoid of the filtered set by default; set this
    // to report the medoid of the inlier set instead (differs only in
    // degenerate cases).
    bool report_inlier_medoid = false;
    // Flat-kernel bandwidth for MedoidShift; <= 0 selects the automatic
    // bandwidth (median pairwise distance, floored at 1 pixel).
    double medoid_shift_bandwidth = 0.0;
};

/// Protocol when the ground-truth object box is available.
inline ConsensusConfig gt_box_preset() {
    ConsensusConfig cfg;
    cfg.visibility_threshold = 0.6;
    cfg.z_threshold = 0.35;
    return cfg;
}

/// Protocol without a ground-truth object box (top-scored proposals only).
inline ConsensusConfig no_gt_box_preset() {
    ConsensusConfig cfg;
    cfg.visibility_threshold = 0.94;
    cfg.z_threshold = 0.3;
    return cfg;
}

/// Per-keypoint decision: visibility, the chosen location (always one of
/// the surviving observations), the inlier set, and the full
/// visibility-filtered set the decision was made from.
struct ConsensusResult {
    bool visible = false;
    std::optional<Point> location;
    std::vector<KeypointObservation> inliers;
    std::vector<KeypointObservation> all_filtered;
};

/// Keeps observations with confidence >= threshold, preserving order.
/// The comparison is inclusive: predictions strictly below the threshold
/// are dropped.
inline std::vector<KeypointObservation> filter_by_visibility(
    std::span<const KeypointObservation> obs, double threshold) {
    std::vector<KeypointObservation> kept;
    kept.reserve(obs.size());
    for (const KeypointObservation& o : obs) {
        if (o.confidence >= threshold) kept.push_back(o);
    }
    return kept;
}

/// Index of the point minimizing the sum of Euclidean distances to all
/// input points. Ties break to the lowest index.
inline std::size_t medoid_index(std::span<const Point> points) {
    if (points.empty()) {
        throw std::invalid_argument("medoid: empty input");
    }
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points.size(); ++j) {
        double sum = 0.0;
        for (const Point& p : points) {
            sum += distance(points[j], p);
        }
        if (sum < best_sum) {
            best_sum = sum;
            best = j;
        }
    }
    return best;
}

/// The medoid as (index, point).
inline std::pair<std::size_t, Point> medoid(std::span<const Point> points) {
    const std::size_t idx = medoid_index(points);
    return {idx, points[idx]};
}

/// Median of a value list (mean of the two middle order statistics for
/// even sizes).
inline double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median: empty input");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

/// Modified Z-scores: lambda * (distance from the medoid) / MAD, where MAD
/// is the median distance from the medoid. The medoid's own score is 0.
/// When the MAD degenerates to 0, points coincident with the medoid score 0
/// and all others +infinity, so a coincident majority still wins.
inline std::vector<double> modified_z_scores(std::span<const Point> points,
                                             double lambda = 0.6745) {
    const std::size_t m = medoid_index(points);
    std::vector<double> dist(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        dist[i] = distance(points[i], points[m]);
    }
    const double mad = median(dist);
    std::vector<double> z(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (mad == 0.0) {
            z[i] = dist[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            z[i] = lambda * dist[i] / mad;
        }
    }
    return z;
}

/// Keeps observations whose modified Z-score is within the threshold.
/// The medoid scores 0, so a nonempty input always yields a nonempty
/// result.
inline std::vector<KeypointObservation> filter_inliers(
    std::span<const KeypointObservation> obs, const ConsensusConfig& cfg) {
    if (obs.empty()) return {};
    std::vector<Point> points;
    points.reserve(obs.size());
    for (const KeypointObservation& o : obs) points.push_back(o.location);
    const std::vector<double> z = modified_z_scores(points, cfg.lambda);
    std::vector<KeypointObservation> kept;
    kept.reserve(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (z[i] <= cfg.z_threshold) kept.push_back(obs[i]);
    }
    return kept;
}

/// Output of medoid-shift mode seeking: the basins of attraction as index
/// clusters, and the medoid index of the largest cluster.
struct MedoidShiftResult {
    std::vector<std::vector<std::size_t>> clusters;
    std::size_t mode_index = 0;
};

/// Median pairwise distance, floored at 1 pixel; the automatic bandwidth.
inline double auto_bandwidth(std::span<const Point> points) {
    if (points.size() < 2) return 1.0;
    std::vector<double> dists;
    dists.reserve(points.size() * (points.size() - 1) / 2);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            dists.push_back(distance(points[i], points[j]));
        }
    }
    return std::max(median(std::move(dists)), 1.0);
}

/// Medoid-shift clustering with a flat kernel. Each point moves to the
/// point minimizing the summed distance to its bandwidth-neighborhood;
/// following those links to their fixed points partitions the input into
/// basins. Clusters are reported ordered by smallest member; the mode is
/// the medoid of the largest cluster (size ties break to the cluster whose
/// medoid has the lower index). A non-positive bandwidth selects
/// auto_bandwidth().
inline MedoidShiftResult medoid_shift(std::span<const Point> points, double bandwidth = 0.0) {
    const std::size_t n = points.size();
    if (n == 0) {
        throw std::invalid_argument("medoid_shift: empty input");
    }
    const double bw = bandwidth > 0.0 ? bandwidth : auto_bandwidth(points);

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(points[i], points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    // One shift step: the weighted medoid of i's neighborhood, ties to the
    // lowest index.
    std::vector<std::size_t> shift(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (dist[i * n + k] <= bw) sum += dist[j * n + k];
            }
            if (sum < best_sum) {
                best_sum = sum;
                best = j;
            }
        }
        shift[i] = best;
    }

    // Follow links to fixed points. A cycle (possible only in degenerate
    // tie configurations) roots at its smallest member.
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    const std::size_t kOnPath = n;
    std::vector<std::size_t> root(n, kUnset);
    std::vector<std::size_t> path;
    for (std::size_t i = 0; i < n; ++i) {
        if (root[i] != kUnset) continue;
        path.clear();
        std::size_t cur = i;
        std::size_t r;
        for (;;) {
            if (root[cur] == kOnPath) {
                // Cycle: root at the smallest index on the cycle.
                const auto pos = std::find(path.begin(), path.end(), cur);
                r = *std::min_element(pos, path.end());
                break;
            }
            if (root[cur] != kUnset) {
                r = root[cur];
                break;
            }
            root[cur] = kOnPath;
            path.push_back(cur);
            const std::size_t next = shift[cur];
            if (next == cur) {
                r = cur;
                break;
            }
            cur = next;
        }
        for (const std::size_t p : path) root[p] = r;
    }

    // Group members by root, clusters ordered by smallest member index.
    MedoidShiftResult result;
    std::vector<std::size_t> cluster_of(n, kUnset);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = root[i];
        if (cluster_of[r] == kUnset) {
            cluster_of[r] = result.clusters.size();
            result.clusters.emplace_back();
        }
        result.clusters[cluster_of[r]].push_back(i);
    }

    // Mode: medoid of the largest cluster.
    std::size_t best_size = 0;
    std::size_t best_mode = 0;
    for (const std::vector<std::size_t>& members : result.clusters) {
        if (members.size() < best_size) continue;
        std::vector<Point> sub;
        sub.reserve(members.size());
        for (const std::size_t m : members) sub.push_back(points[m]);
        const std::size_t mode = members[medoid_index(sub)];
        if (members.size() > best_size || mode < best_mode) {
            best_size = members.size();
            best_mode = mode;
        }
    }
    result.mode_index = best_mode;
    return result;
}

/// Combines one keypoint's observations into a visibility decision and a
/// robust location. Observations below the visibility threshold are
/// dropped; if none survive the keypoint is reported invisible. The
/// reported location is always one of the surviving observations.
inline ConsensusResult consensus_keypoint(std::span<const KeypointObservation> obs,
                                          const ConsensusConfig& cfg) {
    ConsensusResult result;
    result.all_filtered = filter_by_visibility(obs, cfg.visibility_threshold);
    if (result.all_filtered.empty()) {
        return result;
    }
    std::vector<Point> points;
    points.reserve(result.all_filtered.size());
    for (const KeypointObservation& o : result.all_filtered) points.push_back(o.location);

    result.visible = true;
    switch (cfg.method) {
        case ConsensusMethod::MedoidOnly: {
            const std::size_t m = medoid_index(points);
            result.location = points[m];
            result.inliers = {result.all_filtered[m]};
            break;
        }
        case ConsensusMethod::InlierSet: {
            result.inliers = filter_inliers(result.all_filtered, cfg);
            if (cfg.report_inlier_medoid) {
                std::vector<Point> inlier_points;
                inlier_points.reserve(result.inliers.size());
                for (const KeypointObservation& o : result.inliers) {
                    inlier_points.push_back(o.location);
                }
                result.location = inlier_points[medoid_index(inlier_points)];
            } else {
                result.location = points[medoid_index(points)];
            }
            break;
        }
        case ConsensusMethod::MedoidShift: {
            const MedoidShiftResult ms = medoid_shift(points, cfg.medoid_shift_bandwidth);
            result.location = points[ms.mode_index];
            for (const std::vector<std::size_t>& cluster : ms.clusters) {
                if (std::find(cluster.begin(), cluster.end(), ms.mode_index) != cluster.end()) {
                    for (const std::size_t i : cluster) {
                        result.inliers.push_back(result.all_filtered[i]);
                    }
                    break;
                }
            }
            break;
        }
    }
    return result;
}

/// Runs the consensus independently for every keypoint of one image.
/// Each proposal's normalized predictions are mapped to image coordinates
/// through its own source box first. `boxes` must align with
/// `per_box_predictions` by index.
inline std::vector<ConsensusResult> consensus_image(
    std::span<const PredictionSet> per_box_predictions, std::span<const Rect> boxes,
    const ConsensusConfig& cfg, std::size_t num_keypoints) {
    if (per_box_predictions.size() != boxes.size()) {
        throw std::invalid_argument("consensus_image: predictions and boxes length mismatch");
    }
    for (const PredictionSet& p : per_box_predictions) {
        if (p.loc.size() != num_keypoints || p.vis.size() != num_keypoints) {
            throw std::invalid_argument("consensus_image: prediction vector length mismatch");
        }
    }
    std::vector<ConsensusResult> results;
    results.reserve(num_keypoints);
    std::vector<KeypointObservation> obs;
    for (std::size_t k = 0; k < num_keypoints; ++k) {
        obs.clear();
        for (std::size_t i = 0; i < per_box_predictions.size(); ++i) {
            obs.push_back({to_image(per_box_predictions[i].loc[k], boxes[i]),
                           per_box_predictions[i].vis[k], static_cast<int>(i)});
        }
        results.push_back(consensus_keypoint(obs, cfg));
    }
    return results;
}

}  // namespace kploc
