#pragma once

#include <string>
#include <vector>

#include "kploc/geometry.hpp"

namespace kploc {

/// One ground-truth keypoint: location plus a visibility flag. Invisible
/// keypoints may carry placeholder coordinates.
struct AnnotatedKeypoint {
    Point location;
    bool visible = false;
};

/// Ground truth for one image: keypoints, object box, image size.
/// width/height of 0 mean the size is unknown (CUB text files do not
/// carry it unless a sizes.txt is provided).
struct ImageAnnotation {
    long long image_id = 0;
    std::string path;
    std::string class_label;
    double width = 0.0;
    double height = 0.0;
    std::vector<AnnotatedKeypoint> keypoints;
    Rect object_box;
    bool is_training = true;

    ImageAnnotation(long long id, Rect box) : image_id(id), object_box(box) {}
};

/// The full output of one proposal: a box, its objectness score, and per
/// keypoint a normalized location plus a visibility confidence in [0,1].
/// Proposal-only files reuse this container with empty loc/vis.
struct PredictionSet {
    long long image_id = 0;
    Rect box;
    double box_score = 0.0;
    std::vector<NormalizedPoint> loc;
    std::vector<double> vis;

    PredictionSet(long long id, Rect b, double score) : image_id(id), box(b), box_score(score) {}
};

}  // namespace kploc
