#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace kploc {

/// A 2D point in image coordinates. Origin is the top-left corner,
/// x grows rightward and y grows downward.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// A point expressed relative to an un-padded box: (0,0) is the box
/// top-left, (1,1) the bottom-right. Values outside [0,1] denote points
/// outside the box.
struct NormalizedPoint {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const NormalizedPoint&, const NormalizedPoint&) = default;
};

inline double distance(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Axis-aligned rectangle with real-valued coordinates. Width and height
/// must be strictly positive; construction enforces this.
struct Rect {
    double x;
    double y;
    double w;
    double h;

    Rect(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {
        if (!(w > 0.0) || !(h > 0.0)) {
            throw std::invalid_argument("Rect: width and height must be positive");
        }
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
            throw std::invalid_argument("Rect: coordinates must be finite");
        }
    }

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    Point center() const { return {x + w / 2.0, y + h / 2.0}; }

    /// Boundary-inclusive point containment.
    bool contains(const Point& p) const {
        return p.x >= x && p.x <= right() && p.y >= y && p.y <= bottom();
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

inline double area(const Rect& r) { return r.w * r.h; }

/// Area of the intersection of two rectangles (closed intervals), 0 if
/// disjoint. The overlap extent is min(aw, bw, (ax-bx)+aw, (bx-ax)+bw) per
/// axis, which is algebraically the usual min(right)-max(left) but keeps
/// identical boxes exact and never exceeds either input extent.
inline double intersection_area(const Rect& a, const Rect& b) {
    const double iw = std::min(std::min(a.w, b.w),
                               std::min((a.x - b.x) + a.w, (b.x - a.x) + b.w));
    const double ih = std::min(std::min(a.h, b.h),
                               std::min((a.y - b.y) + a.h, (b.y - a.y) + b.h));
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

/// Intersection over union. Symmetric, in [0,1], and 1 iff a == b.
inline double iou(const Rect& a, const Rect& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return std::min(inter / (area(a) + area(b) - inter), 1.0);
}

/// Fraction of `inner`'s area covered by `outer`.
inline double containment_fraction(const Rect& inner, const Rect& outer) {
    return intersection_area(inner, outer) / area(inner);
}

/// Smallest rectangle containing both inputs.
inline Rect rect_union(const Rect& a, const Rect& b) {
    const double x = std::min(a.x, b.x);
    const double y = std::min(a.y, b.y);
    return {x, y, std::max(a.right(), b.right()) - x, std::max(a.bottom(), b.bottom()) - y};
}

/// Minimal axis-aligned box containing all points (boundary inclusive).
/// Degenerate extents (single point, collinear input) are widened to
/// `min_side` so downstream area-based overlap measures stay defined; the
/// top-left corner stays at the coordinate minima.
inline Rect tightest_box(std::span<const Point> points, double min_side = 1.0) {
    if (points.empty()) {
        throw std::invalid_argument("tightest_box: no points");
    }
    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    for (const Point& p : points.subspan(1)) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    // max - min can round below the true extent; widen until the stored
    // right/bottom edge actually reaches the maxima.
    double w = std::max(max_x - min_x, min_side);
    while (min_x + w < max_x) w = std::nextafter(w, HUGE_VAL);
    double h = std::max(max_y - min_y, min_side);
    while (min_y + h < max_y) h = std::nextafter(h, HUGE_VAL);
    return {min_x, min_y, w, h};
}

/// Expands a box about its center so that, after warping the result to a
/// `crop_side` square, the original box occupies the central
/// (crop_side - 2*buffer) square region. With the defaults a box maps to
/// the middle 195x195 of a 227x227 crop.
inline Rect pad_box(const Rect& b, double crop_side = 227.0, double buffer = 16.0) {
    if (!(crop_side > 2.0 * buffer)) {
        throw std::invalid_argument("pad_box: crop_side must exceed twice the buffer");
    }
    const double factor = crop_side / (crop_side - 2.0 * buffer);
    const double nw = b.w * factor;
    const double nh = b.h * factor;
    return {b.x - (nw - b.w) / 2.0, b.y - (nh - b.h) / 2.0, nw, nh};
}

inline NormalizedPoint to_normalized(const Point& p, const Rect& box) {
    return {(p.x - box.x) / box.w, (p.y - box.y) / box.h};
}

inline Point to_image(const NormalizedPoint& n, const Rect& box) {
    return {box.x + n.u * box.w, box.y + n.v * box.h};
}

}  // namespace kploc
