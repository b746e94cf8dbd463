#pragma once

#include <array>
#include <cmath>

namespace aerorecog {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// 6-parameter planar affine transform.
///
///   W(x,y;p) = (p1*x + p3*y + p5,  p2*x + p4*y + p6)
///
/// so (p1,p2) and (p3,p4) are the columns of the 2x2 linear part and
/// (p5,p6) is the translation. Identity is (1,0,0,1,0,0). This layout is
/// the on-disk convention for burst manifests and must not change.
struct AffineWarp {
    std::array<double, 6> p{1.0, 0.0, 0.0, 1.0, 0.0, 0.0};

    static AffineWarp identity() { return AffineWarp{}; }
    static AffineWarp translation(double tx, double ty) {
        return AffineWarp{{1.0, 0.0, 0.0, 1.0, tx, ty}};
    }
    /// Rotation by `radians` about `center` (positive = from +x axis toward +y axis).
    static AffineWarp rotation(double radians, Point center = {0.0, 0.0});
    static AffineWarp scaling(double sx, double sy, Point center = {0.0, 0.0});
    /// Similarity transform a*R(theta) + t from its 4 parameters.
    static AffineWarp similarity(double a, double b, double tx, double ty) {
        return AffineWarp{{a, b, -b, a, tx, ty}};
    }

    Point apply(Point q) const {
        return {p[0] * q.x + p[2] * q.y + p[4], p[1] * q.x + p[3] * q.y + p[5]};
    }
    Point apply(double x, double y) const { return apply(Point{x, y}); }

    double det() const { return p[0] * p[3] - p[1] * p[2]; }
};

/// compose(a,b)(q) == a(b(q)).
AffineWarp compose(const AffineWarp& a, const AffineWarp& b);

/// Throws SingularWarp when |det| of the linear part is below `tol`.
AffineWarp invert(const AffineWarp& a, double tol = 1e-12);

bool nearly_identity(const AffineWarp& w, double tol);

/// Four corner points in consistent winding order. For boxes the order is
/// (x,y), (x+w,y), (x+w,y+h), (x,y+h).
struct Quad {
    std::array<Point, 4> corners{};

    static Quad axis_aligned(double x, double y, double w, double h) {
        return Quad{{Point{x, y}, Point{x + w, y}, Point{x + w, y + h}, Point{x, y + h}}};
    }

    /// Signed shoelace area; positive for the winding produced by axis_aligned.
    double signed_area() const;
    double area() const { return std::abs(signed_area()); }

    void bounding_box(double& x0, double& y0, double& x1, double& y1) const;
    Point centroid() const;
};

Quad apply(const AffineWarp& w, const Quad& q);

/// Max displacement of `q`'s corners under perturbation `delta` applied
/// additively to a warp's parameters. Used as the LK convergence metric.
double max_corner_displacement(const std::array<double, 6>& delta, const Quad& q);

/// Intersection-over-union of the axis-aligned bounding boxes of two quads.
double bbox_iou(const Quad& a, const Quad& b);

}  // namespace aerorecog
