#include "aerorecog/warp.hpp"

#include <algorithm>

#include "aerorecog/errors.hpp"

namespace aerorecog {

AffineWarp AffineWarp::rotation(double radians, Point center) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    AffineWarp rot{{c, s, -s, c, 0.0, 0.0}};
    // conjugate by the center translation: T(c) * R * T(-c)
    AffineWarp out = compose(translation(center.x, center.y),
                             compose(rot, translation(-center.x, -center.y)));
    return out;
}

AffineWarp AffineWarp::scaling(double sx, double sy, Point center) {
    AffineWarp s{{sx, 0.0, 0.0, sy, 0.0, 0.0}};
    return compose(translation(center.x, center.y),
                   compose(s, translation(-center.x, -center.y)));
}

AffineWarp compose(const AffineWarp& a, const AffineWarp& b) {
    const auto& u = a.p;
    const auto& v = b.p;
    AffineWarp out;
    // linear part: A_a * A_b, columns (p1,p2) and (p3,p4)
    out.p[0] = u[0] * v[0] + u[2] * v[1];
    out.p[1] = u[1] * v[0] + u[3] * v[1];
    out.p[2] = u[0] * v[2] + u[2] * v[3];
    out.p[3] = u[1] * v[2] + u[3] * v[3];
    // translation: A_a * t_b + t_a
    out.p[4] = u[0] * v[4] + u[2] * v[5] + u[4];
    out.p[5] = u[1] * v[4] + u[3] * v[5] + u[5];
    return out;
}

AffineWarp invert(const AffineWarp& a, double tol) {
    const double d = a.det();
    if (std::abs(d) < tol) {
        throw SingularWarp("invert: |det| = " + std::to_string(std::abs(d)));
    }
    const auto& p = a.p;
    AffineWarp out;
    out.p[0] = p[3] / d;
    out.p[1] = -p[1] / d;
    out.p[2] = -p[2] / d;
    out.p[3] = p[0] / d;
    out.p[4] = -(out.p[0] * p[4] + out.p[2] * p[5]);
    out.p[5] = -(out.p[1] * p[4] + out.p[3] * p[5]);
    return out;
}

bool nearly_identity(const AffineWarp& w, double tol) {
    const AffineWarp id;
    for (int i = 0; i < 6; ++i) {
        if (std::abs(w.p[i] - id.p[i]) > tol) return false;
    }
    return true;
}

double Quad::signed_area() const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point& a = corners[i];
        const Point& b = corners[(i + 1) % 4];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

void Quad::bounding_box(double& x0, double& y0, double& x1, double& y1) const {
    x0 = x1 = corners[0].x;
    y0 = y1 = corners[0].y;
    for (const Point& c : corners) {
        x0 = std::min(x0, c.x);
        y0 = std::min(y0, c.y);
        x1 = std::max(x1, c.x);
        y1 = std::max(y1, c.y);
    }
}

Point Quad::centroid() const {
    Point c;
    for (const Point& q : corners) {
        c.x += q.x;
        c.y += q.y;
    }
    c.x *= 0.25;
    c.y *= 0.25;
    return c;
}

Quad apply(const AffineWarp& w, const Quad& q) {
    Quad out;
    for (int i = 0; i < 4; ++i) out.corners[i] = w.apply(q.corners[i]);
    return out;
}

double max_corner_displacement(const std::array<double, 6>& delta, const Quad& q) {
    double worst = 0.0;
    for (const Point& c : q.corners) {
        const double dx = delta[0] * c.x + delta[2] * c.y + delta[4];
        const double dy = delta[1] * c.x + delta[3] * c.y + delta[5];
        worst = std::max(worst, std::hypot(dx, dy));
    }
    return worst;
}

double bbox_iou(const Quad& a, const Quad& b) {
    double ax0, ay0, ax1, ay1, bx0, by0, bx1, by1;
    a.bounding_box(ax0, ay0, ax1, ay1);
    b.bounding_box(bx0, by0, bx1, by1);
    const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
    const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
    const double inter = ix * iy;
    const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace aerorecog
