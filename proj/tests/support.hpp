#pragma once

#include <aerorecog/image.hpp>
#include <aerorecog/warp.hpp>

#include <cmath>
#include <random>

namespace aerorecog::testing {

/// Deterministic smooth test pattern: a few incommensurate sinusoids, so it is
/// band-limited (bilinear-friendly) and has gradients everywhere.
inline Image wave_image(int w, int h, std::uint64_t seed = 0, double amp = 0.35) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    struct W {
        double fx, fy, ph, a;
    };
    W ws[4];
    for (auto& v : ws) {
        const double ang = 6.283185307179586 * u(rng);
        const double lam = 6.0 + 26.0 * u(rng);
        v = {std::cos(ang) / lam, std::sin(ang) / lam, 6.283185307179586 * u(rng), u(rng)};
    }
    Image img(w, h, 0.5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = 0.5;
            for (const W& s : ws) {
                v += amp * 0.25 * (0.5 + 0.5 * s.a) *
                     std::sin(6.283185307179586 * (s.fx * x + s.fy * y) + s.ph);
            }
            img.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

/// Linear ramp a + bx*x + by*y; bilinear interpolation reproduces it exactly,
/// which makes warped values predictable in closed form.
inline Image ramp_image(int w, int h, double a, double bx, double by) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = a + bx * x + by * y;
    return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

/// Random small-deformation affine warp around a center point.
inline AffineWarp random_warp(std::mt19937_64& rng, Point center, double max_shift,
                              double max_rot_rad, double max_scale_dev) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AffineWarp w = AffineWarp::rotation(max_rot_rad * u(rng), center);
    const double s = 1.0 + max_scale_dev * u(rng);
    w = compose(AffineWarp::scaling(s, s, center), w);
    w.p[4] += max_shift * u(rng);
    w.p[5] += max_shift * u(rng);
    return w;
}

}  // namespace aerorecog::testing
