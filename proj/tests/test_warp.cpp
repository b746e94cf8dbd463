#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aerorecog/errors.hpp>
#include <aerorecog/image.hpp>
#include <aerorecog/warp.hpp>

#include "support.hpp"

#include <cmath>
#include <random>

using namespace aerorecog;
using namespace aerorecog::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("identity maps points to themselves") {
    const AffineWarp id = AffineWarp::identity();
    CHECK(id.p[0] == 1.0);
    CHECK(id.p[1] == 0.0);
    CHECK(id.p[2] == 0.0);
    CHECK(id.p[3] == 1.0);
    CHECK(id.p[4] == 0.0);
    CHECK(id.p[5] == 0.0);
    const Point q = id.apply(3.25, -7.5);
    CHECK(q.x == 3.25);
    CHECK(q.y == -7.5);
}

TEST_CASE("apply follows the column-major linear part plus translation") {
    // hand-evaluated: x' = p1*x + p3*y + p5, y' = p2*x + p4*y + p6
    AffineWarp w;
    w.p = {2.0, 0.5, -1.0, 3.0, 10.0, 20.0};
    const Point q = w.apply(2.0, 4.0);
    CHECK(q.x == doctest::Approx(2.0 * 2.0 + (-1.0) * 4.0 + 10.0));
    CHECK(q.y == doctest::Approx(0.5 * 2.0 + 3.0 * 4.0 + 20.0));
}

TEST_CASE("rotation about a center keeps the center fixed") {
    const Point c{7.0, 11.0};
    const AffineWarp r = AffineWarp::rotation(0.7, c);
    const Point q = r.apply(c);
    CHECK(q.x == doctest::Approx(c.x).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(c.y).epsilon(1e-12));
    // a point at distance d stays at distance d
    const Point p = r.apply(c.x + 5.0, c.y);
    CHECK(std::hypot(p.x - c.x, p.y - c.y) == doctest::Approx(5.0));
}

TEST_CASE("quarter turn sends unit x to unit y") {
    const AffineWarp r = AffineWarp::rotation(kPi / 2.0);
    const Point q = r.apply(1.0, 0.0);
    CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(1.0));
}

TEST_CASE("compose applies right-hand warp first") {
    const AffineWarp t = AffineWarp::translation(5.0, 0.0);
    const AffineWarp r = AffineWarp::rotation(kPi / 2.0);
    // (r . t)(0,0) = r(5,0) = (0,5)
    const Point q = compose(r, t).apply(0.0, 0.0);
    CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(5.0));
    // (t . r)(0,0) = t(0,0) = (5,0)
    const Point p = compose(t, r).apply(0.0, 0.0);
    CHECK(p.x == doctest::Approx(5.0));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("invert round-trips random warps") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        AffineWarp w;
        w.p = {1.0 + 0.4 * u(rng), 0.4 * u(rng),  0.4 * u(rng),
               1.0 + 0.4 * u(rng), 30.0 * u(rng), 30.0 * u(rng)};
        const AffineWarp round = compose(invert(w), w);
        CHECK(nearly_identity(round, 1e-9));
    }
}

TEST_CASE("invert rejects singular warps") {
    AffineWarp w;
    w.p = {1.0, 2.0, 2.0, 4.0, 0.0, 0.0};  // rank-1 linear part
    CHECK_THROWS_AS(invert(w), SingularWarp);
}

TEST_CASE("composition is associative") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        AffineWarp a, b, c;
        for (auto* w : {&a, &b, &c}) {
            w->p = {1.0 + 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng),
                    1.0 + 0.3 * u(rng), 10 * u(rng),  10 * u(rng)};
        }
        const AffineWarp l = compose(compose(a, b), c);
        const AffineWarp r = compose(a, compose(b, c));
        for (int k = 0; k < 6; ++k) CHECK(l.p[std::size_t(k)] == doctest::Approx(r.p[std::size_t(k)]).epsilon(1e-10));
    }
}

TEST_CASE("det multiplies under composition") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        AffineWarp a, b;
        for (auto* w : {&a, &b}) {
            w->p = {1.0 + 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng),
                    1.0 + 0.3 * u(rng), u(rng),       u(rng)};
        }
        CHECK(compose(a, b).det() == doctest::Approx(a.det() * b.det()).epsilon(1e-10));
    }
}

TEST_CASE("similarity constructor matches its 2x2 block") {
    const AffineWarp s = AffineWarp::similarity(1.2, 0.3, 4.0, -2.0);
    const Point q = s.apply(1.0, 0.0);
    CHECK(q.x == doctest::Approx(1.2 + 4.0));
    CHECK(q.y == doctest::Approx(0.3 - 2.0));
    const Point p = s.apply(0.0, 1.0);
    CHECK(p.x == doctest::Approx(-0.3 + 4.0));
    CHECK(p.y == doctest::Approx(1.2 - 2.0));
}

TEST_CASE("warp_image with identity copies the source") {
    const Image src = wave_image(40, 30, 3);
    const Image out = warp_image(src, AffineWarp::identity(), 40, 30);
    CHECK(max_abs_diff(src, out) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("warp_image samples the source at the warped position") {
    // out(x,y) = src(W(x,y)): with W = translation(2,1), out(x,y) = src(x+2,y+1)
    const Image src = wave_image(40, 30, 7);
    const Image out = warp_image(src, AffineWarp::translation(2.0, 1.0), 40, 30);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 30; ++x)
            CHECK(out.at(x, y) == doctest::Approx(src.at(x + 2, y + 1)).epsilon(1e-12));
}

TEST_CASE("warp_image on a ramp matches the closed form") {
    // bilinear interpolation is exact on a + bx*x + by*y
    const double a = 0.2, bx = 0.01, by = 0.003;
    const Image src = ramp_image(64, 64, a, bx, by);
    std::mt19937_64 rng(9);
    const AffineWarp w = random_warp(rng, Point{32, 32}, 3.0, 0.3, 0.05);
    const Image out = warp_image(src, w, 64, 64);
    for (int y = 8; y < 56; ++y) {
        for (int x = 8; x < 56; ++x) {
            const Point q = w.apply(x, y);
            if (q.x < 1 || q.y < 1 || q.x > 62 || q.y > 62) continue;
            CHECK(out.at(x, y) == doctest::Approx(a + bx * q.x + by * q.y).epsilon(1e-10));
        }
    }
}

TEST_CASE("warping there and back reproduces the interior") {
    const Image src = wave_image(80, 80, 21);
    std::mt19937_64 rng(13);
    const AffineWarp w = random_warp(rng, Point{40, 40}, 2.0, 0.2, 0.03);
    const Image fwd = warp_image(src, w, 80, 80);
    const Image back = warp_image(fwd, invert(w), 80, 80);
    // compare away from the border where clamped samples bleed in
    double m = 0.0;
    for (int y = 12; y < 68; ++y)
        for (int x = 12; x < 68; ++x) m = std::max(m, std::abs(back.at(x, y) - src.at(x, y)));
    CHECK(m < 0.05);  // two bilinear resamplings attenuate the finest waves
}

TEST_CASE("quad bounding box and area") {
    const Quad q = Quad::axis_aligned(2.0, 3.0, 10.0, 5.0);
    double x0, y0, x1, y1;
    q.bounding_box(x0, y0, x1, y1);
    CHECK(x0 == 2.0);
    CHECK(y0 == 3.0);
    CHECK(x1 == 12.0);
    CHECK(y1 == 8.0);
    CHECK(q.area() == doctest::Approx(50.0));
    const Point c = q.centroid();
    CHECK(c.x == doctest::Approx(7.0));
    CHECK(c.y == doctest::Approx(5.5));
}

TEST_CASE("warp area scales by the warp determinant") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        AffineWarp w;
        w.p = {1.0 + 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng),
               1.0 + 0.5 * u(rng), 5 * u(rng),   5 * u(rng)};
        const Quad q = Quad::axis_aligned(1.0, 2.0, 7.0, 3.0);
        CHECK(apply(w, q).area() == doctest::Approx(q.area() * std::abs(w.det())).epsilon(1e-9));
    }
}

TEST_CASE("max_corner_displacement reports the largest corner move") {
    const Quad q = Quad::axis_aligned(0.0, 0.0, 10.0, 10.0);
    std::array<double, 6> delta{0.0, 0.0, 0.0, 0.0, 0.3, -0.4};  // pure translation
    CHECK(max_corner_displacement(delta, q) == doctest::Approx(0.5));
    std::array<double, 6> grow{0.01, 0.0, 0.0, 0.0, 0.0, 0.0};  // x scales by 1%
    CHECK(max_corner_displacement(grow, q) == doctest::Approx(0.1));
}

TEST_CASE("bbox_iou on known overlaps") {
    const Quad a = Quad::axis_aligned(0, 0, 10, 10);
    const Quad b = Quad::axis_aligned(5, 0, 10, 10);
    CHECK(bbox_iou(a, b) == doctest::Approx(50.0 / 150.0));
    CHECK(bbox_iou(a, a) == doctest::Approx(1.0));
    const Quad c = Quad::axis_aligned(20, 20, 3, 3);
    CHECK(bbox_iou(a, c) == doctest::Approx(0.0));
}
