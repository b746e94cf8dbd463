#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <aerorecog/augment.hpp>
#include <aerorecog/errors.hpp>
#include <aerorecog/track.hpp>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace aerorecog;
using testing::max_abs_diff;
using testing::ramp_image;
using testing::wave_image;

namespace {

// Fourfold-symmetric pattern: average a patch with its three quarter-turn
// copies. The size is even, so the center sits between pixels and quarter
// turns permute the integer grid exactly.
Image fourfold(int size, std::uint64_t seed) {
    const Image base = wave_image(size, size, seed);
    Image out(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const int n = size - 1;
            const double v = base.at(x, y) + base.at(n - y, x) + base.at(n - x, n - y) +
                             base.at(y, n - x);
            out.at(x, y) = v / 4.0;
        }
    }
    return out;
}

double disc_mean(const Image& img) {
    const double cx = (img.width() - 1) / 2.0;
    const double cy = (img.height() - 1) / 2.0;
    const double r = 0.45 * std::min(img.width(), img.height());
    double acc = 0.0;
    int count = 0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (std::hypot(x - cx, y - cy) <= r) {
                acc += img.at(x, y);
                ++count;
            }
        }
    }
    return acc / count;
}

}  // namespace

TEST_CASE("view generation covers the full turn at the requested step") {
    const Image base = wave_image(64, 64, 5);

    const ViewSet ten = generate_views(base, 10.0);
    REQUIRE(ten.views.size() == 36);
    REQUIRE(ten.angles.size() == 36);
    for (int i = 0; i < 36; ++i) CHECK(ten.angles[std::size_t(i)] == doctest::Approx(10.0 * i));

    const ViewSet quarter = generate_views(base, 90.0);
    CHECK(quarter.views.size() == 4);

    const ViewSet whole = generate_views(base, 360.0);
    REQUIRE(whole.views.size() == 1);
    CHECK(whole.angles[0] == doctest::Approx(0.0));
}

TEST_CASE("view generation rejects steps that do not divide the turn") {
    const Image base = wave_image(32, 32, 1);
    CHECK_THROWS_AS(generate_views(base, 7.0), InvalidStep);
    CHECK_THROWS_AS(generate_views(base, 0.0), InvalidStep);
    CHECK_THROWS_AS(generate_views(base, -10.0), InvalidStep);
    CHECK_NOTHROW(generate_views(base, 120.0));
}

TEST_CASE("the zero-angle view is the base patch itself") {
    const Image base = wave_image(48, 48, 9);
    const ViewSet set = generate_views(base, 45.0);
    CHECK(max_abs_diff(set.views[0], base) < 1e-12);
}

TEST_CASE("quarter turns of a fourfold-symmetric patch reproduce it exactly") {
    const Image sym = fourfold(100, 21);
    const ViewSet set = generate_views(sym, 10.0);
    REQUIRE(set.views.size() == 36);
    // indices 0, 9, 18, 27 are the multiples of 90 degrees; quarter turns
    // permute the pixel grid, so agreement is at rounding level
    for (const std::size_t k : {9u, 18u, 27u}) {
        CHECK(max_abs_diff(set.views[k], set.views[0]) < 1e-9);
    }
    // a non-multiple view genuinely differs
    CHECK(max_abs_diff(set.views[4], set.views[0]) > 1e-3);
}

TEST_CASE("a view equals directly rotating the base by its angle") {
    const Image base = wave_image(72, 72, 33);
    const ViewSet set = generate_views(base, 30.0);
    const Point center{35.5, 35.5};
    for (const std::size_t k : {1u, 5u, 11u}) {
        const AffineWarp w = AffineWarp::rotation(
            -set.angles[k] * std::numbers::pi / 180.0, center);
        const Image direct = warp_image(base, w, 72, 72);
        CHECK(max_abs_diff(set.views[k], direct) < 1e-12);
    }
}

TEST_CASE("rotating in two hops agrees with one hop away from the border") {
    const Image base = wave_image(96, 96, 41);
    const ViewSet set = generate_views(base, 30.0);
    const Point center{47.5, 47.5};
    // rotate the 30-degree view by another 30 degrees and compare the
    // interior against the direct 60-degree view; the double resampling
    // costs a little interpolation sharpness
    const AffineWarp w = AffineWarp::rotation(-30.0 * std::numbers::pi / 180.0, center);
    const Image two_hops = warp_image(set.views[1], w, 96, 96);
    double worst = 0.0;
    for (int y = 24; y < 72; ++y)
        for (int x = 24; x < 72; ++x)
            worst = std::max(worst, std::abs(two_hops.at(x, y) - set.views[2].at(x, y)));
    CHECK(worst < 0.03);
}

TEST_CASE("rotation preserves the inscribed disc mean") {
    const Image base = wave_image(80, 80, 55);
    const ViewSet set = generate_views(base, 30.0);
    const double m0 = disc_mean(set.views[0]);
    for (const auto& v : set.views) {
        CHECK(std::abs(disc_mean(v) - m0) <= 0.1 * std::abs(m0));
    }
}

TEST_CASE("scale normalization maps the region square onto the output grid") {
    const Image patch = ramp_image(160, 140, 0.1, 0.004, 0.002);
    const Quad region = Quad::axis_aligned(20.0, 30.0, 60.0, 60.0);
    const Image out = normalize_scale(patch, region, 100);
    REQUIRE(out.width() == 100);
    REQUIRE(out.height() == 100);
    // ramps pass through bilinear sampling unchanged, so every output pixel
    // has a closed form
    const double s = 60.0 / 99.0;
    for (int v = 0; v < 100; v += 9) {
        for (int u = 0; u < 100; u += 9) {
            const double x = 20.0 + u * s;
            const double y = 30.0 + v * s;
            CHECK(out.at(u, v) == doctest::Approx(0.1 + 0.004 * x + 0.002 * y).epsilon(1e-9));
        }
    }
}

TEST_CASE("scale normalization centers a non-square region in the square") {
    const Image patch = ramp_image(200, 160, 0.0, 0.005, 0.0);
    // wide region: the bounding square extends symmetrically in y
    const Quad region = Quad::axis_aligned(40.0, 60.0, 80.0, 40.0);
    const Image out = normalize_scale(patch, region, 50);
    const double s = 80.0 / 49.0;
    // x spans [40, 120]; the ramp depends only on x
    for (int u = 0; u < 50; u += 7) {
        CHECK(out.at(u, 25) == doctest::Approx(0.005 * (40.0 + u * s)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(normalize_scale(patch, Quad{}, 50), DegenerateRegion);
}

TEST_CASE("rewarp undoes a template's stored pose") {
    const Image canon = wave_image(100, 100, 77);
    // a mild in-plane pose away from identity
    const Point center{49.5, 49.5};
    AffineWarp pose = AffineWarp::rotation(0.1, center);
    pose = compose(AffineWarp::scaling(1.05, 1.05, center), pose);

    // the stored patch shows the canonical content under pose^-1, so undoing
    // the pose must give the canonical patch back
    const Image patch = warp_image(canon, invert(pose), 100, 100);
    TrackedTemplate t;
    t.patch = patch;
    t.pose = pose;
    const Image back = rewarp_to_initial(t);
    double worst = 0.0;
    for (int y = 20; y < 80; ++y)
        for (int x = 20; x < 80; ++x)
            worst = std::max(worst, std::abs(back.at(x, y) - canon.at(x, y)));
    CHECK(worst < 0.05);

    TrackedTemplate degenerate;
    degenerate.patch = canon;
    degenerate.pose.p = {0.0, 0.0, 0.0, 0.0, 5.0, 5.0};
    CHECK_THROWS_AS(rewarp_to_initial(degenerate), SingularWarp);
}

TEST_CASE("identity-pose rewarp returns the patch unchanged") {
    const Image patch = wave_image(64, 64, 3);
    TrackedTemplate t;
    t.patch = patch;
    t.pose = AffineWarp::identity();
    CHECK(max_abs_diff(rewarp_to_initial(t), patch) < 1e-12);
}

TEST_CASE("augmenting a burst expands every template into a labeled view set") {
    const Image base = wave_image(240, 200, 91);
    std::vector<Image> frames;
    for (int i = 0; i < 3; ++i) {
        frames.push_back(warp_image(base, AffineWarp::translation(-3.0 * i, 2.0 * i), 240, 200));
    }
    Detection seed;
    seed.frame_index = 0;
    seed.region = Quad::axis_aligned(70.0, 60.0, 80.0, 64.0);
    PipelineConfig cfg;
    const BurstResult burst = track_burst(frames, seed, cfg);
    REQUIRE(burst.templates.size() == 3);

    const auto sets = augment_burst(burst, cfg, "burst-7");
    REQUIRE(sets.size() == 3);
    for (const auto& set : sets) {
        CHECK(set.views.size() == 36);  // default 10-degree step
        CHECK(set.source_burst == "burst-7");
        for (const auto& v : set.views) {
            CHECK(v.width() == cfg.template_size);
            CHECK(v.height() == cfg.template_size);
        }
    }
}
