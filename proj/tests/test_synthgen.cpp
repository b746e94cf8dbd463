#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <aerorecog/image.hpp>
#include <aerorecog/synthgen.hpp>
#include <aerorecog/warp.hpp>

#include "support.hpp"

#include <cmath>
#include <random>

using namespace aerorecog;
using namespace aerorecog::testing;

namespace {

SceneScript small_scene(std::uint64_t seed, int frames = 4) {
    MotionSpec cam{0.7, -0.4, 0.0, 1.0};
    MotionSpec obj{3.0, 2.5, 0.5, 1.0};
    return make_scene(seed, frames, 320, 240, 48, 36, Point{120.0, 90.0}, cam, obj, 0.0);
}

}  // namespace

TEST_CASE("texture eval respects its intensity bounds") {
    std::mt19937_64 rng(3);
    TextureParams params;
    ProceduralTexture tex = make_texture(rng, 64, 64, params);
    tex.lo = 0.2;
    tex.hi = 0.6;
    for (double y = 0; y < 64; y += 1.7)
        for (double x = 0; x < 64; x += 1.3) {
            const double v = tex.eval(x, y);
            CHECK(v >= 0.2);
            CHECK(v <= 0.6);
        }
}

TEST_CASE("texture with no waves or decals is its base everywhere") {
    ProceduralTexture tex;
    tex.base = 0.31;
    CHECK(tex.eval(5.0, 9.0) == doctest::Approx(0.31));
    CHECK(tex.eval(-100.0, 3.5) == doctest::Approx(0.31));
}

TEST_CASE("same seed renders bit-identical scenes") {
    const SceneScript sc = small_scene(99);
    const RenderedScene a = render(sc);
    const RenderedScene b = render(sc);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i)
        CHECK(a.frames[i].data() == b.frames[i].data());
}

TEST_CASE("different seeds render different scenes") {
    const RenderedScene a = render(small_scene(1));
    const RenderedScene b = render(small_scene(2));
    CHECK(max_abs_diff(a.frames[0], b.frames[0]) > 0.01);
}

TEST_CASE("truth quads are the warped object rectangle") {
    const SceneScript sc = small_scene(7);
    const RenderedScene scene = render(sc);
    REQUIRE(scene.truth.object_quads.size() == sc.camera.size());
    for (std::size_t i = 0; i < scene.truth.object_quads.size(); ++i) {
        const Quad expect = apply(sc.object_pose[i], sc.object_rect());
        for (int c = 0; c < 4; ++c) {
            CHECK(scene.truth.object_quads[i].corners[std::size_t(c)].x ==
                  doctest::Approx(expect.corners[std::size_t(c)].x).epsilon(1e-12));
            CHECK(scene.truth.object_quads[i].corners[std::size_t(c)].y ==
                  doctest::Approx(expect.corners[std::size_t(c)].y).epsilon(1e-12));
        }
    }
}

TEST_CASE("relative pose composes pose_i with the inverse of pose_0") {
    const RenderedScene scene = render(small_scene(13));
    for (std::size_t i = 0; i < scene.truth.relative_pose.size(); ++i) {
        const AffineWarp expect =
            compose(scene.truth.object_pose[i], invert(scene.truth.object_pose[0]));
        for (int k = 0; k < 6; ++k)
            CHECK(scene.truth.relative_pose[i].p[std::size_t(k)] ==
                  doctest::Approx(expect.p[std::size_t(k)]).epsilon(1e-12));
    }
    CHECK(nearly_identity(scene.truth.relative_pose[0], 1e-12));
}

TEST_CASE("rendered pixels inside the object come from the object texture") {
    SceneScript sc = small_scene(21);
    const RenderedScene scene = render(sc);
    const Image& f0 = scene.frames[0];
    const AffineWarp inv_pose = invert(sc.object_pose[0]);
    int checked = 0;
    for (int y = 0; y < f0.height(); ++y) {
        for (int x = 0; x < f0.width(); ++x) {
            const Point local = inv_pose.apply(x, y);
            // stay clear of the object boundary's blended pixels
            if (local.x < 2.0 || local.y < 2.0 || local.x > sc.object_width - 2.0 ||
                local.y > sc.object_height - 2.0)
                continue;
            CHECK(f0.at(x, y) == doctest::Approx(sc.object.eval(local.x, local.y)).epsilon(1e-9));
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("rendered pixels away from the object come from the background") {
    SceneScript sc = small_scene(22);
    const RenderedScene scene = render(sc);
    const Image& f0 = scene.frames[0];
    double tx0, ty0, tx1, ty1;
    scene.truth.object_quads[0].bounding_box(tx0, ty0, tx1, ty1);
    int checked = 0;
    for (int y = 5; y < f0.height() - 5; y += 7) {
        for (int x = 5; x < f0.width() - 5; x += 7) {
            if (x > tx0 - 4 && x < tx1 + 4 && y > ty0 - 4 && y < ty1 + 4) continue;
            const Point bg = sc.camera[0].apply(x, y);
            CHECK(f0.at(x, y) == doctest::Approx(sc.background.eval(bg.x, bg.y)).epsilon(1e-9));
            ++checked;
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("noise perturbs frames by roughly its sigma") {
    SceneScript clean = small_scene(31);
    SceneScript noisy = clean;
    noisy.noise_sigma = 0.02;
    const Image a = render(clean).frames[0];
    const Image b = render(noisy).frames[0];
    double sum = 0.0, sum2 = 0.0;
    const std::size_t n = a.data().size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = b.data()[i] - a.data()[i];
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / double(n);
    const double sd = std::sqrt(sum2 / double(n) - mean * mean);
    CHECK(std::abs(mean) < 0.001);
    CHECK(sd == doctest::Approx(0.02).epsilon(0.15));  // clamping trims the tails a little
}

TEST_CASE("make_scene integrates per-frame motion") {
    const SceneScript sc = small_scene(41, 5);
    REQUIRE(sc.frame_count() == 5);
    // camera advances by its per-frame translation each frame
    for (int i = 1; i < 5; ++i) {
        const Point p0 = sc.camera[std::size_t(i - 1)].apply(100.0, 100.0);
        const Point p1 = sc.camera[std::size_t(i)].apply(100.0, 100.0);
        CHECK(p1.x - p0.x == doctest::Approx(0.7).epsilon(1e-9));
        CHECK(p1.y - p0.y == doctest::Approx(-0.4).epsilon(1e-9));
    }
    // object centroid advances by the object step
    for (int i = 1; i < 5; ++i) {
        const Point c0 = apply(sc.object_pose[std::size_t(i - 1)], sc.object_rect()).centroid();
        const Point c1 = apply(sc.object_pose[std::size_t(i)], sc.object_rect()).centroid();
        CHECK(c1.x - c0.x == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(c1.y - c0.y == doctest::Approx(2.5).epsilon(1e-9));
    }
    // per-frame rotation accumulates in the linear part
    const double ang = std::atan2(sc.object_pose[4].p[1], sc.object_pose[4].p[0]);
    CHECK(ang == doctest::Approx(4 * 0.5 * 3.14159265358979 / 180.0).epsilon(1e-6));
}

TEST_CASE("validate rejects broken scripts") {
    SceneScript sc = small_scene(51);
    sc.camera.pop_back();
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    SceneScript sc2 = small_scene(52);
    sc2.object_width = 0;
    CHECK_THROWS_AS(sc2.validate(), std::invalid_argument);
}

TEST_CASE("fixture exposes labeled targets with a designated similar pair") {
    const RecognitionFixture fx = make_recognition_fixture(5, 6, 2);
    REQUIRE(fx.labels.size() == 6);
    REQUIRE(fx.object_textures.size() == 6);
    REQUIRE(fx.object_sizes.size() == 6);
    REQUIRE(fx.bursts.size() == 12);
    CHECK(fx.similar_pair.first == 4);
    CHECK(fx.similar_pair.second == 5);
    for (const auto& label : fx.labels) CHECK(!label.empty());
    // every burst references a valid target and carries a valid script
    for (const FixtureBurst& b : fx.bursts) {
        CHECK(b.target_index >= 0);
        CHECK(b.target_index < 6);
        CHECK_NOTHROW(b.script.validate());
    }
}

TEST_CASE("fixture object diagonals stay in the working range") {
    const RecognitionFixture fx = make_recognition_fixture(5, 8, 1);
    for (const auto& [w, h] : fx.object_sizes) {
        const double diag = std::hypot(double(w), double(h));
        CHECK(diag >= 70.0);
        CHECK(diag <= 200.0);
    }
}

TEST_CASE("object textures are pairwise distinct with the similar pair closest") {
    const RecognitionFixture fx = make_recognition_fixture(17, 6, 1);
    const auto [sa, sb] = fx.similar_pair;
    double sim_corr = 0.0, best_other = -1.0;
    for (int i = 0; i < 6; ++i) {
        for (int j = i + 1; j < 6; ++j) {
            const double c = texture_correlation(fx.object_textures[std::size_t(i)],
                                                 fx.object_textures[std::size_t(j)], 64, 64);
            CHECK(c < 0.8);
            if (i == sa && j == sb)
                sim_corr = c;
            else
                best_other = std::max(best_other, c);
        }
    }
    CHECK(sim_corr > 0.4);
    CHECK(sim_corr > best_other);
}

TEST_CASE("fixture is deterministic in its scripts") {
    const RecognitionFixture a = make_recognition_fixture(77, 4, 2);
    const RecognitionFixture b = make_recognition_fixture(77, 4, 2);
    REQUIRE(a.bursts.size() == b.bursts.size());
    for (std::size_t i = 0; i < a.bursts.size(); ++i) {
        for (std::size_t f = 0; f < a.bursts[i].script.object_pose.size(); ++f)
            for (int k = 0; k < 6; ++k)
                CHECK(a.bursts[i].script.object_pose[f].p[std::size_t(k)] ==
                      b.bursts[i].script.object_pose[f].p[std::size_t(k)]);
        CHECK(a.bursts[i].script.object.base == b.bursts[i].script.object.base);
    }
}

TEST_CASE("fixture bursts keep the object inside the frame") {
    const RecognitionFixture fx = make_recognition_fixture(29, 6, 3);
    for (const FixtureBurst& b : fx.bursts) {
        const Quad rect = Quad::axis_aligned(0, 0, b.script.object_width, b.script.object_height);
        for (const AffineWarp& pose : b.script.object_pose) {
            double x0, y0, x1, y1;
            apply(pose, rect).bounding_box(x0, y0, x1, y1);
            CHECK(x0 > 4.0);
            CHECK(y0 > 4.0);
            CHECK(x1 < b.script.frame_width - 4.0);
            CHECK(y1 < b.script.frame_height - 4.0);
        }
    }
}

TEST_CASE("make_textured_patch is deterministic and in range") {
    const Image a = make_textured_patch(123, 40, 30);
    const Image b = make_textured_patch(123, 40, 30);
    CHECK(a.data() == b.data());
    for (double v : a.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const Image c = make_textured_patch(124, 40, 30);
    CHECK(max_abs_diff(a, c) > 0.01);
}
