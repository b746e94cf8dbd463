#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aerorecog/image.hpp"
#include "aerorecog/warp.hpp"

namespace aerorecog {

/// Smooth procedural texture: a base level plus band-limited sinusoids plus
/// soft-edged geometric decals. Evaluated analytically at real coordinates,
/// so rendered scenes are band-limited and differentiable almost everywhere,
/// which keeps alignment Hessians well conditioned.
struct ProceduralTexture {
    struct Wave {
        double amp, fx, fy, phase;
    };
    struct Decal {
        enum Kind { ellipse, rectangle };
        Kind kind;
        double cx, cy, rx, ry, cos_a, sin_a, delta;
    };

    double base = 0.5;
    std::vector<Wave> waves;
    std::vector<Decal> decals;
    /// Intensity bounds enforced by eval. Narrowing them pins a texture to a
    /// distinct albedo band (dark vehicle, light terrain) so two textures can
    /// be guaranteed never to blend into each other pointwise.
    double lo = 0.0;
    double hi = 1.0;

    double eval(double x, double y) const;
};

/// Texture generator knobs. `contrast` scales every wave amplitude and decal
/// offset, the main difficulty knob for alignment tests.
struct TextureParams {
    int n_waves = 12;
    double min_wavelength = 5.0;
    double max_wavelength = 40.0;
    int n_decals = 5;
    double contrast = 1.0;
    /// Decal half-extents as fractions of min(width, height). Larger values
    /// produce bold blocky markings rather than speckle.
    double decal_min_frac = 0.06;
    double decal_max_frac = 0.22;
};

ProceduralTexture make_texture(std::mt19937_64& rng, double width, double height,
                               const TextureParams& params);

/// Fully scripted synthetic scene: a textured background observed through a
/// per-frame camera warp, with one textured object composited per frame.
///
///   frame_i(x,y) = object(obj_pose_i^-1(x,y))   where inside [0,ow)x[0,oh)
///                = background(camera_i(x,y))    elsewhere
///
/// plus optional additive Gaussian noise. All warps are stated explicitly so
/// ground truth is exact by construction.
struct SceneScript {
    std::uint64_t seed = 0;
    int frame_width = 1360;
    int frame_height = 1024;
    int background_margin = 64;

    ProceduralTexture background;
    int object_width = 96;
    int object_height = 64;
    ProceduralTexture object;

    std::vector<AffineWarp> camera;       // frame coords -> background coords
    std::vector<AffineWarp> object_pose;  // object-local coords -> frame coords
    double noise_sigma = 0.0;

    int frame_count() const { return static_cast<int>(camera.size()); }
    Quad object_rect() const {
        return Quad::axis_aligned(0, 0, object_width, object_height);
    }

    void validate() const;  // throws std::invalid_argument on a broken script
};

struct SceneTruth {
    std::vector<Quad> object_quads;        // object corners in frame coords
    std::vector<AffineWarp> camera;        // echo of the script
    std::vector<AffineWarp> object_pose;   // echo of the script
    /// Object motion relative to the first frame, in frame coordinates:
    /// rel[i] = object_pose[i] * object_pose[0]^-1.
    std::vector<AffineWarp> relative_pose;
};

struct RenderedScene {
    std::vector<Image> frames;
    SceneTruth truth;
};

/// Deterministic given the script (the seed covers the noise stream).
RenderedScene render(const SceneScript& script);

// ---- script builders ------------------------------------------------------

struct MotionSpec {
    double dx = 0.0;          // px per frame, frame coords
    double dy = 0.0;
    double rot_deg = 0.0;     // degrees per frame about the moving center
    double scale = 1.0;       // multiplicative per frame
};

/// Background + camera pan + one moving object. `object_start` is the
/// object's top-left position in frame 0. Textures are drawn from `seed`.
SceneScript make_scene(std::uint64_t seed, int frames, int frame_w, int frame_h,
                       int obj_w, int obj_h, Point object_start,
                       const MotionSpec& camera_motion, const MotionSpec& object_motion,
                       double noise_sigma = 0.0);

/// Convenience for unit tests: one textured patch, deterministic in `seed`.
Image make_textured_patch(std::uint64_t seed, int width, int height,
                          const TextureParams& params = {});

// ---- recognition fixture --------------------------------------------------

struct FixtureOptions {
    int frame_width = 1360;   // flight-scale frame, see SceneScript defaults
    int frame_height = 1024;
    int min_frames = 8;       // burst length varies in [min_frames, min_frames+2]
    double noise_sigma = 0.015;
};

struct FixtureBurst {
    int target_index;
    int burst_index;
    SceneScript script;
};

/// Labeled multi-burst dataset standing in for real flight captures:
/// n_targets distinct textured objects, each observed in bursts_per_target
/// independently scripted bursts with varying initial orientation and
/// trajectory. The last two targets are deliberately similar in texture and
/// shape; every pair still satisfies inter-object correlation < 0.8.
struct RecognitionFixture {
    std::vector<std::string> labels;
    std::vector<ProceduralTexture> object_textures;
    std::vector<std::pair<int, int>> object_sizes;
    std::vector<FixtureBurst> bursts;     // grouped by target, then burst index
    std::pair<int, int> similar_pair{-1, -1};
};

RecognitionFixture make_recognition_fixture(std::uint64_t seed, int n_targets = 6,
                                            int bursts_per_target = 5,
                                            const FixtureOptions& options = {});

/// Normalized cross-correlation of two equally sized rasters of the two
/// textures, used by the fixture's distinctness check.
double texture_correlation(const ProceduralTexture& a, const ProceduralTexture& b,
                           int w, int h);

}  // namespace aerorecog
