#include "aerorecog/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aerorecog/errors.hpp"

namespace aerorecog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smooth 0..1 ramp over [0,1].
double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

double ProceduralTexture::eval(double x, double y) const {
    double v = base;
    for (const Wave& w : waves) {
        v += w.amp * std::sin(kTwoPi * (w.fx * x + w.fy * y) + w.phase);
    }
    for (const Decal& d : decals) {
        const double lx = d.cos_a * (x - d.cx) + d.sin_a * (y - d.cy);
        const double ly = -d.sin_a * (x - d.cx) + d.cos_a * (y - d.cy);
        double inside;
        const double feather = 1.5;  // px of soft edge
        if (d.kind == Decal::ellipse) {
            const double r = std::hypot(lx / d.rx, ly / d.ry);
            inside = 1.0 - smoothstep((r - 1.0) * std::min(d.rx, d.ry) / feather + 0.5);
        } else {
            const double mx = 1.0 - smoothstep((std::abs(lx) - d.rx) / feather + 0.5);
            const double my = 1.0 - smoothstep((std::abs(ly) - d.ry) / feather + 0.5);
            inside = mx * my;
        }
        v += d.delta * inside;
    }
    return std::clamp(v, lo, hi);
}

ProceduralTexture make_texture(std::mt19937_64& rng, double width, double height,
                               const TextureParams& params) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ProceduralTexture tex;
    tex.base = 0.45 + 0.1 * u01(rng);
    for (int i = 0; i < params.n_waves; ++i) {
        const double theta = kTwoPi * u01(rng);
        // log-uniform wavelengths cover the band evenly
        const double lambda = params.min_wavelength *
                              std::pow(params.max_wavelength / params.min_wavelength, u01(rng));
        const double f = 1.0 / lambda;
        ProceduralTexture::Wave w;
        w.fx = f * std::cos(theta);
        w.fy = f * std::sin(theta);
        w.amp = params.contrast * (0.02 + 0.05 * u01(rng)) / std::sqrt(double(params.n_waves) / 8.0);
        w.phase = kTwoPi * u01(rng);
        tex.waves.push_back(w);
    }
    for (int i = 0; i < params.n_decals; ++i) {
        ProceduralTexture::Decal d;
        d.kind = u01(rng) < 0.5 ? ProceduralTexture::Decal::ellipse
                                : ProceduralTexture::Decal::rectangle;
        d.cx = width * (0.1 + 0.8 * u01(rng));
        d.cy = height * (0.1 + 0.8 * u01(rng));
        const double smin = params.decal_min_frac * std::min(width, height);
        const double smax = params.decal_max_frac * std::min(width, height);
        d.rx = smin + (smax - smin) * u01(rng);
        d.ry = smin + (smax - smin) * u01(rng);
        const double a = kTwoPi * u01(rng);
        d.cos_a = std::cos(a);
        d.sin_a = std::sin(a);
        const double mag = params.contrast * (0.08 + 0.12 * u01(rng));
        d.delta = u01(rng) < 0.5 ? -mag : mag;
        tex.decals.push_back(d);
    }
    return tex;
}

void SceneScript::validate() const {
    if (camera.size() != object_pose.size()) {
        throw std::invalid_argument("scene script: camera/object warp counts differ");
    }
    if (frame_count() < 2) {
        throw std::invalid_argument("scene script: need at least 2 frames");
    }
    if (frame_width < 8 || frame_height < 8 || object_width < 4 || object_height < 4) {
        throw std::invalid_argument("scene script: degenerate dimensions");
    }
    for (const auto& w : camera) {
        if (std::abs(w.det()) < 1e-12) throw std::invalid_argument("scene script: singular camera warp");
    }
    for (const auto& w : object_pose) {
        if (std::abs(w.det()) < 1e-12) throw std::invalid_argument("scene script: singular object warp");
    }
}

RenderedScene render(const SceneScript& script) {
    script.validate();
    RenderedScene out;
    const int n = script.frame_count();
    out.frames.reserve(n);
    out.truth.camera = script.camera;
    out.truth.object_pose = script.object_pose;

    const AffineWarp first_inv = invert(script.object_pose[0]);
    const Quad rect = script.object_rect();

    for (int i = 0; i < n; ++i) {
        const AffineWarp& cam = script.camera[i];
        const AffineWarp obj_inv = invert(script.object_pose[i]);
        Image frame(script.frame_width, script.frame_height);

        // restrict the object test to its warped bounding box
        const Quad oq = apply(script.object_pose[i], rect);
        double bx0, by0, bx1, by1;
        oq.bounding_box(bx0, by0, bx1, by1);

        for (int y = 0; y < script.frame_height; ++y) {
            for (int x = 0; x < script.frame_width; ++x) {
                double v;
                bool on_object = false;
                if (x >= bx0 - 1 && x <= bx1 + 1 && y >= by0 - 1 && y <= by1 + 1) {
                    const Point q = obj_inv.apply(double(x), double(y));
                    if (q.x >= 0.0 && q.x < script.object_width && q.y >= 0.0 &&
                        q.y < script.object_height) {
                        v = script.object.eval(q.x, q.y);
                        on_object = true;
                    }
                }
                if (!on_object) {
                    const Point q = cam.apply(double(x), double(y));
                    v = script.background.eval(q.x, q.y);
                }
                frame.at(x, y) = v;
            }
        }

        if (script.noise_sigma > 0.0) {
            std::mt19937_64 rng(script.seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
            std::normal_distribution<double> gauss(0.0, script.noise_sigma);
            for (double& p : frame.data()) p += gauss(rng);
            frame.clamp01();
        }

        out.frames.push_back(std::move(frame));
        out.truth.object_quads.push_back(oq);
        out.truth.relative_pose.push_back(compose(script.object_pose[i], first_inv));
    }
    return out;
}

namespace {

// Per-frame motion composition about a moving pivot: each step applies the
// delta (rotation+scale about the object's current center, then translation).
std::vector<AffineWarp> integrate_motion(const AffineWarp& start, const MotionSpec& m,
                                         Point local_center, int frames) {
    std::vector<AffineWarp> out;
    out.push_back(start);
    for (int i = 1; i < frames; ++i) {
        const AffineWarp& prev = out.back();
        const Point c = prev.apply(local_center);
        AffineWarp delta = AffineWarp::translation(m.dx, m.dy);
        if (m.rot_deg != 0.0) {
            delta = compose(delta, AffineWarp::rotation(m.rot_deg * std::numbers::pi / 180.0, c));
        }
        if (m.scale != 1.0) {
            delta = compose(delta, AffineWarp::scaling(m.scale, m.scale, c));
        }
        out.push_back(compose(delta, prev));
    }
    return out;
}

}  // namespace

SceneScript make_scene(std::uint64_t seed, int frames, int frame_w, int frame_h,
                       int obj_w, int obj_h, Point object_start,
                       const MotionSpec& camera_motion, const MotionSpec& object_motion,
                       double noise_sigma) {
    SceneScript s;
    s.seed = seed;
    s.frame_width = frame_w;
    s.frame_height = frame_h;
    s.object_width = obj_w;
    s.object_height = obj_h;
    s.noise_sigma = noise_sigma;

    std::mt19937_64 rng(seed);
    TextureParams bg_params;
    bg_params.n_waves = 16;
    bg_params.min_wavelength = 8.0;
    bg_params.max_wavelength = 96.0;
    bg_params.n_decals = 24;
    // Damped so regional terrain tone stays well above the dark objects;
    // registration leans on fine structure, not on large level swings.
    bg_params.contrast = 0.45;
    const double bw = frame_w + 2.0 * s.background_margin;
    const double bh = frame_h + 2.0 * s.background_margin;
    s.background = make_texture(rng, bw, bh, bg_params);

    TextureParams obj_params;
    obj_params.n_waves = 12;
    obj_params.min_wavelength = 5.0;
    obj_params.max_wavelength = 0.5 * std::min(obj_w, obj_h);
    obj_params.n_decals = 5;
    obj_params.contrast = 0.6;
    s.object = make_texture(rng, obj_w, obj_h, obj_params);
    // Vehicles read dark against terrain: the two textures are pinned to
    // disjoint albedo bands (object <= 0.22, terrain >= 0.47) so frame
    // differences fire along the whole silhouette with a margin that clears
    // the detection threshold plus sensor noise at every rim pixel.
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    s.background.base = 0.55 + 0.08 * u01(rng);
    s.background.lo = 0.47;
    s.object.base = 0.10 + 0.04 * u01(rng);
    s.object.hi = 0.22;

    // camera starts centered in the oversized background
    const AffineWarp cam0 = AffineWarp::translation(s.background_margin, s.background_margin);
    MotionSpec cam = camera_motion;
    s.camera = integrate_motion(cam0, cam, Point{frame_w / 2.0, frame_h / 2.0}, frames);

    const AffineWarp obj0 = AffineWarp::translation(object_start.x, object_start.y);
    s.object_pose =
        integrate_motion(obj0, object_motion, Point{obj_w / 2.0, obj_h / 2.0}, frames);
    return s;
}

Image make_textured_patch(std::uint64_t seed, int width, int height,
                          const TextureParams& params) {
    std::mt19937_64 rng(seed);
    const ProceduralTexture tex = make_texture(rng, width, height, params);
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.at(x, y) = tex.eval(double(x), double(y));
        }
    }
    return img;
}

double texture_correlation(const ProceduralTexture& a, const ProceduralTexture& b,
                           int w, int h) {
    double ma = 0.0, mb = 0.0;
    const int n = w * h;
    std::vector<double> va(n), vb(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            va[y * w + x] = a.eval(x, y);
            vb[y * w + x] = b.eval(x, y);
            ma += va[y * w + x];
            mb += vb[y * w + x];
        }
    }
    ma /= n;
    mb /= n;
    double cab = 0.0, caa = 0.0, cbb = 0.0;
    for (int i = 0; i < n; ++i) {
        cab += (va[i] - ma) * (vb[i] - mb);
        caa += (va[i] - ma) * (va[i] - ma);
        cbb += (vb[i] - mb) * (vb[i] - mb);
    }
    if (caa <= 0.0 || cbb <= 0.0) return 1.0;
    return cab / std::sqrt(caa * cbb);
}

RecognitionFixture make_recognition_fixture(std::uint64_t seed, int n_targets,
                                            int bursts_per_target,
                                            const FixtureOptions& options) {
    if (n_targets < 2) throw std::invalid_argument("fixture: n_targets must be >= 2");
    if (bursts_per_target < 1) throw std::invalid_argument("fixture: bursts_per_target must be >= 1");

    RecognitionFixture fx;
    std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dull + 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Object footprints with diagonals inside the 70..200 px working range.
    // All are near-square: together with the near-axis-aligned headings
    // below, that keeps the detected box snug around the target, so tracked
    // patches carry target appearance rather than a wide terrain surround.
    // Entries 4 and 5 get nearly matching footprints on purpose (they back
    // the deliberately similar pair at the default six targets).
    const std::pair<int, int> base_sizes[] = {
        {104, 94}, {82, 74}, {128, 114}, {94, 84}, {114, 102}, {112, 100},
        {122, 110}, {88, 78},
    };

    // Bold low-frequency markings: a handful of big soft-edged shapes and
    // long waves. Identity has to survive a variance-ranked cut of the view
    // set, so per-target structure is concentrated in few strong modes
    // instead of fine speckle.
    TextureParams obj_params;
    obj_params.n_waves = 5;
    obj_params.min_wavelength = 14.0;
    obj_params.max_wavelength = 36.0;
    obj_params.n_decals = 6;
    obj_params.contrast = 1.3;
    obj_params.decal_min_frac = 0.12;
    obj_params.decal_max_frac = 0.32;

    const int sim_a = n_targets - 2;
    const int sim_b = n_targets - 1;
    fx.similar_pair = {sim_a, sim_b};

    for (int t = 0; t < n_targets; ++t) {
        fx.labels.push_back("target_" + std::to_string(t + 1));
        fx.object_sizes.push_back(base_sizes[t % 8]);
    }

    for (int t = 0; t < n_targets; ++t) {
        const auto [ow, oh] = fx.object_sizes[t];
        std::mt19937_64 trng(seed ^ (0xb5297a4d3f8c6e21ull * (t + 3)));
        // Every target reads dark against the terrain so frame differences
        // fire along its whole silhouette; the deliberately similar pair
        // shares its base level (applied after synthesis below). Drawn from
        // its own stream so texture draws stay aligned across the similar
        // pair's replicated generator.
        std::mt19937_64 level_rng(seed ^ (0xd6e8feb86659fd93ull * (t + 7)));
        const double base_level = 0.14 + 0.03 * u01(level_rng);
        // The similar pair's private markings are mid-scale rather than fine
        // speckle: they must survive the same variance-ranked cut that keeps
        // the shared structure, or the pair becomes indistinguishable.
        TextureParams private_params;
        private_params.n_waves = 4;
        private_params.min_wavelength = 10.0;
        private_params.max_wavelength = 24.0;
        private_params.n_decals = 3;
        private_params.contrast = 0.9;
        private_params.decal_min_frac = 0.10;
        private_params.decal_max_frac = 0.20;
        if (t == sim_b) {
            // similar pair: shared bold structure, independent private layer
            std::mt19937_64 srng(seed ^ (0xb5297a4d3f8c6e21ull * (sim_a + 3)));
            ProceduralTexture tex = make_texture(srng, ow, oh, obj_params);
            for (auto& w : tex.waves) w.amp *= 0.8;
            for (auto& d : tex.decals) d.delta *= 0.8;
            ProceduralTexture detail = make_texture(trng, ow, oh, private_params);
            tex.waves.insert(tex.waves.end(), detail.waves.begin(), detail.waves.end());
            tex.decals.insert(tex.decals.end(), detail.decals.begin(), detail.decals.end());
            fx.object_textures.push_back(tex);
        } else if (t == sim_a) {
            ProceduralTexture tex = make_texture(trng, ow, oh, obj_params);
            std::mt19937_64 frng(seed ^ 0x6a09e667f3bcc909ull ^ (7919ull * t));
            ProceduralTexture detail = make_texture(frng, ow, oh, private_params);
            tex.waves.insert(tex.waves.end(), detail.waves.begin(), detail.waves.end());
            tex.decals.insert(tex.decals.end(), detail.decals.begin(), detail.decals.end());
            fx.object_textures.push_back(tex);
        } else {
            fx.object_textures.push_back(make_texture(trng, ow, oh, obj_params));
        }
        fx.object_textures.back().base =
            t == sim_b ? fx.object_textures[sim_a].base : base_level;
        fx.object_textures.back().lo = 0.03;
        fx.object_textures.back().hi = 0.30;
    }

    for (int t = 0; t < n_targets; ++t) {
        const auto [ow, oh] = fx.object_sizes[t];
        for (int b = 0; b < bursts_per_target; ++b) {
            const int frames = options.min_frames + (b % 3);
            const std::uint64_t burst_seed =
                seed ^ (0x94d049bb133111ebull * (t * 64 + b + 1));
            std::mt19937_64 brng(burst_seed);

            MotionSpec cam_motion;
            const double cam_dir = kTwoPi * u01(brng);
            const double cam_step = 0.5 + 1.0 * u01(brng);
            cam_motion.dx = cam_step * std::cos(cam_dir);
            cam_motion.dy = cam_step * std::sin(cam_dir);

            // Camera sampling coords advance by +cam per frame, so scene
            // content drifts by -cam; the object's apparent step against the
            // registered background is obj + cam. Two couplings matter here.
            // First, the heading stays near an axis so the detected box hugs
            // the footprint: a diagonal footprint would pad the tracked patch
            // with terrain that slides through it every frame. Second, the
            // apparent step is pinned near the footprint's diagonal: every
            // silhouette edge must sweep ~4 px of fresh terrain per frame or
            // its difference band collapses under the radius-1 opening, and
            // an edge gliding along its own direction sweeps nothing at all.
            const double quarter = 90.0 * double(int(4.0 * u01(brng)) & 3);
            const double init_deg = quarter + (-4.0 + 8.0 * u01(brng));
            const double diag = 45.0 + 90.0 * double(int(4.0 * u01(brng)) & 3);
            const double step_deg = init_deg + diag + (-6.0 + 12.0 * u01(brng));
            const double step_dir = step_deg * std::numbers::pi / 180.0;
            const double step_mag = 7.0 + 0.8 * u01(brng);
            const double rel_x = step_mag * std::cos(step_dir);
            const double rel_y = step_mag * std::sin(step_dir);
            MotionSpec obj_motion;
            obj_motion.dx = rel_x - cam_motion.dx;
            obj_motion.dy = rel_y - cam_motion.dy;
            // kept small so the heading never leaves the safe wedge: near an
            // axis for the box fit, ~45 degrees off the step for the sweep
            obj_motion.rot_deg = -0.25 + 0.5 * u01(brng);
            obj_motion.scale = 1.0 + (-0.002 + 0.004 * u01(brng));

            // margin covers the rotated footprint plus drift of the frame
            const double margin = 0.6 * std::hypot(double(ow), double(oh)) + 16.0;
            const double travel_x = obj_motion.dx * (frames - 1);
            const double travel_y = obj_motion.dy * (frames - 1);
            const double usable_w =
                options.frame_width - 2.0 * margin - ow - std::abs(travel_x);
            const double usable_h =
                options.frame_height - 2.0 * margin - oh - std::abs(travel_y);
            Point start;
            start.x = margin + u01(brng) * std::max(1.0, usable_w);
            start.y = margin + u01(brng) * std::max(1.0, usable_h);
            if (travel_x < 0) start.x += std::abs(travel_x);
            if (travel_y < 0) start.y += std::abs(travel_y);

            SceneScript script =
                make_scene(burst_seed, frames, options.frame_width, options.frame_height,
                           ow, oh, start, cam_motion, obj_motion, options.noise_sigma);
            // overwrite the generated object texture with the target's own
            script.object = fx.object_textures[t];

            // Per-burst initial orientation: rotate every pose about its own
            // frame's object center, changing heading without bending the
            // trajectory (which would disturb the apparent step above).
            const double init_rad = init_deg * std::numbers::pi / 180.0;
            for (auto& pose : script.object_pose) {
                const Point c = pose.apply(Point{ow / 2.0, oh / 2.0});
                pose = compose(AffineWarp::rotation(init_rad, c), pose);
            }

            fx.bursts.push_back(FixtureBurst{t, b, std::move(script)});
        }
    }
    return fx;
}

}  // namespace aerorecog
