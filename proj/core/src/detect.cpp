#include "aerorecog/detect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>

#include "aerorecog/errors.hpp"

namespace aerorecog {

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
}

namespace {

struct FramePyramid {
    std::vector<Image> levels;
    std::vector<Image> gx, gy;  // gradients per level, for the resampled image
};

FramePyramid build_frame_pyramid(const Image& img, int min_dim) {
    FramePyramid p;
    p.levels.push_back(img);
    while (p.levels.back().width() / 2 >= min_dim && p.levels.back().height() / 2 >= min_dim) {
        p.levels.push_back(downsample_half(p.levels.back()));
    }
    for (const Image& lvl : p.levels) {
        auto [gx, gy] = gradient(lvl);
        p.gx.push_back(std::move(gx));
        p.gy.push_back(std::move(gy));
    }
    return p;
}

// Similarity (a,b,tx,ty) or full affine (p1..p6) parameter vector.
AffineWarp params_to_warp(const std::vector<double>& q, int dof) {
    if (dof == 4) return AffineWarp::similarity(q[0], q[1], q[2], q[3]);
    return AffineWarp{{q[0], q[1], q[2], q[3], q[4], q[5]}};
}

// One pyramid level of trimmed Gauss-Newton. Mutates the parameter vector.
void register_level(const Image& tpl, const Image& mov, const Image& mov_gx,
                    const Image& mov_gy, std::vector<double>& q,
                    const RegistrationOptions& opt, int level) {
    const int dof = opt.dof;
    const int w = tpl.width();
    const int h = tpl.height();

    int stride = 1;
    while ((w / stride) * (h / stride) > opt.max_samples_per_level) ++stride;

    const Quad frame_quad = Quad::axis_aligned(0, 0, w - 1, h - 1);

    struct Sample {
        double x, y, r;
    };
    std::vector<Sample> samples;
    samples.reserve(std::size_t(w / stride + 1) * (h / stride + 1));
    std::vector<double> mags;

    double best_residual = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        const AffineWarp warp = params_to_warp(q, dof);

        samples.clear();
        for (int y = 1; y < h - 1; y += stride) {
            for (int x = 1; x < w - 1; x += stride) {
                const Point p = warp.apply(double(x), double(y));
                bool oob = false;
                const double v = sample_bilinear(mov, p.x, p.y, oob);
                if (oob) continue;
                samples.push_back({double(x), double(y), v - tpl.at(x, y)});
            }
        }
        if (samples.size() < std::size_t(8 * dof)) {
            throw RegistrationDiverged("level " + std::to_string(level) +
                                       ": too few in-bounds samples");
        }

        // trim the largest |r| so the moving object drops out as an outlier
        mags.clear();
        mags.reserve(samples.size());
        for (const auto& s : samples) mags.push_back(std::abs(s.r));
        const std::size_t keep =
            std::max<std::size_t>(1, std::size_t(std::ceil((1.0 - opt.trim_fraction) *
                                                           double(mags.size()))));
        std::nth_element(mags.begin(), mags.begin() + (keep - 1), mags.end());
        const double cutoff = mags[keep - 1];

        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dof, dof);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dof);
        double kept_sq = 0.0;
        std::size_t kept = 0;
        double sd[6];
        for (const auto& s : samples) {
            if (std::abs(s.r) > cutoff) continue;
            const Point p = warp.apply(s.x, s.y);
            const double ix = sample_bilinear(mov_gx, p.x, p.y);
            const double iy = sample_bilinear(mov_gy, p.x, p.y);
            if (dof == 4) {
                sd[0] = ix * s.x + iy * s.y;
                sd[1] = -ix * s.y + iy * s.x;
                sd[2] = ix;
                sd[3] = iy;
            } else {
                sd[0] = ix * s.x;
                sd[1] = iy * s.x;
                sd[2] = ix * s.y;
                sd[3] = iy * s.y;
                sd[4] = ix;
                sd[5] = iy;
            }
            for (int i = 0; i < dof; ++i) {
                for (int j = i; j < dof; ++j) H(i, j) += sd[i] * sd[j];
                g(i) += sd[i] * (-s.r);  // descend toward tpl
            }
            kept_sq += s.r * s.r;
            ++kept;
        }
        H = H.selfadjointView<Eigen::Upper>();
        const double trimmed_residual = kept_sq / double(kept);

        if (trimmed_residual < best_residual - 1e-14) {
            best_residual = trimmed_residual;
            stall = 0;
        } else {
            if (++stall >= opt.max_stall) {
                throw RegistrationDiverged("level " + std::to_string(level) +
                                           ": trimmed residual stalled");
            }
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success) {
            throw RegistrationDiverged("level " + std::to_string(level) +
                                       ": degenerate normal equations");
        }
        const Eigen::VectorXd delta = ldlt.solve(g);
        if (!delta.allFinite()) {
            throw RegistrationDiverged("level " + std::to_string(level) +
                                       ": non-finite update");
        }

        std::array<double, 6> d6{};
        if (dof == 4) {
            d6 = {delta(0), delta(1), -delta(1), delta(0), delta(2), delta(3)};
        } else {
            for (int i = 0; i < 6; ++i) d6[std::size_t(i)] = delta(i);
        }
        for (int i = 0; i < dof; ++i) q[std::size_t(i)] += delta(i);

        if (max_corner_displacement(d6, frame_quad) < opt.corner_tolerance) break;
    }
}

AffineWarp register_pyramids(const FramePyramid& tpl, const FramePyramid& mov,
                             const RegistrationOptions& opt) {
    const int levels = int(std::min(tpl.levels.size(), mov.levels.size()));
    std::vector<double> q;
    if (opt.dof == 4) {
        q = {1.0, 0.0, 0.0, 0.0};
    } else {
        q = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    }
    for (int level = levels - 1; level >= 0; --level) {
        register_level(tpl.levels[level], mov.levels[level], mov.gx[level], mov.gy[level],
                       q, opt, level);
        if (level > 0) {
            // translation doubles moving to the next finer level
            if (opt.dof == 4) {
                q[2] *= 2.0;
                q[3] *= 2.0;
            } else {
                q[4] *= 2.0;
                q[5] *= 2.0;
            }
        }
    }
    return params_to_warp(q, opt.dof);
}

void difference_with_values(const Image& a, const Image& b, const AffineWarp& w,
                            double threshold, BinaryMask& mask, Image* values) {
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            const Point p = w.apply(double(x), double(y));
            bool oob = false;
            const double v = sample_bilinear(b, p.x, p.y, oob);
            const double d = std::abs(a.at(x, y) - v);
            if (values) values->at(x, y) = oob ? 0.0 : d;
            mask.set(x, y, !oob && d > threshold);
        }
    }
}

}  // namespace

AffineWarp register_global(const Image& prev, const Image& next,
                           const RegistrationOptions& options) {
    if (prev.width() != next.width() || prev.height() != next.height()) {
        throw ImageTooSmall("register_global: image dimensions differ");
    }
    const FramePyramid tpl = build_frame_pyramid(prev, options.pyramid_min_dim);
    const FramePyramid mov = build_frame_pyramid(next, options.pyramid_min_dim);
    return register_pyramids(tpl, mov, options);
}

BinaryMask difference_mask(const Image& a, const Image& b, const AffineWarp& w,
                           double threshold) {
    BinaryMask mask(a.width(), a.height());
    difference_with_values(a, b, w, threshold, mask, nullptr);
    return mask;
}

BinaryMask morphological_clean(const BinaryMask& m, int radius) {
    const int w = m.width;
    const int h = m.height;
    auto pass = [&](const BinaryMask& in, bool horizontal, bool erode) {
        BinaryMask out(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                bool v = erode;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = horizontal ? x + k : x;
                    const int yy = horizontal ? y : y + k;
                    bool sample = false;  // outside the raster counts as off
                    if (xx >= 0 && xx < w && yy >= 0 && yy < h) sample = in.get(xx, yy);
                    if (erode) {
                        if (!sample) {
                            v = false;
                            break;
                        }
                    } else {
                        if (sample) {
                            v = true;
                            break;
                        }
                    }
                }
                out.set(x, y, v);
            }
        }
        return out;
    };
    // square element separates into a horizontal and a vertical run
    BinaryMask eroded = pass(pass(m, true, true), false, true);
    return pass(pass(eroded, true, false), false, false);
}

std::optional<Detection> largest_component(const BinaryMask& m, int min_area,
                                           const Image* diff) {
    const int w = m.width;
    const int h = m.height;
    std::vector<std::uint8_t> visited(std::size_t(w) * h, 0);
    std::vector<int> stack;

    std::size_t best_area = 0;
    int best_x0 = 0, best_y0 = 0, best_x1 = 0, best_y1 = 0;
    double best_score_sum = 0.0;

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = std::size_t(sy) * w + sx;
            if (!m.bits[si] || visited[si]) continue;

            std::size_t area = 0;
            int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
            double score_sum = 0.0;
            stack.clear();
            stack.push_back(int(si));
            visited[si] = 1;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int x = idx % w;
                const int y = idx / w;
                ++area;
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                if (diff) score_sum += diff->at(x, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t ni = std::size_t(ny) * w + nx;
                        if (m.bits[ni] && !visited[ni]) {
                            visited[ni] = 1;
                            stack.push_back(int(ni));
                        }
                    }
                }
            }
            if (area > best_area) {
                best_area = area;
                best_x0 = x0;
                best_x1 = x1;
                best_y0 = y0;
                best_y1 = y1;
                best_score_sum = score_sum;
            }
        }
    }

    if (best_area < std::size_t(min_area)) return std::nullopt;
    Detection det;
    det.region = Quad::axis_aligned(best_x0, best_y0, best_x1 - best_x0 + 1,
                                    best_y1 - best_y0 + 1);
    det.area = double(best_area);
    det.score = diff ? best_score_sum / double(best_area) : 0.0;
    return det;
}

std::vector<FrameDetection> detect_sequence(const std::vector<Image>& frames,
                                            const PipelineConfig& cfg) {
    std::vector<FrameDetection> records;
    if (frames.size() < 2) return records;

    RegistrationOptions opt = RegistrationOptions::from_config(cfg);
    FramePyramid prev_pyr = build_frame_pyramid(frames[0], opt.pyramid_min_dim);
    Image diff(frames[0].width(), frames[0].height());

    for (std::size_t i = 1; i < frames.size(); ++i) {
        FramePyramid cur_pyr = build_frame_pyramid(frames[i], opt.pyramid_min_dim);
        // warp mapping current-frame coords onto the previous frame
        const AffineWarp w = register_pyramids(cur_pyr, prev_pyr, opt);

        BinaryMask mask(frames[i].width(), frames[i].height());
        difference_with_values(frames[i], frames[i - 1], w, cfg.diff_threshold, mask, &diff);
        mask = morphological_clean(mask, cfg.morph_radius);

        FrameDetection rec;
        rec.frame_index = int(i);
        rec.background_warp = w;
        rec.detection = largest_component(mask, cfg.min_area, &diff);
        if (rec.detection) rec.detection->frame_index = int(i);
        records.push_back(std::move(rec));

        prev_pyr = std::move(cur_pyr);
    }
    return records;
}

std::optional<Detection> debounce_detections(const std::vector<FrameDetection>& records,
                                             int persistence, double iou_threshold) {
    int run = 0;
    const Detection* last = nullptr;
    for (const auto& rec : records) {
        if (!rec.detection) {
            run = 0;
            last = nullptr;
            continue;
        }
        if (last && bbox_iou(last->region, rec.detection->region) > iou_threshold) {
            ++run;
        } else {
            run = 1;
        }
        last = &*rec.detection;
        if (run >= persistence) return *last;
    }
    return std::nullopt;
}

Detection refine_seed_region(const std::vector<FrameDetection>& records,
                             const Detection& seed) {
    const Detection* prev = nullptr;
    for (const auto& rec : records) {
        if (rec.frame_index == seed.frame_index - 1 && rec.detection) {
            prev = &*rec.detection;
            break;
        }
    }
    if (!prev) return seed;

    double cx0, cy0, cx1, cy1, px0, py0, px1, py1;
    seed.region.bounding_box(cx0, cy0, cx1, cy1);
    prev->region.bounding_box(px0, py0, px1, py1);
    const double dx = 0.5 * (cx0 + cx1) - 0.5 * (px0 + px1);
    const double dy = 0.5 * (cy0 + cy1) - 0.5 * (py0 + py1);

    const double fringe = 1.0;
    const double nx0 = cx0 + std::max(dx, 0.0) + fringe;
    const double nx1 = cx1 + std::min(dx, 0.0) - fringe;
    const double ny0 = cy0 + std::max(dy, 0.0) + fringe;
    const double ny1 = cy1 + std::min(dy, 0.0) - fringe;
    if (nx1 - nx0 < 16.0 || ny1 - ny0 < 16.0) return seed;

    Detection refined = seed;
    refined.region = Quad::axis_aligned(nx0, ny0, nx1 - nx0, ny1 - ny0);
    return refined;
}

}  // namespace aerorecog
