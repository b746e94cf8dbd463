#include "aerorecog/track.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aerorecog/errors.hpp"

namespace aerorecog {

AffineWarp bounding_square_warp(const Quad& region, int out_size) {
    if (out_size < 2) throw DegenerateRegion("output size must be >= 2");
    double x0, y0, x1, y1;
    region.bounding_box(x0, y0, x1, y1);
    const double side = std::max(x1 - x0, y1 - y0);
    if (!(side > 0.0) || !(region.area() > 0.0)) {
        throw DegenerateRegion("region has no extent");
    }
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    const double s = side / double(out_size - 1);
    // (u,v) -> (cx + (u - (T-1)/2) * s, ...)
    AffineWarp w{{s, 0.0, 0.0, s, cx - 0.5 * side, cy - 0.5 * side}};
    return w;
}

namespace {

bool point_in_quad(const Quad& q, double x, double y) {
    double first = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point& a = q.corners[i];
        const Point& b = q.corners[(i + 1) % 4];
        const double cross = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
        if (std::abs(cross) < 1e-12) continue;
        if (first == 0.0) {
            first = cross;
        } else if (first * cross < 0.0) {
            return false;
        }
    }
    return true;
}

template <typename Fn>
void for_each_region_pixel(const Quad& region, Fn&& fn) {
    double x0, y0, x1, y1;
    region.bounding_box(x0, y0, x1, y1);
    const int ix0 = int(std::ceil(x0 - 1e-9));
    const int iy0 = int(std::ceil(y0 - 1e-9));
    const int ix1 = int(std::floor(x1 + 1e-9));
    const int iy1 = int(std::floor(y1 + 1e-9));
    for (int y = iy0; y <= iy1; ++y) {
        for (int x = ix0; x <= ix1; ++x) {
            if (point_in_quad(region, double(x), double(y))) fn(x, y);
        }
    }
}

struct Normal6 {
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    double residual_sq = 0.0;
    std::size_t in_bounds = 0;
    std::size_t total = 0;

    double mse() const { return in_bounds ? residual_sq / double(in_bounds) : 0.0; }
    double oob_fraction() const {
        return total ? double(total - in_bounds) / double(total) : 0.0;
    }
};

// Forwards-additive system: gradients of the target sampled at the warped
// position, rhs drives I(W(p)) toward the template.
Normal6 assemble_fa(const Image& tpl, const Image& target, const Image& tgx,
                    const Image& tgy, const Quad& region, const AffineWarp& p) {
    Normal6 n;
    for_each_region_pixel(region, [&](int x, int y) {
        ++n.total;
        if (x < 0 || y < 0 || x >= tpl.width() || y >= tpl.height()) return;
        const Point q = p.apply(double(x), double(y));
        bool oob = false;
        const double v = sample_bilinear(target, q.x, q.y, oob);
        if (oob) return;
        ++n.in_bounds;
        const double err = tpl.at(x, y) - v;
        n.residual_sq += err * err;
        const double ix = sample_bilinear(tgx, q.x, q.y);
        const double iy = sample_bilinear(tgy, q.x, q.y);
        const double sd[6] = {ix * x, iy * x, ix * y, iy * y, ix, iy};
        for (int i = 0; i < 6; ++i) {
            for (int j = i; j < 6; ++j) n.H(i, j) += sd[i] * sd[j];
            n.g(i) += sd[i] * err;
        }
    });
    n.H = n.H.selfadjointView<Eigen::Upper>();
    return n;
}

double evaluate_mse(const Image& tpl, const Image& target, const Quad& region,
                    const AffineWarp& p, double& oob_fraction) {
    double sq = 0.0;
    std::size_t in_bounds = 0, total = 0;
    for_each_region_pixel(region, [&](int x, int y) {
        ++total;
        if (x < 0 || y < 0 || x >= tpl.width() || y >= tpl.height()) return;
        const Point q = p.apply(double(x), double(y));
        bool oob = false;
        const double v = sample_bilinear(target, q.x, q.y, oob);
        if (oob) return;
        ++in_bounds;
        const double err = tpl.at(x, y) - v;
        sq += err * err;
    });
    oob_fraction = total ? double(total - in_bounds) / double(total) : 1.0;
    return in_bounds ? sq / double(in_bounds) : std::numeric_limits<double>::infinity();
}

Eigen::Matrix<double, 6, 1> solve_checked(const Eigen::Matrix<double, 6, 6>& H,
                                          const Eigen::Matrix<double, 6, 1>& g,
                                          double condition_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(H);
    const auto& ev = eig.eigenvalues();
    const double lmax = ev(5);
    const double lmin = ev(0);
    if (!(lmax > 0.0) || lmin <= 0.0 || lmax / lmin > condition_limit) {
        throw SingularHessian("normal equations condition number above limit");
    }
    return eig.eigenvectors() * (eig.eigenvectors().transpose() * g).cwiseQuotient(ev);
}

Quad scale_quad(const Quad& q, double s) {
    Quad out = q;
    for (auto& c : out.corners) {
        c.x *= s;
        c.y *= s;
    }
    return out;
}

AffineWarp scale_warp(const AffineWarp& w, double s) {
    // conjugation by the coordinate scaling: linear part unchanged
    AffineWarp out = w;
    out.p[4] *= s;
    out.p[5] *= s;
    return out;
}

AffineWarp delta_to_warp(const std::array<double, 6>& d, double scale) {
    return AffineWarp{{1.0 + scale * d[0], scale * d[1], scale * d[2], 1.0 + scale * d[3],
                       scale * d[4], scale * d[5]}};
}

}  // namespace

LkStepResult lk_step(const Image& tpl, const Image& target, const Quad& region,
                     const AffineWarp& p, double condition_limit) {
    if (std::abs(p.det()) < 1e-12) throw SingularWarp("lk_step: degenerate warp");
    auto [gx, gy] = gradient(target);
    const Normal6 n = assemble_fa(tpl, target, gx, gy, region, p);
    const Eigen::Matrix<double, 6, 1> delta = solve_checked(n.H, n.g, condition_limit);
    LkStepResult out;
    for (int i = 0; i < 6; ++i) out.delta_p[std::size_t(i)] = delta(i);
    out.residual = n.mse();
    out.oob_fraction = n.oob_fraction();
    return out;
}

std::vector<SdSample> steepest_descent_rows(const Image& target, const Quad& region,
                                            const AffineWarp& p) {
    auto [gx, gy] = gradient(target);
    std::vector<SdSample> rows;
    for_each_region_pixel(region, [&](int x, int y) {
        const Point q = p.apply(double(x), double(y));
        bool oob = false;
        sample_bilinear(target, q.x, q.y, oob);
        if (oob) return;
        const double ix = sample_bilinear(gx, q.x, q.y);
        const double iy = sample_bilinear(gy, q.x, q.y);
        rows.push_back({double(x), double(y),
                        {ix * x, iy * x, ix * y, iy * y, ix, iy}});
    });
    return rows;
}

AlignResult lk_align(const Image& tpl, const Image& target, const Quad& region,
                     const AffineWarp& p0, const LkOptions& options) {
    if (std::abs(p0.det()) < 1e-12) throw SingularWarp("lk_align: degenerate p0");

    const std::vector<Image> tpl_pyr = build_pyramid(tpl, options.pyramid_levels);
    const std::vector<Image> tgt_pyr = build_pyramid(target, options.pyramid_levels);
    const int levels = int(std::min(tpl_pyr.size(), tgt_pyr.size()));

    AlignResult res;
    res.warp = scale_warp(p0, std::pow(0.5, levels - 1));
    int total_iters = 0;

    for (int level = levels - 1; level >= 0; --level) {
        const Image& t = tpl_pyr[level];
        const Image& m = tgt_pyr[level];
        const double s = std::pow(0.5, level);
        const Quad reg = scale_quad(region, s);
        auto [mgx, mgy] = gradient(m);

        // inverse-compositional: the system matrix is built once per level
        // from the template gradients
        Eigen::Matrix<double, 6, 6> ic_H;
        std::vector<SdSample> ic_rows;
        if (options.method == LkMethod::inverse_compositional) {
            auto [tgx2, tgy2] = gradient(t);
            ic_H.setZero();
            for_each_region_pixel(reg, [&](int x, int y) {
                if (x < 0 || y < 0 || x >= t.width() || y >= t.height()) return;
                const double ix = tgx2.at(x, y);
                const double iy = tgy2.at(x, y);
                SdSample row{double(x), double(y), {ix * x, iy * x, ix * y, iy * y, ix, iy}};
                for (int i = 0; i < 6; ++i) {
                    for (int j = i; j < 6; ++j) ic_H(i, j) += row.sd[std::size_t(i)] * row.sd[std::size_t(j)];
                }
                ic_rows.push_back(row);
            });
            ic_H = ic_H.selfadjointView<Eigen::Upper>();
        }

        bool level_converged = false;
        double oobf = 0.0;
        double current = evaluate_mse(t, m, reg, res.warp, oobf);

        for (int iter = 0; iter < options.max_iterations; ++iter) {
            std::array<double, 6> delta{};
            if (options.method == LkMethod::forwards_additive) {
                const Normal6 n = assemble_fa(t, m, mgx, mgy, reg, res.warp);
                if (n.in_bounds < 12) break;
                const auto d = solve_checked(n.H, n.g, options.condition_limit);
                for (int i = 0; i < 6; ++i) delta[std::size_t(i)] = d(i);
            } else {
                Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
                std::size_t in_bounds = 0;
                for (const auto& row : ic_rows) {
                    const Point q = res.warp.apply(row.x, row.y);
                    bool oob = false;
                    const double v = sample_bilinear(m, q.x, q.y, oob);
                    if (oob) continue;
                    ++in_bounds;
                    const double err = v - t.at(int(row.x), int(row.y));
                    for (int i = 0; i < 6; ++i) g(i) += row.sd[std::size_t(i)] * err;
                }
                if (in_bounds < 12) break;
                const auto d = solve_checked(ic_H, g, options.condition_limit);
                for (int i = 0; i < 6; ++i) delta[std::size_t(i)] = d(i);
            }

            // step halving keeps the residual non-increasing
            bool accepted = false;
            double scale = 1.0;
            for (int halving = 0; halving <= options.max_halvings; ++halving) {
                AffineWarp cand;
                if (options.method == LkMethod::forwards_additive) {
                    cand = res.warp;
                    for (int i = 0; i < 6; ++i) cand.p[std::size_t(i)] += scale * delta[std::size_t(i)];
                } else {
                    AffineWarp dw = delta_to_warp(delta, scale);
                    if (std::abs(dw.det()) < 1e-12) break;
                    cand = compose(res.warp, invert(dw));
                }
                double cand_oob = 0.0;
                const double cand_mse = evaluate_mse(t, m, reg, cand, cand_oob);
                if (cand_mse <= current + 1e-15) {
                    res.warp = cand;
                    current = cand_mse;
                    oobf = cand_oob;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!accepted) {
                // No admissible step decreases the residual: the iterate is
                // pinned. If even the smallest tried step moves every corner
                // less than the tolerance, the displacement criterion holds
                // at this resolution; otherwise give up on the level (a finer
                // one may recover).
                std::array<double, 6> finest{};
                for (int i = 0; i < 6; ++i)
                    finest[std::size_t(i)] = 2.0 * scale * delta[std::size_t(i)];
                level_converged =
                    max_corner_displacement(finest, reg) < options.corner_tolerance;
                break;
            }
            ++total_iters;

            std::array<double, 6> applied{};
            for (int i = 0; i < 6; ++i) applied[std::size_t(i)] = scale * delta[std::size_t(i)];
            if (max_corner_displacement(applied, reg) < options.corner_tolerance) {
                level_converged = true;
                break;
            }
        }

        if (level > 0) {
            res.warp = scale_warp(res.warp, 2.0);
        } else {
            res.iterations = total_iters;
            res.residual = current;
            res.oob_fraction = oobf;
            res.converged = level_converged && current <= options.residual_cap;
        }
    }
    return res;
}

const char* to_string(BurstTermination t) {
    switch (t) {
        case BurstTermination::end_of_sequence: return "end_of_sequence";
        case BurstTermination::alignment_failed: return "alignment_failed";
        case BurstTermination::residual_exceeded: return "residual_exceeded";
        case BurstTermination::left_view: return "left_view";
    }
    return "unknown";
}

BurstResult track_burst(const std::vector<Image>& frames, const Detection& seed,
                        const PipelineConfig& cfg) {
    const int k = seed.frame_index;
    if (k < 0 || std::size_t(k) >= frames.size()) {
        throw EmptyBurst("seed frame outside the sequence");
    }

    const Quad region = seed.region;
    double rx0, ry0, rx1, ry1;
    region.bounding_box(rx0, ry0, rx1, ry1);
    const int px0 = int(std::floor(rx0));
    const int py0 = int(std::floor(ry0));
    const int pw = int(std::ceil(rx1)) - px0 + 1;
    const int ph = int(std::ceil(ry1)) - py0 + 1;
    if (pw < 8 || ph < 8) throw EmptyBurst("seed region too small to track");

    Quad local = region;
    for (auto& c : local.corners) {
        c.x -= px0;
        c.y -= py0;
    }

    const AffineWarp square0 = bounding_square_warp(region, cfg.template_size);
    const AffineWarp square0_inv = invert(square0);

    LkOptions lk = LkOptions::from_config(cfg);

    BurstResult burst;
    burst.seed_frame = k;

    auto make_template = [&](int frame_idx, const AffineWarp& cumulative) {
        const Quad warped = apply(cumulative, region);
        const AffineWarp square_i = bounding_square_warp(warped, cfg.template_size);
        TrackedTemplate t;
        t.patch = warp_image(frames[std::size_t(frame_idx)], square_i, cfg.template_size,
                             cfg.template_size);
        t.source_frame = frame_idx;
        // patch-local pose: start-patch grid -> current-patch grid
        t.pose = compose(invert(square_i), compose(cumulative, square0));
        // tiny numeric drift in the frame-0 pose is forced to exact identity
        if (frame_idx == k) t.pose = AffineWarp::identity();
        burst.templates.push_back(std::move(t));
        (void)square0_inv;
    };

    AffineWarp cumulative;  // frame-k coords -> current frame coords
    burst.states.push_back(TrackState{region, cumulative, k, 0.0});
    make_template(k, cumulative);

    for (std::size_t next = std::size_t(k) + 1; next < frames.size(); ++next) {
        // previous frame's tracked appearance, resampled on the seed grid
        const AffineWarp grid_to_prev =
            compose(cumulative, AffineWarp::translation(px0, py0));
        Image tracked_tpl = warp_image(frames[next - 1], grid_to_prev, pw, ph);

        AlignResult aligned;
        try {
            aligned = lk_align(tracked_tpl, frames[next], local, grid_to_prev, lk);
        } catch (const SingularHessian&) {
            if (burst.templates.size() <= 1) throw EmptyBurst("first transition failed");
            burst.termination = BurstTermination::alignment_failed;
            return burst;
        }

        BurstTermination reason = BurstTermination::end_of_sequence;
        bool ok = true;
        if (aligned.oob_fraction > 0.10) {
            ok = false;
            reason = BurstTermination::left_view;
        } else if (!aligned.converged) {
            ok = false;
            reason = aligned.residual > lk.residual_cap ? BurstTermination::residual_exceeded
                                                        : BurstTermination::alignment_failed;
        }
        if (!ok) {
            if (burst.templates.size() <= 1) {
                throw EmptyBurst(std::string("first transition failed: ") + to_string(reason));
            }
            burst.termination = reason;
            return burst;
        }

        cumulative = compose(aligned.warp, AffineWarp::translation(-px0, -py0));
        burst.states.push_back(
            TrackState{region, cumulative, int(next), aligned.residual});
        make_template(int(next), cumulative);
    }
    burst.termination = BurstTermination::end_of_sequence;
    return burst;
}

}  // namespace aerorecog
