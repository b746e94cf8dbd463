#pragma once

#include <array>
#include <vector>

#include "aerorecog/config.hpp"
#include "aerorecog/detect.hpp"
#include "aerorecog/image.hpp"
#include "aerorecog/warp.hpp"

namespace aerorecog {

/// Similarity transform mapping the T x T output pixel grid onto the
/// bounding square of `region` (centered, side = max bbox extent):
///   frame = center + (u/(T-1) - 0.5) * side
/// Throws DegenerateRegion for empty regions or T < 2.
AffineWarp bounding_square_warp(const Quad& region, int out_size);

struct LkOptions {
    int max_iterations = 30;
    int pyramid_levels = 3;
    double corner_tolerance = 0.05;  // px of induced corner motion
    double residual_cap = 0.01;      // mean squared intensity error
    LkMethod method = LkMethod::forwards_additive;
    int max_halvings = 8;
    double condition_limit = 1e12;

    static LkOptions from_config(const PipelineConfig& cfg) {
        LkOptions o;
        o.max_iterations = cfg.lk_max_iterations;
        o.pyramid_levels = cfg.pyramid_levels;
        o.corner_tolerance = cfg.corner_tolerance;
        o.residual_cap = cfg.residual_cap;
        o.method = cfg.lk_method;
        return o;
    }
};

struct LkStepResult {
    std::array<double, 6> delta_p{};
    double residual = 0.0;       // mean squared error at the *current* p
    double oob_fraction = 0.0;   // region pixels whose sample left the target
};

/// One Gauss-Newton update of the 6 warp parameters: solves the 6x6 normal
/// equations assembled from the steepest-descent images over `region`
/// (integer pixels of the template inside the quad). Out-of-bounds samples
/// are excluded from the system. Throws SingularHessian when the system's
/// condition number exceeds condition_limit.
LkStepResult lk_step(const Image& tpl, const Image& target, const Quad& region,
                     const AffineWarp& p, double condition_limit = 1e12);

struct AlignResult {
    AffineWarp warp;
    bool converged = false;
    int iterations = 0;          // total accepted iterations across levels
    double residual = 0.0;       // final mean squared error
    double oob_fraction = 0.0;
};

/// Full iterative alignment, coarse-to-fine. Converged means the corner
/// displacement criterion was met at the finest level and the final residual
/// is at or below residual_cap. A residual increase triggers step halving;
/// when no halving helps the level is abandoned.
AlignResult lk_align(const Image& tpl, const Image& target, const Quad& region,
                     const AffineWarp& p0, const LkOptions& options = {});

/// Per-pixel steepest-descent rows (gradient times warp Jacobian), exposed
/// for derivative checking against finite differences.
struct SdSample {
    double x, y;
    std::array<double, 6> sd;
};
std::vector<SdSample> steepest_descent_rows(const Image& target, const Quad& region,
                                            const AffineWarp& p);

struct TrackState {
    Quad region;                  // seed region in the burst's first frame
    AffineWarp cumulative_warp;   // first-frame coords -> current frame coords
    int frame_index = 0;
    double last_residual = 0.0;
};

struct TrackedTemplate {
    Image patch;          // appearance at the configured template size
    int source_frame = 0;
    /// Patch-coordinate warp mapping the burst-start patch grid onto this
    /// patch's grid; identity for the first frame. Undoing it re-expresses
    /// the patch in the initial pose.
    AffineWarp pose;
};

enum class BurstTermination {
    end_of_sequence,
    alignment_failed,   // lk_align did not converge
    residual_exceeded,  // aligned but appearance error above the cap
    left_view,          // >10% of region pixels sampled out of bounds
};

const char* to_string(BurstTermination t);

struct BurstResult {
    int seed_frame = 0;
    std::vector<TrackedTemplate> templates;  // one per tracked frame
    std::vector<TrackState> states;
    BurstTermination termination = BurstTermination::end_of_sequence;
};

/// Chain lk_align frame to frame starting at the seed detection, matching
/// each frame against the previous frame's tracked appearance. Throws
/// EmptyBurst when even the first transition fails.
BurstResult track_burst(const std::vector<Image>& frames, const Detection& seed,
                        const PipelineConfig& cfg);

}  // namespace aerorecog
