#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aerorecog/config.hpp"
#include "aerorecog/image.hpp"
#include "aerorecog/warp.hpp"

namespace aerorecog {

/// One-bit-per-pixel raster with the dimensions of its source image.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(std::size_t(w) * h, 0) {}

    bool get(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[std::size_t(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
};

struct Detection {
    int frame_index = 0;
    Quad region;        // axis-aligned box in frame coordinates
    double area = 0.0;  // component area, px^2
    double score = 0.0; // mean suprathreshold difference over the component
};

struct RegistrationOptions {
    int dof = 4;                 // 4 = translation+rotation+scale, 6 = full affine
    double trim_fraction = 0.2;  // largest residuals discarded per iteration
    int max_iterations = 40;
    int max_stall = 5;
    double corner_tolerance = 0.02;  // px, convergence on induced displacement
    int max_samples_per_level = 120000;
    int pyramid_min_dim = 48;

    static RegistrationOptions from_config(const PipelineConfig& cfg) {
        RegistrationOptions o;
        o.dof = cfg.registration_dof;
        return o;
    }
};

/// Estimate the warp aligning `next` onto `prev` (prev(x,y) ~ next(W(x,y))),
/// coarse-to-fine, minimizing a trimmed sum of squared differences so a small
/// moving object is rejected as an outlier. Throws RegistrationDiverged when
/// the trimmed residual stalls for max_stall consecutive iterations.
AffineWarp register_global(const Image& prev, const Image& next,
                           const RegistrationOptions& options = {});

/// Mask of pixels where |a(x,y) - b(W(x,y;w))| > threshold. Pixels whose
/// warped sample fell out of bounds are forced off.
BinaryMask difference_mask(const Image& a, const Image& b, const AffineWarp& w,
                           double threshold);

/// Morphological opening (erosion then dilation) with a square structuring
/// element of side 2*radius+1. Border treated as off.
BinaryMask morphological_clean(const BinaryMask& m, int radius);

/// Bounding box of the largest 8-connected component, or nullopt when its
/// area is below min_area. `diff` (when given) provides the per-pixel values
/// averaged into Detection::score.
std::optional<Detection> largest_component(const BinaryMask& m, int min_area = 100,
                                           const Image* diff = nullptr);

/// Detection record for the transition into frame `frame_index`; mask and box
/// live in that frame's coordinates.
struct FrameDetection {
    int frame_index;
    std::optional<Detection> detection;
    AffineWarp background_warp;  // aligns the previous frame onto this one
};

/// Run registration + differencing + cleanup + component selection across a
/// sequence. Frame 0 has no record (detection needs a transition).
std::vector<FrameDetection> detect_sequence(const std::vector<Image>& frames,
                                            const PipelineConfig& cfg);

/// First detection that persisted with IoU > iou_threshold over `persistence`
/// consecutive frames; this is the seed handed to tracking. Returns the
/// latest detection of the persistent run.
std::optional<Detection> debounce_detections(const std::vector<FrameDetection>& records,
                                             int persistence = 3,
                                             double iou_threshold = 0.5);

/// Tighten a seed detection's box before tracking. A frame-difference
/// component spans the object's current footprint plus the strip it vacated
/// since the previous frame, so the box overshoots the object by one
/// inter-frame step on the trailing side. The step is estimated from the
/// previous frame's detection and that strip (plus a 1 px threshold fringe)
/// is shaved off; the input is returned untouched when history is missing or
/// the tightened box would be degenerate.
Detection refine_seed_region(const std::vector<FrameDetection>& records,
                             const Detection& seed);

}  // namespace aerorecog
