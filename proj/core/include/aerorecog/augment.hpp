#pragma once

#include <string>
#include <vector>

#include "aerorecog/config.hpp"
#include "aerorecog/image.hpp"
#include "aerorecog/track.hpp"

namespace aerorecog {

/// Ordered synthetic rotations of one normalized patch; angles[k] is the
/// rotation of views[k] in degrees, multiples of the generating step.
struct ViewSet {
    std::vector<Image> views;
    std::vector<double> angles;
    std::string source_burst;
};

/// Undo the template's cumulative pose so every patch of a burst is
/// expressed in the pose of the burst's first frame. Throws SingularWarp
/// on a degenerate pose.
Image rewarp_to_initial(const TrackedTemplate& t);

/// Warp the region content to out_size x out_size through the similarity
/// mapping the region's bounding square to the output square.
Image normalize_scale(const Image& patch, const Quad& region, int out_size = 100);

/// Rotate `base` about its center by every multiple of step_degrees in
/// [0,360), bilinear resampling with clamped borders. Throws InvalidStep
/// when the step does not divide 360.
ViewSet generate_views(const Image& base, double step_degrees);

/// Re-warp every tracked template of a burst and expand each into its
/// synthetic rotation set.
std::vector<ViewSet> augment_burst(const BurstResult& burst, const PipelineConfig& cfg,
                                   const std::string& burst_id = "");

}  // namespace aerorecog
