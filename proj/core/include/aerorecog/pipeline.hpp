#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aerorecog/augment.hpp"
#include "aerorecog/detect.hpp"
#include "aerorecog/recognize.hpp"
#include "aerorecog/synthgen.hpp"
#include "aerorecog/track.hpp"

namespace aerorecog {

/// Everything one sequence yields on its way from frames to training data:
/// per-transition detections, the debounced seed, the tracked burst, and the
/// templates re-warped into the burst's initial pose. `failure` is set (and
/// later stages left empty) when no persistent detection appears or tracking
/// cannot complete a single transition.
struct BurstArtifacts {
    std::vector<FrameDetection> detections;
    std::optional<Detection> seed;
    std::optional<BurstResult> track;
    std::vector<Image> canonical_templates;
    std::string failure;
};

BurstArtifacts process_burst(const std::vector<Image>& frames, const PipelineConfig& cfg);

/// The synthetic fixture pushed through detection and tracking, burst by
/// burst (frames are dropped as soon as a burst's templates exist).
struct FixtureDataset {
    std::vector<TemplateBurst> bursts;
    std::vector<std::string> dropped;  // "burst id: reason" for failed bursts
};

FixtureDataset build_fixture_dataset(const RecognitionFixture& fx,
                                     const PipelineConfig& cfg, int jobs = 1);

/// Indexed parallel loop; fn(i) must touch only slot i of any shared state.
/// Serial when jobs <= 1. Rethrows the first worker exception.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace aerorecog
