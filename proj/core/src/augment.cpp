#include "aerorecog/augment.hpp"

#include <cmath>
#include <numbers>

#include "aerorecog/errors.hpp"

namespace aerorecog {

Image rewarp_to_initial(const TrackedTemplate& t) {
    if (std::abs(t.pose.det()) < 1e-12) {
        throw SingularWarp("rewarp_to_initial: degenerate pose");
    }
    return warp_image(t.patch, t.pose, t.patch.width(), t.patch.height());
}

Image normalize_scale(const Image& patch, const Quad& region, int out_size) {
    if (!(region.area() > 0.0)) throw DegenerateRegion("normalize_scale: zero-area region");
    const AffineWarp w = bounding_square_warp(region, out_size);
    return warp_image(patch, w, out_size, out_size);
}

ViewSet generate_views(const Image& base, double step_degrees) {
    if (!(step_degrees > 0.0)) throw InvalidStep("step must be positive");
    const double k = 360.0 / step_degrees;
    if (std::abs(k - std::round(k)) > 1e-9) {
        throw InvalidStep("step " + std::to_string(step_degrees) + " does not divide 360");
    }
    const int n = int(std::llround(k));
    const Point center{(base.width() - 1) / 2.0, (base.height() - 1) / 2.0};

    ViewSet set;
    set.views.reserve(std::size_t(n));
    set.angles.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        const double angle = i * step_degrees;
        // sampling grid rotated by -angle rotates the content by +angle
        const AffineWarp w =
            AffineWarp::rotation(-angle * std::numbers::pi / 180.0, center);
        set.views.push_back(warp_image(base, w, base.width(), base.height()));
        set.angles.push_back(angle);
    }
    return set;
}

std::vector<ViewSet> augment_burst(const BurstResult& burst, const PipelineConfig& cfg,
                                   const std::string& burst_id) {
    std::vector<ViewSet> sets;
    sets.reserve(burst.templates.size());
    for (const TrackedTemplate& t : burst.templates) {
        const Image canonical = rewarp_to_initial(t);
        ViewSet set = generate_views(canonical, cfg.rotation_step);
        set.source_burst = burst_id;
        sets.push_back(std::move(set));
    }
    return sets;
}

}  // namespace aerorecog
