#include "aerorecog/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "aerorecog/errors.hpp"

namespace aerorecog {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, n);
    pool.reserve(size_t(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

BurstArtifacts process_burst(const std::vector<Image>& frames, const PipelineConfig& cfg) {
    BurstArtifacts out;
    try {
        out.detections = detect_sequence(frames, cfg);
    } catch (const Error& e) {
        out.failure = std::string("detection failed: ") + e.what();
        return out;
    }
    out.seed = debounce_detections(out.detections);
    if (!out.seed) {
        out.failure = "no persistent detection";
        return out;
    }
    out.seed = refine_seed_region(out.detections, *out.seed);
    try {
        out.track = track_burst(frames, *out.seed, cfg);
    } catch (const Error& e) {
        out.failure = std::string("tracking failed: ") + e.what();
        return out;
    }
    for (const TrackedTemplate& t : out.track->templates)
        out.canonical_templates.push_back(rewarp_to_initial(t));
    return out;
}

FixtureDataset build_fixture_dataset(const RecognitionFixture& fx,
                                     const PipelineConfig& cfg, int jobs) {
    struct Slot {
        std::optional<TemplateBurst> burst;
        std::string id;
        std::string failure;
    };
    std::vector<Slot> slots(fx.bursts.size());

    parallel_for(int(fx.bursts.size()), jobs, [&](int i) {
        const FixtureBurst& fb = fx.bursts[size_t(i)];
        Slot& slot = slots[size_t(i)];
        const std::string& label = fx.labels[size_t(fb.target_index)];
        slot.id = label + "/burst_" + std::to_string(fb.burst_index);
        try {
            RenderedScene scene = render(fb.script);
            BurstArtifacts art = process_burst(scene.frames, cfg);
            if (art.canonical_templates.empty()) {
                slot.failure = art.failure.empty() ? "no templates" : art.failure;
                return;
            }
            slot.burst = TemplateBurst{label, slot.id, std::move(art.canonical_templates)};
        } catch (const std::exception& e) {
            slot.failure = e.what();
        }
    });

    FixtureDataset out;
    for (Slot& s : slots) {
        if (s.burst)
            out.bursts.push_back(std::move(*s.burst));
        else
            out.dropped.push_back(s.id + ": " + s.failure);
    }
    return out;
}

}  // namespace aerorecog
