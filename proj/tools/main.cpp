// aerorecog: detect, track, and recognize ground targets in aerial image
// sequences. One subcommand per pipeline stage; stages communicate only
// through documented file artifacts, and every run leaves a run.json with
// enough provenance to reproduce it.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "aerorecog/augment.hpp"
#include "aerorecog/config.hpp"
#include "aerorecog/detect.hpp"
#include "aerorecog/errors.hpp"
#include "aerorecog/image_io.hpp"
#include "aerorecog/manifest.hpp"
#include "aerorecog/pipeline.hpp"
#include "aerorecog/recognize.hpp"
#include "aerorecog/subspace.hpp"
#include "aerorecog/synthgen.hpp"
#include "aerorecog/track.hpp"
#include "aerorecog/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aerorecog;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---- logging ---------------------------------------------------------------

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, none = 4 };

LogLevel log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("AERORECOG_LOG");
        std::string v = env ? env : "info";
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "debug") return LogLevel::debug;
        if (v == "warn" || v == "warning") return LogLevel::warn;
        if (v == "error") return LogLevel::error;
        if (v == "none" || v == "off" || v == "quiet") return LogLevel::none;
        return LogLevel::info;
    }();
    return level;
}

void log(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << names[int(level)] << "] " << msg << "\n";
}

// ---- shared plumbing -------------------------------------------------------

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    int jobs = 1;
};

PipelineConfig effective_config(const GlobalArgs& g) {
    PipelineConfig cfg =
        g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

json warp_to_json(const AffineWarp& w) {
    return json(std::vector<double>(w.p.begin(), w.p.end()));
}

AffineWarp warp_from_json(const json& j) {
    if (!j.is_array() || j.size() != 6)
        throw ManifestInvalid("warp must be an array of 6 numbers");
    AffineWarp w;
    for (int i = 0; i < 6; ++i) w.p[size_t(i)] = j[size_t(i)].get<double>();
    return w;
}

json box_of(const Quad& q) {
    double x0, y0, x1, y1;
    q.bounding_box(x0, y0, x1, y1);
    return json::array({x0, y0, x1 - x0, y1 - y0});
}

json quad_to_json(const Quad& q) {
    json out = json::array();
    for (const Point& p : q.corners) out.push_back(json::array({p.x, p.y}));
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

/// Provenance record: configuration hash, hashes of every file input, and
/// tool version. Two runs with equal run.json content (minus output paths)
/// produce equal outputs.
void write_run_record(const fs::path& out_dir, const std::string& command,
                      const PipelineConfig& cfg,
                      const std::vector<fs::path>& input_files,
                      const json& parameters = json::object()) {
    json run;
    run["command"] = command;
    run["version"] = kVersion;
    run["config_hash"] = cfg.hash();
    run["config"] = cfg.serialize();
    run["seed"] = cfg.seed;
    json inputs = json::object();
    for (const fs::path& p : input_files) inputs[p.string()] = hash_file(p);
    run["inputs"] = inputs;
    run["parameters"] = parameters;
    write_text(out_dir / "run.json", run.dump(2) + "\n");
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<fs::path> sorted_dirs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (!token.empty()) {
                try {
                    size_t used = 0;
                    out.push_back(std::stod(token, &used));
                    if (used != token.size()) throw std::invalid_argument(token);
                } catch (const std::exception&) {
                    throw ConfigInvalid("not a number: '" + token + "'");
                }
                token.clear();
            }
        } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
            token += text[i];
        }
    }
    if (out.empty()) throw ConfigInvalid("empty number list");
    return out;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
    int frames = 10;
    int width = 1360, height = 1024;
    int object_width = 96, object_height = 64;
    double object_x = 300, object_y = 260;
    double camera_dx = 1.0, camera_dy = 0.8;
    // apparent step against the registered background is object + camera;
    // both components clear the radius-1 opening with margin
    double object_dx = 3.5, object_dy = 2.8;
    double object_rot = 0.4;   // degrees per frame
    double object_scale = 1.0; // per frame
    double noise = 0.0;
};

int cmd_synth(const GlobalArgs& g, const SynthArgs& a) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out / "frames");

    MotionSpec camera{a.camera_dx, a.camera_dy, 0.0, 1.0};
    MotionSpec object{a.object_dx, a.object_dy, a.object_rot, a.object_scale};
    SceneScript script =
        make_scene(cfg.seed, a.frames, a.width, a.height, a.object_width,
                   a.object_height, Point{a.object_x, a.object_y}, camera, object,
                   a.noise);
    log(LogLevel::info, "rendering " + std::to_string(a.frames) + " frames at " +
                            std::to_string(a.width) + "x" + std::to_string(a.height));
    RenderedScene scene = render(script);

    SequenceManifest manifest;
    manifest.sequence_id = "synth_" + std::to_string(cfg.seed);
    manifest.metadata["resolution"] =
        std::to_string(a.width) + "x" + std::to_string(a.height);
    manifest.metadata["source"] = "synthetic";
    for (int i = 0; i < int(scene.frames.size()); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frames/frame_%03d.png", i);
        save_png(scene.frames[size_t(i)], out / name);
        manifest.frame_paths.push_back(out / name);
    }
    save_manifest(manifest, out / "manifest.json");

    json truth;
    truth["seed"] = cfg.seed;
    truth["frames"] = int(scene.frames.size());
    truth["object_size"] = {a.object_width, a.object_height};
    for (int i = 0; i < int(scene.frames.size()); ++i) {
        truth["object_quads"].push_back(quad_to_json(scene.truth.object_quads[size_t(i)]));
        truth["camera"].push_back(warp_to_json(scene.truth.camera[size_t(i)]));
        truth["object_pose"].push_back(warp_to_json(scene.truth.object_pose[size_t(i)]));
        truth["relative_pose"].push_back(
            warp_to_json(scene.truth.relative_pose[size_t(i)]));
    }
    write_text(out / "truth.json", truth.dump(2) + "\n");

    write_run_record(out, "synth", cfg, {},
                     json{{"frames", a.frames},
                          {"width", a.width},
                          {"height", a.height},
                          {"noise", a.noise}});
    log(LogLevel::info, "wrote " + (out / "manifest.json").string());
    return 0;
}

// ---- detect ----------------------------------------------------------------

int cmd_detect(const GlobalArgs& g, const std::string& manifest_path) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out);

    SequenceManifest manifest = load_manifest(manifest_path);
    std::vector<fs::path> inputs{manifest_path};
    inputs.insert(inputs.end(), manifest.frame_paths.begin(), manifest.frame_paths.end());
    write_run_record(out, "detect", cfg, inputs,
                     json{{"manifest", fs::path(manifest_path).string()}});

    std::vector<Image> frames = load_frames(manifest);
    log(LogLevel::info, "detecting over " + std::to_string(frames.size()) + " frames");
    std::vector<FrameDetection> records = detect_sequence(frames, cfg);

    std::string lines;
    int found = 0;
    for (const FrameDetection& r : records) {
        if (!r.detection) continue;
        json line;
        line["frame"] = r.frame_index;
        line["box"] = box_of(r.detection->region);
        line["area"] = r.detection->area;
        line["score"] = r.detection->score;
        lines += line.dump() + "\n";
        ++found;
    }
    write_text(out / "detections.jsonl", lines);

    std::optional<Detection> seed = debounce_detections(records);
    json summary;
    summary["sequence_id"] = manifest.sequence_id;
    summary["transitions"] = int(records.size());
    summary["detections"] = found;
    if (seed) {
        summary["seed"] = {{"frame", seed->frame_index},
                           {"box", box_of(seed->region)},
                           {"area", seed->area},
                           {"score", seed->score}};
    } else {
        summary["seed"] = nullptr;
    }
    write_text(out / "detect_summary.json", summary.dump(2) + "\n");
    log(LogLevel::info, std::to_string(found) + " detections; seed " +
                            (seed ? "at frame " + std::to_string(seed->frame_index)
                                  : std::string("not found")));
    return 0;
}

// ---- track -----------------------------------------------------------------

int cmd_track(const GlobalArgs& g, const std::string& manifest_path) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out / "templates");

    SequenceManifest manifest = load_manifest(manifest_path);
    std::vector<fs::path> inputs{manifest_path};
    inputs.insert(inputs.end(), manifest.frame_paths.begin(), manifest.frame_paths.end());
    write_run_record(out, "track", cfg, inputs,
                     json{{"manifest", fs::path(manifest_path).string()}});

    std::vector<Image> frames = load_frames(manifest);
    log(LogLevel::info, "tracking over " + std::to_string(frames.size()) + " frames");
    BurstArtifacts art = process_burst(frames, cfg);

    json burst;
    burst["sequence_id"] = manifest.sequence_id;
    if (art.seed) {
        burst["seed_frame"] = art.seed->frame_index;
        burst["seed_box"] = box_of(art.seed->region);
    }
    if (!art.failure.empty()) burst["failure"] = art.failure;
    if (art.track) {
        burst["termination"] = to_string(art.track->termination);
        json templates = json::array();
        for (int i = 0; i < int(art.track->templates.size()); ++i) {
            const TrackedTemplate& t = art.track->templates[size_t(i)];
            char name[48];
            std::snprintf(name, sizeof name, "templates/template_%03d.png", i);
            save_png(t.patch, out / name);
            templates.push_back(json{{"frame", t.source_frame},
                                     {"file", name},
                                     {"pose", warp_to_json(t.pose)}});
        }
        burst["templates"] = templates;
    }
    write_text(out / "track.json", burst.dump(2) + "\n");

    if (!art.track || art.track->templates.empty()) {
        throw EmptyBurst(art.failure.empty() ? "no templates tracked" : art.failure);
    }
    log(LogLevel::info,
        std::to_string(art.track->templates.size()) + " templates, termination: " +
            to_string(art.track->termination));
    return 0;
}

// ---- augment ---------------------------------------------------------------

int cmd_augment(const GlobalArgs& g, const std::string& burst_dir) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    const fs::path in_dir = burst_dir;
    fs::create_directories(out);

    json burst = read_json_file(in_dir / "track.json");
    if (!burst.contains("templates") || burst["templates"].empty())
        throw ManifestInvalid("track.json has no templates");

    std::vector<fs::path> inputs{in_dir / "track.json"};
    for (const auto& t : burst["templates"])
        inputs.push_back(in_dir / t.at("file").get<std::string>());
    write_run_record(out, "augment", cfg, inputs,
                     json{{"burst", in_dir.string()}});

    const bool integral_step =
        std::abs(cfg.rotation_step - std::round(cfg.rotation_step)) < 1e-9;
    json meta;
    meta["rotation_step"] = cfg.rotation_step;
    json tpl_meta = json::array();
    int idx = 0;
    for (const auto& t : burst["templates"]) {
        TrackedTemplate tracked;
        tracked.patch = load_image(in_dir / t.at("file").get<std::string>());
        tracked.source_frame = t.at("frame").get<int>();
        tracked.pose = warp_from_json(t.at("pose"));
        Image base = rewarp_to_initial(tracked);
        ViewSet vs = generate_views(base, cfg.rotation_step);

        char sub[48];
        std::snprintf(sub, sizeof sub, "views/template_%03d", idx);
        fs::create_directories(out / sub);
        json files = json::array();
        for (int k = 0; k < int(vs.views.size()); ++k) {
            char name[64];
            if (integral_step)
                std::snprintf(name, sizeof name, "%s/view_%03d.png", sub,
                              int(std::lround(vs.angles[size_t(k)])));
            else
                std::snprintf(name, sizeof name, "%s/view_%03d.png", sub, k);
            save_png(vs.views[size_t(k)], out / name);
            files.push_back(json{{"angle", vs.angles[size_t(k)]}, {"file", name}});
        }
        tpl_meta.push_back(json{{"source", t.at("file").get<std::string>()},
                                {"frame", tracked.source_frame},
                                {"views", files}});
        ++idx;
    }
    meta["templates"] = tpl_meta;
    write_text(out / "augment.json", meta.dump(2) + "\n");
    log(LogLevel::info, "augmented " + std::to_string(idx) + " templates");
    return 0;
}

// ---- enroll / match --------------------------------------------------------

std::vector<Image> load_view_tree(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .png views under " + dir.string());
    std::vector<Image> views;
    views.reserve(files.size());
    for (const fs::path& f : files) views.push_back(load_image(f));
    return views;
}

int cmd_enroll(const GlobalArgs& g, const std::string& views_dir,
               const std::string& label, const std::string& gallery_dir) {
    const PipelineConfig cfg = effective_config(g);
    fs::create_directories(g.out_dir);

    Gallery gallery;
    const bool existing = fs::exists(fs::path(gallery_dir) / "gallery.json");
    if (existing) {
        gallery = load_gallery(gallery_dir);
        if (gallery.fingerprint != GalleryFingerprint::from_config(cfg))
            throw ConfigMismatch("gallery at " + gallery_dir +
                                 " was built with different settings");
    } else {
        gallery.fingerprint = GalleryFingerprint::from_config(cfg);
    }

    std::vector<Image> views = load_view_tree(views_dir);
    write_run_record(g.out_dir, "enroll", cfg, {},
                     json{{"views", views_dir},
                          {"label", label},
                          {"gallery", gallery_dir},
                          {"n_views", int(views.size())}});
    log(LogLevel::info, "enrolling '" + label + "' from " +
                            std::to_string(views.size()) + " views");
    enroll(gallery, label, views);
    save_gallery(gallery, gallery_dir);
    log(LogLevel::info, "gallery now has " + std::to_string(gallery.size()) + " entries");
    return 0;
}

json report_to_json(const MatchReport& r) {
    json ranking = json::array();
    for (const auto& [label, sim] : r.ranking)
        ranking.push_back(json{{"label", label}, {"similarity", sim}});
    return json{{"query_id", r.query_id},
                {"decision", r.decision},
                {"tie", r.tie},
                {"ranking", ranking}};
}

int cmd_match(const GlobalArgs& g, const std::string& views_dir,
              const std::string& gallery_dir) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out);

    Gallery gallery = load_gallery(gallery_dir);
    std::vector<Image> views = load_view_tree(views_dir);
    write_run_record(out, "match", cfg, {},
                     json{{"views", views_dir}, {"gallery", gallery_dir}});

    MatchReport report =
        identify(gallery, views, fs::path(views_dir).filename().string());
    write_text(out / "match.json", report_to_json(report).dump(2) + "\n");
    log(LogLevel::info, "decision: " + report.decision +
                            (report.tie ? " (tie, lexicographic)" : ""));
    std::cout << report.decision << "\n";
    return 0;
}

// ---- evaluate / sweep ------------------------------------------------------

/// Dataset tree: <root>/<label>/<burst_id>/*.png, one directory per burst.
std::vector<TemplateBurst> load_dataset_tree(const fs::path& root) {
    std::vector<TemplateBurst> dataset;
    for (const fs::path& label_dir : sorted_dirs(root)) {
        const std::string label = label_dir.filename().string();
        for (const fs::path& burst_dir : sorted_dirs(label_dir)) {
            TemplateBurst burst;
            burst.label = label;
            burst.burst_id = label + "/" + burst_dir.filename().string();
            for (const fs::path& f : sorted_files(burst_dir, ".png"))
                burst.templates.push_back(load_image(f));
            if (!burst.templates.empty()) dataset.push_back(std::move(burst));
        }
    }
    if (dataset.empty()) throw IoError("no bursts under " + root.string());
    return dataset;
}

struct EvalArgs {
    std::string data_dir;  // empty: synthesize the fixture
    int targets = 6;
    int bursts = 5;
};

std::vector<TemplateBurst> acquire_dataset(const GlobalArgs& g, const EvalArgs& a,
                                           const PipelineConfig& cfg, json& source) {
    if (!a.data_dir.empty()) {
        source = json{{"data", a.data_dir}};
        return load_dataset_tree(a.data_dir);
    }
    source = json{{"fixture",
                   {{"seed", cfg.seed}, {"targets", a.targets}, {"bursts", a.bursts}}}};
    log(LogLevel::info, "rendering fixture: " + std::to_string(a.targets) +
                            " targets x " + std::to_string(a.bursts) + " bursts");
    RecognitionFixture fx = make_recognition_fixture(cfg.seed, a.targets, a.bursts);
    FixtureDataset ds = build_fixture_dataset(fx, cfg, g.jobs);
    for (const std::string& d : ds.dropped) log(LogLevel::warn, "dropped " + d);
    log(LogLevel::info, std::to_string(ds.bursts.size()) + " bursts tracked, " +
                            std::to_string(ds.dropped.size()) + " dropped");
    return ds.bursts;
}

json dataset_summary(const std::vector<TemplateBurst>& dataset) {
    json bursts = json::array();
    for (const TemplateBurst& b : dataset)
        bursts.push_back(json{{"id", b.burst_id},
                              {"label", b.label},
                              {"templates", int(b.templates.size())}});
    return json{{"n_bursts", int(dataset.size())}, {"bursts", bursts}};
}

int cmd_evaluate(const GlobalArgs& g, const EvalArgs& a) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out);

    json source;
    std::vector<TemplateBurst> dataset = acquire_dataset(g, a, cfg, source);
    write_run_record(out, "evaluate", cfg, {}, source);
    write_text(out / "dataset.json", dataset_summary(dataset).dump(2) + "\n");

    log(LogLevel::info, "leave-one-burst-out over " +
                            std::to_string(dataset.size()) + " bursts");
    EvaluationResult result = leave_one_burst_out(dataset, cfg);

    write_text(out / "confusion.csv", result.confusion.to_csv());
    write_text(out / "confusion.json", result.confusion.to_json() + "\n");
    json reports = json::array();
    for (const MatchReport& r : result.reports) reports.push_back(report_to_json(r));
    write_text(out / "reports.json", json{{"reports", reports}}.dump(2) + "\n");

    char rate[32];
    std::snprintf(rate, sizeof rate, "%.1f%%", 100.0 * result.rank1_rate);
    log(LogLevel::info, "rank-1 rate: " + std::string(rate));
    std::cout << result.confusion.to_csv();
    return 0;
}

int cmd_sweep(const GlobalArgs& g, const EvalArgs& a, const std::string& fractions_text,
              const std::string& seeds_text) {
    const PipelineConfig cfg = effective_config(g);
    const fs::path out = g.out_dir;
    fs::create_directories(out);

    std::vector<double> fractions = parse_number_list(fractions_text);
    std::vector<std::uint64_t> seeds;
    for (double s : parse_number_list(seeds_text)) {
        if (s < 0 || s != std::floor(s))
            throw ConfigInvalid("sweep seeds must be non-negative integers");
        seeds.push_back(std::uint64_t(s));
    }

    json source;
    std::vector<TemplateBurst> dataset = acquire_dataset(g, a, cfg, source);
    source["fractions"] = fractions;
    source["sweep_seeds"] = seeds;
    write_run_record(out, "sweep", cfg, {}, source);
    write_text(out / "dataset.json", dataset_summary(dataset).dump(2) + "\n");

    log(LogLevel::info, "sweeping " + std::to_string(fractions.size()) +
                            " fractions x " + std::to_string(seeds.size()) + " seeds");
    std::vector<SweepPoint> curve = data_reduction_sweep(dataset, cfg, fractions, seeds);

    write_text(out / "sweep.csv", sweep_to_csv(curve));
    json points = json::array();
    for (const SweepPoint& p : curve)
        points.push_back(json{{"fraction_removed", p.fraction_removed},
                              {"recognition_rate", p.recognition_rate},
                              {"per_seed_rates", p.per_seed_rates}});
    write_text(out / "sweep.json", json{{"points", points}}.dump(2) + "\n");
    std::cout << sweep_to_csv(curve);
    return 0;
}

// ---- entry -----------------------------------------------------------------

int exit_code_for(const Error& e) {
    if (e.code() == "ConfigInvalid") return 2;
    if (e.code() == "ManifestInvalid") return 3;
    return 1;
}

void emit_error(const std::string& code, const std::string& message,
                const std::string& stage) {
    json j{{"error", code}, {"message", message}, {"stage", stage}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aerial ground-target detection, tracking, and recognition"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "pipeline config file (key=value lines)");
    std::int64_t seed_arg = -1;
    app.add_option("--seed", seed_arg, "override the config seed");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for stage-internal parallelism")
        ->capture_default_str();

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "render a synthetic scene");
    synth->add_option("--frames", synth_args.frames)->capture_default_str();
    synth->add_option("--width", synth_args.width)->capture_default_str();
    synth->add_option("--height", synth_args.height)->capture_default_str();
    synth->add_option("--object-width", synth_args.object_width)->capture_default_str();
    synth->add_option("--object-height", synth_args.object_height)->capture_default_str();
    synth->add_option("--object-x", synth_args.object_x)->capture_default_str();
    synth->add_option("--object-y", synth_args.object_y)->capture_default_str();
    synth->add_option("--camera-dx", synth_args.camera_dx)->capture_default_str();
    synth->add_option("--camera-dy", synth_args.camera_dy)->capture_default_str();
    synth->add_option("--object-dx", synth_args.object_dx)->capture_default_str();
    synth->add_option("--object-dy", synth_args.object_dy)->capture_default_str();
    synth->add_option("--object-rot", synth_args.object_rot,
                      "object rotation, degrees per frame")
        ->capture_default_str();
    synth->add_option("--object-scale", synth_args.object_scale,
                      "object scale factor per frame")
        ->capture_default_str();
    synth->add_option("--noise", synth_args.noise, "additive Gaussian noise sigma")
        ->capture_default_str();

    std::string manifest_path;
    CLI::App* detect = app.add_subcommand("detect", "detect a moving target");
    detect->add_option("--manifest", manifest_path, "sequence manifest JSON")
        ->required();

    CLI::App* track = app.add_subcommand("track", "detect and track one burst");
    track->add_option("--manifest", manifest_path, "sequence manifest JSON")->required();

    std::string burst_dir;
    CLI::App* augment = app.add_subcommand("augment", "synthesize rotational views");
    augment->add_option("--burst", burst_dir, "directory with a track run's outputs")
        ->required();

    std::string views_dir, label, gallery_dir;
    CLI::App* enroll_cmd = app.add_subcommand("enroll", "enroll views as one target");
    enroll_cmd->add_option("--views", views_dir, "directory of view PNGs")->required();
    enroll_cmd->add_option("--label", label, "target label")->required();
    enroll_cmd->add_option("--gallery", gallery_dir, "gallery directory")->required();

    CLI::App* match = app.add_subcommand("match", "identify a query view set");
    match->add_option("--views", views_dir, "directory of query view PNGs")->required();
    match->add_option("--gallery", gallery_dir, "gallery directory")->required();

    EvalArgs eval_args;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "leave-one-burst-out confusion matrix on a burst dataset");
    evaluate->add_option("--data", eval_args.data_dir,
                         "dataset tree label/burst/*.png (default: synthetic fixture)");
    evaluate->add_option("--targets", eval_args.targets, "fixture targets")
        ->capture_default_str();
    evaluate->add_option("--bursts", eval_args.bursts, "fixture bursts per target")
        ->capture_default_str();

    std::string fractions_text = "0,0.1,0.2,0.3,0.4";
    std::string sweep_seeds_text = "1,2,3";
    CLI::App* sweep = app.add_subcommand("sweep", "training-data reduction curve");
    sweep->add_option("--data", eval_args.data_dir,
                      "dataset tree label/burst/*.png (default: synthetic fixture)");
    sweep->add_option("--targets", eval_args.targets)->capture_default_str();
    sweep->add_option("--bursts", eval_args.bursts)->capture_default_str();
    sweep->add_option("--fractions", fractions_text, "comma-separated removal fractions")
        ->capture_default_str();
    sweep->add_option("--sweep-seeds", sweep_seeds_text,
                      "comma-separated subsampling seeds")
        ->capture_default_str();

    std::string stage = "cli";
    try {
        app.parse(argc, argv);
        if (seed_arg >= 0) g.seed = std::uint64_t(seed_arg);
        CLI::App* sub = app.get_subcommands().front();
        stage = sub->get_name();
        if (sub == synth) return cmd_synth(g, synth_args);
        if (sub == detect) return cmd_detect(g, manifest_path);
        if (sub == track) return cmd_track(g, manifest_path);
        if (sub == augment) return cmd_augment(g, burst_dir);
        if (sub == enroll_cmd) return cmd_enroll(g, views_dir, label, gallery_dir);
        if (sub == match) return cmd_match(g, views_dir, gallery_dir);
        if (sub == evaluate) return cmd_evaluate(g, eval_args);
        if (sub == sweep)
            return cmd_sweep(g, eval_args, fractions_text, sweep_seeds_text);
        emit_error("Internal", "unhandled subcommand", stage);
        return 1;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == int(CLI::ExitCodes::Success)) return app.exit(e);
        emit_error("UsageError", e.what(), stage);
        return 2;
    } catch (const Error& e) {
        emit_error(e.code(), e.what(), stage);
        return exit_code_for(e);
    } catch (const std::exception& e) {
        emit_error("Internal", e.what(), stage);
        return 1;
    }
}
