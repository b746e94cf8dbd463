#include "aerorecog/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "aerorecog/errors.hpp"
#include "aerorecog/image_io.hpp"

namespace aerorecog {

using nlohmann::json;

SequenceManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestInvalid("cannot open manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ManifestInvalid("manifest " + path.string() + ": " + e.what());
    }
    SequenceManifest m;
    if (!j.contains("frames") || !j["frames"].is_array()) {
        throw ManifestInvalid("manifest missing 'frames' array");
    }
    m.sequence_id = j.value("sequence_id", path.stem().string());
    const auto base = path.parent_path();
    for (const auto& f : j["frames"]) {
        std::filesystem::path p = f.get<std::string>();
        if (p.is_relative()) p = base / p;
        m.frame_paths.push_back(p);
    }
    if (j.contains("metadata") && j["metadata"].is_object()) {
        for (const auto& [k, v] : j["metadata"].items()) {
            m.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    if (m.frame_paths.size() < 2) {
        throw ManifestInvalid("manifest needs at least 2 frames, got " +
                              std::to_string(m.frame_paths.size()));
    }
    for (const auto& p : m.frame_paths) {
        if (!std::filesystem::exists(p)) {
            throw ManifestInvalid("frame file missing: " + p.string());
        }
    }
    return m;
}

void save_manifest(const SequenceManifest& m, const std::filesystem::path& path) {
    json j;
    j["sequence_id"] = m.sequence_id;
    j["frames"] = json::array();
    const auto base = path.parent_path();
    for (const auto& p : m.frame_paths) {
        // stored relative to the manifest when possible, for relocatable trees
        std::error_code ec;
        const auto rel = std::filesystem::relative(p, base, ec);
        j["frames"].push_back((ec || rel.empty()) ? p.string() : rel.string());
    }
    j["metadata"] = json::object();
    for (const auto& [k, v] : m.metadata) j["metadata"][k] = v;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<Image> load_frames(const SequenceManifest& m) {
    std::vector<Image> frames;
    frames.reserve(m.frame_paths.size());
    for (const auto& p : m.frame_paths) {
        frames.push_back(load_image(p));
        if (frames.size() > 1 && (frames.back().width() != frames.front().width() ||
                                  frames.back().height() != frames.front().height())) {
            throw ManifestInvalid("frame dimension mismatch at " + p.string());
        }
    }
    return frames;
}

}  // namespace aerorecog
