#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aerorecog/image.hpp"

namespace aerorecog {

/// Ordered frame list for one sequence, read from a JSON manifest:
///
///   { "sequence_id": "...", "frames": ["f0.png", ...],
///     "metadata": {"date": "...", "resolution": "..."} }
///
/// Relative frame paths resolve against the manifest's directory.
struct SequenceManifest {
    std::string sequence_id;
    std::vector<std::filesystem::path> frame_paths;
    std::map<std::string, std::string> metadata;
};

/// Throws ManifestInvalid unless there are >= 2 frames and every file exists.
SequenceManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const SequenceManifest& m, const std::filesystem::path& path);

/// Load every frame; throws ManifestInvalid if dimensions differ.
std::vector<Image> load_frames(const SequenceManifest& m);

}  // namespace aerorecog
