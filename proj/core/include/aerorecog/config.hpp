#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace aerorecog {

enum class LkMethod { forwards_additive, inverse_compositional };

/// Every pipeline tunable with its default. Parsed from a flat key=value
/// text file ('#' comments allowed); unknown keys are rejected with
/// ConfigInvalid, as is any value outside its documented range.
struct PipelineConfig {
    // detect
    double diff_threshold = 0.12;   // (0,1), on [0,1] intensities
    int morph_radius = 1;           // >= 1
    int min_area = 100;             // px^2, >= 1
    int registration_dof = 4;       // 4 (similarity) or 6 (full affine)

    // track
    int lk_max_iterations = 30;     // >= 1
    int pyramid_levels = 3;         // >= 1
    double corner_tolerance = 0.05; // px, > 0
    double residual_cap = 0.01;     // mean squared intensity error, > 0
    LkMethod lk_method = LkMethod::forwards_additive;

    // augment
    int template_size = 100;        // px, >= 16
    double rotation_step = 10.0;    // degrees, > 0, must divide 360

    // subspace / recognize
    double energy = 0.95;           // (0,1]
    int d_max = 10;                 // >= 1
    int similarity_t = 3;           // >= 1

    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigInvalid

    /// Canonical key=value serialization (sorted keys, full precision).
    std::string serialize() const;

    /// FNV-1a hash of serialize(), hex-encoded. Recorded in run.json and in
    /// gallery fingerprints.
    std::string hash() const;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit over raw bytes, hex-encoded. Used for artifact provenance.
std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::filesystem::path& path);

}  // namespace aerorecog
