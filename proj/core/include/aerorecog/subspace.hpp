#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aerorecog/image.hpp"

namespace aerorecog {

/// Orthonormal basis of a d-dimensional linear manifold of vectorized
/// patches. The sample mean is stored for provenance but takes no part in
/// matching, which compares the manifolds themselves.
struct Subspace {
    Eigen::MatrixXd basis;  // ambient x d, column-orthonormal
    Eigen::VectorXd mean;   // ambient, may be empty
    double energy = 0.0;    // retained variance fraction target

    int ambient() const { return int(basis.rows()); }
    int dimension() const { return int(basis.cols()); }

    /// Max |B^T B - I| entry; the class invariant keeps this under 1e-8.
    double orthonormality_error() const;
};

/// Vectorize images (row-major) into the columns of an ambient x n matrix.
Eigen::MatrixXd images_to_columns(const std::vector<Image>& samples);

/// Principal directions of the mean-centered sample cloud: SVD of the
/// centered data matrix, keeping the smallest d whose cumulative squared
/// singular values reach `energy` of the total, capped at d_max.
/// Throws InsufficientSamples (<2 samples), AmbientMismatch (ragged sizes),
/// RankDeficient (all singular values below 1e-12).
Subspace estimate_subspace(const std::vector<Image>& samples, double energy = 0.95,
                           int d_max = 10);

/// Same, for data already in column form.
Subspace estimate_subspace_cols(const Eigen::MatrixXd& data, double energy, int d_max);

/// Spectral core shared by all estimators: eigenpairs of a mean-centered
/// Gram matrix (descending) plus the dimension chosen for the energy
/// target. Exact for small Grams, seeded randomized subspace iteration
/// beyond 512 columns. Throws RankDeficient when the spectrum is null.
struct GramSpectrum {
    Eigen::VectorXd values;   // descending eigenvalues (squared singular values)
    Eigen::MatrixXd vectors;  // matching Gram-side eigenvectors
    int d = 0;                // chosen dimension, in [1, d_max]
};
GramSpectrum analyze_centered_gram(const Eigen::MatrixXd& centered_gram, double energy,
                                   int d_max);

/// In-place thin-QR scrub restoring column orthonormality without moving
/// the span.
void orthonormalize_columns(Eigen::MatrixXd& m);

struct CanonicalCorrelations {
    std::vector<double> cosines;        // descending, clamped to [0,1]
    Eigen::MatrixXd left_vectors;       // ambient x d', filled on request
    Eigen::MatrixXd right_vectors;
};

/// Cosines of the principal angles between two subspaces: the singular
/// values of A^T B, an O(d^3) computation in the subspace dimensions.
/// Canonical vector pairs are recovered from the SVD factors when
/// want_vectors is set. Throws AmbientMismatch.
CanonicalCorrelations canonical_correlations(const Subspace& a, const Subspace& b,
                                             bool want_vectors = false);

/// Mean of the t largest cosines (t clamped to the available count).
double similarity(const CanonicalCorrelations& c, int t = 3);

// ---- persistence ("SSB1") -------------------------------------------------
//
// 8-byte magic "SSB1\0\0\0\0", a 4-byte little-endian header length, a JSON
// header (ambient, d, energy, has_mean, source, creator), then the basis and
// mean as little-endian 64-bit floats, column-major.

void save_subspace(const Subspace& s, const std::filesystem::path& path,
                   const std::string& source_id,
                   const std::map<std::string, std::string>& extra = {});

struct LoadedSubspace {
    Subspace subspace;
    std::string source_id;
    std::map<std::string, std::string> header;
};

/// Throws IoError on bad magic, malformed header, or truncated payload.
LoadedSubspace load_subspace(const std::filesystem::path& path);

}  // namespace aerorecog
