#include "aerorecog/subspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "aerorecog/errors.hpp"

namespace aerorecog {

namespace {

// Above this many samples the exact n x n eigendecomposition of the Gram
// matrix gives way to seeded randomized subspace iteration.
constexpr int kExactGramLimit = 512;
constexpr double kNullSingularValue = 1e-12;

// Eigenpairs of the centered Gram matrix, descending. Only the leading
// `want` pairs are trusted on the randomized path.
struct GramEig {
    Eigen::VectorXd values;   // descending, >= 0 up to roundoff
    Eigen::MatrixXd vectors;  // n x m, columns match values
};

GramEig gram_eig_exact(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const int n = int(gram.rows());
    GramEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {  // ascending -> descending
        out.values[i] = eig.eigenvalues()[n - 1 - i];
        out.vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
    return out;
}

GramEig gram_eig_randomized(const Eigen::MatrixXd& gram, int want) {
    const int n = int(gram.rows());
    const int k = std::min(n, want + 8);  // oversampling absorbs slow decay
    std::mt19937_64 rng(0x5ca1ab1edeadbeefULL);  // fixed: estimation is deterministic
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd omega(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) omega(i, j) = gauss(rng);

    Eigen::MatrixXd y = gram * omega;
    for (int pass = 0; pass < 8; ++pass) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
        y = gram * q;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);

    Eigen::MatrixXd small = q.transpose() * gram * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small);
    GramEig out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        out.values[i] = eig.eigenvalues()[k - 1 - i];
        out.vectors.col(i) = q * eig.eigenvectors().col(k - 1 - i);
    }
    return out;
}

}  // namespace

double Subspace::orthonormality_error() const {
    if (basis.cols() == 0) return 0.0;
    Eigen::MatrixXd g = basis.transpose() * basis;
    g -= Eigen::MatrixXd::Identity(basis.cols(), basis.cols());
    return g.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd images_to_columns(const std::vector<Image>& samples) {
    if (samples.empty()) return {};
    const int N = samples.front().width() * samples.front().height();
    Eigen::MatrixXd data(N, long(samples.size()));
    for (size_t j = 0; j < samples.size(); ++j) {
        const Image& img = samples[j];
        if (img.width() != samples.front().width() ||
            img.height() != samples.front().height())
            throw AmbientMismatch("sample " + std::to_string(j) + " differs in size");
        for (int i = 0; i < N; ++i) data(i, long(j)) = img.data()[size_t(i)];
    }
    return data;
}

Subspace estimate_subspace(const std::vector<Image>& samples, double energy, int d_max) {
    if (samples.size() < 2)
        throw InsufficientSamples(
                    "need at least 2 samples, got " + std::to_string(samples.size()));
    return estimate_subspace_cols(images_to_columns(samples), energy, d_max);
}

GramSpectrum analyze_centered_gram(const Eigen::MatrixXd& centered_gram, double energy,
                                   int d_max) {
    if (!(energy > 0.0) || energy > 1.0)
        throw ConfigInvalid("energy must lie in (0, 1]");
    if (d_max < 1) throw ConfigInvalid("d_max must be positive");
    const int n = int(centered_gram.rows());

    Eigen::MatrixXd gram = 0.5 * (centered_gram + centered_gram.transpose());
    const double total = gram.trace();

    GramEig eig = n <= kExactGramLimit ? gram_eig_exact(gram)
                                       : gram_eig_randomized(gram, d_max);

    const double null_floor = kNullSingularValue * kNullSingularValue;
    if (eig.values.size() == 0 || eig.values[0] < null_floor)
        throw RankDeficient("all singular values below 1e-12");

    // Smallest d reaching the energy target; a hair of slack keeps exact
    // ratios (e.g. asking for precisely the planar fraction) from spilling
    // into an extra dimension through roundoff.
    const double target = energy * total * (1.0 - 1e-9);
    int d = 0;
    double cum = 0.0;
    while (d < int(eig.values.size()) && d < d_max) {
        if (eig.values[d] < null_floor) break;  // numerically null direction
        cum += eig.values[d];
        ++d;
        if (cum >= target) break;
    }

    GramSpectrum out;
    out.d = std::max(d, 1);
    out.values = eig.values;
    out.vectors = eig.vectors;
    return out;
}

void orthonormalize_columns(Eigen::MatrixXd& m) {
    if (m.cols() == 0) return;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    m = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Subspace estimate_subspace_cols(const Eigen::MatrixXd& data, double energy, int d_max) {
    const int n = int(data.cols());
    if (n < 2)
        throw InsufficientSamples(
                    "need at least 2 samples, got " + std::to_string(n));

    Eigen::VectorXd mean = data.rowwise().mean();
    Eigen::MatrixXd centered = data.colwise() - mean;

    // Gram route: the n x n Gram shares nonzero eigenvalues with the ambient
    // scatter, and left singular vectors follow as X v / sigma.
    GramSpectrum spec = analyze_centered_gram(centered.transpose() * centered, energy, d_max);

    Subspace out;
    out.energy = energy;
    out.mean = mean;
    out.basis.resize(data.rows(), spec.d);
    for (int i = 0; i < spec.d; ++i)
        out.basis.col(i) = centered * spec.vectors.col(i) / std::sqrt(spec.values[i]);
    // A final thin QR scrubs the basis back to orthonormal; the span is
    // untouched and clustered-eigenvalue drift stays below the 1e-8 bound.
    orthonormalize_columns(out.basis);
    return out;
}

CanonicalCorrelations canonical_correlations(const Subspace& a, const Subspace& b,
                                             bool want_vectors) {
    if (a.ambient() != b.ambient())
        throw AmbientMismatch(
                    "ambient dimensions differ: " + std::to_string(a.ambient()) + " vs " +
                        std::to_string(b.ambient()));
    Eigen::MatrixXd m = a.basis.transpose() * b.basis;
    unsigned opts = want_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, opts);

    CanonicalCorrelations out;
    const auto& sv = svd.singularValues();
    out.cosines.resize(size_t(sv.size()));
    for (long i = 0; i < sv.size(); ++i)
        out.cosines[size_t(i)] = std::clamp(sv[i], 0.0, 1.0);  // descending already
    if (want_vectors) {
        out.left_vectors = a.basis * svd.matrixU();
        out.right_vectors = b.basis * svd.matrixV();
    }
    return out;
}

double similarity(const CanonicalCorrelations& c, int t) {
    if (t < 1) throw ConfigInvalid("t must be positive");
    if (c.cosines.empty()) return 0.0;
    const int t_eff = std::min<int>(t, int(c.cosines.size()));
    double sum = 0.0;
    for (int i = 0; i < t_eff; ++i) sum += c.cosines[size_t(i)];
    return sum / t_eff;
}

}  // namespace aerorecog
