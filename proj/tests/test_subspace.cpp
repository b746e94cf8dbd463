#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <aerorecog/errors.hpp>
#include <aerorecog/subspace.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

using namespace aerorecog;

namespace {

Image random_image(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(w, h);
    for (double& v : img.data()) v = u(rng);
    return img;
}

Image from_vector(int w, int h, const Eigen::VectorXd& v) {
    Image img(w, h);
    for (int i = 0; i < v.size(); ++i) img.data()[std::size_t(i)] = v(i);
    return img;
}

// Orthonormal test patterns from a QR factorization of a fixed random matrix.
Eigen::MatrixXd patterns(int ambient, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(ambient, count);
    for (int j = 0; j < count; ++j)
        for (int i = 0; i < ambient; ++i) m(i, j) = n(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ()) .leftCols(count);
}

double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return ((a * a.transpose()) - (b * b.transpose())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("images become columns in row-major pixel order") {
    Image a(3, 2);
    Image b(3, 2);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 3; ++x) {
            a.at(x, y) = 10.0 * y + x;
            b.at(x, y) = -double(y * 3 + x);
        }
    }
    const Eigen::MatrixXd m = images_to_columns({a, b});
    REQUIRE(m.rows() == 6);
    REQUIRE(m.cols() == 2);
    const double expect_a[6] = {0, 1, 2, 10, 11, 12};
    for (int i = 0; i < 6; ++i) {
        CHECK(m(i, 0) == doctest::Approx(expect_a[i]));
        CHECK(m(i, 1) == doctest::Approx(-double(i)));
    }
}

TEST_CASE("estimated bases are orthonormal on random clouds") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Image> samples;
        for (int i = 0; i < 24; ++i) samples.push_back(random_image(12, 10, rng));
        const Subspace s = estimate_subspace(samples, 0.95, 10);
        CHECK(s.orthonormality_error() < 1e-8);
        CHECK(s.ambient() == 120);
        CHECK(s.dimension() >= 1);
        CHECK(s.dimension() <= 10);
    }
}

TEST_CASE("full energy recovers the exact dimension of a planted subspace") {
    const int ambient = 64;
    const Eigen::MatrixXd P = patterns(ambient, 3, 42);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(ambient, 0.5);

    std::vector<Image> samples;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd v = mean;
        for (int k = 0; k < 3; ++k) v += (1.0 + 0.5 * k) * n(rng) * P.col(k);
        samples.push_back(from_vector(8, 8, v));
    }

    const Subspace s = estimate_subspace(samples, 1.0, 10);
    CHECK(s.dimension() == 3);
    CHECK(s.orthonormality_error() < 1e-8);

    // the basis reconstructs every centered sample
    const Eigen::MatrixXd data = images_to_columns(samples);
    const Eigen::VectorXd mu = data.rowwise().mean();
    for (int i = 0; i < data.cols(); ++i) {
        const Eigen::VectorXd c = data.col(i) - mu;
        const Eigen::VectorXd r = c - s.basis * (s.basis.transpose() * c);
        CHECK(r.norm() < 1e-8);
    }
}

TEST_CASE("the energy threshold picks the smallest sufficient dimension") {
    const int ambient = 36;
    const Eigen::MatrixXd P = patterns(ambient, 2, 5);
    // coefficients with exact 9:1 variance split and zero cross-correlation
    const double a[4] = {3.0, -3.0, 3.0, -3.0};
    const double b[4] = {1.0, 1.0, -1.0, -1.0};
    std::vector<Image> samples;
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(ambient, 0.2);
        v += a[i] * P.col(0) + b[i] * P.col(1);
        samples.push_back(from_vector(6, 6, v));
    }
    CHECK(estimate_subspace(samples, 0.85, 10).dimension() == 1);
    CHECK(estimate_subspace(samples, 0.95, 10).dimension() == 2);
    CHECK(estimate_subspace(samples, 1.0, 1).dimension() == 1);  // d_max clamp
}

TEST_CASE("degenerate sample sets are rejected") {
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(estimate_subspace({}, 0.95, 10), InsufficientSamples);
    CHECK_THROWS_AS(estimate_subspace({random_image(4, 4, rng)}, 0.95, 10),
                    InsufficientSamples);

    std::vector<Image> ragged{random_image(4, 4, rng), random_image(5, 4, rng)};
    CHECK_THROWS_AS(estimate_subspace(ragged, 0.95, 10), AmbientMismatch);

    const Image constant(6, 6, 0.7);
    std::vector<Image> identical{constant, constant, constant};
    CHECK_THROWS_AS(estimate_subspace(identical, 0.95, 10), RankDeficient);
}

TEST_CASE("image and column estimators agree exactly") {
    std::mt19937_64 rng(19);
    std::vector<Image> samples;
    for (int i = 0; i < 15; ++i) samples.push_back(random_image(7, 6, rng));
    const Subspace si = estimate_subspace(samples, 0.9, 5);
    const Subspace sc = estimate_subspace_cols(images_to_columns(samples), 0.9, 5);
    REQUIRE(si.dimension() == sc.dimension());
    CHECK(projector_distance(si.basis, sc.basis) < 1e-12);
}

TEST_CASE("randomized spectral path agrees with the exact covariance answer") {
    // more than 512 samples switches the Gram analysis to randomized
    // iteration; a small ambient keeps an exact covariance oracle cheap
    const int ambient = 36;
    const int n = 600;
    const Eigen::MatrixXd P = patterns(ambient, 4, 77);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);

    Eigen::MatrixXd data(ambient, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(ambient, 0.3);
        for (int k = 0; k < 4; ++k) v += (4.0 - k) * g(rng) * P.col(k);
        for (int r = 0; r < ambient; ++r) v(r) += 1e-3 * g(rng);
        data.col(i) = v;
    }

    const Subspace s = estimate_subspace_cols(data, 0.999, 4);
    REQUIRE(s.dimension() == 4);

    // exact principal directions from the 36x36 covariance
    const Eigen::VectorXd mu = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - mu;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered * centered.transpose());
    const Eigen::MatrixXd exact = eig.eigenvectors().rightCols(4);
    CHECK(projector_distance(s.basis, exact) < 1e-6);
}

TEST_CASE("gram spectrum is descending and single-direction data gets d=1") {
    const int ambient = 25;
    const Eigen::MatrixXd P = patterns(ambient, 1, 9);
    Eigen::MatrixXd data(ambient, 8);
    for (int i = 0; i < 8; ++i) data.col(i) = (i - 3.5) * P.col(0);
    const Eigen::VectorXd mu = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - mu;
    const GramSpectrum spec =
        analyze_centered_gram(centered.transpose() * centered, 0.95, 10);
    CHECK(spec.d == 1);
    for (int i = 1; i < spec.values.size(); ++i) CHECK(spec.values(i) <= spec.values(i - 1) + 1e-12);
}

TEST_CASE("column orthonormalization keeps the span") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(10, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 10; ++i) m(i, j) = g(rng);
    m.col(2) = 0.9 * m.col(2) + 0.4 * m.col(0);  // correlated but full rank

    const Eigen::MatrixXd original = m;
    orthonormalize_columns(m);
    CHECK((m.transpose() * m - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd pinv =
        (original.transpose() * original).ldlt().solve(original.transpose());
    const Eigen::MatrixXd p_before = original * pinv;
    CHECK((p_before - m * m.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}
