#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "itropt/eeg.hpp"
#include "itropt/features.hpp"

using namespace itropt;

namespace {

// Naive DFT power of one bin, the oracle the Goertzel path is checked against.
double dft_power(const Eigen::VectorXd& x, long bin) {
    std::complex<double> acc{0.0, 0.0};
    const long n = x.size();
    for (long i = 0; i < n; ++i) {
        const double arg = -2.0 * std::numbers::pi * double(bin) * double(i) / double(n);
        acc += x[i] * std::complex<double>(std::cos(arg), std::sin(arg));
    }
    return std::norm(acc) / double(n);
}

Eigen::MatrixXd sine_segment(double freq, double rate, long rows, long cols, double phase = 0.3) {
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c)
            m(r, c) = std::sin(2.0 * std::numbers::pi * freq * double(r) / rate + phase + 0.1 * double(c));
    return m;
}

const StimulusSet kStimuli{{8.0, 14.0, 28.0}, 3};

}  // namespace

TEST_CASE("psda concentrates a pure tone in its own bin") {
    const auto seg = sine_segment(8.0, 256.0, 256, 1);
    const StimulusSet s{{8.0, 14.0, 28.0}, 1};
    const auto p = psda(seg, 256.0, s);
    REQUIRE(p.size() == 3);
    CHECK(p[0] > 0.0);
    CHECK(p[1] <= 1e-10 * p[0]);
    CHECK(p[2] <= 1e-10 * p[0]);
}

TEST_CASE("psda of a zero segment is zero") {
    const auto p = psda(Eigen::MatrixXd::Zero(256, 2), 256.0, kStimuli);
    for (double v : p) CHECK(v == 0.0);
}

TEST_CASE("harmonic amplitudes map to squared power ratios") {
    const auto trial = synth_ssvep(8.0, 1.0, 256.0, 1, {1.0, 0.5, 0.25}, 0.0, 3);
    const StimulusSet s{{8.0, 16.0, 24.0}, 1};
    const auto p = psda(trial.samples, 256.0, s);
    CHECK(p[1] / p[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(p[2] / p[0] == doctest::Approx(0.0625).epsilon(1e-9));

    // Goertzel vs naive DFT oracle, every analysed bin
    for (long bin : {8L, 16L, 24L, 14L, 28L})
        CHECK(detail::goertzel_power(trial.samples.col(0), bin) ==
              doctest::Approx(dft_power(trial.samples.col(0), bin)).epsilon(1e-9));
}

TEST_CASE("psda ordering is channel-major then target then harmonic") {
    Eigen::MatrixXd seg(256, 2);
    seg.col(0) = sine_segment(8.0, 256.0, 256, 1);
    seg.col(1) = sine_segment(14.0, 256.0, 256, 1);
    const StimulusSet s{{8.0, 14.0}, 1};
    const auto p = psda(seg, 256.0, s);
    REQUIRE(p.size() == 4);
    CHECK(p[0] > 100.0 * p[1]);  // ch1 target 8
    CHECK(p[3] > 100.0 * p[2]);  // ch2 target 14
}

TEST_CASE("off-bin harmonics raise a configuration error") {
    CHECK_THROWS(psda(Eigen::MatrixXd::Zero(256, 1), 256.0, StimulusSet{{8.3, 14.0}, 1}));
    CHECK_THROWS(psda(Eigen::MatrixXd::Zero(256, 1), 256.0, StimulusSet{{8.0, 120.0}, 3}));
}

TEST_CASE("psda scales quadratically, outputs nonnegative") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd seg(256, 2);
        for (long r = 0; r < 256; ++r)
            for (long c = 0; c < 2; ++c) seg(r, c) = gauss(rng);
        const auto p1 = psda(seg, 256.0, kStimuli);
        const auto p2 = psda(3.0 * seg, 256.0, kStimuli);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            CHECK(p1[i] >= 0.0);
            CHECK(p2[i] == doctest::Approx(9.0 * p1[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("cca of an exact reference copy is 1") {
    Eigen::MatrixXd seg(256, 1);
    for (long r = 0; r < 256; ++r)
        seg(r, 0) = std::sin(2.0 * std::numbers::pi * 8.0 * double(r) / 256.0);
    const auto c = cca(seg, 256.0, kStimuli);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cca of white noise stays below 1") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd seg(256, 2);
    for (long r = 0; r < 256; ++r)
        for (long c = 0; c < 2; ++c) seg(r, c) = gauss(rng);
    for (double v : cca(seg, 256.0, kStimuli)) CHECK(v < 0.999);
}

TEST_CASE("cca outputs lie in [0,1]") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd seg(256, 2);
        for (long r = 0; r < 256; ++r)
            for (long c = 0; c < 2; ++c) seg(r, c) = gauss(rng);
        for (double v : cca(seg, 256.0, kStimuli)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("cca is invariant under per-channel affine maps") {
    const auto trial = synth_ssvep(14.0, 1.0, 256.0, 2, {1.0, 0.4}, 0.8, 17);
    const auto base = cca(trial.samples, 256.0, kStimuli);
    Eigen::MatrixXd scaled = trial.samples;
    scaled.col(0) = 2.5 * scaled.col(0).array() + 7.0;
    scaled.col(1) = -0.6 * scaled.col(1).array() - 3.0;
    const auto after = cca(scaled, 256.0, kStimuli);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(base[i] - after[i]) <= 1e-9);
}

TEST_CASE("cca feature separates the attended frequency on noisy data") {
    std::vector<double> mean(3, 0.0);
    long count = 0;
    for (int t = 0; t < 3; ++t) {
        const auto trial = synth_ssvep(8.0, 10.0, 256.0, 2, {1.0, 0.5, 0.25}, 0.5, 100 + t);
        for (const auto& win : windows(trial, {1.0, 0.125})) {
            const auto c = cca(win.segment, 256.0, kStimuli);
            for (int k = 0; k < 3; ++k) mean[k] += c[k];
            ++count;
        }
    }
    for (int k = 0; k < 3; ++k) mean[k] /= double(count);
    CHECK(mean[0] > mean[1]);
    CHECK(mean[0] > mean[2]);
}

TEST_CASE("eigen-solved canonical correlation is at least the random-projection bound") {
    // brute-force oracle: Pearson correlation of random 1-D projections of the
    // two blocks lower-bounds the true first canonical correlation
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    const StimulusSet s{{8.0, 14.0}, 2};
    for (int trial = 0; trial < 5; ++trial) {
        const auto data = synth_ssvep(8.0, 1.0, 256.0, 2, {1.0, 0.3}, 1.0, 300 + trial);
        const auto rho = cca(data.samples, 256.0, s)[0];

        Eigen::MatrixXd y(256, 4);
        for (long r = 0; r < 256; ++r) {
            const double time = double(r) / 256.0;
            for (int h = 1; h <= 2; ++h) {
                y(r, 2 * (h - 1)) = std::sin(2.0 * std::numbers::pi * h * 8.0 * time);
                y(r, 2 * (h - 1) + 1) = std::cos(2.0 * std::numbers::pi * h * 8.0 * time);
            }
        }
        const Eigen::MatrixXd xc = data.samples.rowwise() - data.samples.colwise().mean();
        const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();

        double best = 0.0;
        for (int probe = 0; probe < 2000; ++probe) {
            Eigen::VectorXd wx(2), wy(4);
            for (int i = 0; i < 2; ++i) wx[i] = gauss(rng);
            for (int i = 0; i < 4; ++i) wy[i] = gauss(rng);
            const Eigen::VectorXd u = xc * wx, v = yc * wy;
            const double r = u.dot(v) / std::sqrt(u.squaredNorm() * v.squaredNorm());
            best = std::max(best, std::abs(r));
        }
        CHECK(rho >= best - 1e-6);
    }
}
