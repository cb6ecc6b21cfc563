#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace itropt {

/// The flickering frequencies and how many harmonics of each to analyse.
struct StimulusSet {
    std::vector<double> target_freqs_hz;
    int n_harmonics = 3;

    int n_targets() const { return static_cast<int>(target_freqs_hz.size()); }

    void validate(double rate_hz) const {
        if (target_freqs_hz.size() < 2)
            throw std::invalid_argument("StimulusSet: need at least 2 targets");
        if (n_harmonics < 1) throw std::invalid_argument("StimulusSet: need n_harmonics >= 1");
        for (std::size_t i = 0; i < target_freqs_hz.size(); ++i) {
            if (!(target_freqs_hz[i] > 0.0))
                throw std::invalid_argument("StimulusSet: frequencies must be positive");
            for (std::size_t j = i + 1; j < target_freqs_hz.size(); ++j)
                if (target_freqs_hz[i] == target_freqs_hz[j])
                    throw std::invalid_argument("StimulusSet: duplicate frequency");
            if (target_freqs_hz[i] * n_harmonics >= rate_hz / 2.0)
                throw std::invalid_argument("StimulusSet: harmonic above Nyquist at " +
                                            std::to_string(rate_hz) + " Hz");
        }
    }
};

namespace detail {

// Goertzel recurrence for the power of one DFT bin, |X_k|^2 / N.
inline double goertzel_power(const Eigen::Ref<const Eigen::VectorXd>& x, long bin) {
    const long n = x.size();
    const double w = 2.0 * std::numbers::pi * static_cast<double>(bin) / static_cast<double>(n);
    const double coeff = 2.0 * std::cos(w);
    double s1 = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double s0 = x[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
    return power / static_cast<double>(n);
}

inline long aligned_bin(double freq_hz, double rate_hz, long n_rows) {
    const double idx = freq_hz * static_cast<double>(n_rows) / rate_hz;
    const double rounded = std::round(idx);
    if (std::abs(idx - rounded) > 1e-6)
        throw std::runtime_error("frequency " + std::to_string(freq_hz) +
                                 " Hz does not align with a DFT bin (spacing " +
                                 std::to_string(rate_hz / double(n_rows)) + " Hz)");
    return static_cast<long>(rounded);
}

}  // namespace detail

/// Spectral power at each harmonic of each target frequency, per channel.
/// Output ordering is channel-major, then target, then harmonic.
inline std::vector<double> psda(const Eigen::MatrixXd& segment, double rate_hz,
                                const StimulusSet& stimuli) {
    stimuli.validate(rate_hz);
    if (segment.rows() < 2) throw std::invalid_argument("psda: segment too short");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(segment.cols()) * stimuli.target_freqs_hz.size() *
                static_cast<std::size_t>(stimuli.n_harmonics));
    for (long c = 0; c < segment.cols(); ++c)
        for (double f : stimuli.target_freqs_hz)
            for (int h = 1; h <= stimuli.n_harmonics; ++h) {
                const long bin = detail::aligned_bin(f * h, rate_hz, segment.rows());
                out.push_back(detail::goertzel_power(segment.col(c), bin));
            }
    return out;
}

inline std::vector<std::string> psda_feature_names(int n_channels, const StimulusSet& stimuli) {
    std::vector<std::string> names;
    for (int c = 0; c < n_channels; ++c)
        for (double f : stimuli.target_freqs_hz)
            for (int h = 1; h <= stimuli.n_harmonics; ++h)
                names.push_back("psda_ch" + std::to_string(c + 1) + "_f" + std::to_string(f) +
                                "_h" + std::to_string(h));
    return names;
}

/// Largest canonical correlation between the window's channels and the
/// sin/cos reference bank of each target, one value in [0,1] per target.
inline std::vector<double> cca(const Eigen::MatrixXd& segment, double rate_hz,
                               const StimulusSet& stimuli) {
    stimuli.validate(rate_hz);
    const long n = segment.rows();
    const long n_ref = 2L * stimuli.n_harmonics;
    if (n <= n_ref + 1)
        throw std::invalid_argument("cca: fewer rows than reference signals");

    // center and standardize each channel; canonical correlation is invariant
    // under per-channel affine maps, and standardizing keeps it that way
    // numerically once the ridge is added
    Eigen::MatrixXd x = segment.rowwise() - segment.colwise().mean();
    for (long c = 0; c < x.cols(); ++c) {
        const double sd = std::sqrt(x.col(c).squaredNorm() / double(n));
        if (sd > 0.0) x.col(c) /= sd;
    }

    std::vector<double> out;
    for (double f : stimuli.target_freqs_hz) {
        Eigen::MatrixXd y(n, n_ref);
        for (long r = 0; r < n; ++r) {
            const double t = static_cast<double>(r) / rate_hz;
            for (int h = 1; h <= stimuli.n_harmonics; ++h) {
                const double arg = 2.0 * std::numbers::pi * h * f * t;
                y(r, 2 * (h - 1)) = std::sin(arg);
                y(r, 2 * (h - 1) + 1) = std::cos(arg);
            }
        }
        y.rowwise() -= y.colwise().mean();

        Eigen::MatrixXd cxx = x.transpose() * x / double(n);
        Eigen::MatrixXd cyy = y.transpose() * y / double(n);
        const Eigen::MatrixXd cxy = x.transpose() * y / double(n);

        // relative ridge keeps the feature invariant under channel rescaling
        const double eps = 1e-9;
        cxx.diagonal().array() += eps * cxx.trace() / double(cxx.rows()) + 1e-300;
        cyy.diagonal().array() += eps * cyy.trace() / double(cyy.rows()) + 1e-300;

        const Eigen::MatrixXd a = cxx.llt().solve(cxy);
        const Eigen::MatrixXd b = cyy.llt().solve(cxy.transpose());
        const Eigen::MatrixXd prod = a * b;  // similar to a symmetric PSD matrix
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(prod, false).eigenvalues();
        double rho2 = 0.0;
        for (long i = 0; i < ev.size(); ++i) rho2 = std::max(rho2, ev[i].real());
        out.push_back(std::sqrt(std::clamp(rho2, 0.0, 1.0)));
    }
    return out;
}

inline std::vector<std::string> cca_feature_names(const StimulusSet& stimuli) {
    std::vector<std::string> names;
    for (double f : stimuli.target_freqs_hz) names.push_back("cca_f" + std::to_string(f));
    return names;
}

}  // namespace itropt
