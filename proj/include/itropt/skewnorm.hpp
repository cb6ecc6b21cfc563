#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace itropt {

inline double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> node{};
    std::array<double, N> weight{};

    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(N) + 0.5));
            double p_prime = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    double p2 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                    p0 = p1;
                    p1 = p2;
                }
                p_prime = double(N) * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / p_prime;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * p_prime * p_prime);
        }
    }
};

// Core integral for 0 <= a <= 1; the integrand is smooth there so fixed-order
// Gauss-Legendre is accurate well past the 1e-10 budget.
inline double owens_t_core(double h, double a) {
    static const GaussLegendre<48> gl;
    const double hh = -0.5 * h * h;
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.node.size(); ++i) {
        const double x = 0.5 * a * (gl.node[i] + 1.0);
        sum += gl.weight[i] * std::exp(hh * (1.0 + x * x)) / (1.0 + x * x);
    }
    return sum * 0.5 * a / (2.0 * std::numbers::pi);
}

}  // namespace detail

/// Owen's T function T(h, a). Symmetry reductions bring |a| into [0,1];
/// larger |a| uses T(h,a) = Phi(h)/2 + Phi(ah)/2 - Phi(h)Phi(ah) - T(ah, 1/a).
inline double owens_t(double h, double a) {
    if (a == 0.0 || !std::isfinite(h)) return 0.0;
    const double sign = a < 0.0 ? -1.0 : 1.0;
    a = std::abs(a);
    h = std::abs(h);
    double t;
    if (a <= 1.0) {
        t = detail::owens_t_core(h, a);
    } else {
        const double ah = a * h;
        t = 0.5 * (norm_cdf(h) + norm_cdf(ah)) - norm_cdf(h) * norm_cdf(ah)
            - detail::owens_t_core(ah, 1.0 / a);
    }
    return sign * t;
}

/// Location/scale/shape triple of one skew-normal distribution.
struct SkewNormalParams {
    double location = 0.0;
    double scale = 1.0;
    double shape = 0.0;
};

inline double skewnorm_pdf(const SkewNormalParams& p, double x) {
    if (!(p.scale > 0.0)) throw std::invalid_argument("skewnorm_pdf: scale must be positive");
    const double z = (x - p.location) / p.scale;
    return 2.0 / p.scale * norm_pdf(z) * norm_cdf(p.shape * z);
}

inline double skewnorm_cdf(const SkewNormalParams& p, double x) {
    if (!(p.scale > 0.0)) throw std::invalid_argument("skewnorm_cdf: scale must be positive");
    const double z = (x - p.location) / p.scale;
    const double c = norm_cdf(z) - 2.0 * owens_t(z, p.shape);
    return std::clamp(c, 0.0, 1.0);
}

/// Draw one sample via the |Z0|-transform representation (independent of the
/// cdf/Owen's T path, so it doubles as a Monte-Carlo oracle in tests).
template <class Rng>
double skewnorm_sample(const SkewNormalParams& p, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double delta = p.shape / std::sqrt(1.0 + p.shape * p.shape);
    const double z0 = gauss(rng);
    const double z1 = gauss(rng);
    const double x = delta * std::abs(z0) + std::sqrt(1.0 - delta * delta) * z1;
    return p.location + p.scale * x;
}

struct SkewNormalFit {
    SkewNormalParams params;
    double residual = 0.0;
    bool converged = false;
};

namespace detail {

struct Histogram {
    std::vector<double> centers;
    std::vector<double> density;
};

// Freedman-Diaconis binning, density-normalized.
inline Histogram histogram_fd(const std::vector<double>& samples) {
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const double q25 = s[static_cast<std::size_t>(0.25 * double(n - 1))];
    const double q75 = s[static_cast<std::size_t>(0.75 * double(n - 1))];
    const double lo = s.front(), hi = s.back();
    double width = 2.0 * (q75 - q25) / std::cbrt(double(n));
    if (width <= 0.0) width = (hi - lo) / std::sqrt(double(n));
    std::size_t bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 8, 200);
    width = (hi - lo) / double(bins);

    Histogram h;
    h.centers.resize(bins);
    h.density.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) h.centers[b] = lo + (double(b) + 0.5) * width;
    for (double x : s) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= bins) b = bins - 1;
        h.density[b] += 1.0;
    }
    for (double& d : h.density) d /= double(n) * width;
    return h;
}

// Skewness-matched method-of-moments starting point.
inline SkewNormalParams moment_init(const std::vector<double>& samples) {
    const double n = double(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    const double sd = std::sqrt(m2);
    double skew = m3 / (sd * sd * sd);
    // attainable skewness of the skew-normal is < 0.9953
    skew = std::clamp(skew, -0.99, 0.99);
    const double two_thirds = 2.0 / 3.0;
    const double s23 = std::pow(std::abs(skew), two_thirds);
    const double c23 = std::pow((4.0 - std::numbers::pi) / 2.0, two_thirds);
    const double delta_abs = std::sqrt(std::numbers::pi / 2.0 * s23 / (s23 + c23));
    const double delta = std::copysign(std::min(delta_abs, 0.995), skew);
    SkewNormalParams p;
    p.shape = delta / std::sqrt(1.0 - delta * delta);
    p.scale = sd / std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
    p.location = mean - p.scale * delta * std::sqrt(2.0 / std::numbers::pi);
    return p;
}

}  // namespace detail

constexpr double kSkewShapeClamp = 20.0;

/// Least-squares fit of a skew-normal density to the Freedman-Diaconis
/// histogram of the samples. Nelder-Mead over (location, log scale, shape)
/// starting from the method-of-moments point; never returns a point worse
/// than the start.
inline SkewNormalFit fit_least_squares(const std::vector<double>& samples,
                                       int max_iters = 2000, double tol = 1e-10) {
    if (samples.size() < 30)
        throw std::invalid_argument("fit_least_squares: need at least 30 samples");
    {
        double mean = 0.0, var = 0.0;
        for (double x : samples) mean += x;
        mean /= double(samples.size());
        for (double x : samples) var += (x - mean) * (x - mean);
        if (!(var > 0.0))
            throw std::invalid_argument("fit_least_squares: samples have zero variance");
    }

    const auto hist = detail::histogram_fd(samples);
    auto residual = [&hist](const SkewNormalParams& p) {
        double r = 0.0;
        for (std::size_t i = 0; i < hist.centers.size(); ++i) {
            const double d = hist.density[i] - skewnorm_pdf(p, hist.centers[i]);
            r += d * d;
        }
        return r;
    };
    auto unpack = [](const std::array<double, 3>& v) {
        SkewNormalParams p;
        p.location = v[0];
        p.scale = std::exp(v[1]);
        p.shape = std::clamp(v[2], -kSkewShapeClamp, kSkewShapeClamp);
        return p;
    };
    auto objective = [&](const std::array<double, 3>& v) { return residual(unpack(v)); };

    const SkewNormalParams init = detail::moment_init(samples);
    std::array<double, 3> x0{init.location, std::log(init.scale), init.shape};

    // Nelder-Mead simplex
    using Vec = std::array<double, 3>;
    std::array<Vec, 4> simplex;
    std::array<double, 4> fval;
    simplex[0] = x0;
    for (int i = 1; i < 4; ++i) {
        simplex[i] = x0;
        simplex[i][i - 1] += (std::abs(x0[i - 1]) > 1.0 ? 0.05 * std::abs(x0[i - 1]) : 0.05);
    }
    for (int i = 0; i < 4; ++i) fval[i] = objective(simplex[i]);

    Vec best_x = x0;
    double best_f = fval[0];
    auto track = [&](const Vec& v, double f) {
        if (f < best_f) {
            best_f = f;
            best_x = v;
        }
    };
    for (int i = 0; i < 4; ++i) track(simplex[i], fval[i]);

    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        std::array<int, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fval[a] < fval[b]; });
        const int lo = order[0], hi = order[3], nh = order[2];
        if (std::abs(fval[hi] - fval[lo]) < tol) {
            converged = true;
            break;
        }
        Vec centroid{0, 0, 0};
        for (int i = 0; i < 4; ++i)
            if (i != hi)
                for (int d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / 3.0;

        auto affine = [&](double c) {
            Vec v;
            for (int d = 0; d < 3; ++d) v[d] = centroid[d] + c * (simplex[hi][d] - centroid[d]);
            return v;
        };
        const Vec refl = affine(-1.0);
        const double f_refl = objective(refl);
        track(refl, f_refl);
        if (f_refl < fval[lo]) {
            const Vec expand = affine(-2.0);
            const double f_exp = objective(expand);
            track(expand, f_exp);
            if (f_exp < f_refl) {
                simplex[hi] = expand;
                fval[hi] = f_exp;
            } else {
                simplex[hi] = refl;
                fval[hi] = f_refl;
            }
        } else if (f_refl < fval[nh]) {
            simplex[hi] = refl;
            fval[hi] = f_refl;
        } else {
            const Vec contract = affine(f_refl < fval[hi] ? -0.5 : 0.5);
            const double f_con = objective(contract);
            track(contract, f_con);
            if (f_con < std::min(f_refl, fval[hi])) {
                simplex[hi] = contract;
                fval[hi] = f_con;
            } else {
                // shrink toward best
                for (int i = 0; i < 4; ++i) {
                    if (i == lo) continue;
                    for (int d = 0; d < 3; ++d)
                        simplex[i][d] = simplex[lo][d] + 0.5 * (simplex[i][d] - simplex[lo][d]);
                    fval[i] = objective(simplex[i]);
                    track(simplex[i], fval[i]);
                }
            }
        }
    }

    SkewNormalFit fit;
    fit.params = unpack(best_x);
    fit.residual = best_f;
    fit.converged = converged;
    return fit;
}

/// Method-of-moments initialization, exposed so tests can check the
/// optimizer never worsens its start.
inline SkewNormalParams moment_init_of(const std::vector<double>& samples) {
    return detail::moment_init(samples);
}

}  // namespace itropt
