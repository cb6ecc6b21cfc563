#pragma once

// Shared fixtures and independent numeric oracles for the test suites.

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "itropt/probmodel.hpp"

namespace testutil {

// Adaptive Simpson quadrature, used as the integration oracle for the
// distribution code. Deliberately does not share anything with the cdf path.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double eps,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), eps, 40);
}

// Random n-class model with features that are informative but overlapping:
// feature k sits higher under class k than under the others.
inline itropt::ItrModel random_model(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    itropt::ItrModel m;
    m.window_s = 1.0;
    m.step_s = 0.125;
    m.dist.assign(n, std::vector<itropt::SkewNormalParams>(n));
    for (int f = 0; f < n; ++f)
        for (int k = 0; k < n; ++k) {
            itropt::SkewNormalParams p;
            p.location = (f == k ? 1.5 : 0.0) + 0.5 * (u01(rng) - 0.5);
            p.scale = 0.5 + u01(rng);
            p.shape = 6.0 * (u01(rng) - 0.5);
            m.dist[f][k] = p;
        }
    m.priors.assign(n, 0.0);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        m.priors[k] = 0.5 + u01(rng);
        s += m.priors[k];
    }
    for (int k = 0; k < n; ++k) m.priors[k] /= s;
    m.priors[n - 1] += 1.0 - std::accumulate(m.priors.begin(), m.priors.end(), 0.0);
    return m;
}

// Thresholds in the bulk of the feature distributions, where probabilities
// are bounded away from 0 and 1.
inline itropt::Thresholds random_thresholds(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.2, 1.2);
    itropt::Thresholds t(n);
    for (int i = 0; i < n; ++i) t[i] = u(rng);
    return t;
}

// Fully exchangeable model: permuting the classes permutes nothing.
inline itropt::ItrModel symmetric_model(int n, double separation = 2.0) {
    itropt::ItrModel m;
    m.window_s = 1.0;
    m.step_s = 0.125;
    m.dist.assign(n, std::vector<itropt::SkewNormalParams>(n));
    for (int f = 0; f < n; ++f)
        for (int k = 0; k < n; ++k)
            m.dist[f][k] = {f == k ? separation : 0.0, 1.0, 0.0};
    m.priors.assign(n, 1.0 / double(n));
    return m;
}

// Draw one per-target feature vector from the model's class-conditional
// distributions (transform sampler, independent of the cdf path).
inline std::vector<double> sample_features(const itropt::ItrModel& m, int klass,
                                           std::mt19937_64& rng) {
    const int n = m.n_classes();
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = itropt::skewnorm_sample(m.dist[i][klass], rng);
    return f;
}

inline int sample_class(const itropt::ItrModel& m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double r = u01(rng);
    for (int k = 0; k < m.n_classes(); ++k) {
        if (r < m.priors[k]) return k;
        r -= m.priors[k];
    }
    return m.n_classes() - 1;
}

}  // namespace testutil
