#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "itropt/feature_matrix.hpp"
#include "itropt/skewnorm.hpp"

namespace itropt {

/// One discrimination threshold per target.
using Thresholds = std::vector<double>;

/// Fitted class-conditional model: dist[f][c] is the distribution of feature
/// f on windows whose correct class is c (both 0-based), plus class priors
/// and the window/step timing that the detection-time estimate depends on.
struct ItrModel {
    std::vector<std::vector<SkewNormalParams>> dist;  // [feature][class], n x n
    std::vector<double> priors;                       // P(C_j), sums to 1
    double window_s = 1.0;
    double step_s = 0.125;

    int n_classes() const { return static_cast<int>(priors.size()); }

    void validate() const {
        const auto n = priors.size();
        if (n < 2) throw std::invalid_argument("ItrModel: need at least 2 classes");
        if (dist.size() != n) throw std::invalid_argument("ItrModel: distribution grid incomplete");
        for (const auto& row : dist)
            if (row.size() != n) throw std::invalid_argument("ItrModel: distribution grid incomplete");
        double s = 0.0;
        for (double p : priors) {
            if (p < 0.0) throw std::invalid_argument("ItrModel: negative prior");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("ItrModel: priors must sum to 1");
        if (!(step_s > 0.0 && step_s <= window_s))
            throw std::invalid_argument("ItrModel: need 0 < step_s <= window_s");
    }
};

/// Threshold rule: class k iff feature k is the only one at or above its
/// threshold. Zero or several features over threshold means no prediction.
inline std::optional<int> classify(std::span<const double> features, std::span<const double> thresholds) {
    if (features.size() != thresholds.size())
        throw std::invalid_argument("classify: feature/threshold length mismatch");
    std::optional<int> hit;
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k] >= thresholds[k]) {
            if (hit) return std::nullopt;
            hit = static_cast<int>(k);
        }
    }
    return hit;
}

/// P(P_i | C_k) under conditional independence of the features given the class.
inline double pred_prob_given_class(const ItrModel& m, const Thresholds& t, int i, int k) {
    const int n = m.n_classes();
    double p = 1.0 - skewnorm_cdf(m.dist[i][k], t[i]);
    for (int j = 0; j < n; ++j)
        if (j != i) p *= skewnorm_cdf(m.dist[j][k], t[j]);
    return p;
}

/// All prediction probabilities at one threshold vector, including the
/// quantities conditioned on the event M = "a prediction was made".
struct ProbabilityTable {
    int n = 0;
    std::vector<std::vector<double>> p_pred_given_class;  // [i][j] = P(P_i | C_j)
    std::vector<double> p_pred;                           // P(P_i)
    double p_made = 0.0;                                  // P(M)
    std::vector<std::vector<double>> p_pred_given_class_made;  // P(P_i | C_j, M)
    std::vector<double> p_pred_given_made;                     // P(P_i | M)
    std::vector<double> p_class_given_made;                    // P(C_j | M)
    std::vector<double> p_made_given_class;                    // P(M | C_j)
    std::vector<double> priors;
    bool degenerate = false;  // P(M) == 0
};

/// Builds the table from a P(P_i|C_j) matrix and priors; shared by the
/// analytic (skew-normal) and empirical (counted) paths.
inline ProbabilityTable make_probability_table(std::vector<std::vector<double>> p_pred_given_class,
                                               std::vector<double> priors) {
    ProbabilityTable pt;
    pt.n = static_cast<int>(priors.size());
    pt.p_pred_given_class = std::move(p_pred_given_class);
    pt.priors = std::move(priors);
    const int n = pt.n;

    pt.p_pred.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pt.p_pred[i] += pt.p_pred_given_class[i][j] * pt.priors[j];

    pt.p_made = 0.0;
    for (int i = 0; i < n; ++i) pt.p_made += pt.p_pred[i];
    pt.degenerate = !(pt.p_made > 0.0);

    pt.p_made_given_class.assign(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) pt.p_made_given_class[j] += pt.p_pred_given_class[i][j];

    pt.p_pred_given_made.assign(n, 0.0);
    pt.p_class_given_made.assign(n, 0.0);
    pt.p_pred_given_class_made.assign(n, std::vector<double>(n, 0.0));
    if (!pt.degenerate) {
        for (int i = 0; i < n; ++i) pt.p_pred_given_made[i] = pt.p_pred[i] / pt.p_made;
        for (int j = 0; j < n; ++j)
            pt.p_class_given_made[j] = pt.p_made_given_class[j] * pt.priors[j] / pt.p_made;
        for (int j = 0; j < n; ++j) {
            if (pt.p_made_given_class[j] > 0.0)
                for (int i = 0; i < n; ++i)
                    pt.p_pred_given_class_made[i][j] =
                        pt.p_pred_given_class[i][j] / pt.p_made_given_class[j];
        }
    }
    return pt;
}

inline ProbabilityTable probability_table(const ItrModel& m, const Thresholds& t) {
    m.validate();
    const int n = m.n_classes();
    if (static_cast<int>(t.size()) != n)
        throw std::invalid_argument("probability_table: threshold count mismatch");
    std::vector<std::vector<double>> ppc(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ppc[i][j] = pred_prob_given_class(m, t, i, j);
    return make_probability_table(std::move(ppc), m.priors);
}

/// Observed classify() frequencies on a feature matrix, same table shape as
/// the analytic one.
inline ProbabilityTable empirical_table(const FeatureMatrix& fm, const Thresholds& t) {
    if (fm.rows.empty()) throw std::invalid_argument("empirical_table: empty feature matrix");
    const int n = static_cast<int>(t.size());
    std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
    std::vector<double> class_counts(n, 0.0);
    for (const auto& row : fm.rows) {
        const int j = row.label - 1;
        if (j < 0 || j >= n) throw std::invalid_argument("empirical_table: label out of range");
        class_counts[j] += 1.0;
        if (auto pred = classify(row.values, t)) counts[*pred][j] += 1.0;
    }
    std::vector<std::vector<double>> ppc(n, std::vector<double>(n, 0.0));
    std::vector<double> priors(n, 0.0);
    const double total = static_cast<double>(fm.rows.size());
    for (int j = 0; j < n; ++j) {
        priors[j] = class_counts[j] / total;
        if (class_counts[j] > 0.0)
            for (int i = 0; i < n; ++i) ppc[i][j] = counts[i][j] / class_counts[j];
    }
    return make_probability_table(std::move(ppc), std::move(priors));
}

namespace detail {
inline double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }
}

/// I(P|M, C|M) in bits per prediction, the 0 log 0 := 0 convention throughout.
/// Defined as 0 on a degenerate (all-abstain) table.
inline double mutual_information(const ProbabilityTable& pt) {
    if (pt.degenerate) return 0.0;
    double mi = 0.0;
    for (int i = 0; i < pt.n; ++i) {
        for (int j = 0; j < pt.n; ++j) {
            const double pij = pt.p_pred_given_class_made[i][j] * pt.p_class_given_made[j];
            if (pij > 0.0 && pt.p_pred_given_made[i] > 0.0)
                mi += pij * std::log2(pt.p_pred_given_class_made[i][j] / pt.p_pred_given_made[i]);
        }
    }
    return mi;
}

/// Unconditioned variant: sums P(P_i n C_j) terms without restricting to M.
/// Exposed for comparison; the optimizer uses the conditioned form.
inline double mutual_information_unconditioned(const ProbabilityTable& pt) {
    double mi = 0.0;
    for (int i = 0; i < pt.n; ++i) {
        for (int j = 0; j < pt.n; ++j) {
            const double joint = pt.p_pred_given_class[i][j] * pt.priors[j];
            if (joint > 0.0 && pt.p_pred[i] > 0.0 && pt.priors[j] > 0.0)
                mi += joint * std::log2(joint / (pt.p_pred[i] * pt.priors[j]));
        }
    }
    return mi;
}

/// Wolpaw ITR in bits per prediction.
inline double standard_itr_bits(int n_targets, double accuracy) {
    if (n_targets < 2) throw std::invalid_argument("standard_itr_bits: need >= 2 targets");
    if (accuracy < 0.0 || accuracy > 1.0)
        throw std::invalid_argument("standard_itr_bits: accuracy outside [0,1]");
    const double p = accuracy;
    double v = std::log2(static_cast<double>(n_targets)) + detail::xlog2(p);
    if (p < 1.0) v += (1.0 - p) * std::log2((1.0 - p) / (n_targets - 1));
    return v;
}

/// Mean detection time in seconds: w plus the expected number of failed
/// steps times s. +inf when no prediction is ever made.
inline double mdt_seconds(const ProbabilityTable& pt, double w, double s) {
    if (!(s > 0.0 && s <= w)) throw std::invalid_argument("mdt_seconds: need 0 < s <= w");
    if (pt.degenerate) return std::numeric_limits<double>::infinity();
    return w + (1.0 / pt.p_made - 1.0) * s;
}

/// The optimized objective, bits per minute.
inline double itr_bits_per_min(const ItrModel& m, const Thresholds& t) {
    const auto pt = probability_table(m, t);
    if (pt.degenerate) return 0.0;
    return mutual_information(pt) * 60.0 / mdt_seconds(pt, m.window_s, m.step_s);
}

inline double itr_bits_per_min(const ProbabilityTable& pt, double w, double s) {
    if (pt.degenerate) return 0.0;
    return mutual_information(pt) * 60.0 / mdt_seconds(pt, w, s);
}

}  // namespace itropt
