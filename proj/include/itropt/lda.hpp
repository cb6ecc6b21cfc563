#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "itropt/feature_matrix.hpp"

namespace itropt {

/// Fisher projection to n_classes-1 dimensions plus nearest-projected-mean
/// discriminants with log priors.
struct LdaModel {
    Eigen::MatrixXd projection;            // dim x (n_classes-1)
    Eigen::MatrixXd class_means_projected; // n_classes rows
    Eigen::VectorXd class_priors;

    int n_classes() const { return static_cast<int>(class_priors.size()); }
    long input_dim() const { return projection.rows(); }
};

/// Solves the between-class vs within-class generalized eigenproblem on the
/// training matrix; within-class scatter gets a relative ridge before
/// factorization.
inline LdaModel fit_lda(const FeatureMatrix& train) {
    train.validate();
    const int n_cls = train.n_classes;
    if (n_cls < 2) throw std::invalid_argument("fit_lda: need at least 2 classes");
    const long dim = static_cast<long>(train.feature_names.size());
    const long n_rows = static_cast<long>(train.rows.size());

    std::vector<long> counts(n_cls, 0);
    for (const auto& r : train.rows) ++counts[r.label - 1];
    for (int c = 0; c < n_cls; ++c)
        if (counts[c] < 2)
            throw std::invalid_argument("fit_lda: class " + std::to_string(c + 1) +
                                        " has fewer than 2 training rows");

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n_cls, dim);
    Eigen::RowVectorXd grand = Eigen::RowVectorXd::Zero(dim);
    for (const auto& r : train.rows) {
        const Eigen::Map<const Eigen::RowVectorXd> v(r.values.data(), dim);
        means.row(r.label - 1) += v;
        grand += v;
    }
    for (int c = 0; c < n_cls; ++c) means.row(c) /= double(counts[c]);
    grand /= double(n_rows);

    Eigen::MatrixXd s_w = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& r : train.rows) {
        const Eigen::Map<const Eigen::RowVectorXd> v(r.values.data(), dim);
        const Eigen::RowVectorXd d = v - means.row(r.label - 1);
        s_w += d.transpose() * d;
    }
    Eigen::MatrixXd s_b = Eigen::MatrixXd::Zero(dim, dim);
    for (int c = 0; c < n_cls; ++c) {
        const Eigen::RowVectorXd d = means.row(c) - grand;
        s_b += double(counts[c]) * d.transpose() * d;
    }

    double ridge = 1e-6 * s_w.trace() / double(dim);
    if (!(ridge > 0.0)) {
        std::cerr << "fit_lda: within-class scatter is singular, applying absolute ridge\n";
        ridge = 1e-9;
    }
    s_w.diagonal().array() += ridge;

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s_b, s_w);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("fit_lda: generalized eigenproblem failed");

    const long keep = std::min<long>(n_cls - 1, dim);
    LdaModel model;
    model.projection = solver.eigenvectors().rightCols(keep).rowwise().reverse();
    if (!model.projection.allFinite())
        throw std::runtime_error("fit_lda: non-finite projection");

    model.class_means_projected = means * model.projection;
    model.class_priors.resize(n_cls);
    for (int c = 0; c < n_cls; ++c) model.class_priors[c] = double(counts[c]) / double(n_rows);
    return model;
}

/// Discriminant per class: negative squared distance to the projected class
/// mean plus log prior.
inline Eigen::VectorXd lda_discriminants(const LdaModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.input_dim())
        throw std::invalid_argument("lda: input dimension mismatch");
    const Eigen::RowVectorXd z = x.transpose() * model.projection;
    Eigen::VectorXd d(model.n_classes());
    for (int c = 0; c < model.n_classes(); ++c)
        d[c] = -(z - model.class_means_projected.row(c)).squaredNorm() +
               std::log(model.class_priors[c]);
    return d;
}

/// Margin to the decision border per class: d_k - max_{j != k} d_j. Exactly
/// one entry is >= 0 and it belongs to the nearest class.
inline std::vector<double> confidence_features(const LdaModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = lda_discriminants(model, x);
    const int n = model.n_classes();
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        double best_other = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            if (j != k) best_other = std::max(best_other, d[j]);
        out[k] = d[k] - best_other;
    }
    return out;
}

}  // namespace itropt
