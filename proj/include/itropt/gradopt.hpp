#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "itropt/probmodel.hpp"

namespace itropt {

struct AscentConfig {
    double step_init = 1.0;   // backtracking restores the plain update when it works
    int max_iters = 5000;
    double stop_tol = 1e-6;   // stop when ITR improves by less than this
    int n_restarts = 20;
    std::uint64_t seed = 0;
    std::vector<double> init_lo;  // per-coordinate initialization box
    std::vector<double> init_hi;
    bool record_trace = false;  // keep the per-iteration ITR history of each restart
};

struct RestartTrace {
    Thresholds initial;
    Thresholds final;
    double final_itr = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;  // wandered into (or started in) the P(M)=0 region
    std::vector<double> itr_history;  // filled when record_trace is set
};

struct AscentResult {
    Thresholds best_thresholds;
    double best_itr = 0.0;
    std::vector<RestartTrace> per_restart;
};

/// Analytic gradient of the conditioned-ITR objective with respect to the
/// thresholds. Entropy split I = H(P|M) - H(P|M | C|M); zero-probability
/// terms contribute 0.
inline Thresholds grad_itr(const ItrModel& m, const Thresholds& t) {
    m.validate();
    const int n = m.n_classes();
    if (static_cast<int>(t.size()) != n)
        throw std::invalid_argument("grad_itr: threshold count mismatch");

    std::vector<std::vector<double>> G(n, std::vector<double>(n));
    std::vector<std::vector<double>> g(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            G[j][k] = skewnorm_cdf(m.dist[j][k], t[j]);
            g[j][k] = skewnorm_pdf(m.dist[j][k], t[j]);
        }

    // P(P_i | C_k) and its partials wrt each t_l
    std::vector<std::vector<double>> P(n, std::vector<double>(n));
    std::vector<std::vector<std::vector<double>>> dP(
        n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            double prod = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) prod *= G[j][k];
            P[i][k] = (1.0 - G[i][k]) * prod;
            for (int l = 0; l < n; ++l) {
                if (l == i) {
                    dP[l][i][k] = -g[i][k] * prod;
                } else {
                    double prod2 = 1.0;
                    for (int j = 0; j < n; ++j)
                        if (j != i && j != l) prod2 *= G[j][k];
                    dP[l][i][k] = (1.0 - G[i][k]) * g[l][k] * prod2;
                }
            }
        }
    }

    std::vector<double> p_pred(n, 0.0);
    std::vector<std::vector<double>> d_pred(n, std::vector<double>(n, 0.0));  // [l][i]
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            p_pred[i] += m.priors[k] * P[i][k];
            for (int l = 0; l < n; ++l) d_pred[l][i] += m.priors[k] * dP[l][i][k];
        }

    double p_made = 0.0;
    std::vector<double> d_made(n, 0.0);
    for (int i = 0; i < n; ++i) {
        p_made += p_pred[i];
        for (int l = 0; l < n; ++l) d_made[l] += d_pred[l][i];
    }
    if (!(p_made > 1e-300))
        throw std::runtime_error("grad_itr: P(M) is zero, gradient undefined in the all-abstain region");

    // conditioned probabilities and their partials
    std::vector<double> a(n);                                     // P(P_i | M)
    std::vector<std::vector<double>> da(n, std::vector<double>(n));  // [l][i]
    for (int i = 0; i < n; ++i) {
        a[i] = p_pred[i] / p_made;
        for (int l = 0; l < n; ++l)
            da[l][i] = (p_made * d_pred[l][i] - p_pred[i] * d_made[l]) / (p_made * p_made);
    }

    std::vector<double> pmc(n, 0.0);  // P(M | C_j)
    std::vector<std::vector<double>> d_pmc(n, std::vector<double>(n, 0.0));  // [l][j]
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            pmc[j] += P[i][j];
            for (int l = 0; l < n; ++l) d_pmc[l][j] += dP[l][i][j];
        }

    std::vector<double> b(n);                                     // P(C_j | M)
    std::vector<std::vector<double>> db(n, std::vector<double>(n));  // [l][j]
    for (int j = 0; j < n; ++j) {
        b[j] = m.priors[j] * pmc[j] / p_made;
        for (int l = 0; l < n; ++l)
            db[l][j] = m.priors[j] * (p_made * d_pmc[l][j] - pmc[j] * d_made[l]) /
                       (p_made * p_made);
    }

    std::vector<std::vector<double>> Q(n, std::vector<double>(n, 0.0));  // P(P_i | C_j, M)
    std::vector<std::vector<std::vector<double>>> dQ(
        n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    for (int j = 0; j < n; ++j) {
        if (!(pmc[j] > 0.0)) continue;
        for (int i = 0; i < n; ++i) {
            Q[i][j] = P[i][j] / pmc[j];
            for (int l = 0; l < n; ++l)
                dQ[l][i][j] = (pmc[j] * dP[l][i][j] - P[i][j] * d_pmc[l][j]) / (pmc[j] * pmc[j]);
        }
    }

    const double ln2 = std::numbers::ln2;
    double h_pred = 0.0;
    std::vector<double> d_h_pred(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (a[i] > 0.0) {
            h_pred -= a[i] * std::log2(a[i]);
            for (int l = 0; l < n; ++l)
                d_h_pred[l] -= (std::log(a[i]) + 1.0) / ln2 * da[l][i];
        }
    }

    std::vector<double> h_cond_j(n, 0.0);  // H(P | C_j, M)
    std::vector<std::vector<double>> d_h_cond_j(n, std::vector<double>(n, 0.0));  // [l][j]
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (Q[i][j] > 0.0) {
                h_cond_j[j] -= Q[i][j] * std::log2(Q[i][j]);
                for (int l = 0; l < n; ++l)
                    d_h_cond_j[l][j] -= (std::log(Q[i][j]) + 1.0) / ln2 * dQ[l][i][j];
            }
        }

    double h_cond = 0.0;
    std::vector<double> d_h_cond(n, 0.0);
    for (int j = 0; j < n; ++j) {
        h_cond += b[j] * h_cond_j[j];
        for (int l = 0; l < n; ++l)
            d_h_cond[l] += h_cond_j[j] * db[l][j] + b[j] * d_h_cond_j[l][j];
    }

    const double mi = h_pred - h_cond;
    const double mdt = m.window_s + (1.0 / p_made - 1.0) * m.step_s;

    Thresholds grad(n);
    for (int l = 0; l < n; ++l) {
        const double d_mi = d_h_pred[l] - d_h_cond[l];
        const double d_mdt = -m.step_s / (p_made * p_made) * d_made[l];
        grad[l] = (mdt * d_mi - mi * d_mdt) * 60.0 / (mdt * mdt);
    }
    return grad;
}

/// Multi-restart gradient ascent t <- t + mu * grad, with per-iteration
/// backtracking on mu so the ITR sequence never decreases. Restarts draw
/// their starting thresholds uniformly from [init_lo, init_hi].
inline AscentResult ascend(const ItrModel& m, const AscentConfig& cfg) {
    m.validate();
    const int n = m.n_classes();
    if (cfg.n_restarts < 1) throw std::invalid_argument("ascend: need n_restarts >= 1");
    if (static_cast<int>(cfg.init_lo.size()) != n || static_cast<int>(cfg.init_hi.size()) != n)
        throw std::invalid_argument("ascend: initialization box must have one interval per target");
    if (!(cfg.step_init > 0.0 && cfg.stop_tol > 0.0))
        throw std::invalid_argument("ascend: step_init and stop_tol must be positive");

    AscentResult result;
    for (int r = 0; r < cfg.n_restarts; ++r) {
        std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ull);
        RestartTrace trace;
        trace.initial.resize(n);
        for (int i = 0; i < n; ++i) {
            std::uniform_real_distribution<double> u(cfg.init_lo[i], cfg.init_hi[i]);
            trace.initial[i] = u(rng);
        }

        Thresholds t = trace.initial;
        double itr = itr_bits_per_min(m, t);
        if (cfg.record_trace) trace.itr_history.push_back(itr);
        if (!(itr > 0.0) && probability_table(m, t).degenerate) {
            trace.degenerate = true;
            trace.final = t;
            trace.final_itr = 0.0;
            result.per_restart.push_back(std::move(trace));
            continue;
        }

        int iter = 0;
        for (; iter < cfg.max_iters; ++iter) {
            Thresholds grad;
            try {
                grad = grad_itr(m, t);
            } catch (const std::runtime_error&) {
                trace.degenerate = true;
                break;
            }
            double mu = cfg.step_init;
            Thresholds cand(n);
            double cand_itr = -std::numeric_limits<double>::infinity();
            while (mu >= 1e-12) {
                for (int i = 0; i < n; ++i) cand[i] = t[i] + mu * grad[i];
                cand_itr = itr_bits_per_min(m, cand);
                if (cand_itr >= itr) break;
                mu *= 0.5;
            }
            if (cand_itr < itr) {
                trace.converged = true;  // no ascent direction step improves
                break;
            }
            const double improvement = cand_itr - itr;
            t = cand;
            itr = cand_itr;
            if (cfg.record_trace) trace.itr_history.push_back(itr);
            if (improvement < cfg.stop_tol) {
                trace.converged = true;
                ++iter;
                break;
            }
        }
        trace.iterations = iter;
        trace.final = std::move(t);
        trace.final_itr = itr;
        result.per_restart.push_back(std::move(trace));
    }

    int best = -1;
    for (int r = 0; r < cfg.n_restarts; ++r) {
        const auto& tr = result.per_restart[r];
        if (tr.degenerate && tr.final_itr <= 0.0) continue;
        if (best < 0 || tr.final_itr > result.per_restart[best].final_itr) best = r;
    }
    if (best < 0)
        throw std::runtime_error(
            "ascend: every restart landed in the all-abstain region; widen the initialization box");
    result.best_thresholds = result.per_restart[best].final;
    result.best_itr = result.per_restart[best].final_itr;
    return result;
}

}  // namespace itropt
