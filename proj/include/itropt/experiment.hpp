#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "itropt/eeg.hpp"
#include "itropt/feature_matrix.hpp"
#include "itropt/features.hpp"
#include "itropt/gradopt.hpp"
#include "itropt/lda.hpp"
#include "itropt/probmodel.hpp"
#include "itropt/skewnorm.hpp"

namespace itropt {

struct ExperimentConfig {
    std::string manifest;
    std::vector<std::string> channels;
    StimulusSet stimuli;
    double rate_hz = 256.0;
    WindowSpec window{1.0, 0.125};
    std::string extractor = "combined";  // psda | cca | combined
    int n_folds = 5;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    double ascent_step = 1.0;
    int ascent_max_iters = 5000;
    double ascent_stop_tol = 1e-6;
    int ascent_restarts = 20;

    // keys for the `synth` subcommand
    int synth_trials_per_class = 5;
    double synth_duration_s = 12.0;
    int synth_channels = 2;
    double synth_noise_sd = 1.0;
    std::vector<double> synth_amps = {1.0, 0.5, 0.25};

    void validate() const {
        if (extractor != "psda" && extractor != "cca" && extractor != "combined")
            throw std::runtime_error("config: extractor must be psda, cca or combined");
        if (n_folds < 2) throw std::runtime_error("config: need n_folds >= 2");
        stimuli.validate(rate_hz);
    }
};

namespace detail {

inline std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& cell : split_csv(s)) out.push_back(parse_double(cell, "config key " + key));
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Flat `key = value` config file; unknown keys are errors so a misspelled
/// option cannot silently fall back to a default.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        const auto num = [&] { return detail::parse_double(value, "config key " + key); };

        if (key == "manifest") cfg.manifest = value;
        else if (key == "channels") {
            cfg.channels.clear();
            for (const auto& c : detail::split_csv(value)) cfg.channels.push_back(detail::trim(c));
        } else if (key == "frequencies") cfg.stimuli.target_freqs_hz = detail::parse_double_list(value, key);
        else if (key == "n_harmonics") cfg.stimuli.n_harmonics = static_cast<int>(num());
        else if (key == "rate_hz") cfg.rate_hz = num();
        else if (key == "window_s") cfg.window.length_s = num();
        else if (key == "step_s") cfg.window.step_s = num();
        else if (key == "extractor") cfg.extractor = value;
        else if (key == "n_folds") cfg.n_folds = static_cast<int>(num());
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
        else if (key == "ascent_step") cfg.ascent_step = num();
        else if (key == "ascent_max_iters") cfg.ascent_max_iters = static_cast<int>(num());
        else if (key == "ascent_stop_tol") cfg.ascent_stop_tol = num();
        else if (key == "ascent_restarts") cfg.ascent_restarts = static_cast<int>(num());
        else if (key == "synth_trials_per_class") cfg.synth_trials_per_class = static_cast<int>(num());
        else if (key == "synth_duration_s") cfg.synth_duration_s = num();
        else if (key == "synth_channels") cfg.synth_channels = static_cast<int>(num());
        else if (key == "synth_noise_sd") cfg.synth_noise_sd = num();
        else if (key == "synth_amps") cfg.synth_amps = detail::parse_double_list(value, key);
        else
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

inline int class_of_target(const StimulusSet& stimuli, double target_hz) {
    for (int k = 0; k < stimuli.n_targets(); ++k)
        if (std::abs(stimuli.target_freqs_hz[k] - target_hz) < 1e-9) return k + 1;
    throw std::runtime_error("target frequency " + std::to_string(target_hz) +
                             " Hz is not in the configured stimulus set");
}

/// Raw per-window features for one trial, labelled with the trial's class.
inline void extract_trial_features(const EegTrial& trial, const ExperimentConfig& cfg,
                                   FeatureMatrix& out) {
    const int label = class_of_target(cfg.stimuli, trial.target_hz);
    for (const auto& win : windows(trial, cfg.window)) {
        FeatureMatrix::Row row;
        if (cfg.extractor == "psda" || cfg.extractor == "combined") {
            const auto p = psda(win.segment, trial.rate_hz, cfg.stimuli);
            row.values.insert(row.values.end(), p.begin(), p.end());
        }
        if (cfg.extractor == "cca" || cfg.extractor == "combined") {
            const auto c = cca(win.segment, trial.rate_hz, cfg.stimuli);
            row.values.insert(row.values.end(), c.begin(), c.end());
        }
        row.label = label;
        row.trial_id = trial.trial_id;
        out.rows.push_back(std::move(row));
    }
}

inline std::vector<std::string> raw_feature_names(const ExperimentConfig& cfg) {
    std::vector<std::string> names;
    if (cfg.extractor == "psda" || cfg.extractor == "combined") {
        auto p = psda_feature_names(static_cast<int>(cfg.channels.size()), cfg.stimuli);
        names.insert(names.end(), p.begin(), p.end());
    }
    if (cfg.extractor == "cca" || cfg.extractor == "combined") {
        auto c = cca_feature_names(cfg.stimuli);
        names.insert(names.end(), c.begin(), c.end());
    }
    return names;
}

inline FeatureMatrix extract_features(const std::vector<EegTrial>& trials,
                                      const ExperimentConfig& cfg) {
    FeatureMatrix fm;
    fm.feature_names = raw_feature_names(cfg);
    fm.n_classes = cfg.stimuli.n_targets();
    for (const auto& t : trials) extract_trial_features(t, cfg, fm);
    fm.validate();
    return fm;
}

inline std::vector<EegTrial> load_manifest_trials(const ExperimentConfig& cfg) {
    std::vector<EegTrial> trials;
    const auto base = std::filesystem::path(cfg.manifest).parent_path();
    for (const auto& e : load_manifest(cfg.manifest)) {
        std::filesystem::path p(e.path);
        if (p.is_relative()) p = base / p;
        EegTrial t = load_trial(p.string(), cfg.rate_hz, e.target_hz, cfg.channels, e.trial_id);
        if (e.crop_s) t = apply_crop(std::move(t), *e.crop_s);
        trials.push_back(std::move(t));
    }
    return trials;
}

/// Everything fitted on one training fold.
struct TrainedPipeline {
    bool uses_lda = false;
    LdaModel lda;
    ItrModel model;
    Thresholds thresholds;
    double train_itr = 0.0;
    FeatureMatrix confidence_train;  // per-target features the thresholds act on
};

/// Reduce raw rows to one feature per target: CCA features are already
/// per-target; PSDA and combined go through the fitted LDA margins.
inline FeatureMatrix to_confidence(const FeatureMatrix& raw, const TrainedPipeline& pipe,
                                   const StimulusSet& stimuli) {
    if (!pipe.uses_lda) return raw;
    FeatureMatrix conf;
    conf.n_classes = raw.n_classes;
    for (int k = 0; k < stimuli.n_targets(); ++k)
        conf.feature_names.push_back("conf_f" + std::to_string(stimuli.target_freqs_hz[k]));
    for (const auto& r : raw.rows) {
        const Eigen::Map<const Eigen::VectorXd> x(r.values.data(),
                                                  static_cast<long>(r.values.size()));
        conf.rows.push_back({confidence_features(pipe.lda, x), r.label, r.trial_id});
    }
    return conf;
}

namespace detail {

inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - double(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace detail

inline TrainedPipeline train_pipeline(const FeatureMatrix& raw_train, const ExperimentConfig& cfg,
                                      std::uint64_t ascent_seed) {
    const int n = cfg.stimuli.n_targets();
    TrainedPipeline pipe;
    pipe.uses_lda = cfg.extractor != "cca";
    if (pipe.uses_lda) pipe.lda = fit_lda(raw_train);
    pipe.confidence_train = to_confidence(raw_train, pipe, cfg.stimuli);

    // class-conditional skew-normal grid and priors
    pipe.model.dist.assign(n, std::vector<SkewNormalParams>(n));
    pipe.model.priors.assign(n, 0.0);
    pipe.model.window_s = cfg.window.length_s;
    pipe.model.step_s = cfg.window.step_s;
    std::vector<std::vector<std::vector<double>>> samples(
        n, std::vector<std::vector<double>>(n));
    for (const auto& r : pipe.confidence_train.rows) {
        const int k = r.label - 1;
        pipe.model.priors[k] += 1.0;
        for (int f = 0; f < n; ++f) samples[f][k].push_back(r.values[f]);
    }
    const double total = static_cast<double>(pipe.confidence_train.rows.size());
    double prior_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        pipe.model.priors[k] /= total;
        prior_sum += pipe.model.priors[k];
    }
    pipe.model.priors[n - 1] += 1.0 - prior_sum;  // exact normalization
    for (int f = 0; f < n; ++f)
        for (int k = 0; k < n; ++k) {
            if (samples[f][k].size() < 30)
                throw std::runtime_error("train: class " + std::to_string(k + 1) +
                                         " has too few training windows for fitting");
            pipe.model.dist[f][k] = fit_least_squares(samples[f][k]).params;
        }

    AscentConfig acfg;
    acfg.step_init = cfg.ascent_step;
    acfg.max_iters = cfg.ascent_max_iters;
    acfg.stop_tol = cfg.ascent_stop_tol;
    acfg.n_restarts = cfg.ascent_restarts;
    acfg.seed = ascent_seed;
    for (int f = 0; f < n; ++f) {
        std::vector<double> all;
        for (int k = 0; k < n; ++k)
            all.insert(all.end(), samples[f][k].begin(), samples[f][k].end());
        acfg.init_lo.push_back(detail::quantile(all, 0.01));
        acfg.init_hi.push_back(detail::quantile(all, 0.99));
    }
    const AscentResult res = ascend(pipe.model, acfg);
    pipe.thresholds = res.best_thresholds;
    pipe.train_itr = res.best_itr;
    return pipe;
}

struct EvalMetrics {
    double accuracy = 0.0;       // over made predictions
    double pred_rate = 0.0;      // empirical P(M)
    double mdt_s = 0.0;
    double standard_itr_bpm = 0.0;
    double proposed_itr_bpm = 0.0;
    long n_windows = 0;
    long n_predictions = 0;
    long n_correct = 0;
};

/// Held-out metrics from per-target confidence features. In forced-choice
/// mode the argmax feature is always predicted, so P(M) = 1 and MDT = w.
inline EvalMetrics evaluate(const FeatureMatrix& conf_test, const Thresholds& thresholds,
                            double w, double s, bool forced_choice) {
    const int n = static_cast<int>(thresholds.size());
    EvalMetrics m;
    std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
    std::vector<double> class_counts(n, 0.0);
    for (const auto& row : conf_test.rows) {
        ++m.n_windows;
        const int j = row.label - 1;
        class_counts[j] += 1.0;
        std::optional<int> pred;
        if (forced_choice) {
            pred = static_cast<int>(std::max_element(row.values.begin(), row.values.end()) -
                                    row.values.begin());
        } else {
            pred = classify(row.values, thresholds);
        }
        if (pred) {
            ++m.n_predictions;
            counts[*pred][j] += 1.0;
            if (*pred == j) ++m.n_correct;
        }
    }
    m.pred_rate = m.n_windows > 0 ? double(m.n_predictions) / double(m.n_windows) : 0.0;
    m.accuracy = m.n_predictions > 0 ? double(m.n_correct) / double(m.n_predictions) : 0.0;

    std::vector<std::vector<double>> ppc(n, std::vector<double>(n, 0.0));
    std::vector<double> priors(n, 0.0);
    for (int j = 0; j < n; ++j) {
        priors[j] = class_counts[j] / double(m.n_windows);
        if (class_counts[j] > 0.0)
            for (int i = 0; i < n; ++i) ppc[i][j] = counts[i][j] / class_counts[j];
    }
    const auto table = make_probability_table(std::move(ppc), std::move(priors));
    m.mdt_s = table.degenerate ? std::numeric_limits<double>::infinity()
                               : mdt_seconds(table, w, s);
    m.proposed_itr_bpm = itr_bits_per_min(table, w, s);
    m.standard_itr_bpm =
        m.n_predictions > 0 ? standard_itr_bits(n, m.accuracy) * 60.0 / m.mdt_s : 0.0;
    return m;
}

// ---- artifact serialization ----------------------------------------------

namespace detail {

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

inline void save_lda(const LdaModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "projection " << m.projection.rows() << ' ' << m.projection.cols() << '\n';
    for (long r = 0; r < m.projection.rows(); ++r) {
        for (long c = 0; c < m.projection.cols(); ++c)
            out << detail::format_full(m.projection(r, c)) << (c + 1 < m.projection.cols() ? " " : "");
        out << '\n';
    }
    out << "means " << m.class_means_projected.rows() << ' ' << m.class_means_projected.cols() << '\n';
    for (long r = 0; r < m.class_means_projected.rows(); ++r) {
        for (long c = 0; c < m.class_means_projected.cols(); ++c)
            out << detail::format_full(m.class_means_projected(r, c))
                << (c + 1 < m.class_means_projected.cols() ? " " : "");
        out << '\n';
    }
    out << "priors " << m.class_priors.size() << '\n';
    for (long i = 0; i < m.class_priors.size(); ++i)
        out << detail::format_full(m.class_priors[i]) << (i + 1 < m.class_priors.size() ? " " : "");
    out << '\n';
}

inline LdaModel load_lda(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    auto read_matrix = [&](const std::string& tag) {
        std::string word;
        long rows, cols;
        if (!(in >> word >> rows >> cols) || word != tag)
            throw std::runtime_error(path + ": malformed LDA file at '" + tag + "'");
        Eigen::MatrixXd m(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c)
                if (!(in >> m(r, c))) throw std::runtime_error(path + ": truncated LDA file");
        return m;
    };
    LdaModel m;
    m.projection = read_matrix("projection");
    m.class_means_projected = read_matrix("means");
    std::string word;
    long n;
    if (!(in >> word >> n) || word != "priors")
        throw std::runtime_error(path + ": malformed LDA file at 'priors'");
    m.class_priors.resize(n);
    for (long i = 0; i < n; ++i)
        if (!(in >> m.class_priors[i])) throw std::runtime_error(path + ": truncated LDA file");
    return m;
}

inline void save_skewnorm_grid(const ItrModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "feature,class,location,scale,shape\n";
    for (std::size_t f = 0; f < m.dist.size(); ++f)
        for (std::size_t k = 0; k < m.dist[f].size(); ++k)
            out << f + 1 << ',' << k + 1 << ',' << detail::format_full(m.dist[f][k].location)
                << ',' << detail::format_full(m.dist[f][k].scale) << ','
                << detail::format_full(m.dist[f][k].shape) << '\n';
}

inline void save_thresholds(const Thresholds& t, const std::vector<double>& priors,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "target,threshold,prior\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        out << i + 1 << ',' << detail::format_full(t[i]) << ','
            << detail::format_full(priors[i]) << '\n';
}

inline ItrModel load_itr_model(const std::string& skewnorm_path, const std::string& thresholds_path,
                               double w, double s, Thresholds* thresholds_out = nullptr) {
    ItrModel m;
    m.window_s = w;
    m.step_s = s;
    {
        std::ifstream in(skewnorm_path);
        if (!in) throw std::runtime_error("cannot open: " + skewnorm_path);
        std::string line;
        std::getline(in, line);
        std::vector<std::tuple<int, int, SkewNormalParams>> entries;
        int n = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = detail::split_csv(line);
            if (cells.size() != 5) throw std::runtime_error(skewnorm_path + ": malformed row");
            const int f = std::stoi(cells[0]), k = std::stoi(cells[1]);
            entries.emplace_back(f, k,
                                 SkewNormalParams{std::stod(cells[2]), std::stod(cells[3]),
                                                  std::stod(cells[4])});
            n = std::max({n, f, k});
        }
        m.dist.assign(n, std::vector<SkewNormalParams>(n));
        for (const auto& [f, k, p] : entries) m.dist[f - 1][k - 1] = p;
    }
    {
        std::ifstream in(thresholds_path);
        if (!in) throw std::runtime_error("cannot open: " + thresholds_path);
        std::string line;
        std::getline(in, line);
        Thresholds t;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = detail::split_csv(line);
            if (cells.size() != 3) throw std::runtime_error(thresholds_path + ": malformed row");
            t.push_back(std::stod(cells[1]));
            m.priors.push_back(std::stod(cells[2]));
        }
        if (thresholds_out) *thresholds_out = std::move(t);
    }
    return m;
}

// ---- cross-validation ----------------------------------------------------

struct FoldMetrics {
    int fold = 0;
    double train_itr_bpm = 0.0;
    EvalMetrics test;
};

struct FoldReport {
    std::vector<FoldMetrics> folds;
    EvalMetrics mean;
    double mean_train_itr_bpm = 0.0;
};

/// Trial-wise fold assignment: within each class, trials ordered by id go
/// round-robin over folds, matching one-recording-per-fold cross-validation.
inline std::map<int, int> assign_folds(const std::vector<EegTrial>& trials,
                                       const ExperimentConfig& cfg) {
    std::map<double, std::vector<std::pair<int, std::size_t>>> by_class;
    for (std::size_t i = 0; i < trials.size(); ++i)
        by_class[trials[i].target_hz].emplace_back(trials[i].trial_id, i);
    std::map<int, int> fold_of;
    for (auto& [freq, ids] : by_class) {
        std::sort(ids.begin(), ids.end());
        for (std::size_t r = 0; r < ids.size(); ++r)
            fold_of[ids[r].first] = static_cast<int>(r % cfg.n_folds);
    }
    return fold_of;
}

namespace detail {

inline void write_metrics_csv(const std::string& path, const std::vector<FoldMetrics>& folds,
                              const EvalMetrics& mean, double mean_train) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "fold,train_itr_bpm,accuracy,pred_rate,mdt_s,standard_itr_bpm,proposed_itr_bpm,"
           "n_windows,n_predictions\n";
    for (const auto& f : folds)
        out << f.fold << ',' << fmt6(f.train_itr_bpm) << ',' << fmt6(f.test.accuracy) << ','
            << fmt6(f.test.pred_rate) << ',' << fmt6(f.test.mdt_s) << ','
            << fmt6(f.test.standard_itr_bpm) << ',' << fmt6(f.test.proposed_itr_bpm) << ','
            << f.test.n_windows << ',' << f.test.n_predictions << '\n';
    out << "mean," << fmt6(mean_train) << ',' << fmt6(mean.accuracy) << ','
        << fmt6(mean.pred_rate) << ',' << fmt6(mean.mdt_s) << ',' << fmt6(mean.standard_itr_bpm)
        << ',' << fmt6(mean.proposed_itr_bpm) << ",," << '\n';
}

inline EvalMetrics mean_of(const std::vector<FoldMetrics>& folds) {
    EvalMetrics m;
    const double n = double(folds.size());
    for (const auto& f : folds) {
        m.accuracy += f.test.accuracy / n;
        m.pred_rate += f.test.pred_rate / n;
        m.mdt_s += f.test.mdt_s / n;
        m.standard_itr_bpm += f.test.standard_itr_bpm / n;
        m.proposed_itr_bpm += f.test.proposed_itr_bpm / n;
        m.n_windows += f.test.n_windows;
        m.n_predictions += f.test.n_predictions;
        m.n_correct += f.test.n_correct;
    }
    return m;
}

}  // namespace detail

/// Five-fold (or n-fold) cross-validated pipeline; training artifacts and
/// per-fold metrics go to fold-scoped subdirectories of cfg.output_dir.
inline FoldReport run_experiment(const ExperimentConfig& cfg, bool forced_choice = false,
                                 const std::string& subdir = "") {
    cfg.validate();
    const auto trials = load_manifest_trials(cfg);
    const auto fold_of = assign_folds(trials, cfg);
    const std::filesystem::path root =
        subdir.empty() ? std::filesystem::path(cfg.output_dir)
                       : std::filesystem::path(cfg.output_dir) / subdir;
    std::filesystem::create_directories(root);

    FoldReport report;
    for (int fold = 0; fold < cfg.n_folds; ++fold) {
        std::vector<EegTrial> train_trials, test_trials;
        for (const auto& t : trials)
            (fold_of.at(t.trial_id) == fold ? test_trials : train_trials).push_back(t);
        if (test_trials.empty()) continue;

        std::set<int> train_classes;
        for (const auto& t : train_trials)
            train_classes.insert(class_of_target(cfg.stimuli, t.target_hz));
        if (static_cast<int>(train_classes.size()) != cfg.stimuli.n_targets())
            throw std::runtime_error("fold " + std::to_string(fold) +
                                     ": a class is missing from the training data");

        const FeatureMatrix raw_train = extract_features(train_trials, cfg);
        const TrainedPipeline pipe =
            train_pipeline(raw_train, cfg, cfg.seed + static_cast<std::uint64_t>(fold));
        const FeatureMatrix raw_test = extract_features(test_trials, cfg);
        const FeatureMatrix conf_test = to_confidence(raw_test, pipe, cfg.stimuli);

        FoldMetrics fm;
        fm.fold = fold;
        fm.train_itr_bpm = pipe.train_itr;
        fm.test = evaluate(conf_test, pipe.thresholds, cfg.window.length_s, cfg.window.step_s,
                           forced_choice);
        report.folds.push_back(fm);

        const auto dir = root / ("fold_" + std::to_string(fold));
        std::filesystem::create_directories(dir);
        save_features(pipe.confidence_train, (dir / "features.csv").string());
        if (pipe.uses_lda) save_lda(pipe.lda, (dir / "lda.txt").string());
        save_skewnorm_grid(pipe.model, (dir / "skewnorm.csv").string());
        save_thresholds(pipe.thresholds, pipe.model.priors, (dir / "thresholds.csv").string());
        detail::write_metrics_csv((dir / "metrics.csv").string(), {fm}, fm.test, fm.train_itr_bpm);
    }
    if (report.folds.empty()) throw std::runtime_error("run_experiment: no usable folds");

    report.mean = detail::mean_of(report.folds);
    for (const auto& f : report.folds)
        report.mean_train_itr_bpm += f.train_itr_bpm / double(report.folds.size());
    detail::write_metrics_csv((root / "aggregate.csv").string(), report.folds, report.mean,
                              report.mean_train_itr_bpm);
    return report;
}

struct CompareReport {
    FoldReport abstain;
    FoldReport forced;
};

/// Same trained pipeline evaluated with the abstaining rule and with a
/// forced-choice argmax baseline.
inline CompareReport compare_abstain(const ExperimentConfig& cfg) {
    CompareReport rep;
    rep.abstain = run_experiment(cfg, false, "abstain");
    rep.forced = run_experiment(cfg, true, "forced");

    std::ofstream out(std::filesystem::path(cfg.output_dir) / "compare.csv");
    out << "mode,accuracy,pred_rate,mdt_s,standard_itr_bpm,proposed_itr_bpm\n";
    const auto line = [&](const char* mode, const EvalMetrics& m) {
        out << mode << ',' << detail::fmt6(m.accuracy) << ',' << detail::fmt6(m.pred_rate) << ','
            << detail::fmt6(m.mdt_s) << ',' << detail::fmt6(m.standard_itr_bpm) << ','
            << detail::fmt6(m.proposed_itr_bpm) << '\n';
    };
    line("abstain", rep.abstain.mean);
    line("forced", rep.forced.mean);
    return rep;
}

/// Writes a synthetic dataset (trial files plus manifest) under
/// cfg.output_dir/data and returns the manifest path.
inline std::string generate_synthetic_dataset(const ExperimentConfig& cfg) {
    const auto dir = std::filesystem::path(cfg.output_dir) / "data";
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest) throw std::runtime_error("cannot write manifest");
    int trial_id = 0;
    for (int k = 0; k < cfg.stimuli.n_targets(); ++k) {
        for (int r = 0; r < cfg.synth_trials_per_class; ++r) {
            ++trial_id;
            EegTrial t = synth_ssvep(cfg.stimuli.target_freqs_hz[k], cfg.synth_duration_s,
                                     cfg.rate_hz, cfg.synth_channels, cfg.synth_amps,
                                     cfg.synth_noise_sd,
                                     cfg.seed + static_cast<std::uint64_t>(trial_id) * 1000003ull,
                                     trial_id);
            if (!cfg.channels.empty()) {
                if (cfg.channels.size() != static_cast<std::size_t>(cfg.synth_channels))
                    throw std::runtime_error("synth: channels list does not match synth_channels");
                t.channel_names = cfg.channels;
            }
            const std::string name = "trial_" + std::to_string(trial_id) + ".csv";
            save_trial(t, (dir / name).string());
            manifest << name << ',' << detail::format_full(t.target_hz) << ',' << trial_id << '\n';
        }
    }
    return (dir / "manifest.csv").string();
}

}  // namespace itropt
