#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "itropt/experiment.hpp"

using namespace itropt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("itropt_exp_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig fixture_config(const fs::path& root, const std::string& extractor,
                                double noise_sd = 0.8) {
    ExperimentConfig cfg;
    cfg.channels = {"O1", "O2"};
    cfg.stimuli = {{8.0, 14.0, 28.0}, 3};
    cfg.rate_hz = 256.0;
    cfg.window = {1.0, 0.125};
    cfg.extractor = extractor;
    cfg.n_folds = 5;
    cfg.output_dir = (root / extractor).string();
    cfg.seed = 42;
    cfg.ascent_restarts = 8;
    cfg.ascent_max_iters = 1000;
    cfg.synth_trials_per_class = 5;
    cfg.synth_duration_s = 8.0;
    cfg.synth_channels = 2;
    cfg.synth_noise_sd = noise_sd;
    return cfg;
}

ExperimentConfig fixture_with_data(const fs::path& root, const std::string& extractor,
                                   double noise_sd = 0.8) {
    auto cfg = fixture_config(root, extractor, noise_sd);
    cfg.manifest = generate_synthetic_dataset(cfg);
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parser round trip and unknown-key rejection") {
    TempDir tmp;
    const auto path = tmp.path / "cfg.txt";
    {
        std::ofstream out(path);
        out << "# experiment\n"
            << "manifest = data/manifest.csv\n"
            << "channels = O1, O2\n"
            << "frequencies = 8,14,28\n"
            << "n_harmonics = 3\n"
            << "window_s = 1\n"
            << "step_s = 0.125\n"
            << "extractor = combined\n"
            << "seed = 7\n";
    }
    const auto cfg = load_config(path.string());
    CHECK(cfg.channels == std::vector<std::string>{"O1", "O2"});
    CHECK(cfg.stimuli.target_freqs_hz.size() == 3);
    CHECK(cfg.seed == 7);

    {
        std::ofstream out(path, std::ios::app);
        out << "window_sec = 2\n";  // misspelled key must not silently default
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_config(path.string())),
                         doctest::Contains("window_sec"), std::runtime_error);
}

TEST_CASE("high-SNR synthetic dataset classifies nearly perfectly") {
    TempDir tmp;
    const auto cfg = fixture_with_data(tmp.path, "combined", 0.4);
    const auto report = run_experiment(cfg);
    CHECK(report.folds.size() == 5);
    CHECK(report.mean.accuracy >= 0.95);
    CHECK(report.mean.proposed_itr_bpm > 0.0);

    // output layout
    for (int f = 0; f < 5; ++f) {
        const auto dir = fs::path(cfg.output_dir) / ("fold_" + std::to_string(f));
        for (const char* name :
             {"features.csv", "lda.txt", "skewnorm.csv", "thresholds.csv", "metrics.csv"})
            CHECK(fs::exists(dir / name));
    }
    CHECK(fs::exists(fs::path(cfg.output_dir) / "aggregate.csv"));
}

TEST_CASE("rerun with identical config and seed is byte-identical") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "cca", 0.8);
    cfg.ascent_restarts = 3;
    run_experiment(cfg);
    const auto first = slurp(fs::path(cfg.output_dir) / "aggregate.csv");
    const auto fold0 = slurp(fs::path(cfg.output_dir) / "fold_0" / "thresholds.csv");
    run_experiment(cfg);
    CHECK(slurp(fs::path(cfg.output_dir) / "aggregate.csv") == first);
    CHECK(slurp(fs::path(cfg.output_dir) / "fold_0" / "thresholds.csv") == fold0);
}

TEST_CASE("test-fold data cannot influence training artifacts") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "cca", 0.8);
    cfg.ascent_restarts = 3;
    run_experiment(cfg);
    const auto thresholds = slurp(fs::path(cfg.output_dir) / "fold_0" / "thresholds.csv");
    const auto skew = slurp(fs::path(cfg.output_dir) / "fold_0" / "skewnorm.csv");
    const auto feats = slurp(fs::path(cfg.output_dir) / "fold_0" / "features.csv");

    // corrupt every fold-0 test trial on disk; training artifacts must not move
    const auto fold_of = assign_folds(load_manifest_trials(cfg), cfg);
    const auto data_dir = fs::path(cfg.manifest).parent_path();
    for (const auto& e : load_manifest(cfg.manifest)) {
        if (fold_of.at(e.trial_id) != 0) continue;
        auto trial = load_trial((data_dir / e.path).string(), cfg.rate_hz, e.target_hz,
                                cfg.channels, e.trial_id);
        trial.samples = trial.samples.colwise().reverse().eval();  // scramble in time
        save_trial(trial, (data_dir / e.path).string());
    }
    run_experiment(cfg);
    CHECK(slurp(fs::path(cfg.output_dir) / "fold_0" / "thresholds.csv") == thresholds);
    CHECK(slurp(fs::path(cfg.output_dir) / "fold_0" / "skewnorm.csv") == skew);
    CHECK(slurp(fs::path(cfg.output_dir) / "fold_0" / "features.csv") == feats);
}

TEST_CASE("reported metrics are consistent with a window-by-window recount") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "cca", 0.8);
    cfg.ascent_restarts = 3;
    run_experiment(cfg);

    // rebuild fold 0's evaluation from the saved artifacts and raw outcomes
    const auto dir = fs::path(cfg.output_dir) / "fold_0";
    Thresholds thresholds;
    const auto model = load_itr_model((dir / "skewnorm.csv").string(),
                                      (dir / "thresholds.csv").string(), cfg.window.length_s,
                                      cfg.window.step_s, &thresholds);
    const auto trials = load_manifest_trials(cfg);
    const auto fold_of = assign_folds(trials, cfg);
    std::vector<EegTrial> test_trials;
    for (const auto& t : trials)
        if (fold_of.at(t.trial_id) == 0) test_trials.push_back(t);
    const auto conf = extract_features(test_trials, cfg);  // cca: already per-target

    long made = 0, correct = 0;
    for (const auto& row : conf.rows) {
        if (auto pred = classify(row.values, thresholds)) {
            ++made;
            if (*pred == row.label - 1) ++correct;
        }
    }
    const auto m = evaluate(conf, thresholds, cfg.window.length_s, cfg.window.step_s, false);
    CHECK(m.n_predictions == made);
    CHECK(m.n_correct == correct);
    CHECK(m.pred_rate == doctest::Approx(double(made) / double(conf.rows.size())).epsilon(1e-12));

    // proposed-ITR column equals MI of the empirical conditioned table times
    // 60 over the empirical MDT
    const auto table = empirical_table(conf, thresholds);
    const double mdt = mdt_seconds(table, cfg.window.length_s, cfg.window.step_s);
    CHECK(std::abs(m.proposed_itr_bpm - mutual_information(table) * 60.0 / mdt) <= 1e-9);
}

TEST_CASE("combined extractor is competitive with each single extractor") {
    TempDir tmp;
    double combined_itr = 0.0, psda_itr = 0.0, cca_itr = 0.0;
    for (const std::string ex : {"combined", "psda", "cca"}) {
        auto cfg = fixture_with_data(tmp.path, ex, 0.8);
        cfg.ascent_restarts = 8;
        const auto report = run_experiment(cfg);
        if (ex == "combined") combined_itr = report.mean.proposed_itr_bpm;
        if (ex == "psda") psda_itr = report.mean.proposed_itr_bpm;
        if (ex == "cca") cca_itr = report.mean.proposed_itr_bpm;
    }
    CHECK(combined_itr >= psda_itr - 1.0);
    CHECK(combined_itr >= cca_itr - 1.0);
}

TEST_CASE("abstaining rule vs forced-choice baseline") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "combined", 1.4);  // noisy enough to abstain
    cfg.ascent_restarts = 6;
    const auto rep = compare_abstain(cfg);
    CHECK(rep.forced.mean.pred_rate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.forced.mean.mdt_s == doctest::Approx(cfg.window.length_s).epsilon(1e-12));
    CHECK(rep.abstain.mean.accuracy >= rep.forced.mean.accuracy);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "compare.csv"));
}

TEST_CASE("noiseless fixture reaches accuracy 1 in both modes") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "cca", 0.05);
    cfg.ascent_restarts = 4;
    cfg.synth_duration_s = 6.0;
    const auto rep = compare_abstain(cfg);
    CHECK(rep.abstain.mean.accuracy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.forced.mean.accuracy == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("missing class in a training fold is an error") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "cca", 0.8);
    cfg.synth_trials_per_class = 1;
    cfg.manifest = generate_synthetic_dataset(cfg);
    cfg.n_folds = 2;  // with one trial per class, one fold loses every class
    CHECK_THROWS(run_experiment(cfg));
}

TEST_CASE("lda artifacts round-trip through disk") {
    TempDir tmp;
    auto cfg = fixture_with_data(tmp.path, "combined", 0.6);
    cfg.ascent_restarts = 2;
    const auto trials = load_manifest_trials(cfg);
    const auto raw = extract_features(trials, cfg);
    const auto pipe = train_pipeline(raw, cfg, cfg.seed);

    const auto lda_path = (tmp.path / "lda.txt").string();
    save_lda(pipe.lda, lda_path);
    const auto loaded = load_lda(lda_path);
    CHECK((loaded.projection - pipe.lda.projection).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.class_priors - pipe.lda.class_priors).cwiseAbs().maxCoeff() == 0.0);
}
