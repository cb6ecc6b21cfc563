// Command-line front end: synth / extract / train / eval / run / compare.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "itropt/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::int64_t seed_override = -1;
};

itropt::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = itropt::load_config(args.config_path);
    if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    return cfg;
}

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "experiment config file")->required();
    sub->add_option("--seed", args.seed_override, "override the config seed");
}

void print_metrics(const char* label, const itropt::EvalMetrics& m) {
    std::printf("%s: accuracy=%.6g pred_rate=%.6g mdt_s=%.6g standard_itr=%.6g proposed_itr=%.6g\n",
                label, m.accuracy, m.pred_rate, m.mdt_s, m.standard_itr_bpm, m.proposed_itr_bpm);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ITR-maximizing threshold classifier for SSVEP BCIs"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic SSVEP dataset");
    auto* extract = app.add_subcommand("extract", "extract features for all manifest trials");
    auto* train = app.add_subcommand("train", "fit LDA, skew-normal grid and thresholds on all trials");
    auto* eval = app.add_subcommand("eval", "evaluate trained artifacts on the manifest trials");
    auto* run = app.add_subcommand("run", "full cross-validated experiment");
    auto* compare = app.add_subcommand("compare", "abstaining rule vs forced-choice baseline");
    for (auto* sub : {synth, extract, train, eval, run, compare}) add_common(sub, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const auto cfg = load(args);
            const std::string manifest = itropt::generate_synthetic_dataset(cfg);
            std::printf("wrote dataset manifest %s\n", manifest.c_str());
        } else if (extract->parsed()) {
            const auto cfg = load(args);
            const auto trials = itropt::load_manifest_trials(cfg);
            const auto fm = itropt::extract_features(trials, cfg);
            std::filesystem::create_directories(cfg.output_dir);
            const auto path = std::filesystem::path(cfg.output_dir) / "features.csv";
            itropt::save_features(fm, path.string());
            std::printf("wrote %zu windows to %s\n", fm.rows.size(), path.string().c_str());
        } else if (train->parsed()) {
            const auto cfg = load(args);
            const auto trials = itropt::load_manifest_trials(cfg);
            const auto raw = itropt::extract_features(trials, cfg);
            const auto pipe = itropt::train_pipeline(raw, cfg, cfg.seed);
            std::filesystem::create_directories(cfg.output_dir);
            const std::filesystem::path dir(cfg.output_dir);
            itropt::save_features(pipe.confidence_train, (dir / "features.csv").string());
            if (pipe.uses_lda) itropt::save_lda(pipe.lda, (dir / "lda.txt").string());
            itropt::save_skewnorm_grid(pipe.model, (dir / "skewnorm.csv").string());
            itropt::save_thresholds(pipe.thresholds, pipe.model.priors,
                                    (dir / "thresholds.csv").string());
            std::printf("train ITR %.6g bit/min, artifacts in %s\n", pipe.train_itr,
                        cfg.output_dir.c_str());
        } else if (eval->parsed()) {
            const auto cfg = load(args);
            const std::filesystem::path dir(cfg.output_dir);
            itropt::Thresholds thresholds;
            const auto model = itropt::load_itr_model((dir / "skewnorm.csv").string(),
                                                      (dir / "thresholds.csv").string(),
                                                      cfg.window.length_s, cfg.window.step_s,
                                                      &thresholds);
            const auto trials = itropt::load_manifest_trials(cfg);
            const auto raw = itropt::extract_features(trials, cfg);
            itropt::TrainedPipeline pipe;
            pipe.uses_lda = cfg.extractor != "cca";
            if (pipe.uses_lda) pipe.lda = itropt::load_lda((dir / "lda.txt").string());
            const auto conf = itropt::to_confidence(raw, pipe, cfg.stimuli);
            const auto m = itropt::evaluate(conf, thresholds, cfg.window.length_s,
                                            cfg.window.step_s, false);
            print_metrics("eval", m);
        } else if (run->parsed()) {
            const auto cfg = load(args);
            const auto report = itropt::run_experiment(cfg);
            for (const auto& f : report.folds) {
                char label[32];
                std::snprintf(label, sizeof(label), "fold %d", f.fold);
                print_metrics(label, f.test);
            }
            print_metrics("mean", report.mean);
        } else if (compare->parsed()) {
            const auto cfg = load(args);
            const auto rep = itropt::compare_abstain(cfg);
            print_metrics("abstain", rep.abstain.mean);
            print_metrics("forced", rep.forced.mean);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
