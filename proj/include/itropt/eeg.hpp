#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "itropt/feature_matrix.hpp"

namespace itropt {

/// One recorded trial: rows are time samples, columns are channels.
struct EegTrial {
    Eigen::MatrixXd samples;
    double rate_hz = 0.0;
    std::vector<std::string> channel_names;
    double target_hz = 0.0;
    int trial_id = 0;

    double duration_s() const { return static_cast<double>(samples.rows()) / rate_hz; }
};

/// Window length w and inter-extraction step s, both in seconds.
struct WindowSpec {
    double length_s = 1.0;
    double step_s = 0.125;
};

namespace detail {

// w and s must land on sample boundaries; silent rounding would corrupt the
// detection-time model.
inline long exact_samples(double seconds, double rate_hz, const char* what) {
    const double exact = seconds * rate_hz;
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, std::abs(exact)) || rounded < 1.0)
        throw std::runtime_error(std::string(what) + " of " + std::to_string(seconds) +
                                 " s is not a whole number of samples at " +
                                 std::to_string(rate_hz) + " Hz");
    return static_cast<long>(rounded);
}

}  // namespace detail

struct Window {
    double start_s = 0.0;
    Eigen::MatrixXd segment;
};

/// Slices the trial into windows of length_s starting at 0, step_s, 2*step_s, ...
/// The last window ends at or before the end of the trial.
inline std::vector<Window> windows(const EegTrial& trial, const WindowSpec& spec) {
    if (!(spec.step_s > 0.0 && spec.step_s <= spec.length_s))
        throw std::runtime_error("window spec: need 0 < step_s <= length_s");
    const long win = detail::exact_samples(spec.length_s, trial.rate_hz, "window length");
    const long step = detail::exact_samples(spec.step_s, trial.rate_hz, "window step");
    const long total = trial.samples.rows();
    if (total < win) throw std::runtime_error("trial shorter than one window");

    std::vector<Window> out;
    for (long start = 0; start + win <= total; start += step) {
        Window w;
        w.start_s = static_cast<double>(start) / trial.rate_hz;
        w.segment = trial.samples.middleRows(start, win);
        out.push_back(std::move(w));
    }
    return out;
}

/// Loads a delimited trial file (header row of channel names, one row per
/// sample) keeping only the requested channels, in request order.
inline EegTrial load_trial(const std::string& path, double rate_hz, double target_hz,
                           const std::vector<std::string>& channels,
                           int trial_id = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trial file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trial file: " + path);
    const auto header = detail::split_csv(line);

    std::vector<long> col_of;
    for (const auto& want : channels) {
        auto it = std::find(header.begin(), header.end(), want);
        if (it == header.end())
            throw std::runtime_error(path + ": channel '" + want + "' not found in header");
        col_of.push_back(it - header.begin());
    }

    std::vector<std::vector<double>> data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        std::vector<double> row(col_of.size());
        for (std::size_t c = 0; c < col_of.size(); ++c)
            row[c] = detail::parse_double(cells[col_of[c]],
                                          path + ":" + std::to_string(line_no) + " col " +
                                              std::to_string(col_of[c] + 1));
        data.push_back(std::move(row));
    }
    if (data.size() < static_cast<std::size_t>(rate_hz))
        throw std::runtime_error(path + ": fewer than one second of samples");

    EegTrial trial;
    trial.rate_hz = rate_hz;
    trial.target_hz = target_hz;
    trial.channel_names = channels;
    trial.trial_id = trial_id;
    trial.samples.resize(static_cast<long>(data.size()), static_cast<long>(col_of.size()));
    for (std::size_t r = 0; r < data.size(); ++r)
        for (std::size_t c = 0; c < col_of.size(); ++c)
            trial.samples(static_cast<long>(r), static_cast<long>(c)) = data[r][c];
    return trial;
}

inline void save_trial(const EegTrial& trial, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < trial.channel_names.size(); ++c)
        out << trial.channel_names[c] << (c + 1 < trial.channel_names.size() ? "," : "");
    out << '\n';
    for (long r = 0; r < trial.samples.rows(); ++r) {
        for (long c = 0; c < trial.samples.cols(); ++c)
            out << detail::format_full(trial.samples(r, c))
                << (c + 1 < trial.samples.cols() ? "," : "");
        out << '\n';
    }
}

/// Sum of harmonics of target_hz plus Gaussian white noise; channel phases
/// are drawn pseudo-randomly from the seed so channels differ but runs do not.
inline EegTrial synth_ssvep(double target_hz, double duration_s, double rate_hz,
                            int n_channels, const std::vector<double>& harmonic_amps,
                            double noise_sd, std::uint64_t seed, int trial_id = 0) {
    const auto n_harm = harmonic_amps.size();
    if (target_hz * static_cast<double>(n_harm) >= rate_hz / 2.0)
        throw std::runtime_error("synth_ssvep: highest harmonic violates Nyquist");
    if (n_channels < 1) throw std::runtime_error("synth_ssvep: need at least one channel");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);

    const long rows = static_cast<long>(std::llround(duration_s * rate_hz));
    EegTrial trial;
    trial.rate_hz = rate_hz;
    trial.target_hz = target_hz;
    trial.trial_id = trial_id;
    trial.samples.resize(rows, n_channels);
    for (int c = 0; c < n_channels; ++c)
        trial.channel_names.push_back("ch" + std::to_string(c + 1));

    std::vector<double> phases(n_channels);
    for (auto& p : phases) p = phase(rng);

    for (int c = 0; c < n_channels; ++c) {
        for (long r = 0; r < rows; ++r) {
            const double t = static_cast<double>(r) / rate_hz;
            double v = 0.0;
            for (std::size_t h = 0; h < n_harm; ++h)
                v += harmonic_amps[h] *
                     std::sin(2.0 * std::numbers::pi * double(h + 1) * target_hz * t + phases[c]);
            if (noise_sd > 0.0) v += noise_sd * noise(rng);
            trial.samples(r, c) = v;
        }
    }
    return trial;
}

/// One manifest line: `path,target_hz,trial_id[,crop_start_s,crop_end_s]`.
/// The optional crop drops samples outside [crop_start_s, crop_end_s).
struct ManifestEntry {
    std::string path;
    double target_hz = 0.0;
    int trial_id = 0;
    std::optional<std::pair<double, double>> crop_s;
};

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 3 && cells.size() != 5)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 or 5 fields");
        ManifestEntry e;
        e.path = cells[0];
        e.target_hz = detail::parse_double(cells[1], path + ":" + std::to_string(line_no));
        e.trial_id = static_cast<int>(
            detail::parse_double(cells[2], path + ":" + std::to_string(line_no)));
        if (cells.size() == 5)
            e.crop_s = {detail::parse_double(cells[3], path + ":" + std::to_string(line_no)),
                        detail::parse_double(cells[4], path + ":" + std::to_string(line_no))};
        entries.push_back(std::move(e));
    }
    return entries;
}

inline EegTrial apply_crop(EegTrial trial, const std::pair<double, double>& crop_s) {
    const long lo = static_cast<long>(std::llround(crop_s.first * trial.rate_hz));
    const long hi = static_cast<long>(std::llround(crop_s.second * trial.rate_hz));
    if (lo < 0 || hi > trial.samples.rows() || lo >= hi)
        throw std::runtime_error("crop interval outside trial");
    trial.samples = trial.samples.middleRows(lo, hi - lo).eval();
    return trial;
}

}  // namespace itropt
