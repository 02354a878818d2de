#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pz/baselines.hpp"
#include "pz/json_io.hpp"
#include "pz/mc.hpp"
#include "pz/metrics.hpp"
#include "pz/synthesis.hpp"
#include "pz/vem.hpp"
#include "pz/wav.hpp"

namespace {

std::vector<pz::Formant> parse_formant_list(const std::string& arg) {
    std::vector<pz::Formant> out;
    std::size_t pos = 0;
    while (pos < arg.size()) {
        std::size_t comma = arg.find(',', pos);
        if (comma == std::string::npos) comma = arg.size();
        const std::string tok = arg.substr(pos, comma - pos);
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos)
            throw pz::UsageError("bad formant '" + tok + "', expected F:BW");
        try {
            std::size_t used = 0;
            const double f = std::stod(tok.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument(tok);
            const double bw = std::stod(tok.substr(colon + 1), &used);
            if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
            out.push_back(pz::Formant{f, bw});
        } catch (const std::exception&) {
            throw pz::UsageError("bad formant '" + tok + "', expected F:BW");
        }
        pos = comma + 1;
    }
    return out;
}

double parse_ratio_db(const std::string& arg) {
    if (arg == "inf" || arg == "Inf" || arg == "INF")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
        return v;
    } catch (const std::exception&) {
        throw pz::UsageError("bad --ratio-db '" + arg +
                             "', expected a number or inf");
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void print_model_summary(const pz::PoleZeroModel& model) {
    std::printf("model: K=%d L=%d gain=%.9g\n",
                static_cast<int>(model.k_order()),
                static_cast<int>(model.l_order()), model.gain);
    std::printf("  a:");
    for (Eigen::Index i = 0; i < model.a.size(); ++i)
        std::printf(" %.9g", model.a[i]);
    std::printf("\n  b:");
    for (Eigen::Index i = 0; i < model.b.size(); ++i)
        std::printf(" %.9g", model.b[i]);
    std::printf("\n");
}

pz::ExperimentConfig example_config() {
    pz::ExperimentConfig cfg;
    cfg.f0_values = {200, 250, 300, 350, 400};
    cfg.runs = 500;
    cfg.master_seed = 20260101;
    cfg.output_csv = "table1.csv";
    cfg.synth.resonator.formants = {{257, 32}, {1891, 100}};
    cfg.synth.resonator.antiformants = {{1223, 52}};
    cfg.synth.ratio_db = 30.0;

    pz::MethodSpec lp2{"lp2", 10, 0, 1, 100, 1e-6};
    pz::MethodSpec lp1{"lp1", 10, 0, 1, 100, 1e-6};
    pz::MethodSpec ts{"ts-ls-pz", 5, 5, 1, 100, 1e-6};
    pz::MethodSpec ap{"vem-ap", 10, 0, 8, 100, 1e-6};
    cfg.methods = {lp2, lp1, ts, ap};
    for (int d : {1, 2, 4, 8})
        cfg.methods.push_back(pz::MethodSpec{"vem-pz", 5, 5, d, 100, 1e-6});
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pole-zero speech analysis with block-sparse excitation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic frame");
    double f0 = 200.0, fs = 8000.0;
    long long n_samples = 240;
    std::string formants = "257:32,1891:100", antiformants = "1223:52";
    std::string ratio_db = "30";
    std::uint64_t seed = 0;
    std::string synth_out = "frame.json", synth_wav;
    synth->add_option("--f0", f0, "Fundamental frequency, Hz");
    synth->add_option("--fs", fs, "Sample rate, Hz");
    synth->add_option("--n", n_samples, "Frame length, samples");
    synth->add_option("--formants", formants, "Pole pairs F:BW[,F:BW...]");
    synth->add_option("--antiformants", antiformants,
                      "Zero pairs F:BW[,F:BW...]");
    synth->add_option("--ratio-db", ratio_db,
                      "Block-sparse to Gaussian power ratio, dB (inf = none)");
    synth->add_option("--seed", seed, "RNG seed");
    synth->add_option("--out", synth_out, "Output synth-frame JSON path");
    synth->add_option("--wav", synth_wav,
                      "Optional WAV export (peak-normalized)");
    synth->callback([&]() {
        pz::SynthSpec spec;
        spec.f0 = f0;
        spec.sample_rate = fs;
        spec.n_samples = static_cast<Eigen::Index>(n_samples);
        spec.resonator.formants = parse_formant_list(formants);
        spec.resonator.antiformants = parse_formant_list(antiformants);
        spec.resonator.sample_rate = fs;
        spec.ratio_db = parse_ratio_db(ratio_db);
        spec.seed = seed;
        const pz::SynthFrame frame = pz::synth_frame(spec);
        pz::write_synth_frame(synth_out, frame);
        if (!synth_wav.empty()) {
            pz::Vec scaled = frame.y.samples;
            const double peak = scaled.cwiseAbs().maxCoeff();
            if (peak > 0.0) scaled *= 0.9 / peak;
            pz::write_wav(synth_wav, scaled, fs);
        }
        std::printf("wrote %s (N=%lld, F0=%.9g Hz)\n", synth_out.c_str(),
                    n_samples, f0);
        print_model_summary(frame.model_true);
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Fit a model to a frame");
    std::string in_path, method = "vem-pz", analyze_out = "result.json";
    std::string plot_csv;
    int k = 10, l = 10, block = 8, max_iter = 100;
    double tol = 1e-6;
    long long frame_index = 0, frame_len = 240, hop = 240;
    analyze->add_option("--in", in_path,
                        "Input frame: synth-frame JSON or mono 16-bit WAV")
        ->required();
    analyze->add_option("--method", method, "Estimation method")
        ->check(CLI::IsMember(
            {"vem-pz", "vem-ap", "lp2", "lp1", "ts-ls-pz"}));
    analyze->add_option("--k", k, "Denominator order");
    analyze->add_option("--l", l, "Numerator order");
    analyze->add_option("--block", block, "Sparse block size D (VEM)");
    analyze->add_option("--max-iter", max_iter, "Iteration cap");
    analyze->add_option("--tol", tol, "Relative convergence tolerance");
    analyze->add_option("--frame", frame_index, "Frame index (WAV input)");
    analyze->add_option("--frame-len", frame_len, "Frame length (WAV input)");
    analyze->add_option("--hop", hop, "Frame hop (WAV input)");
    analyze->add_option("--out", analyze_out, "Output analysis-result JSON");
    analyze->add_option("--plot-csv", plot_csv,
                        "Optional frequency-response CSV (512 points)");
    analyze->callback([&]() {
        pz::Frame frame;
        if (ends_with(in_path, ".wav")) {
            const auto frames = pz::read_wav_frames(
                in_path, static_cast<Eigen::Index>(frame_len),
                static_cast<Eigen::Index>(hop));
            if (frame_index < 0 ||
                frame_index >= static_cast<long long>(frames.size()))
                throw pz::UsageError(
                    "--frame " + std::to_string(frame_index) +
                    " out of range; file has " +
                    std::to_string(frames.size()) + " frames");
            frame = frames[static_cast<std::size_t>(frame_index)];
        } else {
            frame = pz::read_synth_frame(in_path).y;
        }
        pz::MethodSpec m;
        m.method = method;
        m.k = k;
        m.l = l;
        m.block_size = block;
        m.max_iters = max_iter;
        m.tol = tol;
        const pz::AnalysisResult result = pz::analyze_frame(frame, m);
        pz::write_analysis_result(analyze_out, result, method,
                                  frame.sample_rate);
        if (!plot_csv.empty()) {
            const pz::CVec h = pz::frequency_response(result.model, 512);
            std::string csv = "frequency_hz,magnitude_db\n";
            char line[64];
            for (int i = 0; i < 512; ++i) {
                const double hz = 0.5 * frame.sample_rate * i / 511.0;
                const double db =
                    20.0 * std::log10(std::max(std::abs(h[i]), 1e-300));
                std::snprintf(line, sizeof(line), "%.9g,%.9g\n", hz, db);
                csv += line;
            }
            std::ofstream out(plot_csv, std::ios::binary);
            if (!out) throw pz::FormatError("cannot open " + plot_csv);
            out << csv;
        }
        std::printf("%s: iterations=%d converged=%s gain=%.9g\n",
                    method.c_str(), result.iterations,
                    result.converged ? "yes" : "no", result.model.gain);
        if (!result.elbo_trace.empty())
            std::printf("final elbo: %.9g\n", result.final_elbo);
        std::printf("wrote %s\n", analyze_out.c_str());
    });

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo experiment grid");
    std::string config_path, mc_out, example_path;
    int threads = -1;
    mc->add_option("--config", config_path, "Experiment config JSON");
    mc->add_option("--out", mc_out, "Override output CSV path");
    mc->add_option("--threads", threads, "Worker thread count (0 = auto)");
    mc->add_option("--write-example", example_path,
                   "Write a full-grid example config and exit");
    mc->callback([&]() {
        if (!example_path.empty()) {
            pz::write_experiment_config(example_path, example_config());
            std::printf("wrote %s\n", example_path.c_str());
            return;
        }
        if (config_path.empty())
            throw pz::UsageError("mc: --config is required");
        pz::ExperimentConfig cfg = pz::read_experiment_config(config_path);
        if (!mc_out.empty()) cfg.output_csv = mc_out;
        if (threads >= 0) cfg.threads = threads;
        const auto rows = pz::run_experiment(cfg);
        pz::write_csv(cfg.output_csv, rows);
        std::printf("wrote %zu rows to %s\n", rows.size(),
                    cfg.output_csv.c_str());
    });

    // eval-sd
    auto* eval = app.add_subcommand(
        "eval-sd", "Spectral distortion between two model files");
    std::string truth_path, estimate_path;
    int order = 300;
    eval->add_option("--truth", truth_path, "Reference model JSON")->required();
    eval->add_option("--estimate", estimate_path, "Estimated model JSON")
        ->required();
    eval->add_option("--order", order, "Cepstral truncation order");
    eval->callback([&]() {
        const pz::PoleZeroModel truth = pz::read_model_any(truth_path);
        const pz::PoleZeroModel estimate = pz::read_model_any(estimate_path);
        std::printf("%.9g\n", pz::spectral_distortion(truth, estimate, order));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const pz::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const pz::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
