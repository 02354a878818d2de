#include "pz/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>
#include <tuple>

#include "pz/baselines.hpp"
#include "pz/metrics.hpp"

namespace pz {

namespace {

AnalysisResult baseline_result(PoleZeroModel model, Vec residual,
                               int iterations) {
    AnalysisResult r;
    r.model = std::move(model);
    r.residual_mean = std::move(residual);
    r.iterations = iterations;
    r.converged = true;
    return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

AnalysisResult analyze_frame(const Frame& frame, const MethodSpec& method) {
    const Vec& y = frame.samples;

    if (method.method == "vem-pz" || method.method == "vem-ap") {
        VemConfig cfg;
        cfg.k_order = method.k;
        cfg.l_order = method.method == "vem-ap" ? 0 : method.l;
        cfg.block_size = method.block_size;
        cfg.max_iters = method.max_iters;
        cfg.elbo_rel_tol = method.tol;
        return run_vem(frame, cfg);
    }
    if (method.method == "lp2") {
        PoleZeroModel model;
        model.a = lp2(frame, method.k);
        model.gain = excitation_gain(model, y);
        Vec monic(method.k + 1);
        monic[0] = 1.0;
        monic.tail(method.k) = model.a;
        return baseline_result(model, fir_apply(monic, y), 1);
    }
    if (method.method == "lp1") {
        IrlsConfig cfg;
        cfg.max_iters = method.max_iters;
        cfg.tol = method.tol;
        std::vector<double> trace;
        PoleZeroModel model;
        model.a = lp1(frame, method.k, cfg, &trace);
        model.gain = excitation_gain(model, y);
        Vec residual = Vec::Zero(y.size());
        residual.tail(y.size() - method.k) =
            prediction_residual(y, model.a, method.k);
        return baseline_result(model, std::move(residual),
                               static_cast<int>(trace.size()));
    }
    if (method.method == "ts-ls-pz") {
        PoleZeroModel model = ts_ls_pz(frame, method.k, method.l);
        Vec a_taps(method.k + 1);
        a_taps[0] = 1.0;
        a_taps.tail(method.k) = model.a;
        Vec b_taps(method.l + 1);
        b_taps[0] = 1.0;
        b_taps.tail(method.l) = model.b;
        Vec residual = lt_toeplitz_solve(b_taps, fir_apply(a_taps, y));
        return baseline_result(model, std::move(residual), 1);
    }
    throw InvalidInput("analyze_frame: unknown method '" + method.method + "'");
}

std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t f0_index,
                       std::uint64_t run_index) {
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ (f0_index + 1));
    s = splitmix64(s ^ (run_index + 1));
    return s;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    if (config.runs < 1) throw InvalidInput("run_experiment: runs must be >= 1");
    if (config.f0_values.empty())
        throw InvalidInput("run_experiment: no F0 values");
    if (config.methods.empty())
        throw InvalidInput("run_experiment: no methods");
    for (const MethodSpec& m : config.methods)
        if (std::find(kMethodNames.begin(), kMethodNames.end(), m.method) ==
            kMethodNames.end())
            throw InvalidInput("run_experiment: unknown method '" + m.method +
                               "'");

    const auto n_f0 = static_cast<int>(config.f0_values.size());
    const auto n_methods = static_cast<int>(config.methods.size());
    const int n_tasks = n_f0 * config.runs;

    // scores[(f0 * runs + run) * n_methods + m]; nullopt marks a failed run.
    std::vector<std::optional<double>> scores(
        static_cast<std::size_t>(n_tasks) * n_methods);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const int f0_idx = task / config.runs;
            const int run = task % config.runs;
            auto* slot = &scores[static_cast<std::size_t>(task) * n_methods];

            SynthSpec spec = config.synth;
            spec.f0 = config.f0_values[static_cast<std::size_t>(f0_idx)];
            spec.seed = run_seed(config.master_seed,
                                 static_cast<std::uint64_t>(f0_idx),
                                 static_cast<std::uint64_t>(run));
            SynthFrame truth;
            try {
                truth = synth_frame(spec);
            } catch (const std::exception&) {
                continue;  // all methods fail for this run
            }
            for (int m = 0; m < n_methods; ++m) {
                try {
                    const AnalysisResult est = analyze_frame(
                        truth.y, config.methods[static_cast<std::size_t>(m)]);
                    slot[m] = spectral_distortion(truth.model_true, est.model,
                                                  config.sd_order);
                } catch (const std::exception&) {
                }
            }
        }
    };

    int n_threads = config.threads > 0
                        ? config.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, n_tasks);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads) - 1);
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::vector<ResultRow> rows;
    rows.reserve(static_cast<std::size_t>(n_f0) * n_methods);
    for (int m = 0; m < n_methods; ++m) {
        const MethodSpec& spec = config.methods[static_cast<std::size_t>(m)];
        for (int f0_idx = 0; f0_idx < n_f0; ++f0_idx) {
            double sum = 0.0;
            int ok = 0;
            for (int run = 0; run < config.runs; ++run) {
                const auto& s =
                    scores[(static_cast<std::size_t>(f0_idx) * config.runs +
                            run) * n_methods + m];
                if (s) {
                    sum += *s;
                    ++ok;
                }
            }
            const double mean = ok > 0 ? sum / ok
                                       : std::numeric_limits<double>::quiet_NaN();
            double var = 0.0;
            for (int run = 0; run < config.runs; ++run) {
                const auto& s =
                    scores[(static_cast<std::size_t>(f0_idx) * config.runs +
                            run) * n_methods + m];
                if (s) var += (*s - mean) * (*s - mean);
            }
            const double stderr_ =
                ok > 1 ? std::sqrt(var / (ok - 1)) / std::sqrt(double(ok)) : 0.0;

            ResultRow row;
            row.method = spec.method;
            row.f0_hz = config.f0_values[static_cast<std::size_t>(f0_idx)];
            row.block_size = spec.uses_blocks() ? spec.block_size : 0;
            row.k = spec.k;
            row.l = spec.method == "vem-ap" || spec.method == "lp2" ||
                            spec.method == "lp1"
                        ? 0
                        : spec.l;
            row.sd_mean = mean;
            row.sd_stderr = stderr_;
            row.runs = config.runs;
            row.failed_runs = config.runs - ok;
            rows.push_back(std::move(row));
        }
    }

    std::sort(rows.begin(), rows.end(),
              [](const ResultRow& x, const ResultRow& y) {
                  return std::tie(x.method, x.f0_hz, x.block_size, x.k, x.l) <
                         std::tie(y.method, y.f0_hz, y.block_size, y.k, y.l);
              });
    return rows;
}

std::string csv_table(const std::vector<ResultRow>& rows) {
    std::string out =
        "method,f0_hz,block_size,k,l,sd_mean,sd_stderr,runs,failed_runs\n";
    for (const ResultRow& r : rows) {
        out += r.method;
        out += ',';
        out += format_double(r.f0_hz);
        out += ',';
        out += r.block_size > 0 ? std::to_string(r.block_size) : "n/a";
        out += ',';
        out += std::to_string(r.k);
        out += ',';
        out += std::to_string(r.l);
        out += ',';
        out += format_double(r.sd_mean);
        out += ',';
        out += format_double(r.sd_stderr);
        out += ',';
        out += std::to_string(r.runs);
        out += ',';
        out += std::to_string(r.failed_runs);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_csv: cannot open " + path);
    out << csv_table(rows);
    if (!out) throw FormatError("write_csv: write failed for " + path);
}

}  // namespace pz
