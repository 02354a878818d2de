#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pz/synthesis.hpp"
#include "pz/vem.hpp"

namespace pz {

inline const std::vector<std::string> kMethodNames = {
    "vem-pz", "vem-ap", "lp2", "lp1", "ts-ls-pz"};

struct MethodSpec {
    std::string method = "vem-pz";
    int k = 10;
    int l = 0;
    int block_size = 1;  // VEM methods only
    int max_iters = 100;
    double tol = 1e-6;

    bool uses_blocks() const {
        return method == "vem-pz" || method == "vem-ap";
    }
};

struct ExperimentConfig {
    std::vector<double> f0_values;
    int runs = 1;
    std::vector<MethodSpec> methods;
    SynthSpec synth;  // template; f0 and seed are overwritten per run
    std::string output_csv = "results.csv";
    std::uint64_t master_seed = 0;
    int threads = 0;  // 0 = hardware concurrency
    int sd_order = 300;
};

struct ResultRow {
    std::string method;
    double f0_hz = 0.0;
    int block_size = 0;  // <= 0 rendered as n/a
    int k = 0;
    int l = 0;
    double sd_mean = 0.0;
    double sd_stderr = 0.0;
    int runs = 0;
    int failed_runs = 0;
};

// Runs one estimation method on one frame. Baseline methods fill the model
// and residual fields and leave the posterior summaries empty.
AnalysisResult analyze_frame(const Frame& frame, const MethodSpec& method);

// Deterministic per-run seed stream: independent of method list and of
// execution order.
std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t f0_index,
                       std::uint64_t run_index);

// Synthesizes runs frames per F0, analyzes each with every method, and
// aggregates spectral distortion. Single-run failures are counted, not
// fatal. Rows are sorted by (method, f0, block, k, l).
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

std::string csv_table(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace pz
