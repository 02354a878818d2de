#pragma once

#include <optional>
#include <vector>

#include "pz/numerics.hpp"

namespace pz {

// One analysis window of audio.
struct Frame {
    Vec samples;
    double sample_rate = 8000.0;

    Eigen::Index size() const { return samples.size(); }
};

// Pole-zero speech production filter: denominator 1 + a_1 z^-1 + ... + a_K z^-K,
// numerator 1 + b_1 z^-1 + ... + b_L z^-L, scaled by gain.
struct PoleZeroModel {
    Vec a;  // K denominator coefficients (leading 1 implied)
    Vec b;  // L numerator coefficients (leading 1 implied)
    double gain = 1.0;

    Eigen::Index k_order() const { return a.size(); }
    Eigen::Index l_order() const { return b.size(); }
};

struct VemConfig {
    int k_order = 5;
    int l_order = 5;
    int block_size = 8;
    double hyper_c = 1e-6;   // gamma_m shape
    double hyper_d = 1e-6;   // gamma_m rate
    double hyper_e = 1.0;    // alpha_o shape
    double hyper_f = 1e-6;   // alpha_o rate
    double gamma_init = 10.0;
    double alpha_init = 1.0;
    int max_iters = 100;
    double elbo_rel_tol = 1e-6;
};

// Gaussian posterior q(e) = N(mean, covariance);
// autocorrelation = covariance + mean*mean'.
struct ResidualPosterior {
    Vec mean;
    Mat covariance;
    Mat autocorrelation;
    // log det covariance, cached by the E-step; recomputed on demand when a
    // test builds the posterior by hand.
    std::optional<double> log_det_covariance;
};

// Gamma posteriors for the block precisions alpha_o and the Gaussian
// component precision gamma_m.
struct PrecisionPosteriors {
    Vec alpha_shape;  // e~_o per block
    Vec alpha_rate;   // f~_o per block
    double gamma_shape = 0.0;  // c~
    double gamma_rate = 0.0;   // d~
};

struct VemState {
    Frame frame;
    VemConfig config;
    Vec a;  // current denominator estimate (K coefficients)
    Vec b;  // current numerator estimate (L coefficients)
    ResidualPosterior residual;
    PrecisionPosteriors precisions;
    Vec expected_alpha;     // E[alpha_o] per block, as used by the next E-step
    double expected_gamma;  // E[gamma_m]
    std::vector<int> block_sizes;  // D_o; last block may be ragged
    std::vector<double> elbo_trace;
    bool residual_valid = false;
    bool precisions_valid = false;

    Eigen::Index n_blocks() const {
        return static_cast<Eigen::Index>(block_sizes.size());
    }
    // Per-sample diagonal of E[Gamma_e].
    Vec expected_precision_diagonal() const;
};

struct AnalysisResult {
    PoleZeroModel model;
    Vec residual_mean;
    Vec expected_alpha;
    double expected_gamma = 0.0;
    int iterations = 0;
    double final_elbo = 0.0;
    bool converged = false;
    std::vector<double> elbo_trace;
};

// Caps E[alpha_o] so fully pruned blocks cannot overflow downstream products.
inline constexpr double kMaxAlphaExpectation = 1e12;

// run_vem analyses a copy of the frame normalized to this RMS level and maps
// the resulting posteriors back to the input scale. The fixed hyper-rates and
// initial precision expectations are absolute quantities, so the estimator's
// fixed-point structure depends on the signal level; pinning the level keeps
// results identical for the same waveform at any amplitude.
inline constexpr double kReferenceRms = 6.0;

VemState init_state(const Frame& frame, const VemConfig& config);

ResidualPosterior e_step_residual(const VemState& s);
PrecisionPosteriors e_step_alpha(const VemState& s);
PrecisionPosteriors e_step_gamma(const VemState& s);
Vec m_step_a(const VemState& s);
Vec m_step_b(const VemState& s);

// Normal equations of the b update: gram = E[F'F] and
// rhs = E[F'] A y - E[F' e], both closed forms in the residual posterior.
struct BNormalEquations {
    Mat gram;
    Vec rhs;
};
BNormalEquations m_step_b_equations(const VemState& s);

double elbo(const VemState& s);

AnalysisResult run_vem(const Frame& frame, const VemConfig& config);

// Gain convention shared by VEM and the baselines: RMS of the model-implied
// excitation B^-1 A y, so a unit-power input driving gain*B/A reproduces the
// frame's excitation-to-output power.
double excitation_gain(const PoleZeroModel& model, const Vec& y);

// Banded symmetric B'B for the monic filter [1, b] at dimension n.
Mat monic_gram(const Vec& b, Eigen::Index n);

// tr(sigma * B'B) using only the nonzero band of B'B.
double gram_weighted_trace(const Mat& sigma, const Vec& b);

}  // namespace pz
