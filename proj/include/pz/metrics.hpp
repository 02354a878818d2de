#pragma once

#include "pz/vem.hpp"

namespace pz {

// One-sided power cepstrum c_0..c_S of a minimum-phase model; the two-sided
// sequence is symmetric.
struct CepstralCoefficients {
    Vec values;

    Eigen::Index order() const { return values.size() - 1; }
};

// Reflects every root with modulus > 1 to 1/conj(rho) and rescales the gain
// so the magnitude response is unchanged. Roots within 1e-8 of the unit
// circle are rejected.
PoleZeroModel minimum_phase(const PoleZeroModel& model);

// c_0 = 2 log|gain|, c_n = (sum_i p_i^n - sum_i q_i^n) / n over poles p and
// zeros q. Requires a minimum-phase model.
CepstralCoefficients power_cepstrum(const PoleZeroModel& model, int s);

// Truncated power-cepstral distortion 2 * sum_{n=1..s} (c_n - c^_n)^2 after
// reflecting both models to minimum phase; gain-invariant (c_0 excluded).
double spectral_distortion(const PoleZeroModel& truth,
                           const PoleZeroModel& estimate, int s = 300);

// |X_k|^2 / N over an nfft-point transform of the zero-padded frame.
Vec periodogram(const Frame& frame, Eigen::Index nfft);

// ||x||_1 / (sqrt(N) ||x||_2), in (0, 1]; lower means sparser.
double sparsity_ratio(const Vec& x);

// H(e^{jw}) at n_points frequencies uniformly covering [0, pi] inclusive.
CVec frequency_response(const PoleZeroModel& model, int n_points = 512);

}  // namespace pz
