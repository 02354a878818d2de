#pragma once

#include <vector>

#include "pz/vem.hpp"

namespace pz {

struct IrlsConfig {
    int max_iters = 50;
    double epsilon = 0.0;  // smoothing floor; 0 means 1e-8 * ||y||_inf
    double tol = 1e-8;     // relative coefficient-change stop
};

// Autocorrelation-method linear prediction solved by Levinson-Durbin.
// Returns the K coefficients of the monic prediction polynomial.
Vec lp2(const Frame& frame, int k);

// Least 1-norm linear prediction by iteratively reweighted least squares over
// the covariance rows n = k..N-1. The optional trace records the 1-norm
// objective after every solve.
Vec lp1(const Frame& frame, int k, const IrlsConfig& cfg = {},
        std::vector<double>* objective_trace = nullptr);

// Two-stage least squares pole-zero estimation: a long AR fit provides a
// residual that stands in for the excitation in a joint (a, b) solve.
// long_order <= 0 selects min(4*(k+l), N/4).
PoleZeroModel ts_ls_pz(const Frame& frame, int k, int l, int long_order = 0);

// Covariance-method LP minimizing over rows n = start..N-1 (start >= k).
Vec covariance_lp(const Vec& y, int k, Eigen::Index start);

// The TS-LS-PZ second stage with a caller-provided excitation estimate,
// solved over rows n = start..N-1. Returns [a; b].
Vec ts_ls_stage2(const Vec& y, const Vec& ehat, int k, int l,
                 Eigen::Index start);

// Prediction residual y(n) + sum_j a_j y(n-j) over rows n = start..N-1.
Vec prediction_residual(const Vec& y, const Vec& a, Eigen::Index start);

}  // namespace pz
