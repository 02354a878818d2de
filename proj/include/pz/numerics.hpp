#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "pz/errors.hpp"

namespace pz {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Monic FIR tap vector [1, c_1, ..., c_M].
struct FirCoefficients {
    Vec taps;

    explicit FirCoefficients(Vec t);
    // Builds [1, tail...] from the coefficients after the leading one.
    static FirCoefficients monic(const Vec& tail);
    Eigen::Index order() const { return taps.size() - 1; }
};

// N x N lower triangular Toeplitz operator defined by its first column.
// Products and solves stream in O(N*M); the dense form is for tests and
// small-N oracles only.
class LtToeplitz {
public:
    explicit LtToeplitz(Vec first_column);

    Eigen::Index dim() const { return first_column_.size(); }
    const Vec& first_column() const { return first_column_; }
    bool unit_diagonal() const { return first_column_[0] == 1.0; }

    Vec apply(const Vec& x) const;            // T x
    Vec apply_transpose(const Vec& x) const;  // T' x
    Vec solve(const Vec& rhs) const;          // forward substitution
    Mat dense() const;

private:
    Vec first_column_;
};

// First column = coeffs zero-padded to length n.
LtToeplitz build_lt_toeplitz(const Vec& coeffs, Eigen::Index n);

// Causal FIR filtering with zero initial conditions:
// out[i] = sum_k coeffs[k] * x[i-k].
Vec fir_apply(const Vec& coeffs, const Vec& x);
Vec fir_apply(const FirCoefficients& coeffs, const Vec& x);

// out[i] = sum_k coeffs[k] * x[i+k]  (transpose of the Toeplitz operator).
Vec fir_apply_transpose(const Vec& coeffs, const Vec& x);

// Solves T x = rhs for lower triangular Toeplitz T with first column
// coeffs (coeffs[0] != 0); this is IIR filtering of rhs by 1/C(z).
Vec lt_toeplitz_solve(const Vec& coeffs, const Vec& rhs);

// Cholesky factorization of a symmetric positive definite matrix with a
// fixed jitter escalation (0, 1e-12, 1e-10, 1e-8 times trace/N) before
// giving up.
class SpdFactor {
public:
    explicit SpdFactor(const Mat& m);

    Vec solve(const Vec& rhs) const;
    Mat solve(const Mat& rhs) const;
    Mat inverse() const;
    double log_det() const;

private:
    Eigen::LLT<Mat> llt_;
    Eigen::Index n_;
};

Vec solve_spd(const Mat& m, const Vec& rhs);
Mat spd_inverse(const Mat& m);

// Least squares min ||design*x - target||_2 via SVD. Throws RankError when
// the smallest singular value is below 1e-10 times the largest.
Vec solve_lls(const Mat& design, const Vec& target);

// Roots of the monic polynomial coeffs[0]=1 in descending powers, via
// companion-matrix eigenvalues.
CVec poly_roots(const Vec& coeffs);

// Expands prod_i (z - roots[i]) into monic descending coefficients.
// Imaginary parts must cancel (conjugate-closed root sets).
Vec poly_from_roots(const CVec& roots);

std::complex<double> poly_eval(const Vec& coeffs, std::complex<double> z);

double digamma(double x);

}  // namespace pz
