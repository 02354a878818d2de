#include "pz/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace pz {

FirCoefficients::FirCoefficients(Vec t) : taps(std::move(t)) {
    if (taps.size() == 0) throw DimensionError("FirCoefficients: empty taps");
    if (taps[0] != 1.0) throw InvalidInput("FirCoefficients: taps[0] must be 1");
    if (!taps.allFinite()) throw InvalidInput("FirCoefficients: non-finite tap");
}

FirCoefficients FirCoefficients::monic(const Vec& tail) {
    Vec t(tail.size() + 1);
    t[0] = 1.0;
    t.tail(tail.size()) = tail;
    return FirCoefficients(std::move(t));
}

LtToeplitz::LtToeplitz(Vec first_column) : first_column_(std::move(first_column)) {
    if (first_column_.size() == 0)
        throw DimensionError("LtToeplitz: empty first column");
}

LtToeplitz build_lt_toeplitz(const Vec& coeffs, Eigen::Index n) {
    if (coeffs.size() > n)
        throw DimensionError("build_lt_toeplitz: coeffs longer than dimension");
    Vec col = Vec::Zero(n);
    col.head(coeffs.size()) = coeffs;
    return LtToeplitz(std::move(col));
}

Vec LtToeplitz::apply(const Vec& x) const {
    if (x.size() != dim())
        throw DimensionError("LtToeplitz::apply: size mismatch");
    return fir_apply(first_column_, x);
}

Vec LtToeplitz::apply_transpose(const Vec& x) const {
    if (x.size() != dim())
        throw DimensionError("LtToeplitz::apply_transpose: size mismatch");
    return fir_apply_transpose(first_column_, x);
}

Vec LtToeplitz::solve(const Vec& rhs) const {
    if (rhs.size() != dim())
        throw DimensionError("LtToeplitz::solve: size mismatch");
    return lt_toeplitz_solve(first_column_, rhs);
}

Mat LtToeplitz::dense() const {
    const Eigen::Index n = dim();
    Mat m = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i) m(i, j) = first_column_[i - j];
    return m;
}

Vec fir_apply(const Vec& coeffs, const Vec& x) {
    if (x.size() == 0) throw DimensionError("fir_apply: empty input");
    if (coeffs.size() == 0) throw DimensionError("fir_apply: empty coeffs");
    const Eigen::Index n = x.size();
    const Eigen::Index m = std::min<Eigen::Index>(coeffs.size(), n);
    Vec out = Vec::Zero(n);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (coeffs[k] == 0.0) continue;
        out.tail(n - k) += coeffs[k] * x.head(n - k);
    }
    return out;
}

Vec fir_apply(const FirCoefficients& coeffs, const Vec& x) {
    return fir_apply(coeffs.taps, x);
}

Vec fir_apply_transpose(const Vec& coeffs, const Vec& x) {
    if (x.size() == 0) throw DimensionError("fir_apply_transpose: empty input");
    const Eigen::Index n = x.size();
    const Eigen::Index m = std::min<Eigen::Index>(coeffs.size(), n);
    Vec out = Vec::Zero(n);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (coeffs[k] == 0.0) continue;
        out.head(n - k) += coeffs[k] * x.tail(n - k);
    }
    return out;
}

Vec lt_toeplitz_solve(const Vec& coeffs, const Vec& rhs) {
    if (rhs.size() == 0) throw DimensionError("lt_toeplitz_solve: empty rhs");
    if (coeffs.size() == 0 || coeffs[0] == 0.0)
        throw NumericalError("lt_toeplitz_solve: zero diagonal");
    const Eigen::Index n = rhs.size();
    const Eigen::Index m = std::min<Eigen::Index>(coeffs.size() - 1, n);
    const double inv_c0 = 1.0 / coeffs[0];
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = rhs[i];
        const Eigen::Index kmax = std::min<Eigen::Index>(m, i);
        for (Eigen::Index k = 1; k <= kmax; ++k) acc -= coeffs[k] * x[i - k];
        x[i] = acc * inv_c0;
    }
    return x;
}

SpdFactor::SpdFactor(const Mat& m) : n_(m.rows()) {
    if (m.rows() != m.cols()) throw DimensionError("SpdFactor: not square");
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
        throw InvalidInput("SpdFactor: matrix not symmetric");

    const double base = m.trace() / static_cast<double>(n_);
    const double jitters[] = {0.0, 1e-12, 1e-10, 1e-8};
    for (double j : jitters) {
        Mat work = m;
        if (j > 0.0) work.diagonal().array() += j * base;
        llt_.compute(work);
        if (llt_.info() == Eigen::Success) return;
    }
    throw NumericalError("SpdFactor: matrix not positive definite");
}

Vec SpdFactor::solve(const Vec& rhs) const {
    if (rhs.size() != n_) throw DimensionError("SpdFactor::solve: size mismatch");
    return llt_.solve(rhs);
}

Mat SpdFactor::solve(const Mat& rhs) const {
    if (rhs.rows() != n_) throw DimensionError("SpdFactor::solve: size mismatch");
    return llt_.solve(rhs);
}

Mat SpdFactor::inverse() const {
    return llt_.solve(Mat::Identity(n_, n_));
}

double SpdFactor::log_det() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Vec solve_spd(const Mat& m, const Vec& rhs) { return SpdFactor(m).solve(rhs); }

Mat spd_inverse(const Mat& m) { return SpdFactor(m).inverse(); }

Vec solve_lls(const Mat& design, const Vec& target) {
    if (design.rows() != target.size())
        throw DimensionError("solve_lls: row/target mismatch");
    if (design.cols() == 0) throw DimensionError("solve_lls: no columns");
    Eigen::JacobiSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv[0] == 0.0 || sv[sv.size() - 1] < 1e-10 * sv[0])
        throw RankError("solve_lls: rank-deficient design matrix");
    return svd.solve(target);
}

CVec poly_roots(const Vec& coeffs) {
    if (coeffs.size() < 2) throw DimensionError("poly_roots: degree must be >= 1");
    if (coeffs[0] != 1.0) throw InvalidInput("poly_roots: polynomial must be monic");
    const Eigen::Index d = coeffs.size() - 1;
    Mat companion = Mat::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) companion(0, j) = -coeffs[j + 1];
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalError("poly_roots: eigenvalue iteration failed");
    return es.eigenvalues();
}

Vec poly_from_roots(const CVec& roots) {
    std::vector<std::complex<double>> p{1.0};
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        std::vector<std::complex<double>> q(p.size() + 1, 0.0);
        for (size_t k = 0; k < p.size(); ++k) {
            q[k] += p[k];
            q[k + 1] -= p[k] * roots[i];
        }
        p = std::move(q);
    }
    Vec out(p.size());
    for (size_t k = 0; k < p.size(); ++k) out[k] = p[k].real();
    return out;
}

std::complex<double> poly_eval(const Vec& coeffs, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) acc = acc * z + coeffs[i];
    return acc;
}

double digamma(double x) {
    if (!(x > 0.0)) throw InvalidInput("digamma: requires x > 0");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                      inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return result;
}

}  // namespace pz
