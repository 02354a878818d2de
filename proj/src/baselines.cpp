#include "pz/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace pz {

namespace {

// Rows n = start..N-1 of the LP design: column j holds y(n-j-1).
Mat lp_design(const Vec& y, int k, Eigen::Index start) {
    const Eigen::Index n = y.size();
    const Eigen::Index rows = n - start;
    Mat x(rows, k);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index j = 0; j < k; ++j) x(r, j) = y[start + r - j - 1];
    return x;
}

}  // namespace

Vec prediction_residual(const Vec& y, const Vec& a, Eigen::Index start) {
    const Eigen::Index n = y.size();
    Vec r(n - start);
    for (Eigen::Index i = start; i < n; ++i) {
        double acc = y[i];
        for (Eigen::Index j = 0; j < a.size(); ++j) acc += a[j] * y[i - j - 1];
        r[i - start] = acc;
    }
    return r;
}

Vec lp2(const Frame& frame, int k) {
    const Eigen::Index n = frame.size();
    if (k < 1) throw InvalidInput("lp2: order must be >= 1");
    if (n <= k) throw DimensionError("lp2: frame shorter than order+1");

    Vec r(k + 1);
    for (int j = 0; j <= k; ++j)
        r[j] = frame.samples.head(n - j).dot(frame.samples.tail(n - j));
    if (r[0] <= 0.0) throw InvalidInput("lp2: zero autocorrelation at lag 0");

    // Levinson-Durbin on the Toeplitz normal equations.
    Vec a = Vec::Zero(k);
    double err = r[0];
    for (int i = 1; i <= k; ++i) {
        double acc = r[i];
        for (int j = 1; j < i; ++j) acc += a[j - 1] * r[i - j];
        const double lambda = -acc / err;
        Vec prev = a.head(i - 1);
        for (int j = 1; j < i; ++j)
            a[j - 1] = prev[j - 1] + lambda * prev[i - j - 1];
        a[i - 1] = lambda;
        err *= 1.0 - lambda * lambda;
        if (err <= 0.0) throw NumericalError("lp2: prediction error collapsed");
    }
    return a;
}

Vec covariance_lp(const Vec& y, int k, Eigen::Index start) {
    if (k < 1) throw InvalidInput("covariance_lp: order must be >= 1");
    if (start < k) throw DimensionError("covariance_lp: start before order");
    if (y.size() - start < k)
        throw DimensionError("covariance_lp: too few rows");
    return solve_lls(lp_design(y, k, start), -y.tail(y.size() - start));
}

Vec lp1(const Frame& frame, int k, const IrlsConfig& cfg,
        std::vector<double>* objective_trace) {
    const Eigen::Index n = frame.size();
    if (k < 1) throw InvalidInput("lp1: order must be >= 1");
    if (n <= k) throw DimensionError("lp1: frame shorter than order+1");
    if (cfg.max_iters < 1) throw InvalidInput("lp1: max_iters must be >= 1");

    const Vec& y = frame.samples;
    const double eps = cfg.epsilon > 0.0
                           ? cfg.epsilon
                           : 1e-8 * y.cwiseAbs().maxCoeff();
    const Mat x = lp_design(y, k, k);
    const Vec target = -y.tail(n - k);

    Vec weights = Vec::Ones(x.rows());
    Vec a = Vec::Zero(k);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const Vec w_sqrt = weights.cwiseSqrt();
        const Vec a_new =
            solve_lls(w_sqrt.asDiagonal() * x, w_sqrt.cwiseProduct(target));
        const Vec residual = x * a_new - target;
        if (objective_trace)
            objective_trace->push_back(residual.lpNorm<1>());
        const double change = (a_new - a).norm();
        a = a_new;
        if (iter > 0 && change <= cfg.tol * std::max(a.norm(), 1.0)) break;
        weights = residual.cwiseAbs().cwiseMax(eps).cwiseInverse();
    }
    return a;
}

Vec ts_ls_stage2(const Vec& y, const Vec& ehat, int k, int l,
                 Eigen::Index start) {
    const Eigen::Index n = y.size();
    if (k < 1) throw InvalidInput("ts_ls_stage2: k must be >= 1");
    if (l < 0) throw InvalidInput("ts_ls_stage2: l must be >= 0");
    if (start < std::max<Eigen::Index>(k, l))
        throw DimensionError("ts_ls_stage2: start before max(k, l)");
    if (ehat.size() != n)
        throw DimensionError("ts_ls_stage2: excitation length mismatch");
    const Eigen::Index rows = n - start;
    if (rows < k + l) throw DimensionError("ts_ls_stage2: too few rows");

    Mat design(rows, k + l);
    Vec target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = start + r;
        for (int j = 0; j < k; ++j) design(r, j) = y[t - j - 1];
        for (int j = 0; j < l; ++j) design(r, k + j) = -ehat[t - j - 1];
        target[r] = ehat[t] - y[t];
    }
    return solve_lls(design, target);
}

PoleZeroModel ts_ls_pz(const Frame& frame, int k, int l, int long_order) {
    const Eigen::Index n = frame.size();
    if (k < 1 || l < 0) throw InvalidInput("ts_ls_pz: bad orders");
    int p = long_order;
    if (p <= 0)
        p = std::min(4 * (k + l), static_cast<int>(n / 4));
    if (p <= k + l) throw InvalidInput("ts_ls_pz: long_order must exceed k+l");
    if (n <= p) throw DimensionError("ts_ls_pz: frame shorter than long_order");

    const Vec& y = frame.samples;
    const Vec a_long = covariance_lp(y, p, p);
    Vec ehat = Vec::Zero(n);
    ehat.tail(n - p) = prediction_residual(y, a_long, p);

    const Vec theta = ts_ls_stage2(y, ehat, k, l, p + l);
    PoleZeroModel model;
    model.a = theta.head(k);
    model.b = theta.tail(l);
    model.gain = excitation_gain(model, y);
    return model;
}

}  // namespace pz
