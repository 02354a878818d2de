#include "pz/vem.hpp"

#include <algorithm>
#include <cmath>

namespace pz {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Vec monic_taps(const Vec& tail) {
    Vec t(tail.size() + 1);
    t[0] = 1.0;
    if (tail.size() > 0) t.tail(tail.size()) = tail;
    return t;
}

// Entropy of Gamma(shape, rate).
double gamma_entropy(double shape, double rate) {
    return shape - std::log(rate) + std::lgamma(shape) +
           (1.0 - shape) * digamma(shape);
}

}  // namespace

Vec VemState::expected_precision_diagonal() const {
    Vec diag(frame.size());
    Eigen::Index pos = 0;
    for (Eigen::Index o = 0; o < n_blocks(); ++o) {
        diag.segment(pos, block_sizes[o]).setConstant(expected_alpha[o]);
        pos += block_sizes[o];
    }
    return diag;
}

Mat monic_gram(const Vec& b, Eigen::Index n) {
    const Vec c = monic_taps(b);
    const Eigen::Index band = std::min<Eigen::Index>(c.size() - 1, n - 1);
    Mat g = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index imin = std::max<Eigen::Index>(0, j - band);
        for (Eigen::Index i = imin; i <= j; ++i) {
            const Eigen::Index d = j - i;
            const Eigen::Index tmax =
                std::min<Eigen::Index>(c.size() - 1 - d, n - 1 - j);
            double acc = 0.0;
            for (Eigen::Index t = 0; t <= tmax; ++t) acc += c[t] * c[t + d];
            g(i, j) = acc;
            g(j, i) = acc;
        }
    }
    return g;
}

double gram_weighted_trace(const Mat& sigma, const Vec& b) {
    const Eigen::Index n = sigma.rows();
    const Vec c = monic_taps(b);
    const Eigen::Index band = std::min<Eigen::Index>(c.size() - 1, n - 1);
    double total = 0.0;
    for (Eigen::Index d = 0; d <= band; ++d) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i + d < n; ++i) {
            const Eigen::Index j = i + d;
            const Eigen::Index tmax =
                std::min<Eigen::Index>(c.size() - 1 - d, n - 1 - j);
            double gij = 0.0;
            for (Eigen::Index t = 0; t <= tmax; ++t) gij += c[t] * c[t + d];
            acc += sigma(i, j) * gij;
        }
        total += (d == 0) ? acc : 2.0 * acc;
    }
    return total;
}

VemState init_state(const Frame& frame, const VemConfig& config) {
    if (config.k_order < 0 || config.l_order < 0)
        throw InvalidInput("init_state: negative model order");
    if (config.block_size < 1) throw InvalidInput("init_state: block size < 1");
    if (config.hyper_c <= 0 || config.hyper_d <= 0 || config.hyper_e <= 0 ||
        config.hyper_f <= 0 || config.gamma_init <= 0 || config.alpha_init <= 0)
        throw InvalidInput("init_state: hyperparameters must be positive");
    if (config.max_iters < 1) throw InvalidInput("init_state: max_iters < 1");

    const Eigen::Index n = frame.size();
    if (n < config.k_order + config.l_order + 1)
        throw DimensionError("init_state: frame shorter than K+L+1");
    if (!frame.samples.allFinite())
        throw InvalidInput("init_state: non-finite sample");
    if (frame.samples.isZero(0.0))
        throw InvalidInput("init_state: all-zero frame");

    VemState s;
    s.frame = frame;
    s.config = config;
    s.a = Vec::Zero(config.k_order);
    s.b = Vec::Zero(config.l_order);

    const Eigen::Index d = config.block_size;
    const Eigen::Index o = (n + d - 1) / d;
    s.block_sizes.assign(o, static_cast<int>(d));
    if (n % d != 0) s.block_sizes.back() = static_cast<int>(n - d * (o - 1));

    s.expected_alpha = Vec::Constant(o, config.alpha_init);
    s.expected_gamma = config.gamma_init;
    s.precisions.alpha_shape = Vec::Zero(o);
    s.precisions.alpha_rate = Vec::Zero(o);
    return s;
}

ResidualPosterior e_step_residual(const VemState& s) {
    const Eigen::Index n = s.frame.size();
    if (!(s.expected_gamma > 0) || !std::isfinite(s.expected_gamma))
        throw InvalidInput("e_step_residual: invalid E[gamma_m]");
    const Vec gamma_e = s.expected_precision_diagonal();
    if (!(gamma_e.minCoeff() > 0) || !gamma_e.allFinite())
        throw InvalidInput("e_step_residual: invalid E[Gamma_e]");

    // precision = E[gamma_m] B'B + E[Gamma_e]
    Mat precision = s.expected_gamma * monic_gram(s.b, n);
    precision.diagonal() += gamma_e;

    const SpdFactor factor(precision);
    const Vec ay = fir_apply(monic_taps(s.a), s.frame.samples);
    const Vec bt_ay = fir_apply_transpose(monic_taps(s.b), ay);

    ResidualPosterior post;
    post.mean = s.expected_gamma * factor.solve(bt_ay);
    post.covariance = factor.inverse();
    post.autocorrelation = post.covariance + post.mean * post.mean.transpose();
    post.log_det_covariance = -factor.log_det();
    return post;
}

PrecisionPosteriors e_step_alpha(const VemState& s) {
    if (!s.residual_valid)
        throw InvalidInput("e_step_alpha: residual posterior not available");
    PrecisionPosteriors p = s.precisions;
    const Eigen::Index o = s.n_blocks();
    p.alpha_shape.resize(o);
    p.alpha_rate.resize(o);
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < o; ++i) {
        const Eigen::Index d = s.block_sizes[i];
        p.alpha_shape[i] = s.config.hyper_e + 0.5 * static_cast<double>(d);
        p.alpha_rate[i] = s.config.hyper_f +
            0.5 * s.residual.autocorrelation.diagonal().segment(pos, d).sum();
        pos += d;
    }
    return p;
}

PrecisionPosteriors e_step_gamma(const VemState& s) {
    if (!s.residual_valid)
        throw InvalidInput("e_step_gamma: residual posterior not available");
    PrecisionPosteriors p = s.precisions;
    const Eigen::Index n = s.frame.size();
    const Vec ay = fir_apply(monic_taps(s.a), s.frame.samples);
    const Vec b_mu = fir_apply(monic_taps(s.b), s.residual.mean);
    const double trace_term = gram_weighted_trace(s.residual.covariance, s.b);
    p.gamma_shape = s.config.hyper_c + 0.5 * static_cast<double>(n);
    p.gamma_rate = s.config.hyper_d +
                   0.5 * (trace_term + (ay - b_mu).squaredNorm());
    return p;
}

Vec m_step_a(const VemState& s) {
    if (!s.residual_valid)
        throw InvalidInput("m_step_a: residual posterior not available");
    const Eigen::Index n = s.frame.size();
    const Eigen::Index k = s.config.k_order;
    if (k == 0) return Vec();
    // C column j holds y delayed by j+1 samples; first row is zero.
    Mat c = Mat::Zero(n, k);
    for (Eigen::Index j = 0; j < k; ++j)
        c.col(j).tail(n - j - 1) = s.frame.samples.head(n - j - 1);
    const Vec target =
        fir_apply(monic_taps(s.b), s.residual.mean) - s.frame.samples;
    return solve_lls(c, target);
}

BNormalEquations m_step_b_equations(const VemState& s) {
    if (!s.residual_valid)
        throw InvalidInput("m_step_b: residual posterior not available");
    const Eigen::Index n = s.frame.size();
    const Eigen::Index l = s.config.l_order;
    const Mat& r = s.residual.autocorrelation;
    const Vec& mu = s.residual.mean;
    const Vec ay = fir_apply(monic_taps(s.a), s.frame.samples);

    BNormalEquations eq;
    // E[F'F](i,j) = sum_{t} R(t, t+j-i), truncated at row N-j.
    eq.gram.resize(l, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            double acc = 0.0;
            for (Eigen::Index t = 0; t < n - (j + 1); ++t)
                acc += r(t, t + (j - i));
            eq.gram(i, j) = acc;
            eq.gram(j, i) = acc;
        }
    }
    // rhs_l = sum_t mu(t) Ay(t+l) - sum_t R(t, t+l)
    eq.rhs.resize(l);
    for (Eigen::Index j = 0; j < l; ++j) {
        const Eigen::Index lag = j + 1;
        double acc = 0.0;
        for (Eigen::Index t = 0; t + lag < n; ++t)
            acc += mu[t] * ay[t + lag] - r(t, t + lag);
        eq.rhs[j] = acc;
    }
    return eq;
}

Vec m_step_b(const VemState& s) {
    const Eigen::Index l = s.config.l_order;
    if (l == 0) {
        if (!s.residual_valid)
            throw InvalidInput("m_step_b: residual posterior not available");
        return Vec();
    }
    const BNormalEquations eq = m_step_b_equations(s);
    try {
        return solve_spd(eq.gram, eq.rhs);
    } catch (const NumericalError&) {
        throw RankError("m_step_b: singular E[F'F]");
    }
}

double elbo(const VemState& s) {
    if (!s.residual_valid || !s.precisions_valid)
        throw InvalidInput("elbo: posteriors not populated");
    const Eigen::Index n = s.frame.size();
    const Eigen::Index o = s.n_blocks();
    const VemConfig& cfg = s.config;
    const PrecisionPosteriors& p = s.precisions;

    const double e_gamma = p.gamma_shape / p.gamma_rate;
    const double e_log_gamma = digamma(p.gamma_shape) - std::log(p.gamma_rate);

    const Vec ay = fir_apply(monic_taps(s.a), s.frame.samples);
    const Vec b_mu = fir_apply(monic_taps(s.b), s.residual.mean);
    const double expected_sq_residual =
        (ay - b_mu).squaredNorm() +
        gram_weighted_trace(s.residual.covariance, s.b);

    double value = 0.5 * n * e_log_gamma - 0.5 * n * kLog2Pi -
                   0.5 * e_gamma * expected_sq_residual;

    // E[log p(e | alpha)] and the alpha prior/entropy terms, block by block.
    Eigen::Index pos = 0;
    const double log_f = std::log(cfg.hyper_f);
    const double lg_e = std::lgamma(cfg.hyper_e);
    for (Eigen::Index i = 0; i < o; ++i) {
        const Eigen::Index d = s.block_sizes[i];
        const double e_alpha = p.alpha_shape[i] / p.alpha_rate[i];
        const double e_log_alpha =
            digamma(p.alpha_shape[i]) - std::log(p.alpha_rate[i]);
        const double block_power =
            s.residual.autocorrelation.diagonal().segment(pos, d).sum();
        value += 0.5 * d * e_log_alpha - 0.5 * d * kLog2Pi -
                 0.5 * e_alpha * block_power;
        value += cfg.hyper_e * log_f - lg_e +
                 (cfg.hyper_e - 1.0) * e_log_alpha - cfg.hyper_f * e_alpha;
        value += gamma_entropy(p.alpha_shape[i], p.alpha_rate[i]);
        pos += d;
    }

    value += cfg.hyper_c * std::log(cfg.hyper_d) - std::lgamma(cfg.hyper_c) +
             (cfg.hyper_c - 1.0) * e_log_gamma - cfg.hyper_d * e_gamma;

    const double log_det_sigma =
        s.residual.log_det_covariance
            ? *s.residual.log_det_covariance
            : SpdFactor(s.residual.covariance).log_det();
    value += 0.5 * n * (1.0 + kLog2Pi) + 0.5 * log_det_sigma;
    value += gamma_entropy(p.gamma_shape, p.gamma_rate);
    return value;
}

double excitation_gain(const PoleZeroModel& model, const Vec& y) {
    const Vec ay = fir_apply(monic_taps(model.a), y);
    const Vec excitation = lt_toeplitz_solve(monic_taps(model.b), ay);
    return excitation.norm() / std::sqrt(static_cast<double>(y.size()));
}

AnalysisResult run_vem(const Frame& frame, const VemConfig& config) {
    // The fixed hyperpriors and initial expectations are calibrated for a
    // specific signal level; analysing a level-normalized copy keeps the
    // estimator's behaviour independent of input scale. Reported posteriors
    // are mapped back to the caller's scale below.
    const double rms =
        std::sqrt(frame.samples.squaredNorm() /
                  static_cast<double>(std::max<Eigen::Index>(frame.size(), 1)));
    const double level = rms > 0.0 ? kReferenceRms / rms : 1.0;
    const Frame scaled{frame.samples * level, frame.sample_rate};

    VemState s = init_state(scaled, config);
    bool converged = false;
    int sweeps = 0;

    for (int iter = 0; iter < config.max_iters; ++iter) {
        s.residual = e_step_residual(s);
        s.residual_valid = true;

        s.precisions = e_step_alpha(s);
        s.expected_alpha = (s.precisions.alpha_shape.array() /
                            s.precisions.alpha_rate.array())
                               .min(kMaxAlphaExpectation)
                               .matrix();

        s.precisions = e_step_gamma(s);
        s.precisions_valid = true;
        s.expected_gamma = s.precisions.gamma_shape / s.precisions.gamma_rate;

        s.elbo_trace.push_back(elbo(s));
        ++sweeps;

        const size_t t = s.elbo_trace.size();
        if (t >= 2) {
            const double prev = s.elbo_trace[t - 2];
            const double cur = s.elbo_trace[t - 1];
            if (std::abs(cur - prev) <= config.elbo_rel_tol * std::abs(prev)) {
                converged = true;
                break;
            }
        }

        try {
            if (config.k_order > 0) s.a = m_step_a(s);
            if (config.l_order > 0) s.b = m_step_b(s);
        } catch (const RankError& err) {
            throw RankError(std::string(err.what()) + " (sweep " +
                            std::to_string(iter + 1) + ")");
        }
    }

    AnalysisResult result;
    result.model.a = s.a;
    result.model.b = s.b;
    result.model.gain = excitation_gain(result.model, frame.samples);
    result.residual_mean = s.residual.mean / level;
    result.expected_alpha = s.expected_alpha * (level * level);
    result.expected_gamma = s.expected_gamma * (level * level);
    result.iterations = sweeps;
    result.final_elbo = s.elbo_trace.back();
    result.converged = converged;
    result.elbo_trace = s.elbo_trace;
    return result;
}

}  // namespace pz
