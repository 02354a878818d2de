#include "pz/synthesis.hpp"

#include <cmath>
#include <random>

namespace pz {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_lf(const LfParams& lf) {
    if (!(lf.Ee > 0)) throw InvalidInput("lf_pulse: Ee must be positive");
    if (!(0 < lf.Tp && lf.Tp < lf.Te && lf.Te <= lf.Tc && lf.Tc <= 1.0))
        throw InvalidInput("lf_pulse: need 0 < Tp < Te <= Tc <= 1");
    if (!(lf.Ta > 0)) throw InvalidInput("lf_pulse: Ta must be positive");
}

// Positive root of 1 - exp(-eps*(Tc-Te)) = eps*Ta (continuity at Te).
double solve_return_constant(const LfParams& lf) {
    const double span = lf.Tc - lf.Te;
    double eps = 1.0 / (lf.Ta + 1e-13);
    for (int i = 0; i < 100; ++i) {
        const double ex = std::exp(-eps * span);
        const double f = 1.0 - ex - eps * lf.Ta;
        const double df = span * ex - lf.Ta;
        if (df == 0.0) break;
        const double step = f / df;
        eps -= step;
        if (!(eps > 0.0)) eps = 1e-12;
        if (std::abs(step) < 1e-14 * std::max(eps, 1.0)) {
            if (std::abs(1.0 - std::exp(-eps * span) - eps * lf.Ta) < 1e-9)
                return eps;
        }
    }
    throw NumericalError("lf_pulse: return-phase constant solve failed");
}

// Open phase value at normalized time tau, written relative to the -Ee
// excursion at Te so that continuity holds by construction.
double open_phase(double tau, double alpha, const LfParams& lf) {
    const double wg = kPi / lf.Tp;
    return -lf.Ee * std::exp(alpha * (tau - lf.Te)) * std::sin(wg * tau) /
           std::sin(wg * lf.Te);
}

double return_phase(double tau, double eps, const LfParams& lf) {
    const double tail = std::exp(-eps * (lf.Tc - lf.Te));
    return -(lf.Ee / (eps * lf.Ta)) * (std::exp(-eps * (tau - lf.Te)) - tail);
}

}  // namespace

Vec lf_pulse(const LfParams& lf, double f0, double sample_rate) {
    validate_lf(lf);
    if (!(f0 > 0) || !(sample_rate > 0))
        throw InvalidInput("lf_pulse: f0 and sample rate must be positive");
    const double period = sample_rate / f0;
    if (period < 8.0) throw InvalidInput("lf_pulse: period below 8 samples");
    const auto p = static_cast<Eigen::Index>(std::llround(period));

    const double eps = solve_return_constant(lf);

    // Sampled return-phase and zero-segment sum; independent of alpha.
    double tail_sum = 0.0;
    std::vector<double> open_taus;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double tau = static_cast<double>(i) / static_cast<double>(p);
        if (tau <= lf.Te)
            open_taus.push_back(tau);
        else if (tau <= lf.Tc)
            tail_sum += return_phase(tau, eps, lf);
    }

    // Newton on the sampled period sum g(alpha) = sum open + tail_sum = 0;
    // d/dalpha of an open-phase sample is (tau - Te) times the sample.
    const double tol = 1e-12 * lf.Ee * static_cast<double>(p);
    auto sum_at = [&](double alpha) {
        double g = tail_sum;
        for (double tau : open_taus) g += open_phase(tau, alpha, lf);
        return g;
    };

    double alpha = 1.0;
    bool solved = false;
    for (int i = 0; i < 100; ++i) {
        double g = tail_sum;
        double dg = 0.0;
        for (double tau : open_taus) {
            const double v = open_phase(tau, alpha, lf);
            g += v;
            dg += (tau - lf.Te) * v;
        }
        if (std::abs(g) < tol) {
            solved = true;
            break;
        }
        if (dg == 0.0) break;
        double step = g / dg;
        if (std::abs(step) > 10.0) step = step > 0 ? 10.0 : -10.0;
        alpha -= step;
    }

    if (!solved) {
        // Bracket scan and bisection when Newton wanders.
        double lo = -100.0, hi = lo;
        double g_lo = sum_at(lo);
        bool bracketed = false;
        for (double x = lo + 2.0; x <= 300.0; x += 2.0) {
            const double g_x = sum_at(x);
            if (g_lo == 0.0 || g_lo * g_x < 0.0) {
                hi = x;
                bracketed = true;
                break;
            }
            lo = x;
            g_lo = g_x;
        }
        if (!bracketed)
            throw NumericalError("lf_pulse: area-balance solve failed");
        for (int i = 0; i < 200; ++i) {
            alpha = 0.5 * (lo + hi);
            const double g_mid = sum_at(alpha);
            if (std::abs(g_mid) < tol) break;
            if (g_lo * g_mid < 0.0)
                hi = alpha;
            else {
                lo = alpha;
                g_lo = g_mid;
            }
        }
        if (std::abs(sum_at(alpha)) >= tol)
            throw NumericalError("lf_pulse: area-balance solve failed");
    }

    Vec pulse(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double tau = static_cast<double>(i) / static_cast<double>(p);
        if (tau <= lf.Te)
            pulse[i] = open_phase(tau, alpha, lf);
        else if (tau <= lf.Tc)
            pulse[i] = return_phase(tau, eps, lf);
        else
            pulse[i] = 0.0;
    }
    return pulse;
}

PoleZeroModel build_resonator(const ResonatorSpec& spec) {
    if (!(spec.sample_rate > 0))
        throw InvalidInput("build_resonator: bad sample rate");
    const double nyquist = spec.sample_rate / 2.0;
    auto pair_poly = [&](const std::vector<Formant>& list) {
        Vec poly(1);
        poly[0] = 1.0;
        for (const Formant& f : list) {
            if (!(f.frequency_hz > 0) || f.frequency_hz >= nyquist)
                throw InvalidInput("build_resonator: frequency outside (0, Nyquist)");
            if (!(f.bandwidth_hz > 0))
                throw InvalidInput("build_resonator: bandwidth must be positive");
            const double r = std::exp(-kPi * f.bandwidth_hz / spec.sample_rate);
            const double theta = 2.0 * kPi * f.frequency_hz / spec.sample_rate;
            Vec quad(3);
            quad << 1.0, -2.0 * r * std::cos(theta), r * r;
            Vec next = Vec::Zero(poly.size() + 2);
            for (Eigen::Index i = 0; i < poly.size(); ++i)
                for (Eigen::Index j = 0; j < 3; ++j) next[i + j] += poly[i] * quad[j];
            poly = next;
        }
        return poly;
    };

    const Vec den = pair_poly(spec.formants);
    const Vec num = pair_poly(spec.antiformants);
    PoleZeroModel model;
    model.a = den.tail(den.size() - 1);
    model.b = num.tail(num.size() - 1);
    model.gain = 1.0;
    return model;
}

SynthFrame synth_frame(const SynthSpec& spec) {
    if (!(spec.f0 > 50.0) || !(spec.f0 < spec.sample_rate / 4.0))
        throw InvalidInput("synth_frame: f0 outside (50, fs/4)");
    if (spec.n_samples < 1) throw InvalidInput("synth_frame: empty frame");
    if (std::isnan(spec.ratio_db))
        throw InvalidInput("synth_frame: ratio_db must be finite or +inf");

    const PoleZeroModel model = build_resonator(spec.resonator);
    const Vec pulse = lf_pulse(spec.lf, spec.f0, spec.sample_rate);
    const Eigen::Index p = pulse.size();
    const Eigen::Index n = spec.n_samples;

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<Eigen::Index> offset_dist(0, p - 1);
    const Eigen::Index onset = offset_dist(rng);

    Vec e_true(n);
    for (Eigen::Index i = 0; i < n; ++i)
        e_true[i] = pulse[((i - onset) % p + p) % p];

    Vec m_true = Vec::Zero(n);
    if (std::isfinite(spec.ratio_db)) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) m_true[i] = normal(rng);
        const double scale =
            e_true.norm() / m_true.norm() * std::pow(10.0, -spec.ratio_db / 20.0);
        m_true *= scale;
    }

    Vec a_taps(model.a.size() + 1);
    a_taps[0] = 1.0;
    a_taps.tail(model.a.size()) = model.a;
    Vec b_taps(model.b.size() + 1);
    b_taps[0] = 1.0;
    b_taps.tail(model.b.size()) = model.b;

    SynthFrame frame;
    frame.y.samples = lt_toeplitz_solve(a_taps, fir_apply(b_taps, e_true) + m_true);
    frame.y.sample_rate = spec.sample_rate;
    frame.e_true = e_true;
    frame.m_true = m_true;
    frame.model_true = model;
    frame.pulse_onset = onset;
    frame.spec = spec;
    return frame;
}

}  // namespace pz
