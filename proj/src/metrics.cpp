#include "pz/metrics.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace pz {

namespace {

// Roots of the monic polynomial 1 + tail_1 x + ... + tail_M x^M in x = z^-1,
// mapped to the z plane (poles/zeros of the rational filter).
CVec monic_roots(const Vec& tail) {
    if (tail.size() == 0) return CVec(0);
    Vec coeffs(tail.size() + 1);
    coeffs[0] = 1.0;
    coeffs.tail(tail.size()) = tail;
    return poly_roots(coeffs);
}

// Reflects out-of-circle roots and accumulates the per-root modulus into
// scale. Returns true when anything moved.
bool reflect_inside(CVec& roots, double& scale) {
    bool changed = false;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        const double m = std::abs(roots[i]);
        if (std::abs(m - 1.0) <= 1e-8) {
            std::ostringstream msg;
            msg << "minimum_phase: root on the unit circle (" << roots[i].real()
                << (roots[i].imag() < 0 ? " - " : " + ")
                << std::abs(roots[i].imag()) << "i)";
            throw NumericalError(msg.str());
        }
        if (m > 1.0) {
            roots[i] = roots[i] / (m * m);
            scale *= m;
            changed = true;
        }
    }
    return changed;
}

void fft_inplace(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t base = 0; base < n; base += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = x[base + k];
                const auto v = x[base + k + len / 2] * w;
                x[base + k] = u + v;
                x[base + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

PoleZeroModel minimum_phase(const PoleZeroModel& model) {
    PoleZeroModel out = model;

    CVec zeros = monic_roots(model.b);
    double zero_scale = 1.0;
    if (reflect_inside(zeros, zero_scale)) {
        out.b = poly_from_roots(zeros).tail(model.b.size());
        out.gain *= zero_scale;
    }

    CVec poles = monic_roots(model.a);
    double pole_scale = 1.0;
    if (reflect_inside(poles, pole_scale)) {
        out.a = poly_from_roots(poles).tail(model.a.size());
        out.gain /= pole_scale;
    }
    return out;
}

CepstralCoefficients power_cepstrum(const PoleZeroModel& model, int s) {
    if (s < 0) throw InvalidInput("power_cepstrum: negative order");
    if (model.gain == 0.0 || !std::isfinite(model.gain))
        throw InvalidInput("power_cepstrum: gain must be finite and nonzero");

    const CVec poles = monic_roots(model.a);
    const CVec zeros = monic_roots(model.b);
    for (const CVec* roots : {&poles, &zeros})
        for (Eigen::Index i = 0; i < roots->size(); ++i)
            if (std::abs((*roots)[i]) >= 1.0)
                throw InvalidInput("power_cepstrum: model is not minimum phase");

    CepstralCoefficients c;
    c.values = Vec::Zero(s + 1);
    c.values[0] = 2.0 * std::log(std::abs(model.gain));
    CVec ppow = CVec::Ones(poles.size());
    CVec qpow = CVec::Ones(zeros.size());
    for (int n = 1; n <= s; ++n) {
        ppow = ppow.cwiseProduct(poles);
        qpow = qpow.cwiseProduct(zeros);
        c.values[n] = (ppow.sum().real() - qpow.sum().real()) / n;
    }
    return c;
}

double spectral_distortion(const PoleZeroModel& truth,
                           const PoleZeroModel& estimate, int s) {
    if (s < 1) throw InvalidInput("spectral_distortion: order must be >= 1");
    const CepstralCoefficients ct = power_cepstrum(minimum_phase(truth), s);
    const CepstralCoefficients ce = power_cepstrum(minimum_phase(estimate), s);
    return 2.0 * (ct.values.tail(s) - ce.values.tail(s)).squaredNorm();
}

Vec periodogram(const Frame& frame, Eigen::Index nfft) {
    const Eigen::Index n = frame.size();
    if (n < 1) throw DimensionError("periodogram: empty frame");
    if (nfft < n) throw DimensionError("periodogram: nfft smaller than frame");
    if ((nfft & (nfft - 1)) != 0)
        throw InvalidInput("periodogram: nfft must be a power of two");

    std::vector<std::complex<double>> x(static_cast<std::size_t>(nfft));
    for (Eigen::Index i = 0; i < n; ++i) x[i] = frame.samples[i];
    fft_inplace(x);

    Vec p(nfft);
    for (Eigen::Index k = 0; k < nfft; ++k)
        p[k] = std::norm(x[static_cast<std::size_t>(k)]) / static_cast<double>(n);
    return p;
}

double sparsity_ratio(const Vec& x) {
    const double l2 = x.norm();
    if (x.size() == 0 || l2 == 0.0)
        throw InvalidInput("sparsity_ratio: zero vector");
    return x.lpNorm<1>() / (std::sqrt(static_cast<double>(x.size())) * l2);
}

CVec frequency_response(const PoleZeroModel& model, int n_points) {
    if (n_points < 2)
        throw InvalidInput("frequency_response: need at least 2 points");

    auto monic_eval = [](const Vec& tail, std::complex<double> zinv) {
        std::complex<double> acc(0.0, 0.0);
        for (Eigen::Index l = tail.size() - 1; l >= 0; --l)
            acc = (acc + tail[l]) * zinv;
        return acc + 1.0;
    };

    CVec h(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double w = std::numbers::pi * i / (n_points - 1);
        const std::complex<double> zinv = std::polar(1.0, -w);
        h[i] = model.gain * monic_eval(model.b, zinv) / monic_eval(model.a, zinv);
    }
    return h;
}

}  // namespace pz
