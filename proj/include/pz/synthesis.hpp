#pragma once

#include <cstdint>

#include "pz/vem.hpp"

namespace pz {

// Liljencrants-Fant glottal flow derivative parameters. Timing values are
// fractions of the pitch period. Defaults are a modal phonation
// configuration.
struct LfParams {
    double Ee = 1.0;
    double Tp = 0.4554;
    double Te = 0.575;
    double Ta = 0.009;
    double Tc = 1.0;
};

struct Formant {
    double frequency_hz = 0.0;
    double bandwidth_hz = 0.0;
};

struct ResonatorSpec {
    std::vector<Formant> formants;
    std::vector<Formant> antiformants;
    double sample_rate = 8000.0;
};

struct SynthSpec {
    double f0 = 200.0;
    double sample_rate = 8000.0;
    Eigen::Index n_samples = 240;
    ResonatorSpec resonator;
    LfParams lf;
    double ratio_db = 30.0;  // block-sparse to Gaussian power ratio; +inf for none
    std::uint64_t seed = 0;
};

struct SynthFrame {
    Frame y;
    Vec e_true;
    Vec m_true;
    PoleZeroModel model_true;
    Eigen::Index pulse_onset = 0;  // sample offset of the first pulse start
    SynthSpec spec;
};

// One pitch period of the LF waveform, sampled at round(fs/f0) instants.
// The return-phase constant solves the continuity condition at Te and the
// open-phase growth constant zeroes the sampled period sum.
Vec lf_pulse(const LfParams& lf, double f0, double sample_rate);

// Conjugate pole/zero pairs at radius exp(-pi*Bw/fs), angle 2*pi*F/fs.
PoleZeroModel build_resonator(const ResonatorSpec& spec);

// LF pulse train plus white Gaussian component at the prescribed power
// ratio, filtered through the resonator. Deterministic given spec.seed.
SynthFrame synth_frame(const SynthSpec& spec);

}  // namespace pz
