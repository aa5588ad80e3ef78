#pragma once

#include "hdqkd/source_model.hpp"

namespace hdqkd {

// Franson pair (arm delay dT) and its conjugate (frequency shift dW plus
// dispersion beta2) used to certify the two difference variances.
struct InterferometerParams {
    double delta_t = 0.0;      // [s], long-short arm delay
    double delta_omega = 0.0;  // [rad/s], conjugate-interferometer shift
    double beta2 = 0.0;        // [s^2/rad], dispersion coefficient
    double gate = 0.0;         // T_g [s], coincidence gate
};

struct DetectorParams {
    double jitter_fwhm = 0.0;  // deltaT [s], per-detector Gaussian FWHM
    double eta_alice = 0.0;    // detection efficiency at Alice
    double eta_bob = 0.0;      // detection efficiency at Bob (before fiber)
    double dark_rate = 0.0;    // [1/s] per terminal
    double gate = 0.0;         // [s]
};

enum class FringeKind { franson, conjugate_franson };

struct VisibilityReading {
    FringeKind kind = FringeKind::franson;
    double value = 1.0;    // 0-pi fringe visibility, |V| <= 1
    double setting = 0.0;  // delta_t [s] for Franson, delta_omega [rad/s] for CFI
};

// Gaussian-state forward models: V = exp(-v * setting^2 / 2).
double franson_visibility_gaussian(double v_w, double delta_t);
double cfi_visibility_gaussian(double v_t, double delta_omega);

// Jitter-limited fourth moments of the measured differences for two i.i.d.
// Gaussian detector jitters of FWHM deltaT: 3*(deltaT/(2 sqrt(ln 2)))^4 in
// time; divided by beta2^4 for the dispersed frequency readout.
double jitter_fourth_moment_time(double jitter_fwhm);
double jitter_fourth_moment_freq(double jitter_fwhm, double beta2);  // beta2 = 0 -> domain_error

// Visibility -> variance upper bounds:
//   lemma1: v_w <= 2(1-V_FI)/dT^2 + <x^4> dT^2 / 12
//   lemma2: v_t <= 2(1-V_CFI)/dW^2 + <x^4> dW^2 / 12
// Both throw std::domain_error for V > 1 or a reading of the wrong kind.
double lemma1_bound(const VisibilityReading& franson, double fourth_w);
double lemma2_bound(const VisibilityReading& cfi, double fourth_t);

// xi = bound/nominal - 1. Raw may be negative (measurement inconsistency);
// the constraint set consumes raw so that inconsistency surfaces as an abort.
struct ExcessNoise {
    double raw = 0.0;
    double clamped = 0.0;  // max(raw, 0), for reporting
};
ExcessNoise excess_noise(double bound, double nominal_variance);

// Excess noise of raw (undispersed, jitter-limited) arrival-time differences:
// (sigma_cor^2 + 2 (deltaT/2.3548)^2) / sigma_cor^2 - 1.
double raw_time_excess(double jitter_fwhm, double sigma_cor);

} // namespace hdqkd
