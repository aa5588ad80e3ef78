#pragma once

namespace hdqkd {

// SPDC source driven by a pulsed pump: one frame of duration T_f every 3*T_f,
// mean pair number mu per frame, Gaussian phase-matching envelope of FWHM
// bandwidth B_PM.
struct SourceParams {
    double frame_duration = 0.0;        // T_f [s]
    double phase_matching_bw = 0.0;     // B_PM [Hz], FWHM
    double mean_pairs_per_frame = 0.0;  // mu, >= 0
};

// Second-order statistics of the biphoton wave function.
//  sigma_coh: RMS coherence time (pump-limited), T_f / sqrt(8 ln 2)
//  sigma_cor: RMS signal-idler correlation time, sqrt(2 ln 2) / (2 pi B_PM)
//  t_norm:    sqrt(2 sigma_coh sigma_cor), the scale that renders time and
//             frequency variances equal for the nominal state
struct SourceMoments {
    double sigma_coh = 0.0;  // [s]
    double sigma_cor = 0.0;  // [s]
    double t_norm = 0.0;     // [s]
};

// Throws std::domain_error naming the offending field if T_f or B_PM is not
// positive, or mu < 0.
SourceMoments derive_moments(const SourceParams& params);

// True when sigma_coh / sigma_cor < 4: too few time bins for multi-bit keys.
// Callers that talk to a human should warn; the math still goes through.
bool few_bins_warning(const SourceMoments& m);

} // namespace hdqkd
