#pragma once

#include <vector>

namespace hdqkd {

struct LinkParams {
    double distance_km = 0.0;
    double loss_db_per_km = 0.2;
};

// Frame-level detection statistics conditioned on postselection. Events:
//   1: single pair, both photons detected, no dark counts
//   2: multipair coincidence, or single pair + at least one dark count
//   3: Alice photon, Bob dark count only
//   4: Bob photon, Alice dark count only
//   5: dark counts on both sides, no photon detections
// F is the single-pair fraction of postselected frames (n = 1 regardless of
// dark assistance), so F >= P1 with equality at p_d = 0.
struct EventProbabilities {
    double p_d = 0.0;  // per-terminal per-frame dark probability
    double p_r = 0.0;  // postselection probability
    double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0, p5 = 0.0;
    double fidelity = 0.0;  // F
};

double poisson_pmf(double mu, int n);

// 10^(-loss*d/10); negative distance -> domain_error.
double fiber_transmissivity(double distance_km, double loss_db_per_km);

// p_d = rate * T_f (single-Bernoulli dark model; keep rate*T_f << 1).
double dark_prob(double dark_rate, double frame_duration);

// Probability that both terminals register >= 1 detection in a frame.
// eta_b is Bob's end-to-end efficiency (detector x fiber). Closed form:
// 1 - (1-p_d) e^{-mu a} - (1-p_d) e^{-mu b} + (1-p_d)^2 e^{-mu(a+b-ab)}.
double postselect_probability(double mu, double eta_a, double eta_b, double p_d);

// Same quantity as an explicit Poisson sum truncated at n_max; the tail is
// < 1e-15 for mu <= 0.2 and n_max = 64. Used to cross-check the closed form.
double postselect_probability_series(double mu, double eta_a, double eta_b,
                                     double p_d, int n_max = 64);

// P1..P5 via the truncated series, F via its closed form. Throws
// numeric_error when p_r vanishes (degenerate channel).
EventProbabilities event_probabilities(double mu, double eta_a, double eta_b,
                                       double p_d);

// Decoy-intensity estimate of F: fit the closed-form p_r(mu) over the two
// unknown efficiencies by least squares, then evaluate F at the signal
// intensity. Deliberately a parametric fit, not a finite-key decoy bound.
struct DecoyReading {
    double mu = 0.0;
    double p_r = 0.0;  // measured postselection rate at this intensity
};

struct DecoyFit {
    double fidelity = 0.0;  // F at mu_signal
    double eta_a = 0.0;
    double eta_b = 0.0;
    double residual = 0.0;  // RMS of p_r misfit
};

// Requires >= 2 distinct intensities (domain_error otherwise).
DecoyFit estimate_f_from_decoys(const std::vector<DecoyReading>& readings,
                                double p_d, double mu_signal);

} // namespace hdqkd
