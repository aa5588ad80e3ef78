#pragma once

#include <array>
#include <string>

#include "hdqkd/channel.hpp"
#include "hdqkd/interferometry.hpp"
#include "hdqkd/tfcm.hpp"

namespace hdqkd {

struct ProtocolParams {
    double q = 0.5;     // fraction of frames used for key
    double beta = 0.9;  // reconciliation efficiency
    double n_r = 8.0;   // reconciliation bits leaked per postselected frame
};

// Joint arrival-time model after postselection: a five-component mixture.
//   1: bivariate Gaussian with covariance [[var_a, cov],[cov, var_b]]
//   2: independent Gaussians N(var_a) x N(var_b)
//   3: N(var_a) x Uniform   4: Uniform x N(var_b)   5: Uniform x Uniform
// Uniforms live on [-T_f/2, T_f/2]. var_a/var_b already include the detector
// jitter term (deltaT/2.35)^2.
struct ArrivalTimeMixture {
    std::array<double, 5> w{};  // P1..P5
    double var_a = 0.0;         // [s^2]
    double var_b = 0.0;         // [s^2]
    double cov = 0.0;           // [s^2]
    double frame_duration = 0.0;
};

// gamma is whichever member the caller deems measured (Gamma* by default,
// inflated nominal under mi_model = nominal).
ArrivalTimeMixture build_mixture(const Tfcm& gamma, const DetectorParams& det,
                                 const EventProbabilities& ev,
                                 double frame_duration);

// Nominal TFCM with each difference variance inflated to (1+xi) times its
// nominal value, split symmetrically: +dv/4 on each party's variance and
// -dv/4 on the covariance per axis.
Tfcm inflated_nominal(const Tfcm& gamma0, const NoiseBounds& bounds);

// Closed-form MI of the event-1 Gaussian alone, in bits.
double gaussian_mi(double var_a, double var_b, double cov);

struct MiResult {
    double bits = 0.0;
    double err_estimate = 0.0;  // accumulated quadrature error bound
    long evaluations = 0;
};

// I(A;B) of the mixture by adaptive 2-D quadrature (Gauss-Legendre 7/15
// tensor cells, split at the uniform-support edges). Throws numeric_error
// with diagnostics if the evaluation budget is exhausted before reaching
// abs_tol_bits.
MiResult shannon_information(const ArrivalTimeMixture& mix,
                             double abs_tol_bits = 1e-4,
                             long max_evals = 1000000);

// One fully-evaluated distance point. Also the CSV row payload.
struct RateBreakdown {
    double distance_km = 0.0;
    double eta_p = 1.0;
    double p_r = 0.0;
    double fidelity = 0.0;
    double xi_t = 0.0;          // raw values as used in the constraints
    double xi_w = 0.0;
    double i_ab = 0.0;          // bits
    double chi_ub = 0.0;        // bits
    double bits_per_frame = 0.0;  // beta*I - (1-F)*n_R - F*chi, unclamped
    double skr_raw = 0.0;       // bits/s, unclamped
    double skr = 0.0;           // bits/s, clamped at 0
    double pie = 0.0;           // bits/coincidence, clamped at 0
    bool clamped = false;
    bool feasible = true;        // false = protocol abort at this point
    bool on_search_boundary = false;
    std::string error;           // nonempty = point failed, see sweep CSV
};

// Fills the rate fields from the assembled inputs; everything upstream
// (eta_p, xi, chi, I) is the pipeline's job.
RateBreakdown secure_key_rate(const ProtocolParams& pp,
                              const EventProbabilities& ev, double i_ab,
                              double chi_ub, double frame_duration);

} // namespace hdqkd
