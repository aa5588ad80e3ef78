#pragma once

#include <Eigen/Dense>

#include "hdqkd/tfcm.hpp"

namespace hdqkd {

// Symplectic data of a family-form TFCM (diagonal sub-blocks). All four
// invariants are dimensionless as raw s^2 * rad^2/s^2 products:
//   I1 = a_t a_w            (signal block)
//   I2 = b_t b_w            (idler block)
//   I3 = -c_t c_w           (cross block determinant under the mixed-sign
//                            symplectic convention; the sign is what makes
//                            the pure nominal state come out at d = 1/2)
//   I4 = det Gamma
//   d_pm^2 = (Delta +- sqrt(Delta^2 - 4 I4)) / 2,  Delta = I1 + I2 + 2 I3
struct SymplecticInvariants {
    double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
    double d_plus = 0.0, d_minus = 0.0;
};

// Throws std::domain_error if the sub-block off-diagonals are not zero
// (non-family input) and numeric_error if the discriminant is more negative
// than -1e-9 relative; tiny negatives are clamped to 0.
SymplecticInvariants symplectic_invariants(const Tfcm& gamma);

// Thermal-mode entropy f(d) = (d+1/2)log2(d+1/2) - (d-1/2)log2(d-1/2), with
// f(1/2) = 0 by 0*log 0 = 0. d in [1/2 - 1e-6, 1/2) clamps to 1/2; anything
// lower throws std::domain_error.
double g_entropy(double d);

// Idler covariance conditioned on Alice's arrival-time measurement:
// diag(b_t - c_t^2/a_t, b_w) in the matrix's own units (det is dimensionless).
Eigen::Matrix2d conditional_idler_covariance(const Tfcm& gamma);

// chi(A;E) = f(d+) + f(d-) - f(sqrt(det conditional)) in bits.
double holevo_given_gamma(const Tfcm& gamma);

struct OptimizerOptions {
    int grid_points = 21;          // per axis
    double refine_tol_bits = 1e-4; // simplex stopping spread
    int top_k = 5;                 // refinement seeds from the grid
    double eta_box = 2.0;          // heuristic upper limit for eta axes
    int max_refine_iters = 400;
};

struct HolevoResult {
    double chi = 0.0;  // bits; 0 when infeasible
    Tfcm gamma_star;   // arg-sup member (valid iff feasible)
    FamilyParams params_star{};
    bool feasible = false;           // false = empty M = protocol abort
    bool on_search_boundary = false; // sup touched the heuristic eta box edge
    long evaluations = 0;
};

// sup of holevo_given_gamma over the constrained family: deterministic grid
// (axes clipped to their closed-form feasible ranges) followed by simplex
// refinement from the best top_k points. Same inputs always give the same
// result; ties break lexicographically on (eps_t, eta_t, eps_w, eta_w).
HolevoResult holevo_upper_bound(const Tfcm& gamma0, const NoiseBounds& bounds,
                                const OptimizerOptions& opts = {});

} // namespace hdqkd
