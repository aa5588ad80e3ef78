#pragma once

#include <Eigen/Dense>

#include "hdqkd/source_model.hpp"

namespace hdqkd {

// Time-frequency covariance matrix over the observable ordering
// (t_S, w_S, t_I, w_I). Time entries are s^2, frequency entries rad^2/s^2.
// The commutators carry opposite signs on the signal and idler sides
// ([w_J, t_K] = i eps_J delta_JK with eps_S = -eps_I = 1), so the symplectic
// form is blockdiag(J, -J) rather than the usual two copies of J.
struct Tfcm {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    SourceMoments moments{};  // normalization scale for the dimensionless form
};

// Eve's search family: the signal block is pinned (Alice's detector is local),
// the idler block is inflated by (1+eps) per axis, and the cross block is
// shrunk by (1-eta) per axis. Sub-block off-diagonals stay zero.
struct FamilyParams {
    double eta_t = 0.0;
    double eta_w = 0.0;
    double eps_t = 0.0;
    double eps_w = 0.0;
};

// Measured excess-noise factors bounding the admissible difference variances:
// v_t <= (1+xi_t) sigma_cor^2 and v_w <= (1+xi_w)/(4 sigma_coh^2).
// Raw (unclamped) values belong here; negative xi empties the set, which the
// optimizer reports as a protocol abort instead of hiding it.
struct NoiseBounds {
    double xi_t = 0.0;
    double xi_w = 0.0;
};

struct DiffVariances {
    double v_t = 0.0;  // <(dt_S - dt_I)^2> [s^2]
    double v_w = 0.0;  // <(dw_S - dw_I)^2> [rad^2/s^2]
};

// blockdiag(J, -J) with J = [[0,1],[-1,0]].
Eigen::Matrix4d symplectic_form();

// Gamma_0 for the given source:
//   diag blocks  diag(sigma_cor^2/4 + sigma_coh^2, 1/(4 sigma_cor^2) + 1/(16 sigma_coh^2))
//   cross blocks diag(-sigma_cor^2/4 + sigma_coh^2, 1/(4 sigma_cor^2) - 1/(16 sigma_coh^2))
Tfcm nominal_tfcm(const SourceMoments& moments);

// Time rows/cols divided by t_norm, frequency rows/cols multiplied by it.
Eigen::Matrix4d to_dimensionless(const Tfcm& gamma);

// Heisenberg test: all eigenvalues of the Hermitian matrix
// Gamma~ + (i/2) Omega_s must be >= -tol. Throws std::domain_error when the
// input is not symmetric (relative 1e-12).
bool is_physical(const Tfcm& gamma, double tol = 1e-9);

Tfcm family_member(const Tfcm& gamma0, const FamilyParams& p);

DiffVariances difference_variances(const Tfcm& gamma);

// Membership in the constraint set M: physical, signal block at its nominal
// value, and both difference variances within the (1+xi) caps (inclusive).
bool in_constraint_set(const Tfcm& gamma, const NoiseBounds& bounds);

} // namespace hdqkd
