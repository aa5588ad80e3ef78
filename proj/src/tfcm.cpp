#include "hdqkd/tfcm.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace hdqkd {

namespace {

void require_symmetric(const Eigen::Matrix4d& m) {
    // raw entries mix units (s^2 vs rad^2/s^2), so each pair is compared
    // against its own magnitude, never against the matrix-wide maximum
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double mag = std::abs(m(i, j)) + std::abs(m(j, i));
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * mag)
                throw std::domain_error("TFCM must be symmetric");
        }
}

} // namespace

Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d o = Eigen::Matrix4d::Zero();
    // signal block J, idler block -J: the sides carry opposite commutator signs
    o(0, 1) = 1.0;
    o(1, 0) = -1.0;
    o(2, 3) = -1.0;
    o(3, 2) = 1.0;
    return o;
}

Tfcm nominal_tfcm(const SourceMoments& moments) {
    const double sc2 = moments.sigma_cor * moments.sigma_cor;
    const double sh2 = moments.sigma_coh * moments.sigma_coh;
    const double a_t = sc2 / 4.0 + sh2;
    const double a_w = 1.0 / (4.0 * sc2) + 1.0 / (16.0 * sh2);
    const double c_t = -sc2 / 4.0 + sh2;
    const double c_w = 1.0 / (4.0 * sc2) - 1.0 / (16.0 * sh2);

    Tfcm g;
    g.moments = moments;
    g.m(0, 0) = a_t;
    g.m(1, 1) = a_w;
    g.m(2, 2) = a_t;
    g.m(3, 3) = a_w;
    g.m(0, 2) = g.m(2, 0) = c_t;
    g.m(1, 3) = g.m(3, 1) = c_w;
    return g;
}

Eigen::Matrix4d to_dimensionless(const Tfcm& gamma) {
    const double t = gamma.moments.t_norm;
    Eigen::Vector4d s(1.0 / t, t, 1.0 / t, t);
    return s.asDiagonal() * gamma.m * s.asDiagonal();
}

bool is_physical(const Tfcm& gamma, double tol) {
    require_symmetric(gamma.m);
    const Eigen::Matrix4d gt = to_dimensionless(gamma);
    Eigen::Matrix4cd h = gt.cast<std::complex<double>>();
    h += std::complex<double>(0.0, 0.5) * symplectic_form().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

Tfcm family_member(const Tfcm& gamma0, const FamilyParams& p) {
    Tfcm g = gamma0;
    g.m(2, 2) *= 1.0 + p.eps_t;
    g.m(3, 3) *= 1.0 + p.eps_w;
    g.m(0, 2) *= 1.0 - p.eta_t;
    g.m(2, 0) = g.m(0, 2);
    g.m(1, 3) *= 1.0 - p.eta_w;
    g.m(3, 1) = g.m(1, 3);
    return g;
}

DiffVariances difference_variances(const Tfcm& gamma) {
    DiffVariances v;
    v.v_t = gamma.m(0, 0) + gamma.m(2, 2) - 2.0 * gamma.m(0, 2);
    v.v_w = gamma.m(1, 1) + gamma.m(3, 3) - 2.0 * gamma.m(1, 3);
    return v;
}

bool in_constraint_set(const Tfcm& gamma, const NoiseBounds& bounds) {
    const Tfcm g0 = nominal_tfcm(gamma.moments);
    // Alice's side is local: any candidate that touches the signal block is
    // outside the family by construction. Entry-relative tolerances; the raw
    // time and frequency scales differ by ~40 orders of magnitude.
    if (std::abs(gamma.m(0, 0) - g0.m(0, 0)) > 1e-12 * g0.m(0, 0)) return false;
    if (std::abs(gamma.m(1, 1) - g0.m(1, 1)) > 1e-12 * g0.m(1, 1)) return false;

    const double sc2 = gamma.moments.sigma_cor * gamma.moments.sigma_cor;
    const double sh2 = gamma.moments.sigma_coh * gamma.moments.sigma_coh;
    const DiffVariances v = difference_variances(gamma);
    const double cap_t = (1.0 + bounds.xi_t) * sc2;
    const double cap_w = (1.0 + bounds.xi_w) / (4.0 * sh2);
    // Inclusive caps (closed set). The difference variances cancel entries
    // ~(sigma_coh/sigma_cor)^2 larger than the result, so the slack needs an
    // absolute ulp-scale term on top of the relative one.
    constexpr double ulp = std::numeric_limits<double>::epsilon();
    const double slack_t = 1e-12 * cap_t
        + 32.0 * ulp * (gamma.m(0, 0) + gamma.m(2, 2) + 2.0 * std::abs(gamma.m(0, 2)));
    const double slack_w = 1e-12 * cap_w
        + 32.0 * ulp * (gamma.m(1, 1) + gamma.m(3, 3) + 2.0 * std::abs(gamma.m(1, 3)));
    if (v.v_t > cap_t + slack_t) return false;
    if (v.v_w > cap_w + slack_w) return false;
    return is_physical(gamma);
}

} // namespace hdqkd
