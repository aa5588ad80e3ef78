#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "hdqkd/source_model.hpp"
#include "hdqkd/tfcm.hpp"
#include "hdqkd/units.hpp"

using namespace hdqkd;

namespace {
SourceMoments bench_moments() {
    return derive_moments({480.0 * picosecond, 200.0 * gigahertz, 0.01});
}
}  // namespace

TEST_CASE("symplectic form carries opposite signs on the two parties") {
    const Eigen::Matrix4d o = symplectic_form();
    Eigen::Matrix4d expect = Eigen::Matrix4d::Zero();
    expect(0, 1) = 1.0;
    expect(1, 0) = -1.0;
    expect(2, 3) = -1.0;
    expect(3, 2) = 1.0;
    CHECK((o - expect).cwiseAbs().maxCoeff() == 0.0);
    // antisymmetric and squares to -1
    CHECK((o + o.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((o * o + Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nominal TFCM entries for the benchmark source") {
    // frozen against an independent evaluation of the block formulas
    const Tfcm g0 = nominal_tfcm(bench_moments());
    CHECK(g0.m(0, 0) == doctest::Approx(4.154983664789207e-20).epsilon(1e-13));
    CHECK(g0.m(1, 1) == doctest::Approx(2.8477809072540237e+23).epsilon(1e-13));
    CHECK(g0.m(0, 2) == doctest::Approx(4.1549397707312237e-20).epsilon(1e-13));
    CHECK(g0.m(1, 3) == doctest::Approx(2.8477508227409789e+23).epsilon(1e-13));
    // party symmetry and vanishing sub-block off-diagonals
    CHECK(g0.m(2, 2) == g0.m(0, 0));
    CHECK(g0.m(3, 3) == g0.m(1, 1));
    CHECK(g0.m(0, 1) == 0.0);
    CHECK(g0.m(0, 3) == 0.0);
    CHECK((g0.m - g0.m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nominal difference variances reduce to sigma_cor^2 and 1/(4 sigma_coh^2)") {
    const SourceMoments m = bench_moments();
    const DiffVariances v = difference_variances(nominal_tfcm(m));
    // the subtraction cancels ~9 orders of magnitude, hence the loose epsilon
    CHECK(v.v_t == doctest::Approx(m.sigma_cor * m.sigma_cor).epsilon(1e-9));
    CHECK(v.v_w == doctest::Approx(1.0 / (4.0 * m.sigma_coh * m.sigma_coh)).epsilon(1e-9));
    // frozen absolute values
    CHECK(v.v_t == doctest::Approx(8.778811596585359e-25).epsilon(1e-9));
    CHECK(v.v_w == doctest::Approx(6.0169026090273024e+18).epsilon(1e-9));
}

TEST_CASE("dimensionless form is symmetric between time and frequency at nominal") {
    const Tfcm g0 = nominal_tfcm(bench_moments());
    const Eigen::Matrix4d gt = to_dimensionless(g0);
    // t_norm makes the nominal time and frequency variances equal
    CHECK(gt(0, 0) == doctest::Approx(gt(1, 1)).epsilon(1e-12));
    CHECK(gt(2, 2) == doctest::Approx(gt(3, 3)).epsilon(1e-12));
    // scaling is t/T, w*T: products t*w are invariant
    CHECK(gt(0, 0) * gt(1, 1) == doctest::Approx(g0.m(0, 0) * g0.m(1, 1)).epsilon(1e-12));
}

TEST_CASE("the nominal state is physical; overcorrelated variants are not") {
    const Tfcm g0 = nominal_tfcm(bench_moments());
    CHECK(is_physical(g0));

    // pushing the cross correlations past the pure-state value violates
    // the uncertainty relation; no false positives tolerated
    for (double f : {1.001, 1.01, 1.05, 1.5}) {
        Tfcm bad = g0;
        bad.m(0, 2) *= f;
        bad.m(2, 0) *= f;
        CHECK_FALSE(is_physical(bad));
        Tfcm bad_w = g0;
        bad_w.m(1, 3) *= f;
        bad_w.m(3, 1) *= f;
        CHECK_FALSE(is_physical(bad_w));
    }

    // shrinking a variance below the vacuum limit is also unphysical
    Tfcm squeezed = g0;
    squeezed.m(2, 2) *= 0.5;
    squeezed.m(3, 3) *= 0.5;
    CHECK_FALSE(is_physical(squeezed));

    Tfcm asym = g0;
    asym.m(0, 2) *= 2.0;  // only one side: not symmetric
    CHECK_THROWS_AS((void)is_physical(asym), std::domain_error);
}

TEST_CASE("family members scale the blocks as advertised") {
    const Tfcm g0 = nominal_tfcm(bench_moments());
    const FamilyParams p{0.01, 0.002, 0.3, 0.1};  // eta_t, eta_w, eps_t, eps_w
    const Tfcm g = family_member(g0, p);

    CHECK(g.m(0, 0) == g0.m(0, 0));  // signal block pinned
    CHECK(g.m(1, 1) == g0.m(1, 1));
    CHECK(g.m(2, 2) == doctest::Approx(g0.m(2, 2) * 1.3).epsilon(1e-15));
    CHECK(g.m(3, 3) == doctest::Approx(g0.m(3, 3) * 1.1).epsilon(1e-15));
    CHECK(g.m(0, 2) == doctest::Approx(g0.m(0, 2) * 0.99).epsilon(1e-15));
    CHECK(g.m(1, 3) == doctest::Approx(g0.m(1, 3) * 0.998).epsilon(1e-15));
    CHECK((g.m - g.m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.moments.t_norm == g0.moments.t_norm);

    // noise added to the idler only keeps the state physical
    CHECK(is_physical(g));
}

TEST_CASE("constraint-set membership") {
    const Tfcm g0 = nominal_tfcm(bench_moments());

    SUBCASE("nominal state sits inside for any nonnegative xi") {
        CHECK(in_constraint_set(g0, {0.0, 0.0}));
        CHECK(in_constraint_set(g0, {41.15, 0.215}));
    }

    SUBCASE("negative xi empties the set even for the nominal state") {
        CHECK_FALSE(in_constraint_set(g0, {-1e-3, 0.215}));
        CHECK_FALSE(in_constraint_set(g0, {41.15, -1e-3}));
    }

    SUBCASE("decorrelated members enter exactly when the caps allow them") {
        // eta_t inflates v_t away from sigma_cor^2 toward the uncorrelated value
        const NoiseBounds caps{41.15, 0.215};
        const Tfcm inside = family_member(g0, {1e-6, 1e-7, 0.0, 0.0});
        CHECK(in_constraint_set(inside, caps));

        // eta_t large enough that v_t blows through (1+xi_t) sigma_cor^2:
        // v_t(eta) ~ sigma_cor^2 + 2 eta a_t, so eta ~ xi sigma_cor^2 / a_t
        const Tfcm outside = family_member(g0, {1e-3, 0.0, 0.0, 0.0});
        CHECK_FALSE(in_constraint_set(outside, caps));
    }

    SUBCASE("a perturbed signal block is rejected") {
        Tfcm moved = g0;
        moved.m(0, 0) *= 1.0 + 1e-6;
        CHECK_FALSE(in_constraint_set(moved, {41.15, 0.215}));
    }
}

TEST_CASE("conditional determinant at nominal (pure-state check)") {
    // det of the conditional idler covariance, made dimensionless, is 1/4
    // for the pure nominal state. Computed here from raw entries.
    const Tfcm g0 = nominal_tfcm(bench_moments());
    const double bt = g0.m(2, 2), bw = g0.m(3, 3);
    const double at = g0.m(0, 0), ct = g0.m(0, 2);
    const double det = (bt - ct * ct / at) * bw;
    CHECK(det == doctest::Approx(0.25).epsilon(1e-9));
}
