#include "hdqkd/holevo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdqkd/detail/simplex.hpp"
#include "hdqkd/errors.hpp"

namespace hdqkd {

namespace {

// Raw-unit products are already dimensionless (s^2 times rad^2/s^2), so the
// invariants never need the normalized matrix.
struct FamilyEntries {
    double a_t, a_w;  // signal diagonal = nominal idler diagonal
    double b_t, b_w;  // idler diagonal
    double c_t, c_w;  // cross diagonal
};

FamilyEntries entries_of(const Tfcm& g) {
    return {g.m(0, 0), g.m(1, 1), g.m(2, 2), g.m(3, 3), g.m(0, 2), g.m(1, 3)};
}

void require_family_form(const Tfcm& g) {
    const double s_t = std::sqrt(g.m(0, 0) * g.m(1, 1));
    auto off = [&](int i, int j) { return std::abs(g.m(i, j)) > 1e-9 * s_t; };
    if (off(0, 1) || off(0, 3) || off(2, 1) || off(2, 3))
        throw std::domain_error("TFCM has time-frequency cross terms; "
                                "symplectic invariants expect the diagonal-"
                                "sub-block family form");
}

struct DPair {
    double d_plus, d_minus;
    double i1, i2, i3, i4;
    bool ok;  // sector determinants and discriminant admissible
};

// ab - cd with one rounding (Kahan, via fma). The invariants combine
// products that are individually ~(sigma_coh/sigma_cor)^2 but cancel to
// O(1); computing the differences naively loses all significant digits at
// large frame/bandwidth products.
double diff_of_products(double a, double b, double c, double d) {
    const double cd = c * d;
    const double err = std::fma(c, d, -cd);
    const double f = std::fma(a, b, -cd);
    return f - err;
}

DPair d_values(const FamilyEntries& e, bool throw_on_bad) {
    DPair r{};
    r.i1 = e.a_t * e.a_w;
    r.i2 = e.b_t * e.b_w;
    // cross-block determinant in the mixed-sign symplectic convention
    r.i3 = -e.c_t * e.c_w;
    const double det_t = diff_of_products(e.a_t, e.b_t, e.c_t, e.c_t);
    const double det_w = diff_of_products(e.a_w, e.b_w, e.c_w, e.c_w);
    r.i4 = det_t * det_w;
    if (r.i4 < 0.0) {
        if (throw_on_bad) throw numeric_error("negative det: input not a covariance matrix");
        r.ok = false;
        return r;
    }
    // delta = I1 + I2 + 2 I3 assembled from the two cancellation-free sums
    const double delta = diff_of_products(e.a_t, e.a_w, e.c_t, e.c_w)
                       + diff_of_products(e.b_t, e.b_w, e.c_t, e.c_w);
    double disc = diff_of_products(delta, delta, 4.0 * det_t, det_w);
    if (disc < 0.0) {
        // pure states sit exactly at disc = 0; only meaningful negatives are errors
        if (disc < -1e-9 * delta * delta) {
            if (throw_on_bad) throw numeric_error("negative symplectic discriminant");
            r.ok = false;
            return r;
        }
        disc = 0.0;
    }
    // stable split: compute d+ from the additive branch, d- via the product
    r.d_plus = std::sqrt(0.5 * (delta + std::sqrt(disc)));
    r.d_minus = r.d_plus > 0.0 ? std::sqrt(r.i4) / r.d_plus : 0.0;
    r.ok = true;
    return r;
}

} // namespace

SymplecticInvariants symplectic_invariants(const Tfcm& gamma) {
    require_family_form(gamma);
    const DPair d = d_values(entries_of(gamma), /*throw_on_bad=*/true);
    return SymplecticInvariants{d.i1, d.i2, d.i3, d.i4, d.d_plus, d.d_minus};
}

double g_entropy(double d) {
    if (d < 0.5 - 1e-6) throw std::domain_error("symplectic eigenvalue below 1/2");
    if (d <= 0.5) return 0.0;
    const double x = d + 0.5;
    const double y = d - 0.5;
    return x * std::log2(x) - y * std::log2(y);
}

Eigen::Matrix2d conditional_idler_covariance(const Tfcm& gamma) {
    const FamilyEntries e = entries_of(gamma);
    if (!(e.a_t > 0.0)) throw std::domain_error("signal time variance must be > 0");
    Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
    c(0, 0) = e.b_t - e.c_t * e.c_t / e.a_t;  // Schur complement of Alice's time
    c(1, 1) = e.b_w;                          // frequency unread
    return c;
}

double holevo_given_gamma(const Tfcm& gamma) {
    const SymplecticInvariants si = symplectic_invariants(gamma);
    const Eigen::Matrix2d cond = conditional_idler_covariance(gamma);
    const double det_cond = cond(0, 0) * cond(1, 1);
    if (det_cond < 0.0) throw numeric_error("conditional covariance not PSD");
    double chi = g_entropy(si.d_plus) + g_entropy(si.d_minus)
               - g_entropy(std::sqrt(det_cond));
    if (chi < 0.0) {
        if (chi < -1e-6) throw numeric_error("negative Holevo information");
        chi = 0.0;  // pure-state roundoff
    }
    return chi;
}

namespace {

// Everything the hot loop needs, with the linear feasibility caps folded in.
struct SearchContext {
    FamilyEntries n;      // nominal entries
    double budget_t = 0;  // cap - nominal difference variance, time axis
    double budget_w = 0;
    double slack_t = 0;   // roundoff slack matching in_constraint_set
    double slack_w = 0;

    bool linear_ok(double eps_t, double eta_t, double eps_w, double eta_w) const {
        if (eps_t < 0 || eta_t < 0 || eps_w < 0 || eta_w < 0) return false;
        if (eps_t * n.b_t + 2.0 * eta_t * n.c_t > budget_t + slack_t) return false;
        if (eps_w * n.b_w + 2.0 * eta_w * n.c_w > budget_w + slack_w) return false;
        return true;
    }

    // chi in bits, or -1 when the member is infeasible (chi itself is >= 0)
    double chi(double eps_t, double eta_t, double eps_w, double eta_w) const {
        if (!linear_ok(eps_t, eta_t, eps_w, eta_w)) return -1.0;
        FamilyEntries e = n;
        e.b_t *= 1.0 + eps_t;
        e.b_w *= 1.0 + eps_w;
        e.c_t *= 1.0 - eta_t;
        e.c_w *= 1.0 - eta_w;
        const DPair d = d_values(e, /*throw_on_bad=*/false);
        if (!d.ok) return -1.0;
        // compensated d- still carries sqrt(ulp)-level noise; keep the fast
        // rejection an order looser than that, the eigenvalue test on the
        // final member is the authoritative one
        if (d.d_minus < 0.5 - 1e-7) return -1.0;
        const double det_cond = (e.b_t - e.c_t * e.c_t / e.a_t) * e.b_w;
        double chi = g_entropy(std::max(d.d_plus, 0.5))
                   + g_entropy(std::max(d.d_minus, 0.5))
                   - g_entropy(std::sqrt(std::max(det_cond, 0.25)));
        return chi < 0.0 ? 0.0 : chi;
    }
};

std::vector<double> linspace(double lo, double hi, int n) {
    if (!(hi > lo)) return {lo};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

struct GridPoint {
    double chi = -1.0;
    FamilyParams p{};
};

bool better(const GridPoint& a, const GridPoint& b) {
    if (a.chi != b.chi) return a.chi > b.chi;
    // deterministic tie-break
    if (a.p.eps_t != b.p.eps_t) return a.p.eps_t < b.p.eps_t;
    if (a.p.eta_t != b.p.eta_t) return a.p.eta_t < b.p.eta_t;
    if (a.p.eps_w != b.p.eps_w) return a.p.eps_w < b.p.eps_w;
    return a.p.eta_w < b.p.eta_w;
}

} // namespace

HolevoResult holevo_upper_bound(const Tfcm& gamma0, const NoiseBounds& bounds,
                                const OptimizerOptions& opts) {
    const double sc2 = gamma0.moments.sigma_cor * gamma0.moments.sigma_cor;
    const double sh2 = gamma0.moments.sigma_coh * gamma0.moments.sigma_coh;

    SearchContext ctx;
    ctx.n = entries_of(gamma0);
    const DiffVariances v0 = difference_variances(gamma0);
    const double cap_t = (1.0 + bounds.xi_t) * sc2;
    const double cap_w = (1.0 + bounds.xi_w) / (4.0 * sh2);
    ctx.budget_t = cap_t - v0.v_t;
    ctx.budget_w = cap_w - v0.v_w;
    ctx.slack_t = 1e-12 * cap_t;
    ctx.slack_w = 1e-12 * cap_w;

    HolevoResult res;
    res.gamma_star = gamma0;

    // Negative budget: even the nominal state violates the measured caps.
    // That is a protocol abort, not an optimization problem.
    if (ctx.budget_t < -ctx.slack_t || ctx.budget_w < -ctx.slack_w) return res;

    // Per-axis feasible ranges in closed form. The eta axes are additionally
    // limited by the heuristic [0, eta_box] box; hitting that edge sets the
    // boundary flag below.
    const double eps_t_max = std::max(ctx.budget_t, 0.0) / ctx.n.b_t;
    const double eps_w_max = std::max(ctx.budget_w, 0.0) / ctx.n.b_w;
    const double eta_t_lin = ctx.n.c_t > 0.0
        ? std::max(ctx.budget_t, 0.0) / (2.0 * ctx.n.c_t) : opts.eta_box;
    const double eta_w_lin = ctx.n.c_w > 0.0
        ? std::max(ctx.budget_w, 0.0) / (2.0 * ctx.n.c_w) : opts.eta_box;
    const bool eta_t_boxed = eta_t_lin > opts.eta_box;
    const bool eta_w_boxed = eta_w_lin > opts.eta_box;
    const double eta_t_max = eta_t_boxed ? opts.eta_box : eta_t_lin;
    const double eta_w_max = eta_w_boxed ? opts.eta_box : eta_w_lin;

    const std::vector<double> ax_eps_t = linspace(0.0, eps_t_max, opts.grid_points);
    const std::vector<double> ax_eta_t = linspace(0.0, eta_t_max, opts.grid_points);
    const std::vector<double> ax_eps_w = linspace(0.0, eps_w_max, opts.grid_points);
    const std::vector<double> ax_eta_w = linspace(0.0, eta_w_max, opts.grid_points);

    long evals = 0;
    const int k = std::max(opts.top_k, 1);
    std::vector<GridPoint> top(static_cast<std::size_t>(k) + 1);

    for (double et : ax_eps_t)
        for (double ht : ax_eta_t) {
            if (et * ctx.n.b_t + 2.0 * ht * ctx.n.c_t > ctx.budget_t + ctx.slack_t)
                continue;  // whole (eps_w, eta_w) plane shares this rejection
            for (double ew : ax_eps_w)
                for (double hw : ax_eta_w) {
                    ++evals;
                    const double c = ctx.chi(et, ht, ew, hw);
                    if (c < 0.0) continue;
                    GridPoint gp{c, FamilyParams{ht, hw, et, ew}};
                    if (better(gp, top.back())) {
                        top.back() = gp;
                        for (int i = k; i > 0 && better(top[i], top[i - 1]); --i)
                            std::swap(top[i], top[i - 1]);
                    }
                }
        }

    if (top[0].chi < 0.0) {
        res.evaluations = evals;
        return res;  // nothing feasible on the grid -> abort
    }

    // Simplex refinement from the best grid points, on the axes that have
    // room to move. Infeasible trial points get a large penalty, which walks
    // the simplex back inside.
    GridPoint best = top[0];
    const double axis_max[4] = {eps_t_max, eta_t_max, eps_w_max, eta_w_max};
    std::vector<int> active;
    for (int d = 0; d < 4; ++d)
        if (axis_max[d] > 0.0) active.push_back(d);

    if (!active.empty()) {
        for (int s = 0; s < k && top[s].chi >= 0.0; ++s) {
            const FamilyParams seed = top[s].p;
            double full[4] = {seed.eps_t, seed.eta_t, seed.eps_w, seed.eta_w};
            std::vector<double> x0, step;
            for (int d : active) {
                x0.push_back(full[d]);
                step.push_back(axis_max[d] / 20.0);
            }
            auto objective = [&](const std::vector<double>& x) {
                double f[4] = {0, 0, 0, 0};
                for (std::size_t i = 0; i < active.size(); ++i) f[active[i]] = x[i];
                const double c = ctx.chi(f[0], f[1], f[2], f[3]);
                return c < 0.0 ? 1e100 : -c;
            };
            detail::SimplexResult r = detail::nelder_mead(
                objective, x0, step, opts.refine_tol_bits, opts.max_refine_iters);
            evals += r.evals;
            if (r.f < 1e99) {
                double f[4] = {0, 0, 0, 0};
                for (std::size_t i = 0; i < active.size(); ++i) f[active[i]] = r.x[i];
                GridPoint cand{-r.f, FamilyParams{f[1], f[3], f[0], f[2]}};
                if (better(cand, best)) best = cand;
            }
        }
    }

    res.chi = best.chi;
    res.params_star = best.p;
    res.gamma_star = family_member(gamma0, best.p);
    res.feasible = true;
    res.evaluations = evals;
    res.on_search_boundary =
        (eta_t_boxed && best.p.eta_t >= opts.eta_box * (1.0 - 1e-6)) ||
        (eta_w_boxed && best.p.eta_w >= opts.eta_box * (1.0 - 1e-6));
    return res;
}

} // namespace hdqkd
