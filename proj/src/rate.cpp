#include "hdqkd/rate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdqkd/errors.hpp"
#include "hdqkd/units.hpp"

namespace hdqkd {

ArrivalTimeMixture build_mixture(const Tfcm& gamma, const DetectorParams& det,
                                 const EventProbabilities& ev,
                                 double frame_duration) {
    const double j = det.jitter_fwhm / fwhm_to_rms_short;
    ArrivalTimeMixture mix;
    mix.w = {ev.p1, ev.p2, ev.p3, ev.p4, ev.p5};
    mix.var_a = gamma.m(0, 0) + j * j;
    mix.var_b = gamma.m(2, 2) + j * j;
    mix.cov = gamma.m(0, 2);
    mix.frame_duration = frame_duration;
    return mix;
}

Tfcm inflated_nominal(const Tfcm& gamma0, const NoiseBounds& bounds) {
    const DiffVariances v0 = difference_variances(gamma0);
    const double dt = bounds.xi_t * v0.v_t;
    const double dw = bounds.xi_w * v0.v_w;

    Tfcm out = gamma0;
    out.m(0, 0) += dt / 4.0;
    out.m(2, 2) += dt / 4.0;
    out.m(0, 2) -= dt / 4.0;
    out.m(2, 0) -= dt / 4.0;
    out.m(1, 1) += dw / 4.0;
    out.m(3, 3) += dw / 4.0;
    out.m(1, 3) -= dw / 4.0;
    out.m(3, 1) -= dw / 4.0;
    return out;
}

double gaussian_mi(double var_a, double var_b, double cov) {
    if (!(var_a > 0.0) || !(var_b > 0.0))
        throw std::domain_error("variances must be positive");
    const double det = var_a * var_b - cov * cov;
    if (!(det > 0.0))
        throw numeric_error("arrival-time covariance is singular: mutual "
                            "information diverges");
    return 0.5 * std::log2(var_a * var_b / det);
}

namespace {

// Gauss-Kronrod 7/15 on [-1,1]; the 7-point Gauss rule reuses the
// odd-indexed Kronrod nodes, so one 15x15 tensor evaluation yields both the
// fine and the embedded coarse estimate.
constexpr int gk_n = 15;
constexpr double gk_x[gk_n] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double gk_wk[gk_n] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double gk_wg[gk_n] = {
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0};

double gauss_pdf(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(two_pi * var);
}

struct MixtureDensity {
    ArrivalTimeMixture mix;
    double u = 0.0;       // uniform density 1/T_f
    double half = 0.0;    // T_f/2
    double wa_g = 0.0;    // Gaussian weight in the A marginal
    double wa_u = 0.0;
    double wb_g = 0.0;
    double wb_u = 0.0;
    double inv_det = 0.0;  // of the event-1 covariance
    double norm1 = 0.0;

    explicit MixtureDensity(const ArrivalTimeMixture& m) : mix(m) {
        half = m.frame_duration / 2.0;
        u = 1.0 / m.frame_duration;
        wa_g = m.w[0] + m.w[1] + m.w[2];
        wa_u = m.w[3] + m.w[4];
        wb_g = m.w[0] + m.w[1] + m.w[3];
        wb_u = m.w[2] + m.w[4];
        const double det = m.var_a * m.var_b - m.cov * m.cov;
        if (!(det > 0.0))
            throw numeric_error("arrival-time covariance is singular");
        inv_det = 1.0 / det;
        norm1 = 1.0 / (two_pi * std::sqrt(det));
    }

    double uniform(double x) const { return std::abs(x) <= half ? u : 0.0; }

    double joint(double x, double y) const {
        const auto& w = mix.w;
        double p = 0.0;
        if (w[0] > 0.0) {
            const double q = (mix.var_b * x * x - 2.0 * mix.cov * x * y +
                              mix.var_a * y * y) * inv_det;
            p += w[0] * norm1 * std::exp(-0.5 * q);
        }
        const double ga = gauss_pdf(x, mix.var_a);
        const double gb = gauss_pdf(y, mix.var_b);
        if (w[1] > 0.0) p += w[1] * ga * gb;
        if (w[2] > 0.0) p += w[2] * ga * uniform(y);
        if (w[3] > 0.0) p += w[3] * uniform(x) * gb;
        if (w[4] > 0.0) p += w[4] * uniform(x) * uniform(y);
        return p;
    }

    double marginal_a(double x) const {
        return wa_g * gauss_pdf(x, mix.var_a) + wa_u * uniform(x);
    }
    double marginal_b(double y) const {
        return wb_g * gauss_pdf(y, mix.var_b) + wb_u * uniform(y);
    }
};

struct Cell {
    double x0, x1, y0, y1;
};

struct CellEstimate {
    double fine = 0.0;
    double err = 0.0;
};

template <typename F>
CellEstimate integrate_cell(const Cell& c, F&& f) {
    const double hx = 0.5 * (c.x1 - c.x0), cx = 0.5 * (c.x1 + c.x0);
    const double hy = 0.5 * (c.y1 - c.y0), cy = 0.5 * (c.y1 + c.y0);
    double vals[gk_n][gk_n];
    for (int i = 0; i < gk_n; ++i)
        for (int j = 0; j < gk_n; ++j)
            vals[i][j] = f(cx + hx * gk_x[i], cy + hy * gk_x[j]);
    double fine = 0.0, coarse = 0.0;
    for (int i = 0; i < gk_n; ++i)
        for (int j = 0; j < gk_n; ++j) {
            fine += gk_wk[i] * gk_wk[j] * vals[i][j];
            coarse += gk_wg[i] * gk_wg[j] * vals[i][j];
        }
    fine *= hx * hy;
    coarse *= hx * hy;
    return {fine, std::abs(fine - coarse)};
}

std::vector<double> axis_breaks(double h, double sigma, double uniform_edge,
                                bool has_uniform) {
    std::vector<double> b{-h, h};
    if (has_uniform && uniform_edge < h) {
        b.push_back(-uniform_edge);
        b.push_back(uniform_edge);
    }
    // seed the Gaussian core so a wide first cell cannot hide it from the
    // error estimate
    const double core = 7.0 * sigma;
    if (core < h) {
        b.push_back(-core);
        b.push_back(core);
    }
    b.push_back(0.0);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [&](double p, double q) { return q - p < 1e-9 * h; }),
            b.end());
    return b;
}

template <typename F>
MiResult integrate_adaptive(const std::vector<double>& bx,
                            const std::vector<double>& by, F&& f,
                            double abs_tol, long max_evals) {
    std::deque<Cell> work;
    for (std::size_t i = 0; i + 1 < bx.size(); ++i)
        for (std::size_t j = 0; j + 1 < by.size(); ++j)
            work.push_back({bx[i], bx[i + 1], by[j], by[j + 1]});

    const double total_area =
        (bx.back() - bx.front()) * (by.back() - by.front());

    MiResult res;
    long cells_done = 0;
    while (!work.empty()) {
        if (res.evaluations + gk_n * gk_n > max_evals)
            throw numeric_error(
                "mutual-information quadrature exhausted its evaluation "
                "budget (" + std::to_string(max_evals) + " evals, " +
                std::to_string(cells_done) + " cells converged, " +
                std::to_string(work.size()) + " pending, partial integral " +
                std::to_string(res.bits) + " bits)");
        const Cell c = work.front();
        work.pop_front();
        const CellEstimate e = integrate_cell(c, f);
        res.evaluations += gk_n * gk_n;
        const double area = (c.x1 - c.x0) * (c.y1 - c.y0);
        const double tol_cell = abs_tol * area / total_area;
        if (e.err <= tol_cell || area < 1e-12 * total_area) {
            res.bits += e.fine;
            res.err_estimate += e.err;
            ++cells_done;
        } else {
            const double xm = 0.5 * (c.x0 + c.x1), ym = 0.5 * (c.y0 + c.y1);
            work.push_back({c.x0, xm, c.y0, ym});
            work.push_back({xm, c.x1, c.y0, ym});
            work.push_back({c.x0, xm, ym, c.y1});
            work.push_back({xm, c.x1, ym, c.y1});
        }
    }
    return res;
}

} // namespace

MiResult shannon_information(const ArrivalTimeMixture& mix, double abs_tol_bits,
                             long max_evals) {
    for (double w : mix.w)
        if (w < -1e-12) throw std::domain_error("negative mixture weight");
    if (!(mix.frame_duration > 0.0))
        throw std::domain_error("frame duration must be > 0");
    const MixtureDensity den(mix);
    const double inv_ln2 = 1.0 / std::log(2.0);

    if (std::abs(mix.w[0] - 1.0) < 1e-12) {
        // pure coincidence case: integrate in the eigenbasis of the
        // covariance so the near-singular correlation ridge is axis-aligned
        Eigen::Matrix2d lam;
        lam << mix.var_a, mix.cov, mix.cov, mix.var_b;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(lam);
        const Eigen::Vector2d ev = es.eigenvalues();
        const Eigen::Matrix2d rot = es.eigenvectors();
        if (!(ev(0) > 0.0))
            throw numeric_error("arrival-time covariance is singular");
        auto f = [&](double p, double q) {
            const double x = rot(0, 0) * p + rot(0, 1) * q;
            const double y = rot(1, 0) * p + rot(1, 1) * q;
            const double joint = gauss_pdf(p, ev(0)) * gauss_pdf(q, ev(1));
            if (joint <= 0.0) return 0.0;
            const double mden = den.marginal_a(x) * den.marginal_b(y);
            if (mden <= 0.0) return 0.0;
            return joint * std::log(joint / mden) * inv_ln2;
        };
        const double h0 = 8.0 * std::sqrt(ev(0));
        const double h1 = 8.0 * std::sqrt(ev(1));
        const std::vector<double> b0{-h0, 0.0, h0}, b1{-h1, 0.0, h1};
        return integrate_adaptive(b0, b1, f, abs_tol_bits, max_evals);
    }

    const double sa = std::sqrt(mix.var_a), sb = std::sqrt(mix.var_b);
    const double h = std::max(1.5 * mix.frame_duration,
                              7.0 * std::max(sa, sb));
    const bool has_u = mix.w[2] + mix.w[3] + mix.w[4] > 0.0;
    auto f = [&](double x, double y) {
        const double joint = den.joint(x, y);
        if (joint <= 0.0) return 0.0;
        const double mden = den.marginal_a(x) * den.marginal_b(y);
        if (mden <= 0.0) return 0.0;
        return joint * std::log(joint / mden) * inv_ln2;
    };
    return integrate_adaptive(axis_breaks(h, sa, den.half, has_u),
                              axis_breaks(h, sb, den.half, has_u), f,
                              abs_tol_bits, max_evals);
}

RateBreakdown secure_key_rate(const ProtocolParams& pp,
                              const EventProbabilities& ev, double i_ab,
                              double chi_ub, double frame_duration) {
    if (!(frame_duration > 0.0))
        throw std::domain_error("frame duration must be > 0");
    RateBreakdown r;
    r.p_r = ev.p_r;
    r.fidelity = ev.fidelity;
    r.i_ab = i_ab;
    r.chi_ub = chi_ub;
    r.bits_per_frame = pp.beta * i_ab - (1.0 - ev.fidelity) * pp.n_r
                     - ev.fidelity * chi_ub;
    const double factor = pp.q * ev.p_r / (3.0 * frame_duration);
    r.pie = std::max(r.bits_per_frame, 0.0);
    r.clamped = r.bits_per_frame < 0.0;
    r.skr = factor * r.pie;
    r.skr_raw = factor * r.bits_per_frame;
    return r;
}

} // namespace hdqkd
