#include "hdqkd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hdqkd/errors.hpp"

namespace hdqkd {

PointResult evaluate_point(const RunConfig& cfg, double distance_km) {
    const SourceMoments mom = derive_moments(cfg.source);
    const Tfcm gamma0 = nominal_tfcm(mom);
    const double t_f = cfg.source.frame_duration;

    PointResult p;
    p.row.distance_km = distance_km;
    p.row.eta_p = fiber_transmissivity(distance_km, cfg.link.loss_db_per_km);

    const double p_d = dark_prob(cfg.detector.dark_rate, t_f);
    p.events = event_probabilities(cfg.source.mean_pairs_per_frame,
                                   cfg.detector.eta_alice,
                                   cfg.detector.eta_bob * p.row.eta_p, p_d);

    p.nominal_v = difference_variances(gamma0);
    const auto& ifm = cfg.interferometer;
    p.v_fi_ideal = franson_visibility_gaussian(p.nominal_v.v_w, ifm.delta_t);
    p.v_cfi_ideal = cfi_visibility_gaussian(p.nominal_v.v_t, ifm.delta_omega);
    p.v_fi_measured = p.v_fi_ideal * cfg.visibility_multiplier;
    p.v_cfi_measured = p.v_cfi_ideal * cfg.visibility_multiplier;

    const double fourth_w =
        jitter_fourth_moment_freq(cfg.detector.jitter_fwhm, ifm.beta2);
    const double bound_w = lemma1_bound(
        {FringeKind::franson, p.v_fi_measured, ifm.delta_t}, fourth_w);
    p.xi_w_noise = excess_noise(bound_w, p.nominal_v.v_w);

    if (cfg.xi_t_source == XiTimeSource::conjugate_franson) {
        const double fourth_t = jitter_fourth_moment_time(cfg.detector.jitter_fwhm);
        const double bound_t = lemma2_bound(
            {FringeKind::conjugate_franson, p.v_cfi_measured, ifm.delta_omega},
            fourth_t);
        p.xi_t_noise = excess_noise(bound_t, p.nominal_v.v_t);
    } else {
        const double raw = raw_time_excess(cfg.detector.jitter_fwhm, mom.sigma_cor);
        p.xi_t_noise = {raw, std::max(raw, 0.0)};
    }

    p.bounds = {p.xi_t_noise.raw, p.xi_w_noise.raw};
    p.row.xi_t = p.bounds.xi_t;
    p.row.xi_w = p.bounds.xi_w;
    p.row.p_r = p.events.p_r;
    p.row.fidelity = p.events.fidelity;

    p.holevo = holevo_upper_bound(gamma0, p.bounds, cfg.optimizer);
    if (!p.holevo.feasible) {
        p.row.feasible = false;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "protocol abort: constraint set is empty "
                      "(xi_t=%.6g, xi_omega=%.6g)", p.bounds.xi_t, p.bounds.xi_w);
        p.row.error = buf;
        return p;
    }

    const Tfcm mi_gamma = cfg.mi_model == MiModel::gamma_star
                              ? p.holevo.gamma_star
                              : inflated_nominal(gamma0, p.bounds);
    const ArrivalTimeMixture mix =
        build_mixture(mi_gamma, cfg.detector, p.events, t_f);
    p.mi = shannon_information(mix, cfg.mi_tol_bits, cfg.mi_max_evals);

    const RateBreakdown rates = secure_key_rate(cfg.protocol, p.events, p.mi.bits,
                                                p.holevo.chi, t_f);
    p.row.fidelity = rates.fidelity;
    p.row.i_ab = rates.i_ab;
    p.row.chi_ub = rates.chi_ub;
    p.row.bits_per_frame = rates.bits_per_frame;
    p.row.skr_raw = rates.skr_raw;
    p.row.skr = rates.skr;
    p.row.pie = rates.pie;
    p.row.clamped = rates.clamped;
    p.row.on_search_boundary = p.holevo.on_search_boundary;
    return p;
}

std::vector<PointResult> run_sweep(const RunConfig& cfg,
                                   const std::vector<double>& distances,
                                   int threads) {
    std::vector<PointResult> out(distances.size());
    auto eval_range = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < distances.size(); i += stride) {
            try {
                out[i] = evaluate_point(cfg, distances[i]);
            } catch (const std::exception& e) {
                out[i] = PointResult{};
                out[i].row.distance_km = distances[i];
                out[i].row.feasible = false;
                out[i].row.error = e.what();
            }
        }
    };

    const int n_threads = std::max(
        1, std::min<int>(threads, static_cast<int>(distances.size())));
    if (n_threads == 1) {
        eval_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back(eval_range, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(n_threads));
        for (auto& t : pool) t.join();
    }
    return out;
}

std::vector<double> sweep_distances(const SweepRange& range) {
    if (!(range.step_km > 0.0))
        throw config_error("sweep.step_km must be > 0");
    std::vector<double> d;
    const double span = range.stop_km - range.start_km;
    if (span < 0.0) return d;
    const long n = static_cast<long>(std::floor(span / range.step_km + 1e-9));
    d.reserve(static_cast<std::size_t>(n + 1));
    for (long i = 0; i <= n; ++i)
        d.push_back(range.start_km + static_cast<double>(i) * range.step_km);
    return d;
}

std::string csv_header() {
    return "distance_km,eta_P,p_r,F,xi_t,xi_omega,I_AB_bits,chi_UB_bits,"
           "bits_per_frame,SKR_bps,PIE_bits,clamped,error\n";
}

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace

std::string csv_row(const PointResult& p) {
    const RateBreakdown& r = p.row;
    std::string s;
    s += num(r.distance_km);
    s += ',';
    s += num(r.eta_p);
    s += ',';
    s += num(r.p_r);
    s += ',';
    s += num(r.fidelity);
    s += ',';
    s += num(r.xi_t);
    s += ',';
    s += num(r.xi_w);
    s += ',';
    s += num(r.i_ab);
    s += ',';
    s += num(r.chi_ub);
    s += ',';
    s += num(r.bits_per_frame);
    s += ',';
    s += num(r.skr);
    s += ',';
    s += num(r.pie);
    s += ',';
    s += r.clamped ? '1' : '0';
    s += ',';
    s += sanitize(r.error);
    s += '\n';
    return s;
}

} // namespace hdqkd
