#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hdqkd/config.hpp"
#include "hdqkd/errors.hpp"
#include "hdqkd/montecarlo.hpp"
#include "hdqkd/pipeline.hpp"
#include "hdqkd/units.hpp"

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

int env_threads() {
    const char* s = std::getenv("HDQKD_THREADS");
    if (!s) return 1;
    const int n = std::atoi(s);
    return n > 0 ? n : 1;
}

void print_warnings(const hdqkd::RunConfig& cfg, std::ostream& os) {
    for (const auto& w : cfg.warnings) os << "warning: " << w << "\n";
}

int cmd_rate(const hdqkd::RunConfig& cfg, std::ostream& os) {
    const hdqkd::PointResult p = hdqkd::evaluate_point(cfg, cfg.link.distance_km);
    const auto& r = p.row;
    os << "distance_km: " << num(r.distance_km) << "\n"
       << "eta_P: " << num(r.eta_p) << "\n"
       << "p_r: " << num(r.p_r) << "\n"
       << "F: " << num(r.fidelity) << "\n"
       << "xi_t_raw: " << num(p.xi_t_noise.raw)
       << "  (clamped " << num(p.xi_t_noise.clamped) << ")\n"
       << "xi_omega_raw: " << num(p.xi_w_noise.raw)
       << "  (clamped " << num(p.xi_w_noise.clamped) << ")\n";
    if (!r.feasible) {
        os << "error: " << r.error << "\n";
        return 2;
    }
    os << "chi_UB_bits: " << num(r.chi_ub) << "\n"
       << "I_AB_bits: " << num(r.i_ab) << "\n"
       << "bits_per_frame: " << num(r.bits_per_frame) << "\n"
       << "SKR_bps: " << num(r.skr) << "\n"
       << "PIE_bits: " << num(r.pie) << "\n"
       << "clamped: " << (r.clamped ? 1 : 0) << "\n"
       << "on_search_boundary: " << (r.on_search_boundary ? 1 : 0) << "\n"
       << "holevo_evals: " << p.holevo.evaluations << "\n"
       << "mi_evals: " << p.mi.evaluations << "\n";
    return 0;
}

int cmd_sweep(const hdqkd::RunConfig& cfg, std::ostream& os) {
    const std::vector<double> d = hdqkd::sweep_distances(cfg.sweep);
    const auto points = hdqkd::run_sweep(cfg, d, env_threads());
    os << hdqkd::csv_header();
    for (const auto& p : points) os << hdqkd::csv_row(p);
    return 0;
}

int cmd_visibility(const hdqkd::RunConfig& cfg, std::ostream& os) {
    const hdqkd::SourceMoments m = hdqkd::derive_moments(cfg.source);
    const hdqkd::Tfcm g0 = hdqkd::nominal_tfcm(m);
    const hdqkd::DiffVariances v0 = hdqkd::difference_variances(g0);
    const auto& ifm = cfg.interferometer;

    const double v_fi = hdqkd::franson_visibility_gaussian(v0.v_w, ifm.delta_t);
    const double v_cfi = hdqkd::cfi_visibility_gaussian(v0.v_t, ifm.delta_omega);
    const double v_fi_meas = v_fi * cfg.visibility_multiplier;
    const double v_cfi_meas = v_cfi * cfg.visibility_multiplier;

    const double fourth_w =
        hdqkd::jitter_fourth_moment_freq(cfg.detector.jitter_fwhm, ifm.beta2);
    const double fourth_t =
        hdqkd::jitter_fourth_moment_time(cfg.detector.jitter_fwhm);
    const auto xi_w = hdqkd::excess_noise(
        hdqkd::lemma1_bound({hdqkd::FringeKind::franson, v_fi_meas, ifm.delta_t},
                            fourth_w),
        v0.v_w);
    const auto xi_t = hdqkd::excess_noise(
        hdqkd::lemma2_bound(
            {hdqkd::FringeKind::conjugate_franson, v_cfi_meas, ifm.delta_omega},
            fourth_t),
        v0.v_t);
    const double xi_t_jitter =
        hdqkd::raw_time_excess(cfg.detector.jitter_fwhm, m.sigma_cor);

    os << "sigma_coh_ps: " << num(m.sigma_coh / hdqkd::picosecond) << "\n"
       << "sigma_cor_ps: " << num(m.sigma_cor / hdqkd::picosecond) << "\n"
       << "delta_t_ps: " << num(ifm.delta_t / hdqkd::picosecond) << "\n"
       << "delta_omega_ghz: "
       << num(ifm.delta_omega / (hdqkd::two_pi * hdqkd::gigahertz)) << "\n"
       << "V_FI_ideal: " << num(v_fi) << "\n"
       << "V_FI_measured: " << num(v_fi_meas) << "\n"
       << "V_CFI_ideal: " << num(v_cfi) << "\n"
       << "V_CFI_measured: " << num(v_cfi_meas) << "\n"
       << "xi_omega_raw: " << num(xi_w.raw)
       << "  (clamped " << num(xi_w.clamped) << ")\n"
       << "xi_t_cfi_raw: " << num(xi_t.raw)
       << "  (clamped " << num(xi_t.clamped) << ")\n"
       << "xi_t_jitter_raw: " << num(xi_t_jitter) << "\n";
    return 0;
}

int cmd_holevo(const hdqkd::RunConfig& cfg, std::ostream& os) {
    const hdqkd::PointResult p = hdqkd::evaluate_point(cfg, cfg.link.distance_km);
    os << "xi_t: " << num(p.bounds.xi_t) << "\n"
       << "xi_omega: " << num(p.bounds.xi_w) << "\n"
       << "feasible: " << (p.holevo.feasible ? 1 : 0) << "\n";
    if (!p.holevo.feasible) {
        os << "error: " << p.row.error << "\n";
        return 2;
    }
    os << "chi_UB_bits: " << num(p.holevo.chi) << "\n"
       << "eps_t_star: " << num(p.holevo.params_star.eps_t) << "\n"
       << "eta_t_star: " << num(p.holevo.params_star.eta_t) << "\n"
       << "eps_omega_star: " << num(p.holevo.params_star.eps_w) << "\n"
       << "eta_omega_star: " << num(p.holevo.params_star.eta_w) << "\n"
       << "on_search_boundary: " << (p.holevo.on_search_boundary ? 1 : 0) << "\n"
       << "evaluations: " << p.holevo.evaluations << "\n";
    return 0;
}

struct Check {
    bool pass = false;
    std::string line;
};

Check check_within(const std::string& name, double got, double want, double se) {
    const double lim = 3.0 * se;
    Check c;
    c.pass = std::abs(got - want) <= lim || se == 0.0;
    c.line = std::string(c.pass ? "PASS " : "FAIL ") + name + ": got " +
             num(got) + ", expected " + num(want) + " +- " + num(lim);
    return c;
}

int cmd_validate(const hdqkd::RunConfig& cfg, std::ostream& os) {
    using namespace hdqkd;
    std::vector<Check> checks;
    const SourceMoments m = derive_moments(cfg.source);
    const Tfcm g0 = nominal_tfcm(m);

    const long n = std::max(cfg.mc.samples, 10000l);
    const auto samples = sample_biphotons(m, n, cfg.mc.seed);
    double vt = 0.0, vw = 0.0, ct = 0.0, cw = 0.0;
    for (const auto& s : samples) {
        vt += s.t_s * s.t_s;
        vw += s.w_s * s.w_s;
        ct += s.t_s * s.t_i;
        cw += s.w_s * s.w_i;
    }
    const double dn = static_cast<double>(n);
    vt /= dn;
    vw /= dn;
    ct /= dn;
    cw /= dn;
    const double rn = std::sqrt(2.0 / dn);
    checks.push_back(check_within("var(t_S)", vt, g0.m(0, 0), g0.m(0, 0) * rn));
    checks.push_back(check_within("var(w_S)", vw, g0.m(1, 1), g0.m(1, 1) * rn));
    checks.push_back(check_within(
        "cov(t_S,t_I)", ct, g0.m(0, 2),
        std::sqrt((g0.m(0, 0) * g0.m(2, 2) + g0.m(0, 2) * g0.m(0, 2)) / dn)));
    checks.push_back(check_within(
        "cov(w_S,w_I)", cw, g0.m(1, 3),
        std::sqrt((g0.m(1, 1) * g0.m(3, 3) + g0.m(1, 3) * g0.m(1, 3)) / dn)));

    const auto& ifm = cfg.interferometer;
    const DiffVariances v0 = difference_variances(g0);
    const auto v_fi = mc_visibility(samples, ifm.delta_t, FringeKind::franson);
    checks.push_back(check_within("V_FI", v_fi.mean,
                                  franson_visibility_gaussian(v0.v_w, ifm.delta_t),
                                  v_fi.std_err));
    const auto v_cfi =
        mc_visibility(samples, ifm.delta_omega, FringeKind::conjugate_franson);
    checks.push_back(check_within("V_CFI", v_cfi.mean,
                                  cfi_visibility_gaussian(v0.v_t, ifm.delta_omega),
                                  v_cfi.std_err));

    const double eta_p =
        fiber_transmissivity(cfg.link.distance_km, cfg.link.loss_db_per_km);
    const double p_d = dark_prob(cfg.detector.dark_rate, cfg.source.frame_duration);
    const EventProbabilities ev =
        event_probabilities(cfg.source.mean_pairs_per_frame,
                            cfg.detector.eta_alice,
                            cfg.detector.eta_bob * eta_p, p_d);
    McRunConfig mc;
    mc.n_frames = cfg.mc.frames;
    mc.seed = cfg.mc.seed;
    const FrameStats st = simulate_frames(cfg.source, cfg.detector, cfg.link, mc);
    checks.push_back(check_within("p_r", st.p_r, ev.p_r, st.p_r_err));
    const double want_p[5] = {ev.p1, ev.p2, ev.p3, ev.p4, ev.p5};
    for (int k = 0; k < 5; ++k)
        checks.push_back(check_within("P" + std::to_string(k + 1), st.p_hat[k],
                                      want_p[k], st.p_err[k]));
    checks.push_back(check_within("F", st.f_hat, ev.fidelity, st.f_err));

    bool all = true;
    for (const auto& c : checks) {
        os << c.line << "\n";
        all = all && c.pass;
    }
    os << (all ? "validate: all checks passed" : "validate: FAILURES above")
       << "\n";
    return all ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure-key-rate bounds for time-energy entangled pair sources"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global flags after the subcommand too

    std::string config_path, out_path;
    double distance_km = -1.0;
    long long seed = -1;
    app.add_option("--config", config_path, "JSON config file (defaults if omitted)");
    app.add_option("--out", out_path, "write output here instead of stdout");
    app.add_option("--seed", seed, "override mc.seed");
    app.add_option("--distance-km", distance_km, "override channel.distance_km");

    auto* rate = app.add_subcommand("rate", "single-distance key-rate breakdown");
    auto* sweep = app.add_subcommand("sweep", "distance sweep, CSV output");
    auto* visibility =
        app.add_subcommand("visibility", "interferometer forward model and noise bounds");
    auto* holevo = app.add_subcommand("holevo", "eavesdropper information bound only");
    auto* validate = app.add_subcommand(
        "validate", "Monte-Carlo vs closed-form consistency checks (exit 3 on failure)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        hdqkd::RunConfig cfg =
            config_path.empty() ? hdqkd::default_config() : hdqkd::load_config(config_path);
        if (distance_km >= 0.0) cfg.link.distance_km = distance_km;
        if (seed >= 0) cfg.mc.seed = static_cast<std::uint64_t>(seed);
        hdqkd::finalize_config(cfg);

        std::ofstream file;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file)
                throw hdqkd::config_error("cannot open output file: " + out_path);
        }
        std::ostream& os = out_path.empty() ? std::cout : file;

        print_warnings(cfg, std::cerr);
        if (rate->parsed()) return cmd_rate(cfg, os);
        if (sweep->parsed()) return cmd_sweep(cfg, os);
        if (visibility->parsed()) return cmd_visibility(cfg, os);
        if (holevo->parsed()) return cmd_holevo(cfg, os);
        if (validate->parsed()) return cmd_validate(cfg, os);
        return 1;
    } catch (const hdqkd::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
