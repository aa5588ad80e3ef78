#include "hdqkd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "hdqkd/errors.hpp"
#include "hdqkd/units.hpp"

namespace hdqkd {

using nlohmann::json;

RunConfig default_config() {
    RunConfig c;
    c.source.frame_duration = 16.0 * 30.0 * picosecond;
    c.source.phase_matching_bw = 200.0 * gigahertz;
    c.source.mean_pairs_per_frame = 0.01;

    c.detector.jitter_fwhm = 30.0 * picosecond;
    c.detector.eta_alice = 0.15;
    c.detector.eta_bob = 0.15;
    c.detector.dark_rate = 1000.0;

    c.interferometer.gate = 108.0 * picosecond;
    c.interferometer.delta_omega = two_pi * 5.0 * gigahertz;
    // delta_t and beta2 left at 0 = "derive in finalize_config"
    return c;
}

namespace {

double as_number(const json& v, const std::string& path) {
    if (!v.is_number())
        throw config_error(path + " must be a number");
    return v.get<double>();
}

long as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer())
        throw config_error(path + " must be an integer");
    return v.get<long>();
}

std::string as_text(const json& v, const std::string& path) {
    if (!v.is_string())
        throw config_error(path + " must be a string");
    return v.get<std::string>();
}

const json& as_section(const json& v, const std::string& path) {
    if (!v.is_object())
        throw config_error(path + " must be an object");
    return v;
}

[[noreturn]] void unknown_key(const std::string& path) {
    throw config_error("unknown key \"" + path + "\"");
}

void parse_source(const json& sec, SourceParams& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "source." + k;
        if (k == "frame_duration_ps")
            out.frame_duration = as_number(v, path) * picosecond;
        else if (k == "phase_matching_bandwidth_ghz")
            out.phase_matching_bw = as_number(v, path) * gigahertz;
        else if (k == "mean_pairs_per_frame")
            out.mean_pairs_per_frame = as_number(v, path);
        else
            unknown_key(path);
    }
}

void parse_detector(const json& sec, DetectorParams& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "detector." + k;
        if (k == "jitter_fwhm_ps")
            out.jitter_fwhm = as_number(v, path) * picosecond;
        else if (k == "efficiency_alice")
            out.eta_alice = as_number(v, path);
        else if (k == "efficiency_bob")
            out.eta_bob = as_number(v, path);
        else if (k == "dark_rate_hz")
            out.dark_rate = as_number(v, path);
        else
            unknown_key(path);
    }
}

void parse_interferometer(const json& sec, InterferometerParams& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "interferometer." + k;
        if (k == "delta_t_ps")
            out.delta_t = as_number(v, path) * picosecond;
        else if (k == "delta_omega_ghz")
            out.delta_omega = two_pi * as_number(v, path) * gigahertz;
        else if (k == "beta2_ps2")
            out.beta2 = as_number(v, path) * picosecond * picosecond;
        else if (k == "gate_ps")
            out.gate = as_number(v, path) * picosecond;
        else
            unknown_key(path);
    }
}

void parse_channel(const json& sec, LinkParams& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "channel." + k;
        if (k == "distance_km")
            out.distance_km = as_number(v, path);
        else if (k == "loss_db_per_km")
            out.loss_db_per_km = as_number(v, path);
        else
            unknown_key(path);
    }
}

void parse_protocol(const json& sec, ProtocolParams& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "protocol." + k;
        if (k == "key_fraction_q")
            out.q = as_number(v, path);
        else if (k == "reconciliation_beta")
            out.beta = as_number(v, path);
        else if (k == "reconciliation_bits_nr")
            out.n_r = as_number(v, path);
        else
            unknown_key(path);
    }
}

void parse_analysis(const json& sec, RunConfig& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "analysis." + k;
        if (k == "visibility_multiplier") {
            out.visibility_multiplier = as_number(v, path);
        } else if (k == "mi_model") {
            const std::string s = as_text(v, path);
            if (s == "gamma_star")
                out.mi_model = MiModel::gamma_star;
            else if (s == "nominal")
                out.mi_model = MiModel::nominal;
            else
                throw config_error(path + ": expected \"gamma_star\" or "
                                          "\"nominal\", got \"" + s + "\"");
        } else if (k == "xi_t_source") {
            const std::string s = as_text(v, path);
            if (s == "conjugate_franson")
                out.xi_t_source = XiTimeSource::conjugate_franson;
            else if (s == "raw_jitter")
                out.xi_t_source = XiTimeSource::raw_jitter;
            else
                throw config_error(path + ": expected \"conjugate_franson\" or "
                                          "\"raw_jitter\", got \"" + s + "\"");
        } else if (k == "mi_tol_bits") {
            out.mi_tol_bits = as_number(v, path);
        } else if (k == "mi_max_evals") {
            out.mi_max_evals = as_count(v, path);
        } else if (k == "grid_points") {
            out.optimizer.grid_points = static_cast<int>(as_count(v, path));
        } else if (k == "refine_tol_bits") {
            out.optimizer.refine_tol_bits = as_number(v, path);
        } else {
            unknown_key(path);
        }
    }
}

void parse_sweep(const json& sec, SweepRange& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "sweep." + k;
        if (k == "start_km")
            out.start_km = as_number(v, path);
        else if (k == "stop_km")
            out.stop_km = as_number(v, path);
        else if (k == "step_km")
            out.step_km = as_number(v, path);
        else
            unknown_key(path);
    }
}

void parse_mc(const json& sec, McSettings& out) {
    for (const auto& [k, v] : sec.items()) {
        const std::string path = "mc." + k;
        if (k == "seed") {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw config_error(path + " must be a non-negative integer");
            out.seed = v.get<std::uint64_t>();
        } else if (k == "frames") {
            out.frames = as_count(v, path);
        } else if (k == "samples") {
            out.samples = as_count(v, path);
        } else {
            unknown_key(path);
        }
    }
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be an object");
    if (!j.contains("schema"))
        throw config_error("missing required key \"schema\"");
    if (!j["schema"].is_number_integer() || j["schema"].get<long>() != 1)
        throw config_error("unsupported schema version (expected 1)");

    RunConfig cfg = default_config();
    for (const auto& [k, v] : j.items()) {
        if (k == "schema")
            continue;
        else if (k == "source")
            parse_source(as_section(v, k), cfg.source);
        else if (k == "detector")
            parse_detector(as_section(v, k), cfg.detector);
        else if (k == "interferometer")
            parse_interferometer(as_section(v, k), cfg.interferometer);
        else if (k == "channel")
            parse_channel(as_section(v, k), cfg.link);
        else if (k == "protocol")
            parse_protocol(as_section(v, k), cfg.protocol);
        else if (k == "analysis")
            parse_analysis(as_section(v, k), cfg);
        else if (k == "sweep")
            parse_sweep(as_section(v, k), cfg.sweep);
        else if (k == "mc")
            parse_mc(as_section(v, k), cfg.mc);
        else
            unknown_key(k);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void finalize_config(RunConfig& cfg) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw config_error(msg);
    };

    require(cfg.source.frame_duration > 0.0, "source.frame_duration_ps must be > 0");
    require(cfg.source.phase_matching_bw > 0.0,
            "source.phase_matching_bandwidth_ghz must be > 0");
    require(cfg.source.mean_pairs_per_frame >= 0.0,
            "source.mean_pairs_per_frame must be >= 0");

    require(cfg.detector.jitter_fwhm >= 0.0, "detector.jitter_fwhm_ps must be >= 0");
    require(cfg.detector.eta_alice >= 0.0 && cfg.detector.eta_alice <= 1.0,
            "detector.efficiency_alice must be in [0, 1]");
    require(cfg.detector.eta_bob >= 0.0 && cfg.detector.eta_bob <= 1.0,
            "detector.efficiency_bob must be in [0, 1]");
    require(cfg.detector.dark_rate >= 0.0, "detector.dark_rate_hz must be >= 0");

    require(cfg.link.distance_km >= 0.0, "channel.distance_km must be >= 0");
    require(cfg.link.loss_db_per_km >= 0.0, "channel.loss_db_per_km must be >= 0");

    require(cfg.protocol.q > 0.0 && cfg.protocol.q <= 1.0,
            "protocol.key_fraction_q must be in (0, 1]");
    require(cfg.protocol.beta > 0.0 && cfg.protocol.beta <= 1.0,
            "protocol.reconciliation_beta must be in (0, 1]");
    require(cfg.protocol.n_r >= 0.0, "protocol.reconciliation_bits_nr must be >= 0");

    require(cfg.visibility_multiplier > 0.0 && cfg.visibility_multiplier <= 1.0,
            "analysis.visibility_multiplier must be in (0, 1]");
    require(cfg.mi_tol_bits > 0.0, "analysis.mi_tol_bits must be > 0");
    require(cfg.mi_max_evals > 0, "analysis.mi_max_evals must be > 0");
    require(cfg.optimizer.grid_points >= 2, "analysis.grid_points must be >= 2");
    require(cfg.optimizer.refine_tol_bits > 0.0,
            "analysis.refine_tol_bits must be > 0");

    require(cfg.sweep.step_km > 0.0, "sweep.step_km must be > 0");
    require(cfg.sweep.stop_km >= cfg.sweep.start_km,
            "sweep.stop_km must be >= sweep.start_km");
    require(cfg.sweep.start_km >= 0.0, "sweep.start_km must be >= 0");

    require(cfg.mc.frames >= 0, "mc.frames must be >= 0");
    require(cfg.mc.samples > 0, "mc.samples must be > 0");

    auto& ifm = cfg.interferometer;
    require(ifm.gate > 0.0, "interferometer.gate_ps must be > 0");
    require(ifm.delta_omega > 0.0, "interferometer.delta_omega_ghz must be > 0");
    if (ifm.delta_t <= 0.0) ifm.delta_t = std::sqrt(2.0) * ifm.gate;
    if (ifm.beta2 <= 0.0) ifm.beta2 = ifm.delta_t / ifm.delta_omega;

    // timing hierarchy the postselection model assumes
    require(ifm.gate > cfg.detector.jitter_fwhm,
            "interferometer.gate_ps must exceed detector.jitter_fwhm_ps");
    require(ifm.delta_t > ifm.gate,
            "interferometer.delta_t_ps must exceed interferometer.gate_ps");
    require(ifm.delta_t < cfg.source.frame_duration,
            "interferometer.delta_t_ps must be smaller than the frame");
    cfg.detector.gate = ifm.gate;

    const SourceMoments m = derive_moments(cfg.source);
    if (few_bins_warning(m))
        cfg.warnings.push_back(
            "sigma_coh/sigma_cor < 4: few usable time bins per frame");
    const double p_d = dark_prob(cfg.detector.dark_rate, cfg.source.frame_duration);
    if (p_d > 0.1)
        cfg.warnings.push_back(
            "dark_rate_hz * frame duration > 0.1: single-dark model is strained");
}

} // namespace hdqkd
