#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdqkd/channel.hpp"
#include "hdqkd/holevo.hpp"
#include "hdqkd/interferometry.hpp"
#include "hdqkd/rate.hpp"
#include "hdqkd/source_model.hpp"

namespace hdqkd {

enum class MiModel { gamma_star, nominal };
enum class XiTimeSource { conjugate_franson, raw_jitter };

struct SweepRange {
    double start_km = 0.0;
    double stop_km = 300.0;
    double step_km = 10.0;
};

struct McSettings {
    std::uint64_t seed = 20260822;
    long frames = 2000000;
    long samples = 1000000;
};

struct RunConfig {
    SourceParams source;
    DetectorParams detector;
    InterferometerParams interferometer;
    LinkParams link;
    ProtocolParams protocol;

    double visibility_multiplier = 0.995;  // measured V = ideal V * this
    MiModel mi_model = MiModel::gamma_star;
    XiTimeSource xi_t_source = XiTimeSource::conjugate_franson;

    OptimizerOptions optimizer;
    double mi_tol_bits = 1e-4;
    long mi_max_evals = 1000000;

    SweepRange sweep;
    McSettings mc;

    std::vector<std::string> warnings;  // filled during validation
};

// Benchmark defaults: 0.01 pairs/frame, T_f = 16*30 ps, B_PM = 200 GHz,
// 30 ps jitter, 15% detectors, 1e3/s darks, T_g = 108 ps with dT = sqrt(2)*T_g
// and dW = 2pi*5 GHz, 0.2 dB/km, q = 0.5, beta = 0.9, n_R = 8.
RunConfig default_config();

// Strict JSON loader: schema key required (= 1), unknown keys rejected,
// units fixed by key names (ps / GHz / km / Hz). Unset keys keep defaults.
// Throws config_error with a field-level message.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// Cross-field checks + derived defaults (delta_t = sqrt(2)*T_g, beta2 =
// sqrt(2)*T_g/delta_omega when unset). Appends warnings; throws config_error
// on violations (e.g. delta_t <= T_g or T_g <= jitter).
void finalize_config(RunConfig& cfg);

} // namespace hdqkd
