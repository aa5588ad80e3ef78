#pragma once

#include <string>
#include <vector>

#include "hdqkd/config.hpp"
#include "hdqkd/holevo.hpp"
#include "hdqkd/rate.hpp"

namespace hdqkd {

// Everything computed for one distance point, kept for reporting.
struct PointResult {
    RateBreakdown row;
    EventProbabilities events;
    NoiseBounds bounds;          // raw xi as fed to the optimizer
    ExcessNoise xi_t_noise;      // raw + clamped
    ExcessNoise xi_w_noise;
    DiffVariances nominal_v;
    double v_fi_ideal = 1.0, v_cfi_ideal = 1.0;
    double v_fi_measured = 1.0, v_cfi_measured = 1.0;
    HolevoResult holevo;
    MiResult mi;
};

// Full chain at one distance: transmissivity -> event probabilities ->
// visibilities -> lemma bounds -> xi -> chi^UB -> mixture -> I(A;B) -> rate.
// Infeasible M comes back as row.feasible = false (protocol abort), not an
// exception; genuine errors (config/numeric) do throw.
PointResult evaluate_point(const RunConfig& cfg, double distance_km);

// One PointResult per distance, order preserved. Per-point failures are
// captured in row.error and the sweep continues. threads <= 1 runs serially;
// results are identical either way.
std::vector<PointResult> run_sweep(const RunConfig& cfg,
                                   const std::vector<double>& distances,
                                   int threads = 1);

std::vector<double> sweep_distances(const SweepRange& range);

// CSV (RFC 4180, '.' decimal): fixed 13-column schema; `error` is empty on
// success so the header never changes shape.
std::string csv_header();
std::string csv_row(const PointResult& p);

} // namespace hdqkd
