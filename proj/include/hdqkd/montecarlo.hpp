#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hdqkd/channel.hpp"
#include "hdqkd/interferometry.hpp"
#include "hdqkd/source_model.hpp"

namespace hdqkd {

// Splittable deterministic generator built on SplitMix64. substream(i)
// derives an independent stream keyed by (seed, i), so per-frame randomness
// is addressed by frame index and results do not depend on how a run is
// batched. Bit-reproducible for a fixed seed on one platform; stdlib
// distributions are avoided on purpose (their streams are not portable).
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}

    SplitRng substream(std::uint64_t stream) const;

    std::uint64_t next_u64();
    double next_unit();                   // (0, 1]
    double next_gaussian(double sigma);   // single-branch Box-Muller
    int next_poisson(double mu);          // CDF inversion, fine for mu <= 0.2

private:
    std::uint64_t state_;
};

struct BiphotonSample {
    double t_s = 0.0, w_s = 0.0, t_i = 0.0, w_i = 0.0;
};

// Classical sampler whose covariance converges to Gamma_0:
// t+ ~ N(0, sigma_coh^2), t- ~ N(0, sigma_cor^2), t_{S,I} = t+ +- t-/2;
// w+ ~ N(0, 1/(4 sigma_cor^2)), w- ~ N(0, 1/(4 sigma_coh^2)), w_{S,I} = w+ +- w-/2.
std::vector<BiphotonSample> sample_biphotons(const SourceMoments& moments,
                                             long n, std::uint64_t seed);

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    long n = 0;
};

// Sample mean of cos(x * setting), x = w_S - w_I (Franson) or t_S - t_I (CFI).
McEstimate mc_visibility(const std::vector<BiphotonSample>& samples,
                         double setting, FringeKind kind);

struct FrameRecord {
    double t_a = 0.0;
    double t_b = 0.0;
    int event = 0;  // 1..5
};

struct McRunConfig {
    long n_frames = 0;
    std::uint64_t seed = 1;
    std::uint64_t frame_offset = 0;  // first frame index (for batching tests)
    long max_records = 0;            // 0 = keep none
    // Variance used when a terminal sees >1 detection and reports a resampled
    // time instead (terminal TFCM arrival-time entry + jitter variance).
    // Negative = derive from the nominal TFCM.
    double resample_var_a = -1.0;
    double resample_var_b = -1.0;
};

struct FrameStats {
    long n_frames = 0;
    long postselected = 0;
    double p_r = 0.0, p_r_err = 0.0;
    std::array<double, 5> p_hat{};  // conditional event frequencies
    std::array<double, 5> p_err{};
    double f_hat = 0.0, f_err = 0.0;  // single-pair fraction
    std::vector<FrameRecord> records;
};

// Frame-level protocol simulation: n ~ Poisson(mu) pairs; Alice detects each
// signal photon w.p. eta_alice, Bob each idler w.p. eta_bob * eta_p; one
// Bernoulli(p_d) dark per terminal at a uniform time; Gaussian jitter of FWHM
// deltaT on photon detections; multi-detection terminals resample from the
// Gaussian rule above. Postselect frames where both terminals fired.
FrameStats simulate_frames(const SourceParams& source, const DetectorParams& det,
                           const LinkParams& link, const McRunConfig& cfg);

// Plug-in MI (bits) from binned records of the given event (0 = all), using
// bins x bins cells over [-5 sigma, 5 sigma] per axis (sample sigma). Coarse
// magnitude check, not the production quadrature.
double binned_mi(const std::vector<FrameRecord>& records, int bins = 64,
                 int event_filter = 1);

} // namespace hdqkd
