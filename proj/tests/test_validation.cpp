#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hdqkd/channel.hpp"
#include "hdqkd/interferometry.hpp"
#include "hdqkd/montecarlo.hpp"
#include "hdqkd/rate.hpp"
#include "hdqkd/source_model.hpp"
#include "hdqkd/tfcm.hpp"
#include "hdqkd/units.hpp"

// End-to-end cross-validation: every closed form that feeds the key-rate
// bound is re-derived by simulation at pinned seeds and must agree within
// 3 standard errors. Deterministic by construction.

using namespace hdqkd;

namespace {
const std::uint64_t kSeed = 20260822;

SourceParams bench_source() { return {480.0 * picosecond, 200.0 * gigahertz, 0.01}; }
}  // namespace

TEST_CASE("sampled biphoton covariance reproduces every TFCM entry") {
    const SourceMoments m = derive_moments(bench_source());
    const Tfcm g0 = nominal_tfcm(m);
    const long n = 1000000;
    const auto samples = sample_biphotons(m, n, kSeed);

    // accumulate all 10 distinct second moments
    double acc[4][4] = {};
    for (const auto& s : samples) {
        const double v[4] = {s.t_s, s.w_s, s.t_i, s.w_i};
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) acc[i][j] += v[i] * v[j];
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double est = acc[i][j] / double(n);
            const double truth = g0.m(i, j);
            // SE of a Gaussian second moment: sqrt((m_ii m_jj + m_ij^2)/n)
            const double se =
                std::sqrt((g0.m(i, i) * g0.m(j, j) + truth * truth) / double(n));
            INFO("entry (", i, ",", j, ")");
            CHECK(std::abs(est - truth) < 3.0 * se);
        }
}

TEST_CASE("fringe visibilities: simulation vs Gaussian closed form") {
    const SourceMoments m16 = derive_moments(bench_source());
    const SourceMoments m32 = derive_moments({960.0 * picosecond, 200.0 * gigahertz, 0.01});
    const double dT = std::sqrt(2.0) * 108.0 * picosecond;
    const double dW = two_pi * 5.0 * gigahertz;
    const long n = 1000000;

    const auto s16 = sample_biphotons(m16, n, kSeed);
    const auto s32 = sample_biphotons(m32, n, kSeed + 1);

    const DiffVariances v16 = difference_variances(nominal_tfcm(m16));
    const DiffVariances v32 = difference_variances(nominal_tfcm(m32));

    const McEstimate fi16 = mc_visibility(s16, dT, FringeKind::franson);
    CHECK(std::abs(fi16.mean - franson_visibility_gaussian(v16.v_w, dT)) <
          3.0 * fi16.std_err);

    const McEstimate fi32 = mc_visibility(s32, dT, FringeKind::franson);
    CHECK(std::abs(fi32.mean - franson_visibility_gaussian(v32.v_w, dT)) <
          3.0 * fi32.std_err);

    const McEstimate cfi = mc_visibility(s16, dW, FringeKind::conjugate_franson);
    CHECK(std::abs(cfi.mean - cfi_visibility_gaussian(v16.v_t, dW)) <
          3.0 * cfi.std_err);
}

TEST_CASE("jitter moments: sampled fourth moment and raw time excess") {
    const double jit = 30.0 * picosecond;
    const double sigma_j = jit / fwhm_to_rms;
    const SourceMoments m = derive_moments(bench_source());
    SplitRng rng(kSeed + 2);
    const long n = 1000000;

    // difference of two i.i.d. detector jitters
    double s2 = 0.0, s4 = 0.0, s8 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double d = rng.next_gaussian(sigma_j) - rng.next_gaussian(sigma_j);
        const double d4 = d * d * d * d;
        s2 += d * d;
        s4 += d4;
        s8 += d4 * d4;
    }
    const double m4_hat = s4 / n;
    const double m4_closed = jitter_fourth_moment_time(jit);
    const double se_m4 = std::sqrt((s8 / n - m4_hat * m4_hat) / double(n));
    CHECK(std::abs(m4_hat - m4_closed) < 3.0 * se_m4);

    // raw arrival-time difference variance vs (1 + xi_raw) sigma_cor^2
    SplitRng rng2(kSeed + 3);
    const auto samples = sample_biphotons(m, n, kSeed + 4);
    double sv = 0.0, sv2 = 0.0;
    for (const auto& s : samples) {
        const double d = (s.t_s + rng2.next_gaussian(sigma_j)) -
                         (s.t_i + rng2.next_gaussian(sigma_j));
        sv += d * d;
        sv2 += d * d * d * d;
    }
    const double v_hat = sv / n;
    const double v_closed =
        (1.0 + raw_time_excess(jit, m.sigma_cor)) * m.sigma_cor * m.sigma_cor;
    const double se_v = std::sqrt((sv2 / n - v_hat * v_hat) / double(n));
    CHECK(std::abs(v_hat - v_closed) < 3.0 * se_v);
}

TEST_CASE("benchmark frame simulation at the production seed") {
    // the exact configuration the rate pipeline runs at 0 km
    DetectorParams det;
    det.jitter_fwhm = 30.0 * picosecond;
    det.eta_alice = 0.15;
    det.eta_bob = 0.15;
    det.dark_rate = 1000.0;
    det.gate = 108.0 * picosecond;

    McRunConfig cfg;
    cfg.n_frames = 2000000;
    cfg.seed = kSeed;
    const FrameStats st = simulate_frames(bench_source(), det, {0.0, 0.2}, cfg);

    const double p_d = dark_prob(det.dark_rate, 480.0 * picosecond);
    const EventProbabilities ev = event_probabilities(0.01, 0.15, 0.15, p_d);

    REQUIRE(st.postselected > 300);
    CHECK(std::abs(st.p_r - ev.p_r) < 3.0 * st.p_r_err);
    CHECK(std::abs(st.f_hat - ev.fidelity) < 3.0 * std::max(st.f_err, 1e-9));
    const double se1 =
        std::sqrt(ev.p1 * (1.0 - ev.p1) / double(st.postselected));
    CHECK(std::abs(st.p_hat[0] - ev.p1) < 3.0 * std::max(st.p_err[0], se1) + 1e-12);

    // long fiber: Bob's efficiency folds the channel in
    McRunConfig far_cfg;
    far_cfg.n_frames = 2000000;
    far_cfg.seed = kSeed + 5;
    DetectorParams lossy = det;
    lossy.eta_alice = 0.9;
    lossy.eta_bob = 0.9;
    const FrameStats far = simulate_frames(bench_source(), lossy, {20.0, 0.2}, far_cfg);
    const double eta_p = fiber_transmissivity(20.0, 0.2);
    const EventProbabilities far_ev =
        event_probabilities(0.01, 0.9, 0.9 * eta_p, p_d);
    CHECK(std::abs(far.p_r - far_ev.p_r) < 3.0 * far.p_r_err);
}

TEST_CASE("postselected arrival-time records carry the modeled covariance") {
    // high-statistics channel so event-1 records accumulate quickly
    SourceParams src{480.0 * picosecond, 200.0 * gigahertz, 0.1};
    DetectorParams det;
    det.jitter_fwhm = 30.0 * picosecond;
    det.eta_alice = 0.9;
    det.eta_bob = 0.9;
    det.dark_rate = 1000.0;
    det.gate = 108.0 * picosecond;

    McRunConfig cfg;
    cfg.n_frames = 3000000;
    cfg.seed = kSeed + 6;
    cfg.max_records = 300000;
    const FrameStats st = simulate_frames(src, det, {0.0, 0.2}, cfg);

    const Tfcm g0 = nominal_tfcm(derive_moments(src));
    const double sj2 = std::pow(det.jitter_fwhm / fwhm_to_rms, 2);
    const double va_th = g0.m(0, 0) + sj2;
    const double cov_th = g0.m(0, 2);

    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    long n1 = 0;
    for (const auto& rec : st.records) {
        if (rec.event != 1) continue;
        ++n1;
        sa += rec.t_a;
        sb += rec.t_b;
        saa += rec.t_a * rec.t_a;
        sbb += rec.t_b * rec.t_b;
        sab += rec.t_a * rec.t_b;
    }
    REQUIRE(n1 > 100000);
    const double ma = sa / n1, mb = sb / n1;
    const double va = saa / n1 - ma * ma;
    const double vb = sbb / n1 - mb * mb;
    const double cab = sab / n1 - ma * mb;

    CHECK(std::abs(va - va_th) < 3.0 * va_th * std::sqrt(2.0 / double(n1)));
    CHECK(std::abs(vb - va_th) < 3.0 * va_th * std::sqrt(2.0 / double(n1)));
    const double se_c = std::sqrt((va_th * va_th + cov_th * cov_th) / double(n1));
    CHECK(std::abs(cab - cov_th) < 3.0 * se_c);
}

TEST_CASE("binned record MI agrees with the Gaussian closed form") {
    // moderate correlation so 64 bins resolve the conditional width:
    // a short frame takes rho down to ~0.67
    SourceParams src{std::sqrt(2.0) * 30.0 * picosecond, 200.0 * gigahertz, 0.1};
    DetectorParams det;
    det.jitter_fwhm = 30.0 * picosecond;
    det.eta_alice = 1.0;
    det.eta_bob = 1.0;
    det.dark_rate = 0.0;
    det.gate = 108.0 * picosecond;

    McRunConfig cfg;
    cfg.n_frames = 12000000;
    cfg.seed = kSeed + 7;
    cfg.max_records = 1000000;
    const FrameStats st = simulate_frames(src, det, {0.0, 0.2}, cfg);
    REQUIRE(st.records.size() == 1000000);

    const Tfcm g0 = nominal_tfcm(derive_moments(src));
    const double sj2 = std::pow(det.jitter_fwhm / fwhm_to_rms, 2);
    const double mi_closed =
        gaussian_mi(g0.m(0, 0) + sj2, g0.m(2, 2) + sj2, g0.m(0, 2));
    const double mi_binned = binned_mi(st.records, 64, 1);

    CHECK(mi_closed > 0.3);
    CHECK(mi_closed < 0.6);
    CHECK(std::abs(mi_binned - mi_closed) < 0.05);
}

TEST_CASE("decoy calibration closes the loop through the simulator") {
    // measure p_r at three intensities by simulation, fit, recover F
    DetectorParams det;
    det.jitter_fwhm = 30.0 * picosecond;
    det.eta_alice = 0.3;
    det.eta_bob = 0.3;
    det.dark_rate = 1000.0;
    det.gate = 108.0 * picosecond;
    const double p_d = dark_prob(det.dark_rate, 480.0 * picosecond);

    std::vector<DecoyReading> readings;
    int k = 0;
    for (double mu : {0.02, 0.05, 0.1}) {
        SourceParams src{480.0 * picosecond, 200.0 * gigahertz, mu};
        McRunConfig cfg;
        cfg.n_frames = 2000000;
        cfg.seed = kSeed + 8 + (k++);
        const FrameStats st = simulate_frames(src, det, {0.0, 0.2}, cfg);
        readings.push_back({mu, st.p_r});
    }

    const DecoyFit fit = estimate_f_from_decoys(readings, p_d, 0.05);
    const double f_true = event_probabilities(0.05, 0.3, 0.3, p_d).fidelity;
    CHECK(std::abs(fit.fidelity - f_true) / f_true < 0.05);
    // F pins the product of efficiencies well; the split is weakly
    // identified from three intensities, so only sanity-bound it
    CHECK(fit.eta_a * fit.eta_b > 0.5 * 0.09);
    CHECK(fit.eta_a * fit.eta_b < 2.0 * 0.09);
}
