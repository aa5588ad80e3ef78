#include "hdqkd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hdqkd/errors.hpp"
#include "hdqkd/tfcm.hpp"
#include "hdqkd/units.hpp"

namespace hdqkd {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace

SplitRng SplitRng::substream(std::uint64_t stream) const {
    return SplitRng(mix64(state_ + golden * (stream + 1)));
}

std::uint64_t SplitRng::next_u64() {
    state_ += golden;
    return mix64(state_);
}

double SplitRng::next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double SplitRng::next_gaussian(double sigma) {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

int SplitRng::next_poisson(double mu) {
    if (mu < 0.0) throw std::domain_error("mu must be >= 0");
    const double u = next_unit();
    double p = std::exp(-mu);
    double cdf = p;
    int n = 0;
    while (u > cdf && n < 64) {
        ++n;
        p *= mu / n;
        cdf += p;
    }
    return n;
}

std::vector<BiphotonSample> sample_biphotons(const SourceMoments& moments,
                                             long n, std::uint64_t seed) {
    if (n < 0) throw std::domain_error("sample count must be >= 0");
    SplitRng rng(seed);
    const double s_wp = 1.0 / (2.0 * moments.sigma_cor);
    const double s_wm = 1.0 / (2.0 * moments.sigma_coh);
    std::vector<BiphotonSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double tp = rng.next_gaussian(moments.sigma_coh);
        const double tm = rng.next_gaussian(moments.sigma_cor);
        const double wp = rng.next_gaussian(s_wp);
        const double wm = rng.next_gaussian(s_wm);
        out.push_back({tp + 0.5 * tm, wp + 0.5 * wm,
                       tp - 0.5 * tm, wp - 0.5 * wm});
    }
    return out;
}

McEstimate mc_visibility(const std::vector<BiphotonSample>& samples,
                         double setting, FringeKind kind) {
    if (samples.empty()) throw std::domain_error("no samples");
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : samples) {
        const double x = kind == FringeKind::franson ? s.w_s - s.w_i
                                                     : s.t_s - s.t_i;
        const double c = std::cos(setting * x);
        sum += c;
        sum2 += c * c;
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    const double var = std::max(sum2 / n - mean * mean, 0.0);
    return {mean, std::sqrt(var / n), static_cast<long>(samples.size())};
}

FrameStats simulate_frames(const SourceParams& source, const DetectorParams& det,
                           const LinkParams& link, const McRunConfig& cfg) {
    if (cfg.n_frames < 0) throw std::domain_error("frame count must be >= 0");
    const SourceMoments mom = derive_moments(source);
    const double eta_p = fiber_transmissivity(link.distance_km, link.loss_db_per_km);
    const double eta_a = det.eta_alice;
    const double eta_b = det.eta_bob * eta_p;
    const double p_d = dark_prob(det.dark_rate, source.frame_duration);
    const double sigma_j = det.jitter_fwhm / fwhm_to_rms;

    const Tfcm gamma0 = nominal_tfcm(mom);
    const double default_var = gamma0.m(0, 0) + sigma_j * sigma_j;
    const double var_a = cfg.resample_var_a < 0.0 ? default_var : cfg.resample_var_a;
    const double var_b = cfg.resample_var_b < 0.0 ? default_var : cfg.resample_var_b;
    const double sig_a = std::sqrt(var_a), sig_b = std::sqrt(var_b);

    const SplitRng base(cfg.seed);
    FrameStats st;
    st.n_frames = cfg.n_frames;
    long counts[5] = {0, 0, 0, 0, 0};
    long singles = 0;  // postselected frames that held exactly one pair

    std::vector<double> hits_a, hits_b;
    for (long i = 0; i < cfg.n_frames; ++i) {
        SplitRng rng = base.substream(cfg.frame_offset + static_cast<std::uint64_t>(i));
        const int n = rng.next_poisson(source.mean_pairs_per_frame);

        hits_a.clear();
        hits_b.clear();
        for (int k = 0; k < n; ++k) {
            const double tp = rng.next_gaussian(mom.sigma_coh);
            const double tm = rng.next_gaussian(mom.sigma_cor);
            if (rng.next_unit() <= eta_a)
                hits_a.push_back(tp + 0.5 * tm + rng.next_gaussian(sigma_j));
            if (rng.next_unit() <= eta_b)
                hits_b.push_back(tp - 0.5 * tm + rng.next_gaussian(sigma_j));
        }
        const std::size_t ph_a = hits_a.size(), ph_b = hits_b.size();

        bool dark_a = false, dark_b = false;
        if (rng.next_unit() <= p_d) {
            dark_a = true;
            hits_a.push_back((rng.next_unit() - 0.5) * source.frame_duration);
        }
        if (rng.next_unit() <= p_d) {
            dark_b = true;
            hits_b.push_back((rng.next_unit() - 0.5) * source.frame_duration);
        }

        if (hits_a.empty() || hits_b.empty()) continue;
        ++st.postselected;
        if (n == 1) ++singles;

        int event;
        if (ph_a >= 1 && ph_b >= 1) {
            event = (n == 1 && !dark_a && !dark_b) ? 1 : 2;
        } else if (ph_a >= 1) {
            event = 3;
        } else if (ph_b >= 1) {
            event = 4;
        } else {
            event = 5;
        }
        ++counts[event - 1];

        const double t_a = hits_a.size() == 1 ? hits_a.front()
                                              : rng.next_gaussian(sig_a);
        const double t_b = hits_b.size() == 1 ? hits_b.front()
                                              : rng.next_gaussian(sig_b);
        if (cfg.max_records > 0 &&
            st.records.size() < static_cast<std::size_t>(cfg.max_records))
            st.records.push_back({t_a, t_b, event});
    }

    const double nf = static_cast<double>(std::max(st.n_frames, 1l));
    st.p_r = static_cast<double>(st.postselected) / nf;
    st.p_r_err = std::sqrt(std::max(st.p_r * (1.0 - st.p_r), 0.0) / nf);
    const double np = static_cast<double>(std::max(st.postselected, 1l));
    for (int k = 0; k < 5; ++k) {
        st.p_hat[k] = static_cast<double>(counts[k]) / np;
        st.p_err[k] = std::sqrt(std::max(st.p_hat[k] * (1.0 - st.p_hat[k]), 0.0) / np);
    }
    st.f_hat = static_cast<double>(singles) / np;
    st.f_err = std::sqrt(std::max(st.f_hat * (1.0 - st.f_hat), 0.0) / np);
    return st;
}

double binned_mi(const std::vector<FrameRecord>& records, int bins,
                 int event_filter) {
    if (bins < 2) throw std::domain_error("need at least 2 bins");
    std::vector<const FrameRecord*> sel;
    for (const auto& r : records)
        if (event_filter == 0 || r.event == event_filter) sel.push_back(&r);
    if (sel.size() < 2) return 0.0;

    double ma = 0.0, mb = 0.0;
    for (const auto* r : sel) {
        ma += r->t_a;
        mb += r->t_b;
    }
    ma /= static_cast<double>(sel.size());
    mb /= static_cast<double>(sel.size());
    double va = 0.0, vb = 0.0;
    for (const auto* r : sel) {
        va += (r->t_a - ma) * (r->t_a - ma);
        vb += (r->t_b - mb) * (r->t_b - mb);
    }
    va /= static_cast<double>(sel.size());
    vb /= static_cast<double>(sel.size());
    const double ha = 5.0 * std::sqrt(va), hb = 5.0 * std::sqrt(vb);
    if (!(ha > 0.0) || !(hb > 0.0)) return 0.0;

    std::vector<long> joint(static_cast<std::size_t>(bins) * bins, 0);
    std::vector<long> na(bins, 0), nb(bins, 0);
    long kept = 0;
    for (const auto* r : sel) {
        const double xa = (r->t_a - ma + ha) / (2.0 * ha);
        const double xb = (r->t_b - mb + hb) / (2.0 * hb);
        if (xa < 0.0 || xa >= 1.0 || xb < 0.0 || xb >= 1.0) continue;
        const int ia = static_cast<int>(xa * bins);
        const int ib = static_cast<int>(xb * bins);
        ++joint[static_cast<std::size_t>(ia) * bins + ib];
        ++na[ia];
        ++nb[ib];
        ++kept;
    }
    if (kept < 2) return 0.0;

    const double n = static_cast<double>(kept);
    double mi = 0.0;
    for (int ia = 0; ia < bins; ++ia)
        for (int ib = 0; ib < bins; ++ib) {
            const long c = joint[static_cast<std::size_t>(ia) * bins + ib];
            if (c == 0) continue;
            mi += (c / n) * std::log2(c * n / (static_cast<double>(na[ia]) *
                                               static_cast<double>(nb[ib])));
        }
    return mi;
}

} // namespace hdqkd
