#include "hdqkd/interferometry.hpp"

#include <cmath>
#include <stdexcept>

#include "hdqkd/units.hpp"

namespace hdqkd {

double franson_visibility_gaussian(double v_w, double delta_t) {
    if (v_w < 0.0) throw std::domain_error("v_w must be >= 0");
    return std::exp(-0.5 * v_w * delta_t * delta_t);
}

double cfi_visibility_gaussian(double v_t, double delta_omega) {
    if (v_t < 0.0) throw std::domain_error("v_t must be >= 0");
    return std::exp(-0.5 * v_t * delta_omega * delta_omega);
}

double jitter_fourth_moment_time(double jitter_fwhm) {
    if (jitter_fwhm < 0.0) throw std::domain_error("jitter must be >= 0");
    // difference of two i.i.d. Gaussian jitters: variance deltaT^2/(4 ln 2),
    // fourth moment 3x its square
    const double s = jitter_fwhm / (2.0 * std::sqrt(M_LN2));
    return 3.0 * s * s * s * s;
}

double jitter_fourth_moment_freq(double jitter_fwhm, double beta2) {
    if (beta2 == 0.0)
        throw std::domain_error("beta2 must be nonzero: dispersion is what maps "
                                "arrival time onto frequency");
    const double s = jitter_fwhm / (2.0 * std::sqrt(M_LN2) * beta2);
    return 3.0 * s * s * s * s;
}

namespace {

double lemma_bound(const VisibilityReading& r, FringeKind expected, double fourth) {
    if (r.kind != expected)
        throw std::domain_error("visibility reading is for the other interferometer");
    if (r.value > 1.0) throw std::domain_error("visibility > 1");
    if (fourth < 0.0) throw std::domain_error("fourth moment must be >= 0");
    if (r.setting == 0.0) throw std::domain_error("interferometer setting is zero");
    const double s2 = r.setting * r.setting;
    return 2.0 * (1.0 - r.value) / s2 + fourth * s2 / 12.0;
}

} // namespace

double lemma1_bound(const VisibilityReading& franson, double fourth_w) {
    return lemma_bound(franson, FringeKind::franson, fourth_w);
}

double lemma2_bound(const VisibilityReading& cfi, double fourth_t) {
    return lemma_bound(cfi, FringeKind::conjugate_franson, fourth_t);
}

ExcessNoise excess_noise(double bound, double nominal_variance) {
    if (!(nominal_variance > 0.0))
        throw std::domain_error("nominal variance must be > 0");
    ExcessNoise xi;
    xi.raw = bound / nominal_variance - 1.0;
    xi.clamped = xi.raw < 0.0 ? 0.0 : xi.raw;
    return xi;
}

double raw_time_excess(double jitter_fwhm, double sigma_cor) {
    if (!(sigma_cor > 0.0)) throw std::domain_error("sigma_cor must be > 0");
    if (jitter_fwhm < 0.0) throw std::domain_error("jitter must be >= 0");
    const double sj = jitter_fwhm / fwhm_to_rms;
    return 2.0 * sj * sj / (sigma_cor * sigma_cor);
}

} // namespace hdqkd
