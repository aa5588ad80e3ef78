#include "hdqkd/source_model.hpp"

#include <cmath>
#include <stdexcept>

#include "hdqkd/units.hpp"

namespace hdqkd {

SourceMoments derive_moments(const SourceParams& params) {
    if (!(params.frame_duration > 0.0))
        throw std::domain_error("source.frame_duration must be > 0");
    if (!(params.phase_matching_bw > 0.0))
        throw std::domain_error("source.phase_matching_bw must be > 0");
    if (params.mean_pairs_per_frame < 0.0)
        throw std::domain_error("source.mean_pairs_per_frame must be >= 0");

    SourceMoments m;
    m.sigma_coh = params.frame_duration / fwhm_to_rms;
    // FWHM bandwidth of the Gaussian phase-matching envelope -> RMS
    // correlation time of the signal-idler arrival-time difference.
    m.sigma_cor = std::sqrt(2.0 * M_LN2) / (two_pi * params.phase_matching_bw);
    m.t_norm = std::sqrt(2.0 * m.sigma_coh * m.sigma_cor);
    return m;
}

bool few_bins_warning(const SourceMoments& m) {
    return m.sigma_coh / m.sigma_cor < 4.0;
}

} // namespace hdqkd
