#pragma once

// Unit conventions: everything inside the library is SI (seconds, rad/s, Hz).
// The CLI converts from ps/GHz/km at the boundary and never before.

namespace hdqkd {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// FWHM -> RMS for a Gaussian: sigma = FWHM / sqrt(8 ln 2).
// The truncated 2.35 shows up only in the detector-jitter term of the
// arrival-time variances (rate module), matching the published numbers there.
inline constexpr double fwhm_to_rms = 2.3548200450309493;   // sqrt(8 ln 2)
inline constexpr double fwhm_to_rms_short = 2.35;

// multipliers into SI
inline constexpr double picosecond = 1e-12;
inline constexpr double nanosecond = 1e-9;
inline constexpr double gigahertz = 1e9;

} // namespace hdqkd
