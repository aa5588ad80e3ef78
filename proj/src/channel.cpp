#include "hdqkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hdqkd/detail/simplex.hpp"
#include "hdqkd/errors.hpp"

namespace hdqkd {

double poisson_pmf(double mu, int n) {
    if (mu < 0.0) throw std::domain_error("mu must be >= 0");
    if (n < 0) throw std::domain_error("n must be >= 0");
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    // exp(n ln mu - mu - ln n!); stable for the small n we ever use
    return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0));
}

double fiber_transmissivity(double distance_km, double loss_db_per_km) {
    if (distance_km < 0.0) throw std::domain_error("distance must be >= 0");
    if (loss_db_per_km < 0.0) throw std::domain_error("loss must be >= 0");
    return std::pow(10.0, -loss_db_per_km * distance_km / 10.0);
}

double dark_prob(double dark_rate, double frame_duration) {
    if (dark_rate < 0.0) throw std::domain_error("dark rate must be >= 0");
    if (!(frame_duration > 0.0)) throw std::domain_error("frame duration must be > 0");
    return dark_rate * frame_duration;
}

namespace {

void check_channel_args(double mu, double eta_a, double eta_b, double p_d) {
    if (mu < 0.0) throw std::domain_error("mu must be >= 0");
    if (eta_a < 0.0 || eta_a > 1.0) throw std::domain_error("eta_a outside [0,1]");
    if (eta_b < 0.0 || eta_b > 1.0) throw std::domain_error("eta_b outside [0,1]");
    if (p_d < 0.0 || p_d > 1.0) throw std::domain_error("p_d outside [0,1]");
}

} // namespace

double postselect_probability(double mu, double eta_a, double eta_b, double p_d) {
    check_channel_args(mu, eta_a, eta_b, p_d);
    const double q = 1.0 - p_d;
    // Poisson sum of [1-(1-eta_a)^n q][1-(1-eta_b)^n q] in closed form
    return 1.0 - q * std::exp(-mu * eta_a) - q * std::exp(-mu * eta_b)
         + q * q * std::exp(-mu * (eta_a + eta_b - eta_a * eta_b));
}

double postselect_probability_series(double mu, double eta_a, double eta_b,
                                     double p_d, int n_max) {
    check_channel_args(mu, eta_a, eta_b, p_d);
    const double q = 1.0 - p_d;
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double miss_a = std::pow(1.0 - eta_a, n);
        const double miss_b = std::pow(1.0 - eta_b, n);
        sum += poisson_pmf(mu, n) * (1.0 - miss_a * q) * (1.0 - miss_b * q);
    }
    return sum;
}

EventProbabilities event_probabilities(double mu, double eta_a, double eta_b,
                                       double p_d) {
    check_channel_args(mu, eta_a, eta_b, p_d);
    constexpr int n_max = 64;  // Poisson tail < 1e-15 for mu <= 0.2

    EventProbabilities ev;
    ev.p_d = p_d;
    ev.p_r = postselect_probability(mu, eta_a, eta_b, p_d);
    if (!(ev.p_r > 0.0))
        throw numeric_error("postselection probability is zero: no events to "
                            "condition on");

    const double q = 1.0 - p_d;
    const double p1_s = poisson_pmf(mu, 1);
    double s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double ps = poisson_pmf(mu, n);
        const double miss_a = std::pow(1.0 - eta_a, n);
        const double miss_b = std::pow(1.0 - eta_b, n);
        if (n >= 2) s2 += ps * (1.0 - miss_a) * (1.0 - miss_b);
        if (n >= 1) {
            s3 += ps * (1.0 - miss_a) * p_d * miss_b;
            s4 += ps * (1.0 - miss_b) * p_d * miss_a;
        }
        s5 += ps * miss_a * miss_b;
    }

    ev.p1 = p1_s * eta_a * eta_b * q * q / ev.p_r;
    ev.p2 = (s2 + p1_s * eta_a * eta_b * (2.0 * p_d - p_d * p_d)) / ev.p_r;
    ev.p3 = s3 / ev.p_r;
    ev.p4 = s4 / ev.p_r;
    ev.p5 = s5 * p_d * p_d / ev.p_r;

    // single-pair fraction of postselected frames, dark-assisted ones included
    ev.fidelity = p1_s * (1.0 - (1.0 - eta_a) * q) * (1.0 - (1.0 - eta_b) * q)
                / ev.p_r;
    return ev;
}

DecoyFit estimate_f_from_decoys(const std::vector<DecoyReading>& readings,
                                double p_d, double mu_signal) {
    std::vector<double> mus;
    for (const auto& r : readings)
        if (std::find(mus.begin(), mus.end(), r.mu) == mus.end()) mus.push_back(r.mu);
    if (mus.size() < 2)
        throw std::domain_error("decoy fit needs at least two distinct intensities");

    auto clamp01 = [](double x) { return std::min(std::max(x, 1e-12), 1.0); };
    auto ssr = [&](const std::vector<double>& x) {
        const double ea = clamp01(x[0]);
        const double eb = clamp01(x[1]);
        double s = 0.0;
        for (const auto& r : readings) {
            const double d = postselect_probability(r.mu, ea, eb, p_d) - r.p_r;
            s += d * d;
        }
        return s;
    };

    // p_r is symmetric under eta_a <-> eta_b and so is F, so a couple of
    // deterministic starts are plenty.
    detail::SimplexResult best{};
    best.f = 1e300;
    for (double start : {0.5, 0.1, 0.9}) {
        auto r = detail::nelder_mead(ssr, {start, start * 0.5}, {0.2, 0.2}, 1e-24, 600);
        if (r.f < best.f) best = r;
    }

    DecoyFit fit;
    fit.eta_a = clamp01(best.x[0]);
    fit.eta_b = clamp01(best.x[1]);
    fit.residual = std::sqrt(best.f / readings.size());
    fit.fidelity = event_probabilities(mu_signal, fit.eta_a, fit.eta_b, p_d).fidelity;
    return fit;
}

} // namespace hdqkd
