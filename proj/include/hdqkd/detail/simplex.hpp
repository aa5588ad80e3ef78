#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

// Small deterministic Nelder-Mead used by the Holevo search and the decoy
// fit. Minimizes; callers flip signs to maximize. No randomness anywhere, so
// the same inputs always walk the same path.

namespace hdqkd::detail {

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iters = 0;
    long evals = 0;
};

inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                 const std::vector<double>& x0,
                                 const std::vector<double>& step, double f_tol,
                                 int max_iters) {
    const std::size_t dim = x0.size();
    long evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return fn(x);
    };

    std::vector<std::vector<double>> pts(dim + 1, x0);
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(dim + 1);
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];
        if (fv[worst] - fv[best] <= f_tol) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d)
                x[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
            return x;
        };

        std::vector<double> xr = blend(-1.0);
        double fr = eval(xr);
        if (fr < fv[order[0]]) {
            std::vector<double> xe = blend(-2.0);
            double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                pts[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            std::vector<double> xc = blend(outside ? -0.5 : 0.5);
            double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                // shrink toward best
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < dim; ++d)
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i)
        if (fv[i] < fv[best]) best = i;
    return SimplexResult{pts[best], fv[best], iter, evals};
}

} // namespace hdqkd::detail
