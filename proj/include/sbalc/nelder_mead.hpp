#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace sbalc {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Derivative-free simplex minimizer. Deterministic: the simplex is
/// built from x0 and fixed per-coordinate steps, ties resolve by index.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& step,
                                    std::size_t max_iters = 400,
                                    double ftol = 1e-12) {
    const Eigen::Index n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1][i] += step[i];

    NelderMeadResult res;
    std::vector<double> fv(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        fv[i] = f(pts[i]);
        ++res.evaluations;
    }

    std::vector<std::size_t> order(pts.size());
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });

        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];
        if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + ftol)) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i : order)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(pts.size() - 1);

        Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
        double fr = f(xr);
        ++res.evaluations;

        if (fr < fv[order[0]]) {
            Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
            double fe = f(xe);
            ++res.evaluations;
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second_worst]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            Eigen::VectorXd xc = centroid + rho * (pts[worst] - centroid);
            double fc = f(xc);
            ++res.evaluations;
            if (fc < fv[worst]) { pts[worst] = xc; fv[worst] = fc; }
            else {
                for (std::size_t i : order)
                    if (i != best) {
                        pts[i] = pts[best] + sigma * (pts[i] - pts[best]);
                        fv[i] = f(pts[i]);
                        ++res.evaluations;
                    }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < fv.size(); ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = pts[best];
    res.value = fv[best];
    return res;
}

} // namespace sbalc
