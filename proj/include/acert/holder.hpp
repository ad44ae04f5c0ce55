#pragma once

// Empirical Hoelder exponent of a one-variable expression.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "expr.hpp"
#include "noise.hpp"
#include "numerics.hpp"

namespace acert {

/// Fits the slope of log max|f(x+d) - f(x)| against log d over dyadic
/// separations d = (hi-lo) 2^-k. Half of each level's pairs are uniform on
/// the interval, half zoom in on the previous level's maximiser, so isolated
/// singular points are tracked down to small scales. The result is clipped
/// to (0,1]; a constant function yields 1.
inline double estimate_holder(const Expr& e, double lo, double hi, std::size_t n_pairs, RngStream rng)
{
    if (!(lo < hi))
        throw std::invalid_argument("estimate_holder: need lo < hi");
    if (n_pairs < 100)
        throw std::invalid_argument("estimate_holder: n_pairs must be >= 100");
    for (const auto& v : e.free_variables())
        if (v != "x")
            throw EvalError("estimate_holder: expression depends on '" + v + "', expected x only");
    CompiledExpr f(e, {"x"});

    constexpr int k_min = 2, k_max = 17;
    const std::size_t per_level = std::max<std::size_t>(8, n_pairs / (k_max - k_min + 1));
    const double width = hi - lo;

    std::vector<double> log_d, log_m;
    double focus = lo + 0.5 * width;
    for (int k = k_min; k <= k_max; ++k) {
        double d = std::ldexp(width, -k);
        double best = 0.0, best_x = focus;
        for (std::size_t i = 0; i < per_level; ++i) {
            double x;
            if (i % 2 == 0) {
                x = lo + rng.uniform() * (width - d);
            } else {
                double a = std::max(lo, focus - 4 * d);
                double b = std::min(hi - d, focus + 4 * d);
                x = a + rng.uniform() * (b - a);
            }
            double diff = std::fabs(f({x + d}) - f({x}));
            if (diff > best) {
                best = diff;
                best_x = x;
            }
        }
        focus = best_x;
        if (best > 0.0) {
            log_d.push_back(std::log(d));
            log_m.push_back(std::log(best));
        }
    }
    if (log_d.size() < 2)
        return 1.0;
    double s = fit_line(log_d, log_m).slope;
    return std::clamp(s, 1e-6, 1.0);
}

} // namespace acert
