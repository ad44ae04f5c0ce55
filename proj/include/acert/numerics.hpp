#pragma once

// Small numeric kernels shared by the simulation modules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace acert {

/// Pairwise sum with a fixed split pattern: the result depends on the data
/// order only, never on how the data was produced.
inline double fixed_sum(std::span<const double> v)
{
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return fixed_sum(v.first(half)) + fixed_sum(v.subspan(half));
}

inline double mean(std::span<const double> v)
{
    if (v.empty())
        throw std::invalid_argument("mean of empty sample");
    return fixed_sum(v) / double(v.size());
}

/// Unbiased sample variance (two-pass).
inline double variance(std::span<const double> v)
{
    if (v.size() < 2)
        throw std::invalid_argument("variance needs at least two samples");
    double m = mean(v);
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        d[i] = (v[i] - m) * (v[i] - m);
    return fixed_sum(d) / double(v.size() - 1);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 paired points");
    double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

/// Percentile of a sample (linear interpolation between order statistics).
inline double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        throw std::invalid_argument("quantile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * double(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

/// 20-point Gauss-Legendre on [a,b].
template <class F>
double gauss20(F&& f, double a, double b)
{
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

/// Adaptive Gauss-Kronrod 15/31 on [a,b].
template <class F>
double adaptive_gk(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 20)
{
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err);
}

/// Composite Gauss-Legendre over `panels` equal panels.
template <class F>
double panel_gauss(F&& f, double a, double b, int panels)
{
    double w = (b - a) / panels;
    double s = 0.0;
    for (int k = 0; k < panels; ++k)
        s += gauss20(f, a + k * w, a + (k + 1) * w);
    return s;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

} // namespace acert
