#pragma once

// Localized characteristic functions and the decay certificate: Monte Carlo
// estimation with a bias-corrected modulus, the explicit three-term bounds
// per process class, L^2 diagnostics and Gaussian-smoothed inversion.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "parallel.hpp"

namespace acert {

/// f_delta(r) = min(1, max(0, r - delta)): zero on [0, delta], positive
/// beyond, bounded by 1 and 1-Lipschitz.
inline double localization_weight(double delta, double r)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("localization_weight: delta must be > 0");
    return std::min(1.0, std::max(0.0, r - delta));
}

struct CharFnEstimate {
    std::vector<double> xi_grid;
    std::vector<std::complex<double>> estimate;
    std::vector<double> stderr_re;
    std::vector<double> stderr_im;
    std::vector<double> stderr; ///< sqrt(stderr_re^2 + stderr_im^2), error scale of |estimate|
    std::vector<double> modulus_sq_unbiased;
    std::size_t n_paths = 0;
    double delta = 0.0; ///< 0 when unlocalized
    double weight_mass = 0.0;
    bool degenerate = false; ///< every weight is zero: the localized measure is zero
};

/// Empirical transform of sum_i w_i e^{i xi X_i} / N. The unbiased modulus
/// subtracts the sample variance of the complex summand over N, which is
/// the expected excess of |mean|^2 over the true squared modulus.
inline CharFnEstimate estimate_charfn_weighted(std::span<const double> x, std::span<const double> w,
                                               std::span<const double> xi_grid, double delta = 0.0,
                                               unsigned workers = 1)
{
    if (x.size() != w.size())
        throw std::invalid_argument("estimate_charfn: samples and weights differ in length");
    if (x.size() < 100)
        throw std::invalid_argument("estimate_charfn: need at least 100 samples");
    const std::size_t n = x.size(), m = xi_grid.size();
    const double dn = double(n);
    CharFnEstimate est;
    est.xi_grid.assign(xi_grid.begin(), xi_grid.end());
    est.n_paths = n;
    est.delta = delta;
    est.weight_mass = fixed_sum(w) / dn;
    est.degenerate = std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; });
    est.estimate.resize(m);
    est.stderr_re.resize(m);
    est.stderr_im.resize(m);
    est.stderr.resize(m);
    est.modulus_sq_unbiased.resize(m);
    parallel_for(m, workers, [&](std::size_t k) {
        const double xi = xi_grid[k];
        std::vector<double> re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
            double a = xi * x[i];
            re[i] = w[i] * std::cos(a);
            im[i] = w[i] * std::sin(a);
        }
        double mr = fixed_sum(re) / dn, mi = fixed_sum(im) / dn;
        double vr = 0.0, vi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            vr += (re[i] - mr) * (re[i] - mr);
            vi += (im[i] - mi) * (im[i] - mi);
        }
        vr /= dn - 1.0;
        vi /= dn - 1.0;
        est.estimate[k] = {mr, mi};
        est.stderr_re[k] = std::sqrt(vr / dn);
        est.stderr_im[k] = std::sqrt(vi / dn);
        est.stderr[k] = std::sqrt((vr + vi) / dn);
        est.modulus_sq_unbiased[k] = mr * mr + mi * mi - (vr + vi) / dn;
    });
    return est;
}

/// Weights f_delta(|sigma_i|). For the heat equation pass sigma^2 values:
/// there the localization acts on sigma^2.
inline CharFnEstimate estimate_charfn(std::span<const double> terminal, std::span<const double> sigma_vals,
                                      double delta, std::span<const double> xi_grid, unsigned workers = 1)
{
    if (terminal.size() != sigma_vals.size())
        throw std::invalid_argument("estimate_charfn: samples and sigma values differ in length");
    std::vector<double> w(terminal.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = localization_weight(delta, std::fabs(sigma_vals[i]));
    return estimate_charfn_weighted(terminal, w, xi_grid, delta, workers);
}

/// Plain empirical characteristic function, all weights 1.
inline CharFnEstimate estimate_charfn_unlocalized(std::span<const double> terminal, std::span<const double> xi_grid,
                                                  unsigned workers = 1)
{
    std::vector<double> w(terminal.size(), 1.0);
    return estimate_charfn_weighted(terminal, w, xi_grid, 0.0, workers);
}

enum class Variant { Brownian, PathDep, Spde, Levy };

inline const char* variant_name(Variant v)
{
    switch (v) {
    case Variant::Brownian: return "brownian";
    case Variant::PathDep: return "pathdep";
    case Variant::Spde: return "spde";
    case Variant::Levy: return "levy";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s)
{
    if (s == "brownian")
        return Variant::Brownian;
    if (s == "pathdep")
        return Variant::PathDep;
    if (s == "spde")
        return Variant::Spde;
    if (s == "levy")
        return Variant::Levy;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

/// Constants of the three-term bounds. `theta` is the coupling exponent
/// (derived theta for the path-dependent case), `alpha` the Hoelder
/// exponent of sigma there; kappa0, c, lambda, gamma, zeta and xi0 as in
/// the respective bounds.
struct BoundParams {
    double C = 1.0;
    double theta = 1.0;
    double alpha = 1.0;
    double kappa0 = 1.0;
    double c = 1.0;
    double lambda = 2.0;
    double gamma = 2.0;
    double zeta = 1.0;
    double xi0 = 0.0;
};

struct BoundValue {
    double eps = 0.0;
    double bound = 0.0;
    double gaussian_term = 0.0; ///< the C-free leading term
    double c_terms = 0.0;       ///< the remaining terms divided by C
};

/// Smallest |xi| strictly above which the variant's eps schedule is valid.
inline double min_admissible_xi(Variant v, double delta, const BoundParams& p)
{
    double lo = 1.0;
    if (v == Variant::Levy && delta > 0.0)
        lo = std::max(lo, p.xi0 / delta);
    return lo;
}

inline BoundValue theoretical_bound(Variant v, double xi, double delta, const BoundParams& p)
{
    const double a = std::fabs(xi);
    const double lo = min_admissible_xi(v, delta, p);
    const double L = std::log(a);
    double eps = 0.0;
    switch (v) {
    case Variant::Brownian:
    case Variant::PathDep: eps = L * L / (a * a); break;
    case Variant::Spde: eps = std::pow(L, 4) / std::pow(a, 4); break;
    case Variant::Levy: eps = L * L / std::pow(a, p.lambda); break;
    }
    if (!(a > lo) || !(eps > 0.0 && eps < 1.0)) {
        std::ostringstream os;
        os << "xi=" << xi << " is outside the " << variant_name(v) << " regime (eps=" << eps
           << "); need |xi| > " << lo;
        throw std::domain_error(os.str());
    }
    BoundValue b;
    b.eps = eps;
    switch (v) {
    case Variant::Brownian:
        b.gaussian_term = std::exp(-eps * delta * delta * a * a / 2);
        b.c_terms = a * std::pow(eps, (1 + p.theta) / 2) + std::pow(eps, p.theta / 2);
        break;
    case Variant::PathDep:
        b.gaussian_term = std::exp(-eps * p.kappa0 * p.kappa0 * delta * delta * a * a / 2);
        b.c_terms = a * std::pow(eps, (1 + p.theta) / 2) + std::pow(eps, p.alpha / 2);
        break;
    case Variant::Spde:
        b.gaussian_term = std::exp(-p.c * delta * std::sqrt(eps) * a * a / 2);
        b.c_terms = a * std::pow(eps, (1 + p.theta) / 4) + std::pow(eps, p.theta / 4);
        break;
    case Variant::Levy:
        b.gaussian_term = std::exp(-p.c * std::pow(delta, p.lambda) * eps * std::pow(a, p.lambda));
        b.c_terms = a * std::pow(eps, (1 + p.zeta) / p.gamma) + std::pow(eps, p.theta / p.gamma);
        break;
    }
    b.bound = b.gaussian_term + p.C * b.c_terms;
    return b;
}

/// Power beta with bound ~ |xi|^-beta up to logarithms. Square
/// integrability of the bound needs beta > 1/2.
inline double bound_tail_exponent(Variant v, const BoundParams& p)
{
    switch (v) {
    case Variant::Brownian:
    case Variant::Spde: return p.theta;
    case Variant::PathDep: return std::min(p.theta, p.alpha);
    case Variant::Levy: return std::min(p.lambda * (1 + p.zeta) / p.gamma - 1.0, p.lambda * p.theta / p.gamma);
    }
    return 0.0;
}

struct BoundRow {
    double xi;
    double eps;
    double modulus;  ///< |estimate|
    double stderr;
    double bound;    ///< with the fitted C
    double margin;   ///< bound - (modulus - 3 stderr)
};

struct DecayBoundReport {
    Variant variant = Variant::Brownian;
    double fitted_C = 0.0;
    std::vector<BoundRow> rows; ///< admissible grid points only
    double l2_proxy = 0.0;
    double tail_exponent = 0.0;      ///< from the bound parameters
    double empirical_exponent = 0.0; ///< decay of the significant part of |estimate|; +inf if it vanishes
    bool pass = false;
    std::string semantics;
};

inline constexpr double kExponentMargin = 0.05;

namespace detail {

inline void require_sorted(std::span<const double> g)
{
    if (!std::is_sorted(g.begin(), g.end()) || std::adjacent_find(g.begin(), g.end()) != g.end())
        throw std::invalid_argument("xi grid must be strictly increasing");
}

/// 2 int_0^{xi_max} max(m, 0) over a nonnegative grid, plus the tail beyond
/// xi_max continued as |xi|^{-2 beta}.
inline double l2_with_tail(std::span<const double> xi, std::span<const double> m2, double beta)
{
    std::vector<double> x, y;
    for (std::size_t i = 0; i < xi.size(); ++i)
        if (xi[i] >= 0.0) {
            x.push_back(xi[i]);
            y.push_back(std::max(m2[i], 0.0));
        }
    if (x.size() < 2)
        return 0.0;
    double body = 2.0 * trapezoid(x, y);
    double last = y.back();
    if (last == 0.0)
        return body;
    if (!(2 * beta > 1.0))
        return std::numeric_limits<double>::infinity();
    return body + 2.0 * last * x.back() / (2 * beta - 1);
}

} // namespace detail

/// Fits the smallest C making the bound dominate |estimate| - 3 stderr on
/// every admissible grid point and judges square integrability. A finite
/// grid cannot prove integrability: pass means the bound's tail exponent
/// and the empirical decay exponent both exceed 1/2 by kExponentMargin.
/// `bound_delta` replaces est.delta in the bound, for unlocalized estimates.
inline DecayBoundReport certify_decay(const CharFnEstimate& est, Variant v, const BoundParams& params,
                                      double bound_delta = -1.0)
{
    detail::require_sorted(est.xi_grid);
    DecayBoundReport rep;
    rep.variant = v;
    rep.tail_exponent = bound_tail_exponent(v, params);
    rep.semantics = "pass: bound tail exponent and empirical decay exponent both exceed 0.55 (1/2 plus margin "
                    "0.05); fitted_C is the least C with bound >= |est| - 3 stderr";
    double pos_min = std::numeric_limits<double>::infinity(), pos_max = 0.0;
    for (double x : est.xi_grid)
        if (x > 0) {
            pos_min = std::min(pos_min, x);
            pos_max = std::max(pos_max, x);
        }
    if (!(pos_max / pos_min >= std::pow(10.0, 1.5) * (1 - 1e-12)))
        throw std::invalid_argument("certify_decay: xi grid spans less than 1.5 decades");
    if (est.degenerate) {
        rep.pass = true;
        rep.empirical_exponent = std::numeric_limits<double>::infinity();
        rep.semantics += "; zero measure";
        return rep;
    }

    const double delta = bound_delta >= 0.0 ? bound_delta : est.delta;
    const double lo = min_admissible_xi(v, delta, params);
    BoundParams unit = params;
    unit.C = 0.0;
    std::vector<std::size_t> idx;
    std::vector<BoundValue> bv;
    double C = 0.0;
    for (std::size_t i = 0; i < est.xi_grid.size(); ++i) {
        double xi = est.xi_grid[i];
        if (!(std::fabs(xi) > lo))
            continue;
        BoundValue b;
        try {
            b = theoretical_bound(v, xi, delta, unit);
        } catch (const std::domain_error&) {
            continue;
        }
        idx.push_back(i);
        bv.push_back(b);
        double need = std::abs(est.estimate[i]) - 3 * est.stderr[i] - b.gaussian_term;
        if (need > 0)
            C = std::max(C, need / b.c_terms);
    }
    if (idx.empty())
        throw std::invalid_argument("certify_decay: no grid point inside the admissible regime");
    rep.fitted_C = C;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::size_t i = idx[k];
        double m = std::abs(est.estimate[i]);
        double b = bv[k].gaussian_term + C * bv[k].c_terms;
        rep.rows.push_back({est.xi_grid[i], bv[k].eps, m, est.stderr[i], b, b - (m - 3 * est.stderr[i])});
    }

    // Empirical exponent from the monotone upper envelope of the significant
    // part |est| - 3 stderr over the positive admissible tail.
    std::vector<double> ex, env;
    for (const auto& r : rep.rows)
        if (r.xi > 0) {
            ex.push_back(r.xi);
            env.push_back(std::max(r.modulus - 3 * r.stderr, 0.0));
        }
    for (std::size_t k = env.size(); k-- > 1;)
        env[k - 1] = std::max(env[k - 1], env[k]);
    if (ex.size() < 2 || env.back() == 0.0) {
        rep.empirical_exponent = std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> lx, ly;
        for (std::size_t k = 0; k < ex.size(); ++k)
            if (env[k] > 0) {
                lx.push_back(std::log(ex[k]));
                ly.push_back(std::log(env[k]));
            }
        rep.empirical_exponent = lx.size() >= 2 ? -fit_line(lx, ly).slope : 0.0;
    }
    rep.l2_proxy = detail::l2_with_tail(est.xi_grid, est.modulus_sq_unbiased, rep.tail_exponent);
    const double need = 0.5 + kExponentMargin;
    rep.pass = rep.tail_exponent > need && rep.empirical_exponent > need;
    return rep;
}

struct L2TailReport {
    std::vector<double> xi_max;
    std::vector<double> partial; ///< int_{|xi| <= Xi} modulus_sq_unbiased
    std::vector<double> ratio;   ///< partial[k] / partial[k-1], first entry 1
    bool monotone = true;
    bool saturated = false; ///< last ratio within 1%
};

/// Partial integrals over |xi| <= Xi of the unbiased squared modulus,
/// from a nonnegative grid extended by Hermitian symmetry.
inline L2TailReport l2_tail(const CharFnEstimate& est, std::span<const double> xi_max)
{
    detail::require_sorted(est.xi_grid);
    L2TailReport rep;
    const auto& g = est.xi_grid;
    for (double X : xi_max) {
        if (X > g.back() * (1 + 1e-12) || X < 0)
            throw std::invalid_argument("l2_tail: Xi outside the grid");
        double s = 0.0;
        for (std::size_t i = 1; i < g.size() && g[i - 1] < X; ++i) {
            if (g[i - 1] < 0)
                continue;
            double a = g[i - 1], b = std::min(g[i], X);
            double fa = est.modulus_sq_unbiased[i - 1];
            double fb = est.modulus_sq_unbiased[i - 1] +
                        (est.modulus_sq_unbiased[i] - est.modulus_sq_unbiased[i - 1]) * (b - a) / (g[i] - a);
            s += 0.5 * (b - a) * (fa + fb);
        }
        double val = est.degenerate ? 0.0 : 2.0 * s;
        rep.ratio.push_back(rep.partial.empty() || rep.partial.back() == 0.0 ? 1.0 : val / rep.partial.back());
        if (!rep.partial.empty() && val < rep.partial.back())
            rep.monotone = false;
        rep.xi_max.push_back(X);
        rep.partial.push_back(val);
    }
    rep.saturated = rep.ratio.size() >= 2 && rep.ratio.back() <= 1.01;
    return rep;
}

struct DensityEstimate {
    std::vector<double> x_grid;
    std::vector<double> values;
    double smoothing_variance = 0.0;
    double total_mass = 0.0;
    double min_value = 0.0;
};

/// (2 pi)^{-1} int e^{-i xi x} est(xi) e^{-xi^2 v / 2} dxi by the trapezoid
/// rule. A grid starting at 0 is extended to negative xi by Hermitian
/// symmetry. The damped integrand must be below 1e-6 at the grid edges.
inline DensityEstimate reconstruct_density(const CharFnEstimate& est, double smoothing_variance,
                                           std::span<const double> x_grid)
{
    if (!(smoothing_variance > 0.0))
        throw std::invalid_argument("reconstruct_density: smoothing variance must be > 0");
    detail::require_sorted(est.xi_grid);
    const auto& g = est.xi_grid;
    const double v = smoothing_variance;
    const bool half = g.front() >= 0.0;
    if (half && g.front() != 0.0)
        throw std::invalid_argument("reconstruct_density: a nonnegative xi grid must start at 0");
    auto damped = [&](std::size_t i) { return std::abs(est.estimate[i]) * std::exp(-g[i] * g[i] * v / 2); };
    if (damped(g.size() - 1) > 1e-6 || (!half && damped(0) > 1e-6)) {
        std::ostringstream os;
        os << "reconstruct_density: xi grid too narrow, damped integrand at the edge is "
           << std::max(damped(g.size() - 1), half ? 0.0 : damped(0)) << " > 1e-6";
        throw std::invalid_argument(os.str());
    }
    DensityEstimate d;
    d.x_grid.assign(x_grid.begin(), x_grid.end());
    d.smoothing_variance = v;
    d.values.assign(x_grid.size(), 0.0);
    if (!est.degenerate) {
        std::vector<double> damp(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            damp[i] = std::exp(-g[i] * g[i] * v / 2);
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            double s = 0.0;
            for (std::size_t i = 1; i < g.size(); ++i) {
                auto f = [&](std::size_t k) {
                    // Re(e^{-i xi x} est) = cos(xi x) Re est + sin(xi x) Im est.
                    double a = g[k] * x_grid[j];
                    return (std::cos(a) * est.estimate[k].real() + std::sin(a) * est.estimate[k].imag()) * damp[k];
                };
                s += 0.5 * (g[i] - g[i - 1]) * (f(i) + f(i - 1));
            }
            d.values[j] = (half ? 2.0 : 1.0) * s / (2 * std::numbers::pi);
        }
    }
    d.total_mass = x_grid.size() >= 2 ? trapezoid(x_grid, d.values) : 0.0;
    d.min_value = d.values.empty() ? 0.0 : *std::min_element(d.values.begin(), d.values.end());
    return d;
}

} // namespace acert
