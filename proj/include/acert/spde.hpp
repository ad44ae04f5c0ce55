#pragma once

// Stochastic heat equation on [0,1] with Neumann boundary: image-sum heat
// kernel, kernel-mass quadratures, explicit finite-difference simulation,
// the frozen-coefficient coupling and the conditional-variance proxy Y_eps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"
#include "noise.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "sde.hpp"

namespace acert {

struct HeatKernelCalc {
    int n_images = 8;
    double rel_tol = 1e-9; ///< for the adaptive quadratures built on the kernel

    /// Images actually summed at time t. For t > 1 the count grows so the
    /// dropped terms stay below the t <= 1 level.
    int images_at(double t) const
    {
        int need = int(std::ceil(1.0 + std::sqrt(37.0 * std::max(t, 0.0))));
        return std::max(n_images, t > 1.0 ? need : 0);
    }

    /// Size of the first dropped image term.
    double truncation_bound(double t) const
    {
        double m = 2.0 * images_at(t) - 2.0;
        return std::exp(-m * m / (4.0 * t));
    }
};

/// G_t(x,y) = (4 pi t)^{-1/2} sum_n [exp(-(y-x-2n)^2/4t) + exp(-(y+x-2n)^2/4t)].
inline double heat_kernel(double t, double x, double y, const HeatKernelCalc& calc = {})
{
    if (!(t > 0.0))
        throw std::invalid_argument("heat_kernel: t must be > 0");
    const int N = calc.images_at(t);
    const double c = 1.0 / (4.0 * t);
    double s = 0.0;
    // Summed from the outermost images inwards so small terms accumulate first.
    for (int a = N; a >= 1; --a) {
        for (int n : {a, -a}) {
            double d1 = y - x - 2.0 * n, d2 = y + x - 2.0 * n;
            s += std::exp(-d1 * d1 * c) + std::exp(-d2 * d2 * c);
        }
    }
    double d1 = y - x, d2 = y + x;
    s += std::exp(-d1 * d1 * c) + std::exp(-d2 * d2 * c);
    return s / std::sqrt(4.0 * std::numbers::pi * t);
}

namespace detail {

/// Integral over u in (0, T] of f(u) where f ~ u^{-1/2} at 0; the
/// substitution u = T v^2 removes the singularity.
template <class F>
double singular_time_integral(F&& f, double T, double rel_tol)
{
    return adaptive_gk([&](double v) { return v == 0.0 ? 0.0 : 2.0 * T * v * f(T * v * v); }, 0.0, 1.0, rel_tol);
}

/// Integral over y in [lo, hi] of G_u(x,y)^2 w(y), split at x where the
/// integrand peaks and refined into panels of the kernel width.
template <class W>
double kernel_sq_window(double u, double x, double lo, double hi, W&& w, const HeatKernelCalc& calc)
{
    auto g2 = [&](double y) {
        double g = heat_kernel(u, x, y, calc);
        return g * g * w(y);
    };
    double width = std::sqrt(2.0 * u);
    double s = 0.0;
    // Beyond ~12 kernel widths from x the integrand is below double precision.
    const double reach = 12.0 * width;
    auto piece = [&](double a, double b) {
        a = std::max(a, x - reach);
        b = std::min(b, x + reach);
        if (b <= a)
            return;
        s += panel_gauss(g2, a, b, std::clamp(int(std::ceil((b - a) / width)), 1, 64));
    };
    if (x > lo && x < hi) {
        piece(lo, x);
        piece(x, hi);
    } else {
        piece(lo, hi);
    }
    return s;
}

inline void check_unit(double x, const char* what)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

} // namespace detail

/// kappa_eps(x) = int_0^eps int_{window} G_u(x,z)^2 dz du, window
/// [x - sqrt(eps), x + sqrt(eps)] clipped to [0,1].
inline double kappa_eps(double x, double eps, const HeatKernelCalc& calc = {})
{
    detail::check_unit(x, "x");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("kappa_eps: eps must lie in (0,1)");
    double r = std::sqrt(eps);
    double lo = std::max(0.0, x - r), hi = std::min(1.0, x + r);
    return detail::singular_time_integral(
        [&](double u) { return detail::kernel_sq_window(u, x, lo, hi, [](double) { return 1.0; }, calc); }, eps,
        calc.rel_tol);
}

/// Space-time integral of G_{2r}(x,x) + G_{2r}(y,y) - 2 G_{2r}(x,y) over r in (0,t],
/// which equals int_0^t int (G_{t-u}(x,z) - G_{t-u}(y,z))^2 dz du by the
/// semigroup property.
inline double space_increment_lhs(double t, double x, double y, const HeatKernelCalc& calc = {})
{
    if (x == y)
        return 0.0;
    return detail::singular_time_integral(
        [&](double r) {
            return heat_kernel(2 * r, x, x, calc) + heat_kernel(2 * r, y, y, calc) - 2 * heat_kernel(2 * r, x, y, calc);
        },
        t, calc.rel_tol);
}

/// int_0^s int (G_{t-u} - G_{s-u})^2(x,z) dz du + int_s^t int G_{t-u}^2(x,z) dz du for s < t,
/// through the semigroup identity int G_a G_b dz = G_{a+b}.
inline double time_increment_lhs(double s, double t, double x, const HeatKernelCalc& calc = {})
{
    if (!(s >= 0.0 && t > s))
        throw std::invalid_argument("time_increment_lhs: need 0 <= s < t");
    const double d = t - s;
    // With r = s - u in (0, s]: G_{2r+2d} + G_{2r} - 2 G_{2r+d}. Only G_{2r} is singular.
    double first = s == 0.0 ? 0.0
                            : detail::singular_time_integral(
                                  [&](double r) {
                                      return heat_kernel(2 * r + 2 * d, x, x, calc) + heat_kernel(2 * r, x, x, calc) -
                                             2 * heat_kernel(2 * r + d, x, x, calc);
                                  },
                                  s, calc.rel_tol);
    double second = detail::singular_time_integral([&](double r) { return heat_kernel(2 * r, x, x, calc); }, d,
                                                   calc.rel_tol);
    return first + second;
}

struct KernelCheckRow {
    double separation;
    double lhs;
};

struct KernelEstimatesReport {
    std::vector<KernelCheckRow> space_rows; ///< separation |x - y|
    std::vector<KernelCheckRow> time_rows;  ///< separation t - s
    LineFit space_fit;                      ///< target slope 1
    LineFit time_fit;                       ///< target slope 1/2
    double space_c_hat = 0.0;
    double time_c_hat = 0.0;
};

/// Evaluates both kernel increment bounds on dyadic separations x, x + 2^-k
/// (at time t) and s, s + 2^-k, k = k_lo..k_hi, and fits log-log slopes.
inline KernelEstimatesReport kernel_estimates_check(double x, double t, double s, int k_lo, int k_hi,
                                                    const HeatKernelCalc& calc = {})
{
    if (k_hi - k_lo < 1)
        throw std::invalid_argument("kernel_estimates_check: need at least two separations");
    KernelEstimatesReport rep;
    std::vector<double> lx, ly, tx, ty;
    for (int k = k_lo; k <= k_hi; ++k) {
        double d = std::ldexp(1.0, -k);
        double y = x + d <= 1.0 ? x + d : x - d;
        double a = space_increment_lhs(t, x, y, calc);
        double b = time_increment_lhs(s, s + d, x, calc);
        rep.space_rows.push_back({d, a});
        rep.time_rows.push_back({d, b});
        lx.push_back(std::log(d));
        ly.push_back(std::log(a));
        tx.push_back(std::log(d));
        ty.push_back(std::log(b));
    }
    rep.space_fit = fit_line(lx, ly);
    rep.time_fit = fit_line(tx, ty);
    for (const auto& r : rep.space_rows)
        rep.space_c_hat = std::max(rep.space_c_hat, r.lhs / r.separation);
    for (const auto& r : rep.time_rows)
        rep.time_c_hat = std::max(rep.time_c_hat, r.lhs / std::sqrt(r.separation));
    return rep;
}

struct SpdeSpec {
    CoeffSpec sigma; ///< in u
    CoeffSpec b;     ///< in u
    Expr u0 = Expr::literal(0.0);
    double x_obs = 0.5;
};

/// Nodes x_j = j dx, j = 0..n_space-1, dx = 1/(n_space-1); dt = horizon/n_time.
struct SpdeGrid {
    std::size_t n_space = 33;
    std::size_t n_time = 4096;
    double horizon = 1.0;

    double dx() const { return 1.0 / double(n_space - 1); }
    double dt() const { return horizon / double(n_time); }

    void validate() const
    {
        if (n_space < 3 || n_time < 1)
            throw std::invalid_argument("spde grid: need n_space >= 3 and n_time >= 1");
        // At dt = dx^2/2 the checkerboard mode has amplification -1 and the
        // noise it receives never decays, so equality is rejected too.
        if (!(dt() < 0.5 * dx() * dx() * (1 - 1e-12))) {
            std::ostringstream os;
            os << "spde grid unstable: dt=" << dt() << " must be below dx^2/2=" << 0.5 * dx() * dx();
            throw std::invalid_argument(os.str());
        }
    }
};

struct FieldEnsemble {
    std::size_t n_paths = 0;
    SpdeGrid grid;
    std::uint64_t master_seed = 0;
    std::vector<std::vector<double>> terminal; ///< [path][node], U(horizon, .)
    std::vector<double> eps;
    std::vector<std::vector<std::vector<double>>> snapshots; ///< [eps][path][node], U(horizon - eps, .)
    std::vector<std::vector<double>> z_eps;                  ///< [eps][path], coupled Z_eps at x_obs
    std::size_t obs_node = 0;

    std::vector<double> terminal_at(std::size_t node) const
    {
        std::vector<double> v(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p)
            v[p] = terminal[p][node];
        return v;
    }

    std::size_t eps_index(double e) const
    {
        for (std::size_t i = 0; i < eps.size(); ++i)
            if (std::fabs(eps[i] - e) <= 1e-12)
                return i;
        throw std::invalid_argument("no snapshot stored for eps=" + std::to_string(e));
    }
};

namespace detail {

inline std::size_t node_of(const SpdeGrid& g, double x)
{
    check_unit(x, "x_obs");
    double r = x / g.dx();
    double n = std::round(r);
    if (std::fabs(r - n) > 1e-9)
        throw std::invalid_argument("x_obs " + std::to_string(x) + " is not a grid node");
    return static_cast<std::size_t>(n);
}

} // namespace detail

/// Explicit scheme U_j += (dt/dx^2)(U_{j+1} - 2U_j + U_{j-1}) + dt b(U_j) + sigma(U_j) W_kj / dx
/// with W_kj ~ N(0, dt dx) and reflecting ghost nodes. For each eps a
/// coupled field starts from U(horizon - eps) and runs with sigma frozen at
/// that field and no drift; its value at x_obs is Z_eps.
inline FieldEnsemble simulate_spde(const SpdeSpec& spec, const SpdeGrid& grid, const SimOptions& o,
                                   std::span<const double> eps = {})
{
    grid.validate();
    if (o.n_paths < 1)
        throw std::invalid_argument("n_paths must be >= 1");
    const std::size_t J = grid.n_space, N = grid.n_time;
    const double dx = grid.dx(), dt = grid.dt(), r = dt / (dx * dx);
    std::vector<std::size_t> freeze;
    for (double e : eps) {
        if (!(e > 0.0 && e <= grid.horizon))
            throw std::invalid_argument("eps must lie in (0, horizon]");
        freeze.push_back(N - detail::steps_for(e, dt, "eps"));
    }
    FieldEnsemble ens;
    ens.n_paths = o.n_paths;
    ens.grid = grid;
    ens.master_seed = o.seed;
    ens.eps.assign(eps.begin(), eps.end());
    ens.obs_node = detail::node_of(grid, spec.x_obs);
    ens.terminal.assign(o.n_paths, {});
    ens.snapshots.assign(eps.size(), std::vector<std::vector<double>>(o.n_paths));
    ens.z_eps.assign(eps.size(), std::vector<double>(o.n_paths));

    const CompiledExpr sig(spec.sigma.expr, {"u"});
    const CompiledExpr drift(spec.b.expr, {"u"});
    const CompiledExpr init(spec.u0, {"x"});
    std::vector<double> u0(J);
    for (std::size_t j = 0; j < J; ++j) {
        u0[j] = init({double(j) * dx});
        if (!std::isfinite(u0[j]))
            throw std::invalid_argument("u0 is not finite on the grid");
    }
    const double noise_sd = std::sqrt(dt * dx) / dx;

    auto lap = [J](const std::vector<double>& u, std::size_t j) {
        double left = j == 0 ? u[1] : u[j - 1];
        double right = j + 1 == J ? u[J - 2] : u[j + 1];
        return left - 2.0 * u[j] + right;
    };

    parallel_for(o.n_paths, o.workers, [&](std::size_t p) {
        RngStream drive = path_stream(o.seed, p, Channel::Drive);
        std::vector<double> u = u0, un(J), w(J);
        struct Coupled {
            bool active = false;
            std::vector<double> v, vn, frozen;
        };
        std::vector<Coupled> cpl(eps.size());
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t e = 0; e < eps.size(); ++e) {
                if (freeze[e] != k)
                    continue;
                auto& c = cpl[e];
                c.active = true;
                c.v = u;
                c.vn.resize(J);
                c.frozen.resize(J);
                for (std::size_t j = 0; j < J; ++j)
                    c.frozen[j] = sig({u[j]});
                ens.snapshots[e][p] = u;
            }
            for (std::size_t j = 0; j < J; ++j)
                w[j] = noise_sd * drive.normal();
            for (std::size_t j = 0; j < J; ++j) {
                double x = u[j] + r * lap(u, j);
                x = x + dt * drift({u[j]});
                x = x + sig({u[j]}) * w[j];
                if (!std::isfinite(x)) {
                    std::ostringstream os;
                    os << "non-finite field on path " << p << " at step " << k << ", node " << j;
                    throw std::runtime_error(os.str());
                }
                un[j] = x;
            }
            for (auto& c : cpl) {
                if (!c.active)
                    continue;
                for (std::size_t j = 0; j < J; ++j)
                    c.vn[j] = (c.v[j] + r * lap(c.v, j)) + c.frozen[j] * w[j];
                c.v.swap(c.vn);
            }
            u.swap(un);
        }
        for (std::size_t e = 0; e < eps.size(); ++e)
            ens.z_eps[e][p] = cpl[e].v[ens.obs_node];
        ens.terminal[p] = std::move(u);
    });
    return ens;
}

/// Terminal U(1, x_obs) and Z_eps packaged for the one-step exponent fit.
inline CoupledEnsemble couple_spde_one_step(const SpdeSpec& spec, const SpdeGrid& grid, std::span<const double> eps,
                                            const SimOptions& o)
{
    auto f = simulate_spde(spec, grid, o, eps);
    CoupledEnsemble c;
    c.n_paths = f.n_paths;
    c.h = grid.dt();
    c.master_seed = o.seed;
    c.eps = f.eps;
    c.terminal_x = f.terminal_at(f.obs_node);
    c.z_eps = f.z_eps;
    const CompiledExpr sig(spec.sigma.expr, {"u"});
    c.sigma_at_terminal.resize(c.n_paths);
    for (std::size_t p = 0; p < c.n_paths; ++p)
        c.sigma_at_terminal[p] = std::fabs(sig({c.terminal_x[p]}));
    c.sigma_at_freeze.assign(c.eps.size(), std::vector<double>(c.n_paths));
    for (std::size_t e = 0; e < c.eps.size(); ++e)
        for (std::size_t p = 0; p < c.n_paths; ++p)
            c.sigma_at_freeze[e][p] = std::fabs(sig({f.snapshots[e][p][f.obs_node]}));
    return c;
}

/// Quadrature weights for Y_eps on the FD grid: w_j = int_0^eps int_window
/// G_u(x,y)^2 phi_j(y) dy du with phi_j the piecewise-linear hat at node j.
/// The hats sum to one, so sum_j w_j = kappa_eps(x).
inline std::vector<double> y_eps_weights(const SpdeGrid& grid, double x, double eps, const HeatKernelCalc& calc = {})
{
    detail::check_unit(x, "x");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("y_eps: eps must lie in (0,1)");
    const std::size_t J = grid.n_space;
    const double dx = grid.dx();
    const double rad = std::sqrt(eps);
    const double lo = std::max(0.0, x - rad), hi = std::min(1.0, x + rad);
    std::vector<double> w(J, 0.0);
    for (std::size_t c = 0; c + 1 < J; ++c) {
        double a = std::max(lo, double(c) * dx), b = std::min(hi, double(c + 1) * dx);
        if (b <= a)
            continue;
        double left = double(c) * dx;
        // Left hat on the cell is 1 - (y - x_c)/dx, the right hat its complement.
        double wl = detail::singular_time_integral(
            [&](double u) {
                return detail::kernel_sq_window(u, x, a, b, [&](double y) { return 1.0 - (y - left) / dx; }, calc);
            },
            eps, calc.rel_tol);
        double wr = detail::singular_time_integral(
            [&](double u) {
                return detail::kernel_sq_window(u, x, a, b, [&](double y) { return (y - left) / dx; }, calc);
            },
            eps, calc.rel_tol);
        w[c] += wl;
        w[c + 1] += wr;
    }
    return w;
}

/// Y_eps = (1/kappa_eps) sum_j w_j sigma^2(U(1-eps, x_j)) for one path.
inline double y_eps(const FieldEnsemble& ens, std::size_t path, const CoeffSpec& sigma, std::span<const double> weights,
                    double eps)
{
    const auto& snap = ens.snapshots[ens.eps_index(eps)][path];
    if (snap.size() != weights.size())
        throw std::invalid_argument("y_eps: weights do not match the grid");
    const CompiledExpr sig(sigma.expr, {"u"});
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < snap.size(); ++j) {
        if (weights[j] == 0.0)
            continue;
        double s = sig({snap[j]});
        num += weights[j] * s * s;
        den += weights[j];
    }
    return num / den;
}

inline double y_eps(const FieldEnsemble& ens, std::size_t path, const CoeffSpec& sigma, double x, double eps,
                    const HeatKernelCalc& calc = {})
{
    auto w = y_eps_weights(ens.grid, x, eps, calc);
    return y_eps(ens, path, sigma, w, eps);
}

struct SpdeRegularityReport {
    double max_second_moment = 0.0; ///< max over nodes of E U(1, y)^2
    ExponentFit time_fit;           ///< E(U(1,x) - U(1-eps,x))^2 against eps, target >= 1/2
    ExponentFit space_fit;          ///< E(U(1,x) - U(1,x+d))^2 against d, target >= 1
};

/// Fits the three moment bounds. Time increments use the stored snapshots
/// at x_obs; space increments use node offsets 2^-k for k = k_lo..k_hi.
inline SpdeRegularityReport spde_regularity_fit(const FieldEnsemble& ens, int k_lo, int k_hi)
{
    if (ens.eps.size() < 2)
        throw std::invalid_argument("spde_regularity_fit: need >= 2 snapshots");
    SpdeRegularityReport rep;
    const std::size_t J = ens.grid.n_space, x = ens.obs_node;
    for (std::size_t j = 0; j < J; ++j) {
        double m = 0.0;
        for (std::size_t p = 0; p < ens.n_paths; ++p)
            m += ens.terminal[p][j] * ens.terminal[p][j];
        rep.max_second_moment = std::max(rep.max_second_moment, m / double(ens.n_paths));
    }
    std::vector<std::vector<double>> tv;
    for (std::size_t e = 0; e < ens.eps.size(); ++e) {
        std::vector<double> col(ens.n_paths);
        for (std::size_t p = 0; p < ens.n_paths; ++p) {
            double d = ens.terminal[p][x] - ens.snapshots[e][p][x];
            col[p] = d * d;
        }
        tv.push_back(std::move(col));
    }
    rep.time_fit = fit_moment_scaling(ens.eps, tv, ens.master_seed);
    std::vector<double> sep;
    std::vector<std::vector<double>> sv;
    for (int k = k_lo; k <= k_hi; ++k) {
        double d = std::ldexp(1.0, -k);
        double off = d / ens.grid.dx();
        if (std::fabs(off - std::round(off)) > 1e-9 || off < 1)
            throw std::invalid_argument("spde_regularity_fit: separation 2^-" + std::to_string(k) +
                                        " is not a whole number of cells");
        std::size_t m = static_cast<std::size_t>(std::round(off));
        std::size_t y = x + m < J ? x + m : x - m;
        std::vector<double> col(ens.n_paths);
        for (std::size_t p = 0; p < ens.n_paths; ++p) {
            double v = ens.terminal[p][x] - ens.terminal[p][y];
            col[p] = v * v;
        }
        sep.push_back(d);
        sv.push_back(std::move(col));
    }
    rep.space_fit = fit_moment_scaling(sep, sv, ens.master_seed);
    return rep;
}

} // namespace acert
