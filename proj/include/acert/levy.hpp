#pragma once

// Levy measures (densities and atomic series), their integrals, the decay
// and small-jump conditions, and truncated compound-Poisson sampling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expr.hpp"
#include "noise.hpp"
#include "numerics.hpp"

namespace acert {

/// Value of a measure integral; `divergent` replaces +inf with a flag.
struct MeasureIntegral {
    double value = 0.0;
    bool divergent = false;
};

namespace detail {

/// Accumulates a sequence of shell contributions that decay geometrically
/// (toward z = 0 or toward n = inf). Stops once a shell is negligible, once
/// the shell ratio has stabilised (then adds the geometric tail), or flags
/// divergence when the ratio sits at or above one.
class ShellSum {
public:
    /// Returns true when the sum is settled.
    bool add(double s)
    {
        if (!std::isfinite(s)) {
            divergent_ = true;
            return true;
        }
        total_ += s;
        ++count_;
        if (count_ > 1 && prev_ != 0.0) {
            double r = s / prev_;
            ratios_.push_back(r);
            if (ratios_.size() > 10)
                ratios_.pop_front();
            if (std::fabs(s) <= 1e-17 * std::fabs(total_)) {
                prev_ = s;
                return true;
            }
            if (ratios_.size() == 10 &&
                std::all_of(ratios_.begin(), ratios_.end(), [](double q) { return q >= 1.0 - 1e-6; })) {
                divergent_ = true;
                return true;
            }
            if (ratios_.size() >= 3 && r > 0.0 && r < 1.0 - 1e-6) {
                double r1 = ratios_[ratios_.size() - 2], r2 = ratios_[ratios_.size() - 3];
                if (std::fabs(r - r1) <= 1e-10 * r && std::fabs(r1 - r2) <= 1e-10 * r) {
                    total_ += s * r / (1.0 - r);
                    return true;
                }
            }
        } else if (count_ > 1 && s == 0.0 && prev_ == 0.0) {
            // Two empty shells in a row: nothing left near the limit point.
            return true;
        }
        prev_ = s;
        return false;
    }

    MeasureIntegral result(bool exhausted) const
    {
        if (divergent_ || exhausted)
            return {std::numeric_limits<double>::infinity(), true};
        return {total_, false};
    }

private:
    double total_ = 0.0;
    double prev_ = 0.0;
    std::size_t count_ = 0;
    bool divergent_ = false;
    std::deque<double> ratios_;
};

/// sin(u) - u without cancellation for small |u|.
inline double sin_minus_id(double u)
{
    if (std::fabs(u) < 0.1) {
        double u2 = u * u;
        return -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)));
    }
    return std::sin(u) - u;
}

/// 1 - cos(u), accurate for small |u|.
inline double one_minus_cos(double u)
{
    double s = std::sin(0.5 * u);
    return 2.0 * s * s;
}

} // namespace detail

/// A Levy measure on R \ {0}. Density supports are finite intervals that
/// exclude 0 in their interior; atomic series need |z_n| nonincreasing.
class LevyMeasure {
public:
    enum class Kind { Density, Atoms, Series };

    struct Interval {
        double lo;
        double hi;
    };

    static LevyMeasure density(const Expr& f, std::vector<Interval> support, double lambda, double gamma)
    {
        LevyMeasure m(Kind::Density, lambda, gamma);
        for (const auto& v : f.free_variables())
            if (v != "z")
                throw std::invalid_argument("density expression may only use z, found '" + v + "'");
        if (support.empty())
            throw std::invalid_argument("density support is empty");
        for (const auto& iv : support) {
            if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw std::invalid_argument("density support intervals must be finite with lo < hi");
            if (iv.lo < 0.0 && iv.hi > 0.0)
                throw std::invalid_argument("density support interval must not straddle 0; split it");
        }
        m.density_expr_ = f;
        m.density_ = std::make_shared<CompiledExpr>(f, std::initializer_list<std::string>{"z"});
        m.support_ = std::move(support);
        m.validate();
        return m;
    }

    static LevyMeasure atoms(std::vector<std::pair<double, double>> atoms, double lambda, double gamma)
    {
        LevyMeasure m(Kind::Atoms, lambda, gamma);
        for (const auto& [z, w] : atoms) {
            if (z == 0.0 || !std::isfinite(z))
                throw std::invalid_argument("atom locations must be finite and nonzero");
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::invalid_argument("atom rates must be finite and >= 0");
        }
        std::stable_sort(atoms.begin(), atoms.end(),
                         [](const auto& a, const auto& b) { return std::fabs(a.first) > std::fabs(b.first); });
        m.atoms_ = std::move(atoms);
        m.validate();
        return m;
    }

    /// Atoms at location(n) with rate(n), n = 1, 2, ...; both are expressions in n.
    static LevyMeasure series(const Expr& location, const Expr& rate, double lambda, double gamma)
    {
        LevyMeasure m(Kind::Series, lambda, gamma);
        m.location_expr_ = location;
        m.rate_expr_ = rate;
        m.location_ = std::make_shared<CompiledExpr>(location, std::initializer_list<std::string>{"n"});
        m.rate_ = std::make_shared<CompiledExpr>(rate, std::initializer_list<std::string>{"n"});
        double prev = std::numeric_limits<double>::infinity();
        for (double n : {1., 2., 3., 4., 5., 8., 16., 100., 1e3, 1e4, 1e6}) {
            double z = std::fabs(m.loc(n));
            if (z == 0.0 || z > prev)
                throw std::invalid_argument("series atoms need nonzero |location(n)| nonincreasing in n");
            if (!(m.w(n) >= 0.0))
                throw std::invalid_argument("series rates must be >= 0");
            prev = z;
        }
        m.validate();
        return m;
    }

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double gamma() const { return gamma_; }
    const std::vector<Interval>& support() const { return support_; }
    const std::vector<std::pair<double, double>>& atom_list() const { return atoms_; }
    const Expr& density_expr() const { return density_expr_; }

    /// Integral of g(z) nu(dz) over { r_lo < |z| <= r_hi }. `omega` is the
    /// oscillation frequency of g (0 if none); it sets panel widths.
    template <class G>
    MeasureIntegral integrate(G&& g, double r_lo, double r_hi, double omega = 0.0) const
    {
        switch (kind_) {
        case Kind::Density: return integrate_density(g, r_lo, r_hi, omega);
        case Kind::Atoms: {
            double s = 0.0;
            for (const auto& [z, wt] : atoms_)
                if (std::fabs(z) > r_lo && std::fabs(z) <= r_hi)
                    s += wt * g(z);
            return {s, false};
        }
        case Kind::Series: return integrate_series(g, r_lo, r_hi, omega);
        }
        return {};
    }

    /// Largest |z| in the support.
    double max_abs() const
    {
        switch (kind_) {
        case Kind::Density: {
            double m = 0.0;
            for (const auto& iv : support_)
                m = std::max({m, std::fabs(iv.lo), std::fabs(iv.hi)});
            return m;
        }
        case Kind::Atoms: return atoms_.empty() ? 0.0 : std::fabs(atoms_.front().first);
        case Kind::Series: return std::fabs(loc(1.0));
        }
        return 0.0;
    }

    /// Kept atoms with |z| > rho (finite by construction); Density returns empty.
    std::vector<std::pair<double, double>> atoms_above(double rho) const
    {
        std::vector<std::pair<double, double>> out;
        if (kind_ == Kind::Atoms) {
            for (const auto& a : atoms_)
                if (std::fabs(a.first) > rho)
                    out.push_back(a);
        } else if (kind_ == Kind::Series) {
            std::uint64_t n_end = first_index_at_most(rho);
            for (std::uint64_t n = 1; n < n_end; ++n)
                out.emplace_back(loc(double(n)), w(double(n)));
        }
        return out;
    }

    /// Density value at z (0 outside the support).
    double density_at(double z) const
    {
        for (const auto& iv : support_)
            if (z >= iv.lo && z <= iv.hi && z != 0.0)
                return (*density_)({z});
        return 0.0;
    }

private:
    LevyMeasure(Kind k, double lambda, double gamma) : kind_(k), lambda_(lambda), gamma_(gamma) {}

    void validate() const
    {
        if (!(lambda_ > 0.75 && lambda_ < 2.0))
            throw std::invalid_argument("lambda must lie in (3/4, 2)");
        if (!(gamma_ >= 1.0 && gamma_ <= 2.0))
            throw std::invalid_argument("gamma must lie in [1, 2]");
        if (gamma_ < lambda_)
            throw std::invalid_argument("gamma must be >= lambda");
        auto m2 = integrate([](double z) { return z * z; }, 0.0, std::numeric_limits<double>::infinity());
        if (m2.divergent)
            throw std::invalid_argument("Levy measure has infinite second moment");
    }

    double loc(double n) const { return (*location_)({n}); }
    double w(double n) const { return (*rate_)({n}); }

    /// First n >= 1 with |location(n)| <= r, by galloping then bisection.
    std::uint64_t first_index_at_most(double r) const
    {
        if (std::fabs(loc(1.0)) <= r)
            return 1;
        std::uint64_t hi = 2;
        while (std::fabs(loc(double(hi))) > r) {
            if (hi >= (std::uint64_t(1) << 52))
                throw std::runtime_error("series atoms do not reach |z| <= " + std::to_string(r));
            hi *= 2;
        }
        std::uint64_t lo = hi / 2; // |loc(lo)| > r
        while (hi - lo > 1) {
            std::uint64_t mid = lo + (hi - lo) / 2;
            if (std::fabs(loc(double(mid))) <= r)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    /// First n >= 1 satisfying a predicate that stays true once it holds.
    template <class P>
    static std::uint64_t first_index_where(P&& pred)
    {
        if (pred(1.0))
            return 1;
        std::uint64_t hi = 2;
        while (!pred(double(hi))) {
            if (hi >= (std::uint64_t(1) << 52))
                throw std::runtime_error("series index search did not terminate");
            hi *= 2;
        }
        std::uint64_t lo = hi / 2;
        while (hi - lo > 1) {
            std::uint64_t mid = lo + (hi - lo) / 2;
            if (pred(double(mid)))
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    /// Integral of g f over the positive piece [a, b] (a >= 0) in |z|, with
    /// `sign` selecting the side of the real line.
    template <class G>
    MeasureIntegral integrate_piece(G& g, double a, double b, double sign, double omega) const
    {
        auto gf = [&](double r) {
            double z = sign * r;
            return g(z) * (*density_)({z});
        };
        double total = 0.0;
        double split = a;
        if (a == 0.0)
            split = omega > 0.0 ? std::min(b, 0.5 / omega) : b;
        // Panels on [split, b]: ratio <= 2 and width <= pi / omega.
        double lo = split;
        while (lo < b) {
            double hi = std::min(b, lo > 0.0 ? 2.0 * lo : b);
            if (omega > 0.0)
                hi = std::min(hi, lo + M_PI / omega);
            total += gauss20(gf, lo, hi);
            lo = hi;
        }
        if (a == 0.0) {
            detail::ShellSum shells;
            bool done = false;
            for (int k = 0; k < 2000 && !done; ++k)
                done = shells.add(gauss20(gf, std::ldexp(split, -k - 1), std::ldexp(split, -k)));
            auto near = shells.result(!done);
            if (near.divergent)
                return near;
            total += near.value;
        }
        return {total, !std::isfinite(total)};
    }

    template <class G>
    MeasureIntegral integrate_density(G& g, double r_lo, double r_hi, double omega) const
    {
        double total = 0.0;
        for (const auto& iv : support_) {
            double sign = iv.hi > 0.0 ? 1.0 : -1.0;
            double a = sign > 0 ? iv.lo : -iv.hi;
            double b = sign > 0 ? iv.hi : -iv.lo;
            a = std::max(a, r_lo);
            b = std::min(b, r_hi);
            if (!(a < b))
                continue;
            auto part = integrate_piece(g, a, b, sign, omega);
            if (part.divergent)
                return part;
            total += part.value;
        }
        return {total, false};
    }

    template <class G>
    MeasureIntegral integrate_series(G& g, double r_lo, double r_hi, double omega) const
    {
        auto term = [&](double n) { return w(n) * g(loc(n)); };
        std::uint64_t n_first = first_index_at_most(r_hi);
        double total = 0.0;
        if (r_lo > 0.0) {
            std::uint64_t n_end = first_index_at_most(r_lo);
            for (std::uint64_t n = n_first; n < n_end; ++n)
                total += term(double(n));
            return {total, false};
        }
        // Direct sum until the phase omega*z moves slowly in n, then
        // Euler-Maclaurin with the integral split into phase-limited panels.
        std::uint64_t n_tail = std::max<std::uint64_t>(n_first, 1000);
        if (omega > 0.0)
            n_tail = std::max(n_tail, first_index_where([&](double n) {
                                  return omega * std::fabs(loc(n) - loc(n + 1)) <= 0.02;
                              }));
        if (n_tail > 50'000'000)
            throw std::runtime_error("series sum needs more than 5e7 direct terms at this frequency");
        for (std::uint64_t n = n_first; n < n_tail; ++n)
            total += term(double(n));
        double N = double(n_tail);
        detail::ShellSum shells;
        bool done = false;
        for (int k = 0; k < 1000 && !done; ++k) {
            double a = std::ldexp(N, k), b = std::ldexp(N, k + 1);
            int panels = 1;
            if (omega > 0.0)
                panels = static_cast<int>(std::min(1e5, std::ceil(omega * std::fabs(loc(a) - loc(b)))) + 1);
            done = shells.add(panel_gauss(term, a, b, panels));
        }
        auto integral = shells.result(!done);
        if (integral.divergent)
            return integral;
        double d = std::max(1.0, 1e-3 * N);
        double f0 = term(N);
        double f1 = (term(N + d) - term(N - d)) / (2 * d);
        double f3 = (term(N + 2 * d) - 2 * term(N + d) + 2 * term(N - d) - term(N - 2 * d)) / (2 * d * d * d);
        total += integral.value + 0.5 * f0 - f1 / 12.0 + f3 / 720.0;
        return {total, !std::isfinite(total)};
    }

    Kind kind_;
    double lambda_;
    double gamma_;
    Expr density_expr_;
    std::shared_ptr<const CompiledExpr> density_;
    std::vector<Interval> support_;
    std::vector<std::pair<double, double>> atoms_;
    Expr location_expr_, rate_expr_;
    std::shared_ptr<const CompiledExpr> location_, rate_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Integral of |z|^gamma over nu.
inline MeasureIntegral moment_gamma(const LevyMeasure& nu, double gamma)
{
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw std::invalid_argument("moment_gamma: gamma must lie in (0, 2]");
    return nu.integrate([gamma](double z) { return std::pow(std::fabs(z), gamma); }, 0.0, kInf);
}

/// Integral of z^2 over { |z| <= eps }.
inline double small_mass(const LevyMeasure& nu, double eps)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("small_mass: eps must be > 0");
    return nu.integrate([](double z) { return z * z; }, 0.0, eps).value;
}

/// Psi(xi) = integral of (1 - cos(xi z)) nu(dz).
inline double levy_psi(const LevyMeasure& nu, double xi)
{
    if (xi == 0.0)
        return 0.0;
    auto r = nu.integrate([xi](double z) { return detail::one_minus_cos(xi * z); }, 0.0, kInf, std::fabs(xi));
    if (r.divergent)
        throw std::runtime_error("levy_psi: integral did not converge");
    return r.value;
}

/// Characteristic function of the compensated pure-jump Levy process at time t:
/// exp(t * integral (e^{i xi z} - 1 - i xi z) nu(dz)).
inline std::complex<double> levy_charfn(const LevyMeasure& nu, double xi, double t = 1.0)
{
    double re = -levy_psi(nu, xi);
    auto im = nu.integrate([xi](double z) { return detail::sin_minus_id(xi * z); }, 0.0, kInf, std::fabs(xi));
    if (im.divergent)
        throw std::runtime_error("levy_charfn: integral did not converge");
    return std::exp(t * std::complex<double>(re, im.value));
}

struct DixCheck {
    double c0_hat = 0.0;
    double c1_hat = 0.0;
    bool pass = false;
};

/// Ratios small_mass(eps) / eps^{2 - lambda} over the grid.
inline DixCheck check_dix(const LevyMeasure& nu, std::span<const double> eps_grid)
{
    if (eps_grid.size() < 8)
        throw std::invalid_argument("check_dix: grid needs >= 8 points");
    DixCheck out{kInf, 0.0, false};
    for (double e : eps_grid) {
        if (!(e > 0.0 && e <= 1.0))
            throw std::invalid_argument("check_dix: eps must lie in (0,1]");
        double r = small_mass(nu, e) / std::pow(e, 2.0 - nu.lambda());
        out.c0_hat = std::min(out.c0_hat, r);
        out.c1_hat = std::max(out.c1_hat, r);
    }
    out.pass = out.c0_hat > 0.0 && std::isfinite(out.c1_hat);
    return out;
}

inline std::vector<double> dyadic_grid(int k_lo, int k_hi)
{
    std::vector<double> g;
    for (int k = k_lo; k <= k_hi; ++k)
        g.push_back(std::ldexp(1.0, -k));
    return g;
}

struct Tasoeur1Check {
    double c_hat = 0.0;
    double lambda_hat = 0.0;
    double upper_const = 0.0; ///< 2 * integral |z|^gamma nu(dz)
    bool upper_ok = false;
    std::vector<double> psi;
    bool pass = false;
};

/// Audits Psi(xi) >= c |xi|^lambda on the grid. Passing requires a positive
/// c_hat, a log-log slope within 0.1 below the declared lambda, and the upper
/// envelope Psi <= 2 M_gamma |xi|^gamma.
inline Tasoeur1Check check_tasoeur1(const LevyMeasure& nu, std::span<const double> xi_grid)
{
    if (xi_grid.size() < 2)
        throw std::invalid_argument("check_tasoeur1: grid needs >= 2 points");
    double lo = kInf, hi = 0.0;
    for (double x : xi_grid) {
        lo = std::min(lo, std::fabs(x));
        hi = std::max(hi, std::fabs(x));
    }
    if (!(lo > 0.0) || hi / lo < 100.0 * (1 - 1e-12))
        throw std::invalid_argument("check_tasoeur1: grid must span >= 2 decades");
    Tasoeur1Check out;
    out.c_hat = kInf;
    auto mg = moment_gamma(nu, nu.gamma());
    out.upper_const = mg.divergent ? kInf : 2.0 * mg.value;
    out.upper_ok = !mg.divergent;
    std::vector<double> lx, lp;
    bool positive = true;
    for (double x : xi_grid) {
        double p = levy_psi(nu, x);
        out.psi.push_back(p);
        out.c_hat = std::min(out.c_hat, p / std::pow(std::fabs(x), nu.lambda()));
        if (p > out.upper_const * std::pow(std::fabs(x), nu.gamma()) * (1 + 1e-9))
            out.upper_ok = false;
        if (p > 0.0) {
            lx.push_back(std::log(std::fabs(x)));
            lp.push_back(std::log(p));
        } else {
            positive = false;
        }
    }
    out.lambda_hat = lx.size() >= 2 ? fit_line(lx, lp).slope : 0.0;
    out.pass = positive && out.c_hat > 1e-9 && out.lambda_hat >= nu.lambda() - 0.1 && out.upper_ok;
    return out;
}

struct TruncationPlan {
    double rho = 0.0;
    double kept_rate = 0.0;
    double residual_variance = 0.0;
    double compensation_drift = 0.0;
    double kept_second_moment = 0.0;
    bool gaussian_residual = false;
};

/// Plan for a fixed cutoff: jumps with |z| <= rho are dropped.
inline TruncationPlan truncation_at(const LevyMeasure& nu, double rho, double rate_budget = 1e6)
{
    if (!(rho > 0.0))
        throw std::invalid_argument("truncation cutoff must be > 0");
    TruncationPlan p;
    p.rho = rho;
    auto rate = nu.integrate([](double) { return 1.0; }, rho, kInf);
    if (rate.divergent || rate.value > rate_budget)
        throw std::runtime_error("rate budget exceeded: kept jump rate " + std::to_string(rate.value) + " > " +
                                 std::to_string(rate_budget) + "; increase var_tol");
    p.kept_rate = rate.value;
    p.residual_variance = small_mass(nu, rho);
    p.compensation_drift = -nu.integrate([](double z) { return z; }, rho, kInf).value;
    p.kept_second_moment = nu.integrate([](double z) { return z * z; }, rho, kInf).value;
    return p;
}

/// Largest dyadic cutoff, strictly below the largest jump size, whose
/// dropped variance is within var_tol.
inline TruncationPlan plan_truncation(const LevyMeasure& nu, double var_tol, double rate_budget = 1e6,
                                      bool gaussian_residual = false)
{
    if (!(var_tol > 0.0))
        throw std::invalid_argument("plan_truncation: var_tol must be > 0");
    int k = static_cast<int>(std::ceil(std::log2(std::max(nu.max_abs(), 1e-300)))) - 1;
    for (int i = 0; i < 200; ++i, --k) {
        double rho = std::ldexp(1.0, k);
        if (small_mass(nu, rho) <= var_tol) {
            auto p = truncation_at(nu, rho, rate_budget);
            p.gaussian_residual = gaussian_residual;
            return p;
        }
    }
    throw std::runtime_error("plan_truncation: no dyadic cutoff reaches var_tol");
}

/// Characteristic function of the simulated (truncated) process at time t.
inline std::complex<double> truncated_charfn(const LevyMeasure& nu, const TruncationPlan& plan, double xi, double t = 1.0)
{
    auto re = nu.integrate([xi](double z) { return -detail::one_minus_cos(xi * z); }, plan.rho, kInf, std::fabs(xi));
    auto im = nu.integrate([xi](double z) { return detail::sin_minus_id(xi * z); }, plan.rho, kInf, std::fabs(xi));
    double g = plan.gaussian_residual ? -0.5 * plan.residual_variance * xi * xi : 0.0;
    return std::exp(t * std::complex<double>(re.value + g, im.value));
}

/// Draws jump sizes from nu restricted to |z| > rho, normalised.
class JumpSizeSampler {
public:
    JumpSizeSampler(const LevyMeasure& nu, const TruncationPlan& plan)
    {
        if (plan.kept_rate <= 0.0)
            return;
        if (nu.kind() != LevyMeasure::Kind::Density) {
            double acc = 0.0;
            for (const auto& [z, w] : nu.atoms_above(plan.rho)) {
                if (w <= 0.0)
                    continue;
                acc += w;
                z0_.push_back(z);
                cum_.push_back(acc);
            }
            atomic_ = true;
            total_ = acc;
            return;
        }
        // Density: cubic-Hermite CDF tables on geometric nodes per kept piece.
        constexpr int kNodes = 1024;
        double acc = 0.0;
        for (const auto& iv : nu.support()) {
            double sign = iv.hi > 0.0 ? 1.0 : -1.0;
            double a = std::max(sign > 0 ? iv.lo : -iv.hi, plan.rho);
            double b = sign > 0 ? iv.hi : -iv.lo;
            if (!(a < b))
                continue;
            double ratio = std::pow(b / a, 1.0 / kNodes);
            double r0 = a;
            for (int i = 0; i < kNodes; ++i) {
                double r1 = i + 1 == kNodes ? b : r0 * ratio;
                double za = sign * r0, zb = sign * r1;
                double lo = std::min(za, zb), hi = std::max(za, zb);
                double mass = gauss20([&](double z) { return nu.density_at(z); }, lo, hi);
                if (mass > 0.0) {
                    acc += mass;
                    z0_.push_back(lo);
                    z1_.push_back(hi);
                    f0_.push_back(nu.density_at(lo));
                    f1_.push_back(nu.density_at(hi));
                    mass_.push_back(mass);
                    cum_.push_back(acc);
                }
                r0 = r1;
            }
        }
        total_ = acc;
    }

    bool empty() const { return cum_.empty(); }

    double operator()(RngStream& s) const
    {
        double u = s.uniform() * total_;
        auto idx = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
        idx = std::min(idx, cum_.size() - 1);
        if (atomic_)
            return z0_[idx];
        double target = u - (cum_[idx] - mass_[idx]);
        return invert_cell(idx, target);
    }

private:
    /// Solves F(z) = target inside one cell, F the cubic Hermite interpolant
    /// of the cell CDF with end slopes f0, f1 (rescaled so F(z1) = mass).
    double invert_cell(std::size_t i, double target) const
    {
        double a = z0_[i], L = z1_[i] - a, m = mass_[i];
        double d0 = f0_[i] * L / m, d1 = f1_[i] * L / m;
        double y = std::clamp(target / m, 0.0, 1.0);
        auto H = [&](double t) {
            double t2 = t * t, t3 = t2 * t;
            return (-2 * t3 + 3 * t2) + d0 * (t3 - 2 * t2 + t) + d1 * (t3 - t2);
        };
        auto dH = [&](double t) {
            double t2 = t * t;
            return (-6 * t2 + 6 * t) + d0 * (3 * t2 - 4 * t + 1) + d1 * (3 * t2 - 2 * t);
        };
        double t = y, lo = 0.0, hi = 1.0;
        for (int it = 0; it < 30; ++it) {
            double r = H(t) - y;
            if (std::fabs(r) < 1e-14)
                break;
            if (r > 0)
                hi = t;
            else
                lo = t;
            double d = dH(t);
            double tn = d > 0 ? t - r / d : 0.5 * (lo + hi);
            t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
        }
        return a + t * L;
    }

    bool atomic_ = false;
    double total_ = 0.0;
    std::vector<double> z0_, z1_, f0_, f1_, mass_, cum_;
};

/// Compensated truncated Levy increments over consecutive steps.
class LevyIncrementSampler {
public:
    LevyIncrementSampler(const LevyMeasure& nu, const TruncationPlan& plan) : plan_(plan), sizes_(nu, plan) {}

    const TruncationPlan& plan() const { return plan_; }

    /// Fills out[k] with the increment over step k of length dt[k]. Jump
    /// epochs and sizes come from `jumps`; the optional Gaussian residual
    /// uses `residual`.
    void fill(RngStream& jumps, RngStream* residual, std::span<const double> dt, std::span<double> out) const
    {
        double t = 0.0, t_next = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < dt.size(); ++i)
            out[i] = plan_.compensation_drift * dt[i];
        if (plan_.kept_rate > 0.0 && !sizes_.empty() && !dt.empty()) {
            double step_end = dt[0];
            t_next = jumps.exponential(plan_.kept_rate);
            double horizon = 0.0;
            for (double d : dt)
                horizon += d;
            while (t_next < horizon) {
                while (t_next >= step_end && k + 1 < dt.size())
                    step_end += dt[++k];
                out[k] += sizes_(jumps);
                t = t_next;
                t_next = t + jumps.exponential(plan_.kept_rate);
            }
        }
        if (plan_.gaussian_residual && residual && plan_.residual_variance > 0.0)
            for (std::size_t i = 0; i < dt.size(); ++i)
                out[i] += std::sqrt(plan_.residual_variance * dt[i]) * residual->normal();
    }

    std::vector<double> operator()(RngStream& jumps, std::span<const double> dt, RngStream* residual = nullptr) const
    {
        std::vector<double> out(dt.size());
        fill(jumps, residual, dt, out);
        return out;
    }

private:
    TruncationPlan plan_;
    JumpSizeSampler sizes_;
};

inline std::vector<double> sample_levy_increments(const LevyMeasure& nu, const TruncationPlan& plan, RngStream& stream,
                                                  std::span<const double> dt_grid)
{
    return LevyIncrementSampler(nu, plan)(stream, dt_grid);
}

/// Built-in measures.
namespace measures {

/// z^{-1-lambda} dz on (0, 1].
inline LevyMeasure power_density(double lambda, double gamma = 2.0)
{
    Expr f = Expr::binary(Op::Pow, Expr::variable("z"), Expr::literal(-1.0 - lambda));
    return LevyMeasure::density(f, {{0.0, 1.0}}, lambda, gamma);
}

/// |z|^{-1-lambda} dz on [-1, 1] \ {0}.
inline LevyMeasure symmetric_power_density(double lambda, double gamma = 2.0)
{
    Expr f = Expr::binary(Op::Pow, Expr::unary(Op::Abs, Expr::variable("z")), Expr::literal(-1.0 - lambda));
    return LevyMeasure::density(f, {{-1.0, 0.0}, {0.0, 1.0}}, lambda, gamma);
}

/// sum_n n^{lambda alpha - 1} delta_{n^{-alpha}}; alpha = 1 gives atoms at 1/n.
inline LevyMeasure power_atoms(double lambda, double alpha = 1.0, double gamma = 2.0)
{
    Expr n = Expr::variable("n");
    Expr loc = Expr::binary(Op::Pow, n, Expr::literal(-alpha));
    Expr rate = Expr::binary(Op::Pow, n, Expr::literal(lambda * alpha - 1.0));
    return LevyMeasure::series(loc, rate, lambda, gamma);
}

/// delta_1 + delta_{-1}: compound Poisson, fails the decay condition.
inline LevyMeasure two_atoms() { return LevyMeasure::atoms({{1.0, 1.0}, {-1.0, 1.0}}, 1.0, 2.0); }

} // namespace measures

} // namespace acert
