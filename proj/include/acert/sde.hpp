#pragma once

// Euler-Maruyama engines for Brownian, path-dependent and Levy-driven SDEs,
// the frozen-coefficient one-step coupling Z_eps, exponent fits and the
// absorbing counterexample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <limits>
#include <vector>

#include "expr.hpp"
#include "levy.hpp"
#include "noise.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace acert {

struct BrownianSdeSpec {
    CoeffSpec sigma; ///< in t, x
    CoeffSpec b;     ///< in t, x
    double x0 = 0.0;
    double horizon = 1.0;
};

struct AuxProcessSpec {
    enum class Kind { Constant, OrnsteinUhlenbeck, PathFunctional };
    Kind kind = Kind::Constant;
    double rate = 1.0;
    double vol = 1.0;
    double h0 = 0.0;
    std::size_t aggregate = 0; ///< index into the aggregates, PathFunctional only
};

struct PathDepSdeSpec {
    CoeffSpec sigma; ///< in x
    CoeffSpec kappa; ///< in t, h, a1..aK
    CoeffSpec b;     ///< in t, x, h, a1..aK
    std::vector<PathAggregate> aggregates;
    AuxProcessSpec aux;
    double x0 = 0.0;
    double horizon = 1.0;
    double kappa0 = 1.0;
    double theta1 = 1.0;
    double theta2 = 1.0;
    double theta3 = 1.0;
    double eta = 1.0;

    double derived_theta() const { return std::min({2 * theta1, theta2, eta * theta3, 1.0}); }
};

struct LevySdeSpec {
    CoeffSpec sigma; ///< in t, x
    CoeffSpec b;     ///< in t, x
    LevyMeasure nu = measures::two_atoms(); ///< placeholder until set
    double x0 = 0.0;
    double horizon = 1.0;
    double alpha = 0.0; ///< Hoelder exponent of b, 0 for measurable-only

    double zeta() const
    {
        double theta = sigma.holder_theta.value_or(0.0);
        return std::min(theta, nu.gamma() + alpha - 1.0);
    }
};

struct SimOptions {
    std::size_t n_paths = 1000;
    double h = 1e-3;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Terminal samples and, per eps, the coupled Z_eps. Z_eps shares every
/// driving increment with X on (1-eps, 1].
struct CoupledEnsemble {
    std::size_t n_paths = 0;
    double h = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<double> eps;
    std::vector<double> terminal_x;
    std::vector<double> sigma_at_terminal;
    std::vector<std::vector<double>> z_eps;           ///< [eps][path]
    std::vector<std::vector<double>> sigma_at_freeze; ///< [eps][path]
    std::vector<double> checkpoint_times;
    std::vector<std::vector<double>> checkpoints; ///< [time][path]
    std::vector<double> sup_x2;                   ///< per path sup_t X_t^2

    double mean_sup_x2() const { return sup_x2.empty() ? 0.0 : mean(sup_x2); }
};

namespace detail {

inline std::size_t steps_for(double span, double h, const char* what)
{
    if (!(h > 0.0))
        throw std::invalid_argument("step h must be > 0");
    double m = span / h;
    double r = std::round(m);
    if (r < 1.0 || std::fabs(m - r) > 1e-9 * std::max(1.0, r))
        throw std::invalid_argument(std::string(what) + " " + std::to_string(span) + " is not a multiple of h=" +
                                    std::to_string(h));
    return static_cast<std::size_t>(r);
}

/// Freeze bookkeeping for one eps on one path.
struct FreezeRecord {
    std::size_t step = 0; ///< freeze step index k_f = N - m_eps
    double z = 0.0;
    double coef = 0.0;
    double drift = 0.0;
};

struct EngineLayout {
    std::size_t n_steps = 0;
    std::vector<std::size_t> freeze_step;
    std::vector<std::size_t> checkpoint_step;
};

inline EngineLayout make_layout(double horizon, double h, std::span<const double> eps,
                                std::span<const double> checkpoint_times)
{
    EngineLayout L;
    L.n_steps = steps_for(horizon, h, "horizon");
    for (double e : eps) {
        if (!(e > 0.0 && e <= horizon))
            throw std::invalid_argument("eps must lie in (0, horizon]");
        std::size_t m = steps_for(e, h, "eps");
        L.freeze_step.push_back(L.n_steps - m);
    }
    for (double t : checkpoint_times) {
        if (t == 0.0) {
            L.checkpoint_step.push_back(0);
            continue;
        }
        if (!(t > 0.0 && t <= horizon))
            throw std::invalid_argument("checkpoint time must lie in [0, horizon]");
        L.checkpoint_step.push_back(steps_for(t, h, "checkpoint time"));
    }
    return L;
}

inline CoupledEnsemble make_ensemble(const SimOptions& o, std::span<const double> eps,
                                     std::span<const double> checkpoint_times)
{
    if (o.n_paths < 1)
        throw std::invalid_argument("n_paths must be >= 1");
    CoupledEnsemble e;
    e.n_paths = o.n_paths;
    e.h = o.h;
    e.master_seed = o.seed;
    e.eps.assign(eps.begin(), eps.end());
    e.terminal_x.resize(o.n_paths);
    e.sigma_at_terminal.resize(o.n_paths);
    e.z_eps.assign(eps.size(), std::vector<double>(o.n_paths));
    e.sigma_at_freeze.assign(eps.size(), std::vector<double>(o.n_paths));
    e.checkpoint_times.assign(checkpoint_times.begin(), checkpoint_times.end());
    e.checkpoints.assign(checkpoint_times.size(), std::vector<double>(o.n_paths));
    e.sup_x2.resize(o.n_paths);
    return e;
}

inline void check_finite(double x, std::size_t path, std::size_t step)
{
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << "non-finite state on path " << path << " at step " << step;
        throw std::runtime_error(os.str());
    }
}

/// Shared Euler loop. `coef(k, t, x)` returns {diffusion factor, drift};
/// `noise(k)` the driving increment of step k; `after(k, x_old, x_new)`
/// updates path state. `frozen_drift` selects whether Z_eps carries b.
template <class Coef, class Noise, class After>
void run_path(const EngineLayout& L, double x0, double h, std::size_t path, bool frozen_drift, CoupledEnsemble& out,
              Coef&& coef, Noise&& noise, After&& after, std::vector<FreezeRecord>& rec)
{
    const std::size_t n_eps = L.freeze_step.size();
    rec.assign(n_eps, FreezeRecord{});
    for (std::size_t e = 0; e < n_eps; ++e)
        rec[e].step = L.freeze_step[e];
    double x = x0;
    double sup2 = x * x;
    for (std::size_t c = 0; c < L.checkpoint_step.size(); ++c)
        if (L.checkpoint_step[c] == 0)
            out.checkpoints[c][path] = x;
    for (std::size_t k = 0; k < L.n_steps; ++k) {
        double t = double(k) * h;
        auto [s, bb, sig_abs] = coef(k, t, x);
        double dW = noise(k);
        for (std::size_t e = 0; e < n_eps; ++e) {
            FreezeRecord& r = rec[e];
            if (k == r.step) {
                r.z = x;
                r.coef = s;
                r.drift = frozen_drift ? bb : 0.0;
                out.sigma_at_freeze[e][path] = sig_abs;
            }
            if (k >= r.step) {
                r.z = r.z + r.coef * dW;
                if (frozen_drift)
                    r.z = r.z + r.drift * h;
            }
        }
        double xn = x + s * dW;
        xn = xn + bb * h;
        check_finite(xn, path, k);
        after(k, x, xn);
        x = xn;
        sup2 = std::max(sup2, x * x);
        for (std::size_t c = 0; c < L.checkpoint_step.size(); ++c)
            if (L.checkpoint_step[c] == k + 1)
                out.checkpoints[c][path] = x;
    }
    out.terminal_x[path] = x;
    out.sup_x2[path] = sup2;
    for (std::size_t e = 0; e < n_eps; ++e)
        out.z_eps[e][path] = rec[e].z;
}

} // namespace detail

/// Euler scheme for dX = sigma(t,X) dB + b(t,X) dt, coupled on `eps`.
/// Z_eps carries no drift beyond the freeze time.
inline CoupledEnsemble couple_one_step(const BrownianSdeSpec& spec, std::span<const double> eps, const SimOptions& o,
                                       std::span<const double> checkpoint_times = {})
{
    auto L = detail::make_layout(spec.horizon, o.h, eps, checkpoint_times);
    auto out = detail::make_ensemble(o, eps, checkpoint_times);
    const CompiledExpr sig(spec.sigma.expr, {"t", "x"});
    const CompiledExpr drift(spec.b.expr, {"t", "x"});
    const double sqh = std::sqrt(o.h);
    parallel_for(o.n_paths, o.workers, [&](std::size_t p) {
        RngStream drive = path_stream(o.seed, p, Channel::Drive);
        std::vector<detail::FreezeRecord> rec;
        detail::run_path(
            L, spec.x0, o.h, p, false, out,
            [&](std::size_t, double t, double x) {
                double s = sig({t, x});
                return std::tuple{s, drift({t, x}), std::fabs(s)};
            },
            [&](std::size_t) { return sqh * drive.normal(); }, [](std::size_t, double, double) {}, rec);
        out.sigma_at_terminal[p] = std::fabs(sig({spec.horizon, out.terminal_x[p]}));
    });
    return out;
}

inline CoupledEnsemble simulate_brownian(const BrownianSdeSpec& spec, const SimOptions& o,
                                         std::span<const double> checkpoint_times = {})
{
    return couple_one_step(spec, {}, o, checkpoint_times);
}

namespace detail {

inline std::vector<std::string> aggregate_slots(std::size_t k)
{
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= k; ++i)
        v.push_back("a" + std::to_string(i));
    return v;
}

} // namespace detail

/// Euler scheme for dX = sigma(X) kappa(t, aggregates, H) dB + b(t, X, aggregates, H) dt.
/// kappa >= kappa0 is audited at every step; Z_eps freezes sigma*kappa at
/// 1-eps and omits the drift.
inline CoupledEnsemble couple_one_step(const PathDepSdeSpec& spec, std::span<const double> eps, const SimOptions& o,
                                       std::span<const double> checkpoint_times = {})
{
    if (spec.aggregates.size() > 9)
        throw std::invalid_argument("at most 9 path aggregates");
    if (!(spec.kappa0 > 0.0))
        throw std::invalid_argument("kappa0 must be > 0");
    if (spec.aux.kind == AuxProcessSpec::Kind::PathFunctional && spec.aux.aggregate >= spec.aggregates.size())
        throw std::invalid_argument("aux aggregate index out of range");
    auto L = detail::make_layout(spec.horizon, o.h, eps, checkpoint_times);
    auto out = detail::make_ensemble(o, eps, checkpoint_times);
    const std::size_t K = spec.aggregates.size();
    std::vector<std::string> kslots = {"t", "h"}, bslots = {"t", "x", "h"};
    for (const auto& a : detail::aggregate_slots(K)) {
        kslots.push_back(a);
        bslots.push_back(a);
    }
    const CompiledExpr sig(spec.sigma.expr, {"x"});
    const CompiledExpr kap(spec.kappa.expr, kslots);
    const CompiledExpr drift(spec.b.expr, bslots);
    const double sqh = std::sqrt(o.h);
    const double ou_decay = std::exp(-spec.aux.rate * o.h);
    const double ou_sd = spec.aux.rate > 0.0
                             ? spec.aux.vol * std::sqrt((1.0 - std::exp(-2.0 * spec.aux.rate * o.h)) / (2.0 * spec.aux.rate))
                             : spec.aux.vol * sqh;

    parallel_for(o.n_paths, o.workers, [&](std::size_t p) {
        RngStream drive = path_stream(o.seed, p, Channel::Drive);
        RngStream auxs = path_stream(o.seed, p, Channel::Aux);
        std::vector<AggregateState> aggs;
        for (const auto& a : spec.aggregates) {
            aggs.emplace_back(a);
            aggs.back().start(spec.x0);
        }
        double H = spec.aux.h0;
        auto aux_value = [&] {
            return spec.aux.kind == AuxProcessSpec::Kind::PathFunctional ? aggs[spec.aux.aggregate].value() : H;
        };
        std::vector<double> kv(kslots.size()), bv(bslots.size());
        std::vector<detail::FreezeRecord> rec;
        detail::run_path(
            L, spec.x0, o.h, p, false, out,
            [&](std::size_t k, double t, double x) {
                double hv = aux_value();
                kv[0] = t;
                kv[1] = hv;
                bv[0] = t;
                bv[1] = x;
                bv[2] = hv;
                for (std::size_t i = 0; i < K; ++i) {
                    kv[2 + i] = aggs[i].value();
                    bv[3 + i] = aggs[i].value();
                }
                double kappa = kap(kv);
                if (!(kappa >= spec.kappa0)) {
                    std::ostringstream os;
                    os << "kappa floor violated at step " << k << " (t=" << t << ", path " << p << "): kappa=" << kappa
                       << " < kappa0=" << spec.kappa0;
                    throw std::runtime_error(os.str());
                }
                double s = sig({x});
                return std::tuple{s * kappa, drift(bv), std::fabs(s)};
            },
            [&](std::size_t) { return sqh * drive.normal(); },
            [&](std::size_t, double xo, double xn) {
                for (auto& a : aggs)
                    a.step(xo, xn, o.h);
                if (spec.aux.kind == AuxProcessSpec::Kind::OrnsteinUhlenbeck)
                    H = H * ou_decay + ou_sd * auxs.normal();
            },
            rec);
        out.sigma_at_terminal[p] = std::fabs(sig({out.terminal_x[p]}));
    });
    return out;
}

inline CoupledEnsemble simulate_pathdep(const PathDepSdeSpec& spec, const SimOptions& o,
                                        std::span<const double> checkpoint_times = {})
{
    return couple_one_step(spec, {}, o, checkpoint_times);
}

/// Euler scheme for dX = sigma(t,X-) dL + b(t,X) dt with truncated compensated
/// jumps. Z_eps includes the frozen drift b(X_{1-eps}).
inline CoupledEnsemble couple_one_step(const LevySdeSpec& spec, const TruncationPlan& plan,
                                       std::span<const double> eps, const SimOptions& o,
                                       std::span<const double> checkpoint_times = {})
{
    auto L = detail::make_layout(spec.horizon, o.h, eps, checkpoint_times);
    auto out = detail::make_ensemble(o, eps, checkpoint_times);
    const CompiledExpr sig(spec.sigma.expr, {"t", "x"});
    const CompiledExpr drift(spec.b.expr, {"t", "x"});
    const LevyIncrementSampler sampler(spec.nu, plan);
    const std::vector<double> dt(L.n_steps, o.h);
    parallel_for(o.n_paths, o.workers, [&](std::size_t p) {
        RngStream jumps = path_stream(o.seed, p, Channel::Jumps);
        RngStream resid = path_stream(o.seed, p, Channel::Residual);
        std::vector<double> dL(L.n_steps);
        sampler.fill(jumps, &resid, dt, dL);
        std::vector<detail::FreezeRecord> rec;
        detail::run_path(
            L, spec.x0, o.h, p, true, out,
            [&](std::size_t, double t, double x) {
                double s = sig({t, x});
                return std::tuple{s, drift({t, x}), std::fabs(s)};
            },
            [&](std::size_t k) { return dL[k]; }, [](std::size_t, double, double) {}, rec);
        out.sigma_at_terminal[p] = std::fabs(sig({spec.horizon, out.terminal_x[p]}));
    });
    return out;
}

inline CoupledEnsemble simulate_levy(const LevySdeSpec& spec, const TruncationPlan& plan, const SimOptions& o,
                                     std::span<const double> checkpoint_times = {})
{
    return couple_one_step(spec, plan, {}, o, checkpoint_times);
}

struct ExponentFit {
    std::vector<std::pair<double, double>> points; ///< (log scale, log moment)
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool zero_defect = false;

    double c_hat() const { return std::exp(intercept); }
};

/// Least-squares fit of log mean(values[j]) against log scale[j], with a
/// path-resampling bootstrap CI (B resamples, 95%). `values[j][i]` is the
/// per-path contribution for scale j.
inline ExponentFit fit_moment_scaling(std::span<const double> scale, const std::vector<std::vector<double>>& values,
                                      std::uint64_t seed, std::size_t n_boot = 200)
{
    if (scale.size() != values.size() || scale.size() < 2)
        throw std::invalid_argument("fit_moment_scaling: need matching scales and samples");
    ExponentFit f;
    std::vector<double> lx, ly;
    bool any_zero = false;
    for (std::size_t j = 0; j < scale.size(); ++j) {
        double m = mean(values[j]);
        if (!(m > 0.0)) {
            any_zero = true;
            continue;
        }
        lx.push_back(std::log(scale[j]));
        ly.push_back(std::log(m));
        f.points.emplace_back(lx.back(), ly.back());
    }
    if (any_zero) {
        f.zero_defect = true;
        return f;
    }
    auto line = fit_line(lx, ly);
    f.slope = line.slope;
    f.intercept = line.intercept;
    f.r2 = line.r2;
    const std::size_t n = values[0].size();
    RngStream rs(seed, 0xB0075ull);
    std::vector<double> slopes;
    std::vector<double> by(scale.size());
    std::vector<std::size_t> idx(n);
    for (std::size_t b = 0; b < n_boot; ++b) {
        for (auto& i : idx)
            i = static_cast<std::size_t>(rs.uniform() * double(n));
        bool ok = true;
        for (std::size_t j = 0; j < scale.size(); ++j) {
            double s = 0.0;
            for (std::size_t i : idx)
                s += values[j][i];
            if (!(s > 0.0)) {
                ok = false;
                break;
            }
            by[j] = std::log(s / double(n));
        }
        if (ok)
            slopes.push_back(fit_line(lx, by).slope);
    }
    if (!slopes.empty()) {
        f.ci_lo = quantile(slopes, 0.025);
        f.ci_hi = quantile(slopes, 0.975);
    }
    return f;
}

/// Slope of log E|X_1 - Z_eps|^p against log eps.
inline ExponentFit fit_one_step_exponent(const CoupledEnsemble& ens, double moment_order = 2.0,
                                         std::size_t n_boot = 200)
{
    if (ens.eps.size() < 5)
        throw std::invalid_argument("fit_one_step_exponent: need >= 5 eps values");
    auto [lo, hi] = std::minmax_element(ens.eps.begin(), ens.eps.end());
    if (*hi / *lo < 8.0 * (1 - 1e-12))
        throw std::invalid_argument("fit_one_step_exponent: eps must span >= 3 octaves");
    std::vector<std::vector<double>> v(ens.eps.size(), std::vector<double>(ens.n_paths));
    for (std::size_t j = 0; j < ens.eps.size(); ++j)
        for (std::size_t i = 0; i < ens.n_paths; ++i) {
            double d = std::fabs(ens.terminal_x[i] - ens.z_eps[j][i]);
            v[j][i] = moment_order == 2.0 ? d * d : std::pow(d, moment_order);
        }
    return fit_moment_scaling(ens.eps, v, ens.master_seed, n_boot);
}

/// Fits log E|X_t - X_s|^p against log(t - s) from the ensemble checkpoints.
inline ExponentFit fit_modulus(const CoupledEnsemble& ens, std::span<const std::pair<double, double>> pairs,
                               double p = 2.0, std::size_t n_boot = 200)
{
    auto find = [&](double t) {
        for (std::size_t c = 0; c < ens.checkpoint_times.size(); ++c)
            if (std::fabs(ens.checkpoint_times[c] - t) <= 1e-12)
                return c;
        throw std::invalid_argument("no checkpoint at t=" + std::to_string(t));
    };
    std::vector<double> sep;
    std::vector<std::vector<double>> v;
    for (const auto& [s, t] : pairs) {
        std::size_t a = find(s), b = find(t);
        sep.push_back(t - s);
        std::vector<double> col(ens.n_paths);
        for (std::size_t i = 0; i < ens.n_paths; ++i) {
            double d = std::fabs(ens.checkpoints[b][i] - ens.checkpoints[a][i]);
            col[i] = p == 2.0 ? d * d : std::pow(d, p);
        }
        v.push_back(std::move(col));
    }
    return fit_moment_scaling(sep, v, ens.master_seed, n_boot);
}

/// Pairs (s, s + 2^-k) for k = k_lo..k_hi.
inline std::vector<std::pair<double, double>> dyadic_pairs(double s, int k_lo, int k_hi)
{
    std::vector<std::pair<double, double>> v;
    for (int k = k_lo; k <= k_hi; ++k)
        v.emplace_back(s, s + std::ldexp(1.0, -k));
    return v;
}

inline std::vector<double> pair_times(std::span<const std::pair<double, double>> pairs)
{
    std::vector<double> t;
    for (const auto& [a, b] : pairs) {
        t.push_back(a);
        t.push_back(b);
    }
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

/// Simulates with checkpoints at every pair time and fits the moment modulus.
template <class Spec>
ExponentFit moment_modulus_fit(const Spec& spec, std::span<const std::pair<double, double>> pairs,
                               const SimOptions& o, double p = 2.0)
{
    auto times = pair_times(pairs);
    auto ens = simulate_brownian(spec, o, times);
    return fit_modulus(ens, pairs, p);
}

inline ExponentFit moment_modulus_fit(const LevySdeSpec& spec, const TruncationPlan& plan,
                                      std::span<const std::pair<double, double>> pairs, const SimOptions& o,
                                      double p)
{
    auto times = pair_times(pairs);
    auto ens = simulate_levy(spec, plan, o, times);
    return fit_modulus(ens, pairs, p);
}

struct CounterexampleResult {
    double p_atom_hat = 0.0;
    double p_atom_stderr = 0.0;
    double mean_hit_time = 0.0;
    double bound = 0.0;        ///< x0^{1-alpha} / (1-alpha)
    double barrier_bias = 0.0; ///< barrier^{1-alpha} / (1-alpha), drift-only time from barrier to 0
    std::vector<double> terminal_x;
    std::vector<double> hit_time; ///< +inf when not absorbed by t
};

/// dX = X dB - sign(X)|X|^alpha dt with absorption once X <= barrier.
inline CounterexampleResult run_counterexample(double x0, double alpha, double t, const SimOptions& o,
                                               double barrier = 1e-6)
{
    if (!(x0 > 0.0))
        throw std::invalid_argument("counterexample: x0 must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("counterexample: alpha must lie in (0,1)");
    if (!(t >= 0.0))
        throw std::invalid_argument("counterexample: t must be >= 0");
    CounterexampleResult r;
    r.bound = std::pow(x0, 1.0 - alpha) / (1.0 - alpha);
    r.barrier_bias = std::pow(barrier, 1.0 - alpha) / (1.0 - alpha);
    r.terminal_x.assign(o.n_paths, x0);
    r.hit_time.assign(o.n_paths, std::numeric_limits<double>::infinity());
    if (t == 0.0)
        return r;
    const std::size_t n = detail::steps_for(t, o.h, "horizon");
    const double sqh = std::sqrt(o.h);
    parallel_for(o.n_paths, o.workers, [&](std::size_t p) {
        RngStream drive = path_stream(o.seed, p, Channel::Drive);
        double x = x0;
        for (std::size_t k = 0; k < n; ++k) {
            double b = -(x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) * std::pow(std::fabs(x), alpha);
            x = x + x * sqh * drive.normal() + b * o.h;
            if (x <= barrier) {
                x = 0.0;
                r.hit_time[p] = double(k + 1) * o.h;
                break;
            }
        }
        r.terminal_x[p] = x;
    });
    std::vector<double> absorbed(o.n_paths), hits;
    for (std::size_t p = 0; p < o.n_paths; ++p) {
        absorbed[p] = std::isfinite(r.hit_time[p]) ? 1.0 : 0.0;
        if (absorbed[p] > 0)
            hits.push_back(r.hit_time[p]);
    }
    r.p_atom_hat = mean(absorbed);
    r.p_atom_stderr = std::sqrt(r.p_atom_hat * (1 - r.p_atom_hat) / double(o.n_paths));
    r.mean_hit_time = hits.empty() ? 0.0 : mean(hits);
    return r;
}

} // namespace acert
