#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "acert/sde.hpp"

using namespace acert;

namespace {

BrownianSdeSpec brownian(const char* sigma, const char* b, double x0 = 0.0)
{
    BrownianSdeSpec s;
    s.sigma = coeff(sigma);
    s.b = coeff(b);
    s.x0 = x0;
    return s;
}

SimOptions opts(std::size_t n, double h, std::uint64_t seed = 1)
{
    SimOptions o;
    o.n_paths = n;
    o.h = h;
    o.seed = seed;
    o.workers = default_workers();
    return o;
}

std::vector<double> dyadic_eps(int k_lo, int k_hi)
{
    std::vector<double> v;
    for (int k = k_lo; k <= k_hi; ++k)
        v.push_back(std::ldexp(1.0, -k));
    return v;
}

/// Continuum value of E[(X_1 - Z_eps)^2] for dX = sigma(X) dB, computed
/// without simulation. With tau = 1 - t the defect is the time integral of
/// E[(sigma(X_t) - sigma(X_{1-eps}))^2], which conditionally on X_{1-eps} = y
/// equals u2(tau, y) - 2 sigma(y) u1(tau, y) + sigma(y)^2 where u_i solve the
/// backward equation u_tau = sigma^2/2 u_yy started from sigma^i. The law of
/// X_{1-eps} comes from the forward equation. Explicit finite differences.
std::vector<double> pde_one_step_defect(double theta, double x0, std::span<const double> eps)
{
    const double L = 6.0, dx = 0.01;
    const int n = int(std::lround(2 * L / dx)) + 1;
    std::vector<double> x(n), sig(n), a(n);
    double amax = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = -L + i * dx;
        sig[i] = std::pow(std::fabs(x[i]), theta) + 0.1;
        a[i] = 0.5 * sig[i] * sig[i];
        amax = std::max(amax, a[i]);
    }
    const double dt_max = 0.4 * dx * dx / amax;

    std::vector<double> p(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
        mass += p[i] = std::exp(-(x[i] - x0) * (x[i] - x0) / 2e-4);
    for (auto& v : p)
        v /= mass * dx;
    auto forward = [&](std::vector<double>& q, double T) {
        if (T <= 0)
            return;
        int steps = int(std::ceil(T / dt_max));
        double d = T / steps;
        std::vector<double> f(n), nq(n);
        for (int s = 0; s < steps; ++s) {
            for (int i = 0; i < n; ++i)
                f[i] = a[i] * q[i];
            for (int i = 1; i + 1 < n; ++i)
                nq[i] = q[i] + d * (f[i + 1] - 2 * f[i] + f[i - 1]) / (dx * dx);
            nq[0] = q[0];
            nq[n - 1] = q[n - 1];
            q.swap(nq);
        }
    };

    const double tmax = *std::max_element(eps.begin(), eps.end());
    const int nrec = 512;
    const int per = int(std::ceil(tmax / nrec / dt_max));
    const double d = tmax / nrec / per;
    auto backward = [&](std::vector<double> u) {
        std::vector<std::vector<double>> out{u};
        std::vector<double> lap(n);
        for (int j = 0; j < nrec; ++j) {
            for (int s = 0; s < per; ++s) {
                for (int i = 1; i + 1 < n; ++i)
                    lap[i] = (u[i + 1] - 2 * u[i] + u[i - 1]) / (dx * dx);
                lap[0] = lap[1];
                lap[n - 1] = lap[n - 2];
                for (int i = 0; i < n; ++i)
                    u[i] += d * a[i] * lap[i];
            }
            out.push_back(u);
        }
        return out;
    };
    std::vector<double> sig2(n);
    for (int i = 0; i < n; ++i)
        sig2[i] = sig[i] * sig[i];
    auto u1 = backward(sig);
    auto u2 = backward(sig2);

    std::vector<std::size_t> order(eps.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        order[j] = j;
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return eps[l] > eps[r]; });
    std::vector<double> out(eps.size());
    double t = 0.0;
    for (std::size_t j : order) {
        forward(p, 1.0 - eps[j] - t);
        t = 1.0 - eps[j];
        int m = int(std::lround(eps[j] / tmax * nrec));
        std::vector<double> g(m + 1);
        for (int r = 0; r <= m; ++r) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += (u2[r][i] - 2 * sig[i] * u1[r][i] + sig2[i]) * p[i];
            g[r] = s * dx;
        }
        double I = 0.0;
        for (int r = 0; r < m; ++r)
            I += 0.5 * (g[r] + g[r + 1]) * (tmax / nrec);
        out[j] = I;
    }
    return out;
}

double slope_of(std::span<const double> eps, std::span<const double> m)
{
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < eps.size(); ++j) {
        lx.push_back(std::log(eps[j]));
        ly.push_back(std::log(m[j]));
    }
    return fit_line(lx, ly).slope;
}

} // namespace

TEST(SimulateBrownian, StandardGaussianTerminalLaw)
{
    const std::size_t n = 1000000;
    auto e = simulate_brownian(brownian("1", "0"), opts(n, 0.1, 3));
    EXPECT_NEAR(mean(e.terminal_x), 0.0, 4.0 / std::sqrt(double(n)));
    double v = variance(e.terminal_x);
    EXPECT_GE(v, 0.99);
    EXPECT_LE(v, 1.01);
}

TEST(SimulateBrownian, DeterministicDriftLandsOnOne)
{
    auto e = simulate_brownian(brownian("0", "1"), opts(100, std::ldexp(1.0, -10)));
    for (double x : e.terminal_x)
        EXPECT_EQ(x, 1.0);
}

TEST(SimulateBrownian, GeometricMoments)
{
    const std::size_t n = 100000;
    const double h = 1e-3;
    auto e = simulate_brownian(brownian("x", "0", 1.0), opts(n, h, 5));
    double m = mean(e.terminal_x), v = variance(e.terminal_x);
    EXPECT_NEAR(m, 1.0, 4.0 * std::sqrt(v / double(n)));
    // Euler chain: X_{k+1} = X_k (1 + dB_k), so E X_N^2 = (1 + h)^N.
    double chain = std::pow(1.0 + h, 1000) - 1.0;
    EXPECT_NEAR(v / chain, 1.0, 0.05);
    EXPECT_NEAR(v / (std::exp(1.0) - 1.0), 1.0, 0.05);
}

TEST(SimulateBrownian, SupMomentAndModulus)
{
    auto spec = brownian("abs(x)^0.75 + 0.1", "-x");
    auto pairs = dyadic_pairs(0.25, 2, 7);
    auto ens = simulate_brownian(spec, opts(20000, std::ldexp(1.0, -10), 9), pair_times(pairs));
    EXPECT_TRUE(std::isfinite(ens.mean_sup_x2()));
    EXPECT_LT(ens.mean_sup_x2(), 10.0);
    auto f = fit_modulus(ens, pairs);
    EXPECT_GE(f.slope, 0.85);
}

TEST(SimulateBrownian, NonFiniteStateIsReported)
{
    try {
        simulate_brownian(brownian("0", "1e308", 1e308), opts(2, 0.5));
        FAIL();
    } catch (const std::exception& err) {
        EXPECT_NE(std::string(err.what()).find("path 0"), std::string::npos) << err.what();
    }
}

TEST(SimulatePathdep, ReducesToBrownianBitForBit)
{
    auto b = brownian("abs(x)^0.75 + 0.1", "0");
    PathDepSdeSpec p;
    p.sigma = coeff("abs(x)^0.75 + 0.1");
    p.kappa = coeff("1");
    p.b = coeff("0");
    p.aux.kind = AuxProcessSpec::Kind::Constant;
    p.aux.h0 = 0.3;
    auto eps = dyadic_eps(3, 7);
    auto o = opts(500, std::ldexp(1.0, -8), 17);
    auto eb = couple_one_step(b, eps, o);
    auto ep = couple_one_step(p, eps, o);
    EXPECT_EQ(eb.terminal_x, ep.terminal_x);
    EXPECT_EQ(eb.z_eps, ep.z_eps);
}

TEST(SimulatePathdep, OuKappaVarianceAgainstItoIsometry)
{
    PathDepSdeSpec p;
    p.sigma = coeff("1");
    p.kappa = coeff("1 + h^2");
    p.b = coeff("0");
    p.aux.kind = AuxProcessSpec::Kind::OrnsteinUhlenbeck;
    p.aux.rate = 1.0;
    p.aux.vol = 1.0;
    p.aux.h0 = 0.0;
    const std::size_t n = 100000;
    auto e = simulate_pathdep(p, opts(n, std::ldexp(1.0, -8), 23));
    double v = variance(e.terminal_x);
    EXPECT_GE(v, 1.0);
    // E int kappa^2 ds with H_s ~ N(0, v(s)), v(s) = (1 - e^{-2s})/2:
    // E(1 + H^2)^2 = 1 + 2v + 3v^2.
    double oracle = adaptive_gk(
        [](double s) {
            double vs = 0.5 * (1 - std::exp(-2 * s));
            return 1 + 2 * vs + 3 * vs * vs;
        },
        0.0, 1.0);
    double se = std::sqrt(2.0 / double(n)) * oracle * 1.5;
    EXPECT_NEAR(v, oracle, 4 * se + 0.01);
}

TEST(SimulatePathdep, KappaFloorViolationNamesStep)
{
    PathDepSdeSpec p;
    p.sigma = coeff("1");
    p.kappa = coeff("1");
    p.b = coeff("0");
    p.kappa0 = 2.0;
    try {
        simulate_pathdep(p, opts(4, 0.01));
        FAIL();
    } catch (const std::runtime_error& err) {
        EXPECT_NE(std::string(err.what()).find("step 0"), std::string::npos) << err.what();
    }
}

TEST(SimulatePathdep, AggregatesFeedTheDrift)
{
    // b = a1 with a1 the running integral of 1, i.e. b(t) = t; sigma 0.
    PathDepSdeSpec p;
    p.sigma = coeff("0");
    p.kappa = coeff("1");
    p.b = coeff("a1");
    p.aggregates = {{AggregateKind::RunningIntegral, parse_expr("1")}};
    const double h = std::ldexp(1.0, -10);
    auto e = simulate_pathdep(p, opts(3, h));
    // Left-point sum of k h over N steps: h^2 N (N - 1) / 2.
    const double N = 1024;
    for (double x : e.terminal_x)
        EXPECT_NEAR(x, h * h * N * (N - 1) / 2, 1e-12);
}

TEST(SimulateLevy, TwoAtomsCharacteristicFunction)
{
    LevySdeSpec s;
    s.sigma = coeff("1");
    s.b = coeff("0");
    s.nu = measures::two_atoms();
    auto plan = plan_truncation(s.nu, 1e-3);
    const std::size_t n = 100000;
    auto e = simulate_levy(s, plan, opts(n, std::ldexp(1.0, -6), 29));
    std::complex<double> phi = 0.0;
    double re2 = 0.0;
    for (double x : e.terminal_x) {
        phi += std::polar(1.0, M_PI * x);
        re2 += std::cos(M_PI * x) * std::cos(M_PI * x);
    }
    phi /= double(n);
    double se = std::sqrt((re2 / double(n) - phi.real() * phi.real()) / double(n));
    EXPECT_NEAR(phi.real(), std::exp(-4.0), 3 * se + 0.002);
    EXPECT_NEAR(phi.imag(), 0.0, 0.01);
}

TEST(SimulateLevy, NoNoiseIsExact)
{
    LevySdeSpec s;
    s.sigma = coeff("0");
    s.b = coeff("1");
    s.nu = measures::two_atoms();
    s.x0 = 0.25;
    auto e = simulate_levy(s, plan_truncation(s.nu, 1e-3), opts(50, std::ldexp(1.0, -7)));
    for (double x : e.terminal_x)
        EXPECT_EQ(x, 1.25);
}

TEST(SimulateLevy, PowerDensityVariance)
{
    LevySdeSpec s;
    s.sigma = coeff("1");
    s.b = coeff("0");
    s.nu = measures::power_density(1.0);
    auto plan = plan_truncation(s.nu, std::ldexp(1.0, -10));
    EXPECT_NEAR(plan.residual_variance, std::ldexp(1.0, -10), 1e-12);
    auto e = simulate_levy(s, plan, opts(20000, std::ldexp(1.0, -5), 31));
    double target = 1.0 - plan.residual_variance;
    EXPECT_NEAR(variance(e.terminal_x) / target, 1.0, 0.05);
}

TEST(Coupling, ConstantCoefficientsGiveZeroDefect)
{
    auto eps = dyadic_eps(2, 8);
    auto e = couple_one_step(brownian("1", "0"), eps, opts(1000, std::ldexp(1.0, -9)));
    for (const auto& z : e.z_eps)
        EXPECT_EQ(z, e.terminal_x);
    auto f = fit_one_step_exponent(e);
    EXPECT_TRUE(f.zero_defect);
}

TEST(Coupling, MisalignedEpsIsRejected)
{
    std::vector<double> eps = {0.3};
    EXPECT_THROW(couple_one_step(brownian("1", "0"), eps, opts(10, 0.25)), std::invalid_argument);
}

TEST(Coupling, WorkerCountDoesNotChangeResults)
{
    auto spec = brownian("abs(x)^0.6 + 0.1", "sin(x)");
    auto eps = dyadic_eps(3, 6);
    auto o1 = opts(300, std::ldexp(1.0, -7), 41);
    o1.workers = 1;
    auto o3 = o1;
    o3.workers = 3;
    auto a = couple_one_step(spec, eps, o1);
    auto b = couple_one_step(spec, eps, o3);
    EXPECT_EQ(a.terminal_x, b.terminal_x);
    EXPECT_EQ(a.z_eps, b.z_eps);
    EXPECT_EQ(a.sigma_at_freeze, b.sigma_at_freeze);
}

TEST(PdeOracle, DefectIncreasesWithEps)
{
    auto eps = dyadic_eps(3, 6);
    auto d = pde_one_step_defect(0.75, 0.0, eps);
    for (std::size_t j = 1; j < d.size(); ++j)
        EXPECT_LT(d[j], d[j - 1]);
}

class OneStepSlope : public ::testing::TestWithParam<double> {};

TEST_P(OneStepSlope, MatchesContinuumOracle)
{
    const double theta = GetParam();
    auto eps = dyadic_eps(3, 9);
    auto oracle = pde_one_step_defect(theta, 0.0, eps);
    double oracle_slope = slope_of(eps, oracle);
    BrownianSdeSpec spec;
    spec.sigma = coeff("abs(x)^" + std::to_string(theta) + " + 0.1", theta);
    spec.b = coeff("0");
    auto ens = couple_one_step(spec, eps, opts(10000, std::ldexp(1.0, -12), 7));
    auto fit = fit_one_step_exponent(ens);
    EXPECT_GT(fit.r2, 0.99);
    EXPECT_NEAR(fit.slope, oracle_slope, 0.1) << "oracle " << oracle_slope;
    // The bound eps^{1+theta} dominates the observed decay.
    EXPECT_GE(fit.slope, 1.0 + theta - 0.05);
    // Pointwise agreement where eps spans at least 64 Euler steps; the
    // finite-difference oracle and MC differ by up to ~15% at theta = 0.6.
    for (std::size_t j = 0; j + 3 < eps.size(); ++j)
        EXPECT_NEAR(fit.points[j].second, std::log(oracle[j]), 0.2) << "eps 2^-" << j + 3;
    // Monotone defect across the dyadic grid.
    for (std::size_t j = 1; j < fit.points.size(); ++j)
        EXPECT_LT(fit.points[j].second, fit.points[j - 1].second);
}

INSTANTIATE_TEST_SUITE_P(Theta, OneStepSlope, ::testing::Values(0.6, 0.75));

TEST(Coupling, LevyTwoAtomsSlope)
{
    LevySdeSpec s;
    s.sigma = coeff("1.5 + cos(x)", 1.0);
    s.b = coeff("-0.5 * x");
    s.alpha = 1.0;
    s.nu = measures::two_atoms();
    auto plan = plan_truncation(s.nu, 1e-3);
    auto eps = dyadic_eps(3, 8);
    auto ens = couple_one_step(s, plan, eps, opts(20000, std::ldexp(1.0, -10), 43));
    auto f = fit_one_step_exponent(ens, 2.0);
    EXPECT_GE(f.slope, 1.8);
}

TEST(FitExponent, SyntheticPowerLaw)
{
    auto eps = dyadic_eps(2, 8);
    std::vector<std::vector<double>> v;
    for (double e : eps)
        v.push_back(std::vector<double>(10, std::pow(e, 1.5)));
    auto f = fit_moment_scaling(eps, v, 1);
    EXPECT_NEAR(f.slope, 1.5, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_NEAR(f.ci_lo, 1.5, 1e-12);
    EXPECT_NEAR(f.ci_hi, 1.5, 1e-12);
    EXPECT_FALSE(f.zero_defect);
}

TEST(FitExponent, GridRequirements)
{
    auto spec = brownian("x + 1", "0");
    auto o = opts(10, 1.0 / 64);
    EXPECT_THROW(fit_one_step_exponent(couple_one_step(spec, dyadic_eps(2, 5), o)), std::invalid_argument);
    std::vector<double> narrow = {0.25, 0.25 - 1.0 / 64, 0.25 - 2.0 / 64, 0.25 - 3.0 / 64, 0.25 - 4.0 / 64};
    EXPECT_THROW(fit_one_step_exponent(couple_one_step(spec, narrow, o)), std::invalid_argument);
}

TEST(Modulus, BrownianAndDrift)
{
    auto pairs = dyadic_pairs(0.25, 2, 7);
    auto o = opts(20000, std::ldexp(1.0, -10), 47);
    auto f1 = moment_modulus_fit(brownian("1", "0"), pairs, o);
    EXPECT_NEAR(f1.slope, 1.0, 0.1);
    auto f2 = moment_modulus_fit(brownian("0", "1"), pairs, o);
    EXPECT_NEAR(f2.slope, 2.0, 0.1);
}

TEST(Modulus, LevyTwoAtoms)
{
    LevySdeSpec s;
    s.sigma = coeff("1");
    s.b = coeff("0");
    s.nu = measures::two_atoms();
    auto pairs = dyadic_pairs(0.25, 2, 7);
    auto f = moment_modulus_fit(s, plan_truncation(s.nu, 1e-3), pairs, opts(20000, std::ldexp(1.0, -10), 53), 2.0);
    EXPECT_NEAR(f.slope, 1.0, 0.15);
}

TEST(Counterexample, BoundAndInitialCondition)
{
    auto r0 = run_counterexample(1.0, 0.5, 0.0, opts(100, 1e-3));
    EXPECT_DOUBLE_EQ(r0.bound, 2.0);
    EXPECT_EQ(r0.p_atom_hat, 0.0);
    EXPECT_THROW(run_counterexample(1.0, 1.5, 1.0, opts(10, 1e-3)), std::invalid_argument);
}

TEST(Counterexample, MostPathsAreAbsorbed)
{
    auto r = run_counterexample(1.0, 0.5, 10.0, opts(10000, 1e-3, 59));
    EXPECT_GE(r.p_atom_hat, 0.9);
    // E[tau; tau <= t] <= E[tau] <= bound, so the conditional mean is at most bound / P.
    EXPECT_LE(r.mean_hit_time, r.bound / r.p_atom_hat + 0.1);
    for (std::size_t p = 0; p < r.terminal_x.size(); ++p)
        if (std::isfinite(r.hit_time[p]))
            EXPECT_EQ(r.terminal_x[p], 0.0);
}
