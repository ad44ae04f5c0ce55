#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "acert/fourier.hpp"
#include "acert/noise.hpp"

using namespace acert;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

/// Midpoint quantiles of N(0,1): a sample whose empirical law is the normal
/// law up to O(1/n), free of Monte Carlo noise.
std::vector<double> normal_quantiles(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = detail::normal_quantile((double(i) + 0.5) / double(n));
    return v;
}

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed)
{
    RngStream s(seed, 0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = s.normal();
    return v;
}

double normal_pdf(double x, double var)
{
    return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
}

} // namespace

TEST(Localization, WeightShape)
{
    EXPECT_EQ(localization_weight(0.1, 0.0), 0.0);
    EXPECT_EQ(localization_weight(0.1, 0.1), 0.0);
    EXPECT_NEAR(localization_weight(0.1, 0.35), 0.25, 1e-15);
    EXPECT_EQ(localization_weight(0.1, 5.0), 1.0);
    for (double r = 0; r < 3; r += 0.01)
        for (double s = 0; s < 3; s += 0.37)
            EXPECT_LE(std::fabs(localization_weight(0.2, r) - localization_weight(0.2, s)), std::fabs(r - s) + 1e-15);
    EXPECT_THROW(localization_weight(0.0, 1.0), std::invalid_argument);
}

TEST(CharFn, GaussianWithHalfWeight)
{
    auto x = normal_draws(100000, 3);
    std::vector<double> sig(x.size(), 0.55); // weight f_0.05(0.55) = 0.5
    std::vector<double> xi{-1.0, 0.0, 1.0};
    auto est = estimate_charfn(x, sig, 0.05, xi);
    EXPECT_EQ(est.estimate[1].real(), est.weight_mass);
    EXPECT_EQ(est.estimate[1].imag(), 0.0);
    EXPECT_NEAR(est.weight_mass, 0.5, 1e-12);
    EXPECT_NEAR(est.estimate[2].real(), 0.5 * std::exp(-0.5), 4 * est.stderr[2]);
    EXPECT_NEAR(est.estimate[2].real(), 0.30327, 5e-3);
    EXPECT_NEAR(est.estimate[0].real(), est.estimate[2].real(), 1e-15);
    EXPECT_NEAR(est.estimate[0].imag(), -est.estimate[2].imag(), 1e-15);
    EXPECT_FALSE(est.degenerate);
}

TEST(CharFn, WorkerCountDoesNotChangeBits)
{
    auto x = normal_draws(5000, 4);
    std::vector<double> sig(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        sig[i] = std::fabs(x[i]);
    auto grid = linspace(0.0, 50.0, 101);
    auto a = estimate_charfn(x, sig, 0.3, grid, 1);
    auto b = estimate_charfn(x, sig, 0.3, grid, 4);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.stderr, b.stderr);
    EXPECT_EQ(a.modulus_sq_unbiased, b.modulus_sq_unbiased);
}

TEST(CharFn, DegenerateAndValidation)
{
    std::vector<double> x(200, 1.0), sig(200, 0.01), xi{0.0, 1.0};
    auto est = estimate_charfn(x, sig, 0.05, xi);
    EXPECT_TRUE(est.degenerate);
    EXPECT_EQ(est.weight_mass, 0.0);
    EXPECT_EQ(std::abs(est.estimate[1]), 0.0);
    std::vector<double> few(99, 0.0);
    EXPECT_THROW(estimate_charfn(few, few, 0.05, xi), std::invalid_argument);
    std::vector<double> shorter(150, 1.0);
    EXPECT_THROW(estimate_charfn(x, shorter, 0.05, xi), std::invalid_argument);
}

TEST(CharFn, PointMassHasNoVarianceCorrection)
{
    std::vector<double> x(500, 3.0), xi{0.5, 2.0, 10.0};
    auto est = estimate_charfn_unlocalized(x, xi);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        EXPECT_NEAR(est.modulus_sq_unbiased[i], 1.0, 1e-12);
        EXPECT_NEAR(est.stderr[i], 0.0, 1e-7);
    }
}

TEST(CharFn, UnbiasedModulusAcrossReplications)
{
    // N = 100 per replication makes the naive bias (1 - |phi|^2)/N visible.
    const std::vector<double> xi{0.5, 1.0, 2.0};
    const int reps = 200;
    std::vector<std::vector<double>> unb(xi.size()), naive(xi.size());
    for (int r = 0; r < reps; ++r) {
        auto x = normal_draws(100, 1000 + r);
        auto est = estimate_charfn_unlocalized(x, xi);
        for (std::size_t i = 0; i < xi.size(); ++i) {
            unb[i].push_back(est.modulus_sq_unbiased[i]);
            naive[i].push_back(std::norm(est.estimate[i]));
        }
    }
    for (std::size_t i = 0; i < xi.size(); ++i) {
        double truth = std::exp(-xi[i] * xi[i]);
        double se = std::sqrt(variance(unb[i]) / reps);
        EXPECT_LE(std::fabs(mean(unb[i]) - truth), 2 * se) << "xi=" << xi[i];
        double se_naive = std::sqrt(variance(naive[i]) / reps);
        if (xi[i] >= 1.0)
            EXPECT_GT(mean(naive[i]) - truth, 2 * se_naive) << "xi=" << xi[i];
    }
}

TEST(Bound, WorkedValue)
{
    BoundParams p;
    p.C = 1.0;
    p.theta = 1.0;
    auto b = theoretical_bound(Variant::Brownian, std::numbers::e, 1.0, p);
    EXPECT_NEAR(b.eps, std::exp(-2.0), 1e-15);
    EXPECT_NEAR(b.bound, std::exp(-0.5) + 2 * std::exp(-1.0), 1e-12);
    EXPECT_NEAR(b.bound, 1.3423, 1e-4);
}

TEST(Bound, RegimeErrorsNameTheThreshold)
{
    BoundParams p;
    try {
        theoretical_bound(Variant::Brownian, 0.5, 1.0, p);
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("need |xi| > 1"), std::string::npos) << e.what();
    }
    p.lambda = 1.0;
    p.gamma = 1.0;
    p.xi0 = 2.0;
    try {
        theoretical_bound(Variant::Levy, 10.0, 0.1, p);
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("need |xi| > 20"), std::string::npos) << e.what();
    }
    EXPECT_NO_THROW(theoretical_bound(Variant::Levy, 25.0, 0.1, p));
}

TEST(Bound, VariantsDecayAtTheirTailExponent)
{
    // Log-log slope between two far points approaches -beta; the logs in
    // eps leave a slowly vanishing offset.
    struct Case {
        Variant v;
        BoundParams p;
    };
    BoundParams bro;
    bro.theta = 0.75;
    BoundParams pd;
    pd.theta = 0.9;
    pd.alpha = 0.7;
    BoundParams sp;
    sp.theta = 0.8;
    BoundParams lv;
    lv.lambda = 1.5;
    lv.gamma = 1.2;
    lv.zeta = 0.8;
    lv.theta = 0.6;
    for (const auto& c : {Case{Variant::Brownian, bro}, Case{Variant::PathDep, pd}, Case{Variant::Spde, sp},
                          Case{Variant::Levy, lv}}) {
        double x1 = 1e8, x2 = 1e10;
        double b1 = theoretical_bound(c.v, x1, 0.5, c.p).bound;
        double b2 = theoretical_bound(c.v, x2, 0.5, c.p).bound;
        double slope = std::log(b2 / b1) / std::log(x2 / x1);
        EXPECT_NEAR(-slope, bound_tail_exponent(c.v, c.p), 0.1) << variant_name(c.v);
    }
    EXPECT_NEAR(bound_tail_exponent(Variant::Levy, lv), std::min(1.5 * 1.8 / 1.2 - 1, 1.5 * 0.6 / 1.2), 1e-15);
}

TEST(Certify, GaussianPasses)
{
    auto x = normal_quantiles(20000);
    std::vector<double> sig(x.size(), 0.55);
    auto grid = linspace(0.0, 20.0, 401);
    auto est = estimate_charfn(x, sig, 0.05, grid);
    BoundParams p;
    auto rep = certify_decay(est, Variant::Brownian, p);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.l2_proxy, 0.25 * std::sqrt(std::numbers::pi), 0.1 * 0.25 * std::sqrt(std::numbers::pi));
    EXPECT_FALSE(rep.rows.empty());
    for (const auto& r : rep.rows) {
        EXPECT_GT(r.xi, 1.0);
        EXPECT_GE(r.margin, -1e-12);
    }
}

TEST(Certify, PointMassFailsAndConstantGrows)
{
    std::vector<double> x(1000, 0.0);
    BoundParams p;
    auto e1 = estimate_charfn_unlocalized(x, linspace(0.1, 10.0, 100));
    auto e2 = estimate_charfn_unlocalized(x, linspace(0.1, 100.0, 1000));
    auto r1 = certify_decay(e1, Variant::Brownian, p, 0.1);
    auto r2 = certify_decay(e2, Variant::Brownian, p, 0.1);
    EXPECT_FALSE(r1.pass);
    EXPECT_FALSE(r2.pass);
    EXPECT_LT(r2.empirical_exponent, 0.1);
    EXPECT_GT(r2.fitted_C, 2 * r1.fitted_C);
}

TEST(Certify, DegenerateAndNarrowGrid)
{
    std::vector<double> x(200, 1.0), sig(200, 0.0);
    auto est = estimate_charfn(x, sig, 0.05, linspace(0.1, 10.0, 50));
    auto rep = certify_decay(est, Variant::Brownian, BoundParams{});
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.l2_proxy, 0.0);
    auto narrow = estimate_charfn(x, sig, 0.05, linspace(1.0, 30.0, 50));
    EXPECT_THROW(certify_decay(narrow, Variant::Brownian, BoundParams{}), std::invalid_argument);
}

TEST(Certify, TailExponentAtTheMarginFails)
{
    auto x = normal_quantiles(2000);
    auto est = estimate_charfn_unlocalized(x, linspace(0.0, 20.0, 201));
    BoundParams p;
    p.theta = 0.54;
    EXPECT_FALSE(certify_decay(est, Variant::Brownian, p).pass);
    p.theta = 0.56;
    EXPECT_TRUE(certify_decay(est, Variant::Brownian, p).pass);
}

TEST(L2Tail, GaussianSaturatesPointMassGrows)
{
    auto x = normal_quantiles(20000);
    auto grid = linspace(0.0, 24.0, 481);
    auto est = estimate_charfn_unlocalized(x, grid);
    std::vector<double> Xi{1.5, 3.0, 6.0};
    auto g = l2_tail(est, Xi);
    EXPECT_LE(g.partial[2] / g.partial[1], 1.01);
    EXPECT_TRUE(g.saturated);
    EXPECT_NEAR(g.partial[2], std::sqrt(std::numbers::pi), 1e-3);

    std::vector<double> atom(1000, 3.0);
    auto pm = l2_tail(estimate_charfn_unlocalized(atom, grid), std::vector<double>{3.0, 6.0, 12.0, 24.0});
    for (std::size_t k = 1; k < pm.ratio.size(); ++k)
        EXPECT_NEAR(pm.ratio[k], 2.0, 1e-9);
    EXPECT_FALSE(pm.saturated);
    EXPECT_TRUE(pm.monotone);
    EXPECT_THROW(l2_tail(est, std::vector<double>{30.0}), std::invalid_argument);
}

TEST(Density, GaussianReconstruction)
{
    auto x = normal_quantiles(20000);
    auto grid = linspace(0.0, 60.0, 3001);
    auto est = estimate_charfn_unlocalized(x, grid);
    auto xs = linspace(-4.0, 4.0, 161);
    auto d = reconstruct_density(est, 0.01, xs);
    double err = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j)
        err = std::max(err, std::fabs(d.values[j] - normal_pdf(xs[j], 1.01)));
    EXPECT_LT(err, 0.01);
    EXPECT_NEAR(d.total_mass, 1.0, 1e-2);
    EXPECT_GE(d.min_value, -1e-3);
}

TEST(Density, LocalizedPointMassPeak)
{
    std::vector<double> x(1000, 3.0), sig(1000, 0.35);
    auto grid = linspace(0.0, 40.0, 2001);
    auto est = estimate_charfn(x, sig, 0.05, grid); // weight 0.3
    auto xs = linspace(1.0, 5.0, 401);
    auto d = reconstruct_density(est, 0.04, xs);
    double peak = *std::max_element(d.values.begin(), d.values.end());
    EXPECT_NEAR(peak, 1.9947 * 0.3, 0.05 * 1.9947 * 0.3);
    EXPECT_NEAR(d.values[200], 0.3 * normal_pdf(0.0, 0.04), 1e-9);
    EXPECT_NEAR(d.total_mass, 0.3, 1e-2);
}

TEST(Density, NarrowGridIsRejected)
{
    std::vector<double> x(1000, 3.0);
    auto est = estimate_charfn_unlocalized(x, linspace(0.0, 10.0, 101));
    std::vector<double> xs{0.0, 1.0};
    EXPECT_THROW(reconstruct_density(est, 0.04, xs), std::invalid_argument);
    auto off = estimate_charfn_unlocalized(x, linspace(1.0, 60.0, 101));
    EXPECT_THROW(reconstruct_density(off, 0.04, xs), std::invalid_argument);
}
