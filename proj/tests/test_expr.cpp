#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "acert/expr.hpp"
#include "acert/holder.hpp"

using namespace acert;

TEST(Parse, Variable)
{
    Expr e = parse_expr("x");
    EXPECT_EQ(e.op(), Op::Variable);
    EXPECT_EQ(e.name(), "x");
}

TEST(Parse, PowerOfAbs)
{
    Expr e = parse_expr("abs(x)^0.6");
    ASSERT_EQ(e.op(), Op::Pow);
    EXPECT_EQ(e.args()[0].op(), Op::Abs);
    EXPECT_EQ(e.args()[0].args()[0].name(), "x");
    EXPECT_EQ(e.args()[1].op(), Op::Literal);
    EXPECT_DOUBLE_EQ(e.args()[1].value(), 0.6);
}

TEST(Parse, IncompleteInputReportsOffset)
{
    try {
        parse_expr("x +");
        FAIL() << "expected ParseError";
    } catch (const ParseError& err) {
        EXPECT_EQ(err.offset(), 3u);
    }
}

TEST(Parse, UnknownIdentifier)
{
    try {
        parse_expr("2 * foo");
        FAIL();
    } catch (const ParseError& err) {
        EXPECT_EQ(err.offset(), 4u);
    }
    EXPECT_THROW(parse_expr("z"), ParseError);
    EXPECT_NO_THROW(parse_expr("z", {"z"}));
}

TEST(Parse, Precedence)
{
    // ^ binds tighter than unary minus, which binds tighter than * and +.
    EXPECT_EQ(parse_expr("-x^2").to_string(), "(-(x ^ 2))");
    EXPECT_EQ(parse_expr("1 + 2 * 3").to_string(), "(1 + (2 * 3))");
    EXPECT_EQ(parse_expr("2^3^2").to_string(), "(2 ^ (3 ^ 2))");
    EXPECT_EQ(parse_expr("2^-1").to_string(), "(2 ^ (-1))");
    EXPECT_EQ(parse_expr("a - b - c", {"a", "b", "c"}).to_string(), "((a - b) - c)");
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("2^3^2"), {}), 512.0);
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("-2^2"), {}), -4.0);
}

TEST(Parse, WhitespaceInsensitive)
{
    EXPECT_EQ(parse_expr("  min( x ,\t1 )  "), parse_expr("min(x,1)"));
}

TEST(Parse, Errors)
{
    EXPECT_THROW(parse_expr(""), ParseError);
    EXPECT_THROW(parse_expr("(x"), ParseError);
    EXPECT_THROW(parse_expr("min(x)"), ParseError);
    EXPECT_THROW(parse_expr("x y"), ParseError);
    EXPECT_THROW(parse_expr("1.2.3"), ParseError);
}

TEST(Eval, Basics)
{
    EXPECT_NEAR(eval_expr(parse_expr("abs(x)^0.5"), {{"x", -2.0}}), 1.4142135624, 1e-10);
    EXPECT_EQ(eval_expr(parse_expr("sign(x)"), {{"x", 0.0}}), 0.0);
    EXPECT_EQ(eval_expr(parse_expr("sign(x)"), {{"x", -3.0}}), -1.0);
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("pi"), {}), std::acos(-1.0));
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("1e-3 * 2E2"), {}), 0.2);
}

TEST(Eval, DomainErrors)
{
    EXPECT_THROW(eval_expr(parse_expr("1/x"), {{"x", 0.0}}), EvalError);
    EXPECT_THROW(eval_expr(parse_expr("log(x)"), {{"x", 0.0}}), EvalError);
    EXPECT_THROW(eval_expr(parse_expr("sqrt(x)"), {{"x", -1.0}}), EvalError);
    EXPECT_THROW(eval_expr(parse_expr("x^0.5"), {{"x", -1.0}}), EvalError);
    EXPECT_THROW(eval_expr(parse_expr("exp(x)"), {{"x", 1e4}}), EvalError);
    EXPECT_THROW(eval_expr(parse_expr("x + t"), {{"x", 1.0}}), EvalError);
    // Integer literal exponents accept negative bases.
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("x^3"), {{"x", -2.0}}), -8.0);
    EXPECT_DOUBLE_EQ(eval_expr(parse_expr("x^-2"), {{"x", -2.0}}), 0.25);
}

TEST(Compiled, ConstantFastPath)
{
    CompiledExpr c(parse_expr("2 * (3 + 1)"), {"x"});
    EXPECT_TRUE(c.is_constant());
    EXPECT_EQ(c({0.0}), 8.0);
    CompiledExpr v(parse_expr("x * t"), {"t", "x"});
    EXPECT_FALSE(v.is_constant());
    EXPECT_EQ(v({2.0, 3.0}), 6.0);
}

namespace {

/// Random expression generator over {x, t} for property tests.
Expr random_expr(std::mt19937_64& g, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 12);
    std::uniform_real_distribution<double> lit(-5.0, 5.0);
    int k = pick(g);
    switch (k) {
    case 0: return Expr::literal(lit(g));
    case 1: return Expr::variable("x");
    case 2: return Expr::variable("t");
    case 3: {
        // Mirrors the parser, which folds negated literals.
        Expr a = random_expr(g, depth - 1);
        return a.op() == Op::Literal ? Expr::literal(-a.value()) : Expr::unary(Op::Neg, a);
    }
    case 4: return Expr::unary(Op::Abs, random_expr(g, depth - 1));
    case 5: return Expr::unary(Op::Sin, random_expr(g, depth - 1));
    case 6: return Expr::unary(Op::Sign, random_expr(g, depth - 1));
    case 7: return Expr::binary(Op::Add, random_expr(g, depth - 1), random_expr(g, depth - 1));
    case 8: return Expr::binary(Op::Sub, random_expr(g, depth - 1), random_expr(g, depth - 1));
    case 9: return Expr::binary(Op::Mul, random_expr(g, depth - 1), random_expr(g, depth - 1));
    case 10: return Expr::binary(Op::Min, random_expr(g, depth - 1), random_expr(g, depth - 1));
    case 11: return Expr::binary(Op::Max, random_expr(g, depth - 1), random_expr(g, depth - 1));
    default:
        return Expr::binary(Op::Pow, Expr::unary(Op::Abs, random_expr(g, depth - 1)),
                            Expr::literal(std::uniform_real_distribution<double>(0.1, 2.0)(g)));
    }
}

} // namespace

TEST(Property, RoundTrip)
{
    std::mt19937_64 g(7);
    for (int i = 0; i < 2000; ++i) {
        Expr e = random_expr(g, 5);
        std::string s = e.to_string();
        Expr back = parse_expr(s);
        EXPECT_EQ(back, e) << s;
        EXPECT_EQ(parse_expr(back.to_string()), back);
    }
}

TEST(Property, AlgebraicIdentities)
{
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        Expr a = random_expr(g, 3), b = random_expr(g, 3);
        std::map<std::string, double> env{{"x", u(g)}, {"t", u(g)}};
        double va = eval_expr(a, env), vb = eval_expr(b, env);
        EXPECT_EQ(eval_expr(Expr::binary(Op::Add, a, b), env), va + vb);
        EXPECT_EQ(eval_expr(Expr::binary(Op::Mul, a, b), env), va * vb);
        EXPECT_LE(eval_expr(Expr::binary(Op::Min, a, b), env), va);
        EXPECT_GE(eval_expr(Expr::binary(Op::Max, a, b), env), vb);
    }
}

TEST(CoeffSpec, HolderRange)
{
    EXPECT_NO_THROW(coeff("x", 1.0));
    EXPECT_THROW(coeff("x", 0.0), std::invalid_argument);
    EXPECT_THROW(coeff("x", 1.5), std::invalid_argument);
    EXPECT_FALSE(coeff("x").holder_theta.has_value());
}

TEST(Aggregates, Invariants)
{
    std::mt19937_64 g(3);
    std::normal_distribution<double> n(0.0, 0.1);
    AggregateState sup({AggregateKind::RunningSup, parse_expr("x")});
    AggregateState inf({AggregateKind::RunningInf, parse_expr("x")});
    AggregateState cov({AggregateKind::CoveredDistance, parse_expr("x")});
    AggregateState integ({AggregateKind::RunningIntegral, parse_expr("1")});
    double x = 0.0;
    for (auto* a : {&sup, &inf, &cov, &integ})
        a->start(x);
    for (int k = 0; k < 1000; ++k) {
        double y = x + n(g);
        for (auto* a : {&sup, &inf, &cov, &integ})
            a->step(x, y, 1e-3);
        x = y;
        ASSERT_GE(sup.value(), inf.value());
        ASSERT_GE(cov.value(), 0.0);
        ASSERT_DOUBLE_EQ(cov.value(), sup.value() - inf.value());
    }
    EXPECT_NEAR(integ.value(), 1.0, 1e-12);
}

namespace {

/// Deterministic grid oracle: the theta that makes the Hoelder quotient
/// sup|f(x)-f(y)|/|x-y|^theta scale-free across dyadic separations.
double grid_holder_oracle(const Expr& e, double lo, double hi)
{
    CompiledExpr f(e, {"x"});
    const int n = 1 << 16;
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i)
        v[i] = f({lo + (hi - lo) * i / n});
    std::vector<double> ld, lm;
    for (int s = 1; s <= (n >> 4); s *= 2) {
        double m = 0.0;
        for (int i = 0; i + s <= n; ++i)
            m = std::max(m, std::fabs(v[i + s] - v[i]));
        ld.push_back(std::log((hi - lo) * s / n));
        lm.push_back(std::log(m));
    }
    return fit_line(ld, lm).slope;
}

} // namespace

TEST(Holder, Examples)
{
    double h06 = estimate_holder(parse_expr("abs(x)^0.6"), -1, 1, 10000, make_stream(1, 0));
    EXPECT_GE(h06, 0.55);
    EXPECT_LE(h06, 0.65);
    double h1 = estimate_holder(parse_expr("x"), 0, 1, 1000, make_stream(1, 1));
    EXPECT_GE(h1, 0.95);
    EXPECT_LE(h1, 1.0);
    EXPECT_EQ(estimate_holder(parse_expr("3.0"), 0, 1, 1000, make_stream(1, 2)), 1.0);
    EXPECT_THROW(estimate_holder(parse_expr("log(x)"), -1, 1, 1000, make_stream(1, 3)), EvalError);
    EXPECT_THROW(estimate_holder(parse_expr("x"), 1, 0, 1000, make_stream(1, 3)), std::invalid_argument);
}

TEST(Holder, PowerFamilyAgainstGridOracle)
{
    for (double p : {0.3, 0.6, 0.9}) {
        Expr e = Expr::binary(Op::Pow, Expr::unary(Op::Abs, Expr::variable("x")), Expr::literal(p));
        double oracle = grid_holder_oracle(e, -1, 1);
        EXPECT_NEAR(oracle, p, 0.02);
        double est = estimate_holder(e, -1, 1, 10000, make_stream(5, std::uint64_t(p * 10)));
        EXPECT_NEAR(est, p, 0.08);
        EXPECT_NEAR(est, oracle, 0.08);
    }
}
