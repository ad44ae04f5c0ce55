#pragma once

// Coefficient expression language: parsing, printing, evaluation and an
// empirical Hoelder-exponent audit. Grammar is documented in docs/grammar.md.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acert {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset))
        , offset_(offset)
    {
    }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised for unbound variables and for domain violations during evaluation
/// (division by zero, log/sqrt outside their domain, non-finite results).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
    Literal,
    Variable,
    Neg,
    Abs,
    Sign,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
};

inline constexpr int arity(Op op)
{
    switch (op) {
    case Op::Literal:
    case Op::Variable:
        return 0;
    case Op::Neg:
    case Op::Abs:
    case Op::Sign:
    case Op::Sqrt:
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
        return 1;
    default:
        return 2;
    }
}

/// Immutable expression tree. Copies share structure.
class Expr {
    struct Node {
        Op op;
        double value = 0.0;
        std::string name;
        std::vector<Expr> args;
    };

public:
    Expr() : Expr(literal(0.0)) {}

    static Expr literal(double v)
    {
        auto n = std::make_shared<Node>();
        n->op = Op::Literal;
        n->value = v;
        return Expr(std::move(n));
    }
    static Expr variable(std::string name)
    {
        auto n = std::make_shared<Node>();
        n->op = Op::Variable;
        n->name = std::move(name);
        return Expr(std::move(n));
    }
    static Expr unary(Op op, Expr a)
    {
        if (arity(op) != 1)
            throw std::invalid_argument("Expr::unary: not a unary op");
        auto n = std::make_shared<Node>();
        n->op = op;
        n->args.push_back(std::move(a));
        return Expr(std::move(n));
    }
    static Expr binary(Op op, Expr a, Expr b)
    {
        if (arity(op) != 2)
            throw std::invalid_argument("Expr::binary: not a binary op");
        auto n = std::make_shared<Node>();
        n->op = op;
        n->args.push_back(std::move(a));
        n->args.push_back(std::move(b));
        return Expr(std::move(n));
    }

    Op op() const { return node_->op; }
    double value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    const std::vector<Expr>& args() const { return node_->args; }

    /// Integer-valued literal, optionally negated. Only these exponents are
    /// allowed with a negative base.
    bool is_integer_literal() const
    {
        if (op() == Op::Neg)
            return args()[0].is_integer_literal();
        return op() == Op::Literal && std::isfinite(value()) && std::trunc(value()) == value();
    }

    friend bool operator==(const Expr& a, const Expr& b)
    {
        if (a.node_ == b.node_)
            return true;
        if (a.op() != b.op())
            return false;
        if (a.op() == Op::Literal)
            return a.value() == b.value();
        if (a.op() == Op::Variable)
            return a.name() == b.name();
        return std::equal(a.args().begin(), a.args().end(), b.args().begin(), b.args().end());
    }

    std::set<std::string> free_variables() const
    {
        std::set<std::string> out;
        collect(out);
        return out;
    }

    bool depends_on(std::string_view var) const { return free_variables().count(std::string(var)) > 0; }

    std::string to_string() const
    {
        std::string out;
        print(out);
        return out;
    }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    void collect(std::set<std::string>& out) const
    {
        if (op() == Op::Variable)
            out.insert(name());
        for (const auto& a : args())
            a.collect(out);
    }

    static const char* function_name(Op op)
    {
        switch (op) {
        case Op::Abs: return "abs";
        case Op::Sign: return "sign";
        case Op::Sqrt: return "sqrt";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Min: return "min";
        case Op::Max: return "max";
        default: return nullptr;
        }
    }

    void print(std::string& out) const
    {
        switch (op()) {
        case Op::Literal: {
            std::array<char, 32> buf{};
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value());
            std::string_view s(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
            if (value() < 0) {
                out += "(-";
                out += s.substr(1);
                out += ")";
            } else {
                out += s;
            }
            return;
        }
        case Op::Variable:
            out += name();
            return;
        case Op::Neg:
            out += "(-";
            args()[0].print(out);
            out += ")";
            return;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow: {
            static constexpr std::string_view sym[] = {" + ", " - ", " * ", " / ", " ^ "};
            out += "(";
            args()[0].print(out);
            out += sym[static_cast<int>(op()) - static_cast<int>(Op::Add)];
            args()[1].print(out);
            out += ")";
            return;
        }
        default:
            out += function_name(op());
            out += "(";
            for (std::size_t i = 0; i < args().size(); ++i) {
                if (i)
                    out += ", ";
                args()[i].print(out);
            }
            out += ")";
        }
    }

    std::shared_ptr<const Node> node_;
};

/// Variables accepted by default: time, state, auxiliary value and up to
/// nine path aggregates.
inline const std::set<std::string>& default_variables()
{
    static const std::set<std::string> vars = {"t", "x", "h", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"};
    return vars;
}

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>& vars) : text_(text), vars_(vars) {}

    Expr run()
    {
        skip();
        if (pos_ >= text_.size())
            throw ParseError("empty expression", pos_);
        Expr e = expr();
        skip();
        if (pos_ < text_.size())
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ >= text_.size())
                throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr()
    {
        Expr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = Expr::binary(Op::Add, lhs, term());
            else if (accept('-'))
                lhs = Expr::binary(Op::Sub, lhs, term());
            else
                return lhs;
        }
    }

    Expr term()
    {
        Expr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = Expr::binary(Op::Mul, lhs, unary());
            else if (accept('/'))
                lhs = Expr::binary(Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    Expr unary()
    {
        if (accept('-')) {
            // Negated literals fold so that printed negative constants re-parse identically.
            Expr operand = unary();
            if (operand.op() == Op::Literal)
                return Expr::literal(-operand.value());
            return Expr::unary(Op::Neg, operand);
        }
        if (accept('+'))
            return unary();
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (accept('^'))
            return Expr::binary(Op::Pow, base, unary());
        return base;
    }

    Expr primary()
    {
        skip();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Expr number()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            throw ParseError("malformed number", start);
        return Expr::literal(v);
    }

    Expr identifier()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string id(text_.substr(start, pos_ - start));

        static const std::map<std::string, Op, std::less<>> functions = {
            {"abs", Op::Abs}, {"sign", Op::Sign}, {"sqrt", Op::Sqrt}, {"exp", Op::Exp}, {"log", Op::Log},
            {"sin", Op::Sin}, {"cos", Op::Cos},   {"min", Op::Min},   {"max", Op::Max},
        };
        if (auto it = functions.find(id); it != functions.end()) {
            expect('(');
            Expr a = expr();
            if (arity(it->second) == 2) {
                expect(',');
                Expr b = expr();
                expect(')');
                return Expr::binary(it->second, a, b);
            }
            expect(')');
            return Expr::unary(it->second, a);
        }
        if (id == "pi")
            return Expr::literal(std::numbers::pi);
        if (!vars_.count(id))
            throw ParseError("unknown identifier '" + id + "'", start);
        return Expr::variable(id);
    }

    std::string_view text_;
    const std::set<std::string>& vars_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses an expression. Precedence from tightest: `^` (right associative),
/// unary minus, `* /`, `+ -`. Identifiers outside `vars` are rejected.
inline Expr parse_expr(std::string_view text, const std::set<std::string>& vars = default_variables())
{
    return detail::Parser(text, vars).run();
}

/// Flat stack-machine form of an Expr with variables bound to slots.
/// Evaluation is reentrant; instances may be shared across threads.
class CompiledExpr {
public:
    CompiledExpr() : CompiledExpr(Expr::literal(0.0), {}) {}

    CompiledExpr(const Expr& e, std::span<const std::string> slots)
    {
        std::vector<std::string> names(slots.begin(), slots.end());
        int depth = 0;
        emit(e, names, depth);
        constant_ = e.free_variables().empty();
        if (constant_) {
            std::vector<double> none;
            constant_value_ = run(none);
        }
    }

    CompiledExpr(const Expr& e, std::initializer_list<std::string> slots)
        : CompiledExpr(e, std::span<const std::string>(slots.begin(), slots.size()))
    {
    }

    bool is_constant() const { return constant_; }
    double constant_value() const { return constant_value_; }

    double operator()(std::span<const double> slot_values) const
    {
        if (constant_)
            return constant_value_;
        return run(slot_values);
    }

    double operator()(std::initializer_list<double> slot_values) const
    {
        return (*this)(std::span<const double>(slot_values.begin(), slot_values.size()));
    }

private:
    struct Instr {
        Op op;
        bool int_exponent = false;
        std::uint32_t slot = 0;
        double value = 0.0;
    };

    void emit(const Expr& e, const std::vector<std::string>& names, int& depth)
    {
        switch (e.op()) {
        case Op::Literal:
            code_.push_back({Op::Literal, false, 0, e.value()});
            max_depth_ = std::max(max_depth_, ++depth);
            return;
        case Op::Variable: {
            auto it = std::find(names.begin(), names.end(), e.name());
            if (it == names.end())
                throw EvalError("unbound variable '" + e.name() + "'");
            code_.push_back({Op::Variable, false, static_cast<std::uint32_t>(it - names.begin()), 0.0});
            n_slots_ = std::max(n_slots_, static_cast<std::size_t>(it - names.begin()) + 1);
            max_depth_ = std::max(max_depth_, ++depth);
            return;
        }
        default:
            for (const auto& a : e.args())
                emit(a, names, depth);
            depth -= arity(e.op()) - 1;
            code_.push_back({e.op(), e.op() == Op::Pow && e.args()[1].is_integer_literal(), 0, 0.0});
        }
    }

    static double checked(double v, const char* what)
    {
        if (!std::isfinite(v))
            throw EvalError(std::string("non-finite result in ") + what);
        return v;
    }

    double run(std::span<const double> slots) const
    {
        constexpr int kInline = 32;
        if (max_depth_ > kInline)
            return run_on(slots, std::vector<double>(static_cast<std::size_t>(max_depth_)).data());
        double small[kInline];
        return run_on(slots, small);
    }

    double run_on(std::span<const double> slots, double* st) const
    {
        if (slots.size() < n_slots_)
            throw EvalError("missing value for variable slot " + std::to_string(slots.size()));
        int sp = 0;
        for (const Instr& in : code_) {
            switch (in.op) {
            case Op::Literal:
                st[sp++] = in.value;
                break;
            case Op::Variable:
                st[sp++] = slots[in.slot];
                break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
            case Op::Sign: {
                double a = st[sp - 1];
                st[sp - 1] = a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
                break;
            }
            case Op::Sqrt:
                if (st[sp - 1] < 0)
                    throw EvalError("sqrt of negative value");
                st[sp - 1] = std::sqrt(st[sp - 1]);
                break;
            case Op::Exp: st[sp - 1] = checked(std::exp(st[sp - 1]), "exp"); break;
            case Op::Log:
                if (st[sp - 1] <= 0)
                    throw EvalError("log of non-positive value");
                st[sp - 1] = std::log(st[sp - 1]);
                break;
            case Op::Sin: st[sp - 1] = checked(std::sin(st[sp - 1]), "sin"); break;
            case Op::Cos: st[sp - 1] = checked(std::cos(st[sp - 1]), "cos"); break;
            case Op::Add: --sp; st[sp - 1] = checked(st[sp - 1] + st[sp], "+"); break;
            case Op::Sub: --sp; st[sp - 1] = checked(st[sp - 1] - st[sp], "-"); break;
            case Op::Mul: --sp; st[sp - 1] = checked(st[sp - 1] * st[sp], "*"); break;
            case Op::Div:
                --sp;
                if (st[sp] == 0.0)
                    throw EvalError("division by zero");
                st[sp - 1] = checked(st[sp - 1] / st[sp], "/");
                break;
            case Op::Pow: {
                --sp;
                double base = st[sp - 1];
                double ex = st[sp];
                if (base < 0 && !in.int_exponent)
                    throw EvalError("negative base with non-integer exponent");
                if (base == 0 && ex < 0)
                    throw EvalError("division by zero in power");
                st[sp - 1] = checked(std::pow(base, ex), "^");
                break;
            }
            case Op::Min: --sp; st[sp - 1] = std::min(st[sp - 1], st[sp]); break;
            case Op::Max: --sp; st[sp - 1] = std::max(st[sp - 1], st[sp]); break;
            }
        }
        return st[0];
    }

    std::vector<Instr> code_;
    int max_depth_ = 0;
    std::size_t n_slots_ = 0;
    bool constant_ = false;
    double constant_value_ = 0.0;
};

/// Evaluates with named bindings; every free variable must be bound.
inline double eval_expr(const Expr& e, const std::map<std::string, double>& bindings)
{
    std::vector<std::string> names;
    std::vector<double> values;
    for (const auto& v : e.free_variables()) {
        auto it = bindings.find(v);
        if (it == bindings.end())
            throw EvalError("unbound variable '" + v + "'");
        names.push_back(v);
        values.push_back(it->second);
    }
    return CompiledExpr(e, names)(values);
}

/// A coefficient together with its declared regularity. `holder_theta`
/// empty means measurable-only.
struct CoeffSpec {
    Expr expr;
    std::optional<double> holder_theta;
    double growth_const = 0.0;

    CoeffSpec() = default;
    CoeffSpec(Expr e, std::optional<double> theta = std::nullopt, double growth = 0.0)
        : expr(std::move(e)), holder_theta(theta), growth_const(growth)
    {
        validate();
    }

    void validate() const
    {
        if (holder_theta && !(*holder_theta > 0.0 && *holder_theta <= 1.0))
            throw std::invalid_argument("holder_theta must lie in (0,1]");
        if (!(growth_const >= 0.0))
            throw std::invalid_argument("growth_const must be >= 0");
    }
};

inline CoeffSpec coeff(std::string_view text, std::optional<double> theta = std::nullopt,
                       const std::set<std::string>& vars = default_variables())
{
    return CoeffSpec(parse_expr(text, vars), theta);
}

enum class AggregateKind { RunningSup, RunningInf, RunningIntegral, CoveredDistance };

/// Online functional of the path history, evaluated through `inner(x)`.
struct PathAggregate {
    AggregateKind kind = AggregateKind::RunningSup;
    Expr inner = Expr::variable("x");
};

/// Running state of one PathAggregate along a discretised path.
class AggregateState {
public:
    explicit AggregateState(const PathAggregate& agg)
        : kind_(agg.kind), inner_(agg.inner, {"x"})
    {
    }

    /// Seeds the aggregate with X_0.
    void start(double x0)
    {
        double v = inner_({x0});
        sup_ = inf_ = v;
        integral_ = 0.0;
    }

    /// Advances by one step of length h from state x_prev (left point) to x_next.
    void step(double x_prev, double x_next, double h)
    {
        integral_ += inner_({x_prev}) * h;
        double v = inner_({x_next});
        sup_ = std::max(sup_, v);
        inf_ = std::min(inf_, v);
    }

    double value() const
    {
        switch (kind_) {
        case AggregateKind::RunningSup: return sup_;
        case AggregateKind::RunningInf: return inf_;
        case AggregateKind::RunningIntegral: return integral_;
        case AggregateKind::CoveredDistance: return sup_ - inf_;
        }
        return 0.0;
    }

    double sup() const { return sup_; }
    double inf() const { return inf_; }

private:
    AggregateKind kind_;
    CompiledExpr inner_;
    double sup_ = 0.0;
    double inf_ = 0.0;
    double integral_ = 0.0;
};

inline AggregateKind parse_aggregate_kind(std::string_view s)
{
    if (s == "running_sup")
        return AggregateKind::RunningSup;
    if (s == "running_inf")
        return AggregateKind::RunningInf;
    if (s == "running_integral")
        return AggregateKind::RunningIntegral;
    if (s == "covered_distance")
        return AggregateKind::CoveredDistance;
    throw std::invalid_argument("unknown aggregate kind '" + std::string(s) + "'");
}

} // namespace acert
