#pragma once

// Scenario configuration: INI text with sections scenario, process, mc,
// coupling, certify, density and output. Overrides from ACERT_<SECTION>_<KEY>
// environment variables are applied before validation, and validation runs
// to completion before anything is simulated.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"
#include "fourier.hpp"
#include "levy.hpp"
#include "sde.hpp"
#include "spde.hpp"

extern char** environ;

namespace acert {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& msg)
        : std::runtime_error("config error at " + key + ": " + msg), key_(key)
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Flat "section.key" -> value map, ordered so that hashing is canonical.
using ConfigMap = std::map<std::string, std::string>;

inline const std::set<std::string>& config_sections()
{
    static const std::set<std::string> s = {"scenario", "process", "mc", "coupling", "certify", "density", "output"};
    return s;
}

inline ConfigMap parse_config_text(const std::string& text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<file>", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    ConfigMap m;
    for (const auto& [section, body] : tree) {
        if (!config_sections().count(section))
            throw ConfigError(section, "unknown section");
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "key outside any section");
        for (const auto& [key, val] : body)
            m[section + "." + key] = val.data();
    }
    return m;
}

inline ConfigMap load_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("<file>", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline constexpr const char* kEnvPrefix = "ACERT_";

/// ACERT_MC_N_PATHS=5000 sets mc.n_paths. Variables whose first component
/// is not a config section are ignored.
inline void apply_env_overrides(ConfigMap& m, char** env = environ)
{
    const std::string prefix = kEnvPrefix;
    for (char** e = env; e && *e; ++e) {
        std::string kv = *e;
        auto eq = kv.find('=');
        if (eq == std::string::npos || kv.compare(0, prefix.size(), prefix) != 0)
            continue;
        std::string name = kv.substr(prefix.size(), eq - prefix.size());
        auto us = name.find('_');
        if (us == std::string::npos)
            continue;
        std::string section = name.substr(0, us), key = name.substr(us + 1);
        for (auto& c : section)
            c = char(std::tolower(static_cast<unsigned char>(c)));
        for (auto& c : key)
            c = char(std::tolower(static_cast<unsigned char>(c)));
        if (!config_sections().count(section) || key.empty())
            continue;
        m[section + "." + key] = kv.substr(eq + 1);
    }
}

/// FNV-1a over the canonical "key=value" lines. Output placement does not
/// change the scenario, so output.* is excluded.
inline std::uint64_t scenario_hash(const ConfigMap& m)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [k, v] : m) {
        if (k.rfind("output.", 0) == 0)
            continue;
        for (char c : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

enum class ProcessKind { Brownian, PathDep, Spde, Levy, Counterexample };

inline const char* process_kind_name(ProcessKind k)
{
    switch (k) {
    case ProcessKind::Brownian: return "brownian";
    case ProcessKind::PathDep: return "pathdep";
    case ProcessKind::Spde: return "spde";
    case ProcessKind::Levy: return "levy";
    case ProcessKind::Counterexample: return "counterexample";
    }
    return "?";
}

struct CounterexampleSpec {
    double x0 = 1.0;
    double alpha = 0.5;
    double t = 10.0;
    double barrier = 1e-6;
};

struct Scenario {
    ConfigMap config; ///< resolved key/values, the input of the hash
    std::string name;
    std::string description;
    std::string tag;
    ProcessKind kind = ProcessKind::Brownian;

    BrownianSdeSpec brownian;
    PathDepSdeSpec pathdep;
    SpdeSpec spde;
    SpdeGrid grid;
    LevySdeSpec levy;
    TruncationPlan plan;
    CounterexampleSpec counterexample;

    SimOptions mc;
    std::vector<double> eps;
    double moment_order = 2.0;

    std::vector<double> deltas;
    std::vector<double> xi_grid;
    bool localize = true;
    BoundParams bound;
    std::vector<double> l2_xi;

    double density_variance = 0.01;
    std::vector<double> density_x;

    std::string out_dir;

    Variant bound_variant() const
    {
        switch (kind) {
        case ProcessKind::PathDep: return Variant::PathDep;
        case ProcessKind::Spde: return Variant::Spde;
        case ProcessKind::Levy: return Variant::Levy;
        default: return Variant::Brownian;
        }
    }
    double step() const { return kind == ProcessKind::Spde ? grid.dt() : mc.h; }
    std::uint64_t hash() const { return scenario_hash(config); }
};

namespace detail {

/// Splits at commas outside parentheses.
inline std::vector<std::string> split_top_level(const std::string& s, char sep = ',')
{
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(')
            ++depth;
        if (c == ')')
            --depth;
        if (c == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& t : out) {
        auto a = t.find_first_not_of(" \t");
        auto b = t.find_last_not_of(" \t");
        t = a == std::string::npos ? "" : t.substr(a, b - a + 1);
    }
    if (out.size() == 1 && out[0].empty())
        out.clear();
    return out;
}

class ConfigReader {
public:
    explicit ConfigReader(const ConfigMap& m) : m_(m) {}

    bool has(const std::string& k) const { return m_.count(k) > 0; }

    std::string str(const std::string& k)
    {
        used_.insert(k);
        auto it = m_.find(k);
        if (it == m_.end() || it->second.empty())
            throw ConfigError(k, "missing required key");
        return it->second;
    }
    std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : (used_.insert(k), def); }

    /// Numbers are constant expressions, so "2^-10" is accepted.
    double num(const std::string& k)
    {
        std::string v = str(k);
        return to_num(k, v);
    }
    double num(const std::string& k, double def) { return has(k) ? num(k) : (used_.insert(k), def); }
    std::optional<double> opt_num(const std::string& k)
    {
        if (!has(k))
            return std::nullopt;
        return num(k);
    }

    std::uint64_t count(const std::string& k, std::uint64_t def)
    {
        if (!has(k)) {
            used_.insert(k);
            return def;
        }
        std::string v = str(k);
        std::size_t pos = 0;
        unsigned long long x = 0;
        try {
            x = std::stoull(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v.size() || v.find('-') != std::string::npos)
            throw ConfigError(k, "expected a nonnegative integer, got '" + v + "'");
        return x;
    }

    bool flag(const std::string& k, bool def)
    {
        if (!has(k)) {
            used_.insert(k);
            return def;
        }
        std::string v = str(k);
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw ConfigError(k, "expected true or false, got '" + v + "'");
    }

    std::vector<double> list(const std::string& k)
    {
        std::vector<double> out;
        for (const auto& item : split_top_level(str(k)))
            out.push_back(to_num(k, item));
        if (out.empty())
            throw ConfigError(k, "empty list");
        return out;
    }

    Expr expr(const std::string& k, const std::set<std::string>& vars)
    {
        std::string v = str(k);
        try {
            return parse_expr(v, vars);
        } catch (const std::exception& e) {
            throw ConfigError(k, e.what());
        }
    }
    Expr expr(const std::string& k, const std::set<std::string>& vars, const std::string& def)
    {
        if (!has(k)) {
            used_.insert(k);
            try {
                return parse_expr(def, vars);
            } catch (const std::exception& e) {
                throw ConfigError(k, e.what());
            }
        }
        return expr(k, vars);
    }

    void reject_unused() const
    {
        for (const auto& [k, v] : m_)
            if (!used_.count(k))
                throw ConfigError(k, "unknown key");
    }

private:
    static double to_num(const std::string& k, const std::string& v)
    {
        try {
            return eval_expr(parse_expr(v, {}), {});
        } catch (const std::exception& e) {
            throw ConfigError(k, "expected a number, got '" + v + "' (" + e.what() + ")");
        }
    }

    const ConfigMap& m_;
    std::set<std::string> used_;
};

inline std::vector<double> linear_grid(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

inline std::vector<PathAggregate> parse_aggregates(ConfigReader& r, const std::string& k)
{
    std::vector<PathAggregate> out;
    if (!r.has(k)) {
        r.str(k, "");
        return out;
    }
    for (const auto& item : split_top_level(r.str(k))) {
        auto open = item.find('(');
        if (open == std::string::npos || item.back() != ')')
            throw ConfigError(k, "aggregate '" + item + "' must look like kind(expr)");
        PathAggregate a;
        try {
            a.kind = parse_aggregate_kind(item.substr(0, open));
            a.inner = parse_expr(item.substr(open + 1, item.size() - open - 2), {"x"});
        } catch (const std::exception& e) {
            throw ConfigError(k, e.what());
        }
        out.push_back(a);
    }
    return out;
}

inline LevyMeasure parse_measure(ConfigReader& r)
{
    const std::string kind = r.str("process.measure");
    const double lambda = r.num("process.measure_lambda", 1.0);
    const double gamma = r.num("process.measure_gamma", 2.0);
    try {
        if (kind == "two_atoms")
            return measures::two_atoms();
        if (kind == "power_density")
            return measures::power_density(lambda, gamma);
        if (kind == "symmetric_power_density")
            return measures::symmetric_power_density(lambda, gamma);
        if (kind == "power_atoms")
            return measures::power_atoms(lambda, r.num("process.measure_alpha", 1.0), gamma);
        if (kind == "atoms") {
            std::vector<std::pair<double, double>> atoms;
            auto vals = r.list("process.atoms");
            if (vals.size() % 2)
                throw ConfigError("process.atoms", "expected location, rate pairs");
            for (std::size_t i = 0; i < vals.size(); i += 2)
                atoms.emplace_back(vals[i], vals[i + 1]);
            return LevyMeasure::atoms(atoms, lambda, gamma);
        }
        if (kind == "density") {
            auto f = r.expr("process.density", {"z"});
            auto s = r.list("process.support");
            if (s.size() % 2)
                throw ConfigError("process.support", "expected lo, hi pairs");
            std::vector<LevyMeasure::Interval> sup;
            for (std::size_t i = 0; i < s.size(); i += 2)
                sup.push_back({s[i], s[i + 1]});
            return LevyMeasure::density(f, sup, lambda, gamma);
        }
        if (kind == "series")
            return LevyMeasure::series(r.expr("process.series_location", {"n"}), r.expr("process.series_rate", {"n"}),
                                       lambda, gamma);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("process.measure", e.what());
    }
    throw ConfigError("process.measure", "unknown measure '" + kind + "'");
}

inline std::optional<double> theta_key(ConfigReader& r, const std::string& k)
{
    auto v = r.opt_num(k);
    if (v && !(*v > 0.0 && *v <= 1.0))
        throw ConfigError(k, "Hoelder exponent must lie in (0,1]");
    return v;
}

} // namespace detail

/// Validates every key and builds the scenario; throws ConfigError naming
/// the offending key.
inline Scenario build_scenario(const ConfigMap& cfg)
{
    Scenario s;
    s.config = cfg;
    detail::ConfigReader r(cfg);
    s.name = r.str("scenario.name", "unnamed");
    s.description = r.str("scenario.description", "");
    s.tag = r.str("scenario.tag", "");
    const std::string kind = r.str("process.kind");
    if (kind == "brownian")
        s.kind = ProcessKind::Brownian;
    else if (kind == "pathdep")
        s.kind = ProcessKind::PathDep;
    else if (kind == "spde")
        s.kind = ProcessKind::Spde;
    else if (kind == "levy")
        s.kind = ProcessKind::Levy;
    else if (kind == "counterexample")
        s.kind = ProcessKind::Counterexample;
    else
        throw ConfigError("process.kind", "unknown process kind '" + kind + "'");

    s.mc.n_paths = r.count("mc.n_paths", 10000);
    s.mc.h = r.num("mc.h", 0x1p-10);
    s.mc.seed = r.count("mc.seed", 1);
    s.mc.workers = default_workers();
    if (s.mc.n_paths < 100)
        throw ConfigError("mc.n_paths", "need at least 100 paths");
    if (!(s.mc.h > 0.0 && s.mc.h < 1.0))
        throw ConfigError("mc.h", "step must lie in (0,1)");

    const std::set<std::string> tx = {"t", "x"};
    BoundParams& bp = s.bound;
    std::optional<double> theta;
    switch (s.kind) {
    case ProcessKind::Brownian: {
        theta = detail::theta_key(r, "process.sigma_theta");
        s.brownian.sigma = CoeffSpec(r.expr("process.sigma", tx), theta);
        s.brownian.b = CoeffSpec(r.expr("process.b", tx, "0"));
        s.brownian.x0 = r.num("process.x0", 0.0);
        bp.theta = theta.value_or(1.0);
        break;
    }
    case ProcessKind::PathDep: {
        auto& p = s.pathdep;
        theta = detail::theta_key(r, "process.sigma_theta");
        p.aggregates = detail::parse_aggregates(r, "process.aggregates");
        std::set<std::string> kv = {"t", "h"}, bv = {"t", "x", "h"};
        for (std::size_t i = 1; i <= p.aggregates.size(); ++i) {
            kv.insert("a" + std::to_string(i));
            bv.insert("a" + std::to_string(i));
        }
        p.sigma = CoeffSpec(r.expr("process.sigma", {"x"}), theta);
        p.kappa = CoeffSpec(r.expr("process.kappa", kv, "1"));
        p.b = CoeffSpec(r.expr("process.b", bv, "0"));
        p.x0 = r.num("process.x0", 0.0);
        p.kappa0 = r.num("process.kappa0", 1.0);
        p.theta1 = r.num("process.theta1", 1.0);
        p.theta2 = r.num("process.theta2", 1.0);
        p.theta3 = r.num("process.theta3", 1.0);
        p.eta = r.num("process.eta", 1.0);
        if (!(p.kappa0 > 0.0))
            throw ConfigError("process.kappa0", "must be > 0");
        const std::string aux = r.str("process.aux", "constant");
        if (aux == "constant")
            p.aux.kind = AuxProcessSpec::Kind::Constant;
        else if (aux == "ou")
            p.aux.kind = AuxProcessSpec::Kind::OrnsteinUhlenbeck;
        else if (aux == "path")
            p.aux.kind = AuxProcessSpec::Kind::PathFunctional;
        else
            throw ConfigError("process.aux", "expected constant, ou or path");
        p.aux.rate = r.num("process.aux_rate", 1.0);
        p.aux.vol = r.num("process.aux_vol", 1.0);
        p.aux.h0 = r.num("process.aux_h0", 0.0);
        p.aux.aggregate = r.count("process.aux_aggregate", 0);
        if (p.aux.kind == AuxProcessSpec::Kind::PathFunctional && p.aux.aggregate >= p.aggregates.size())
            throw ConfigError("process.aux_aggregate", "index out of range");
        bp.theta = p.derived_theta();
        bp.alpha = theta.value_or(1.0);
        bp.kappa0 = p.kappa0;
        break;
    }
    case ProcessKind::Spde: {
        theta = detail::theta_key(r, "process.sigma_theta");
        s.spde.sigma = CoeffSpec(r.expr("process.sigma", {"u"}), theta);
        s.spde.b = CoeffSpec(r.expr("process.b", {"u"}, "0"));
        s.spde.u0 = r.expr("process.u0", {"x"}, "0");
        s.spde.x_obs = r.num("process.x_obs", 0.5);
        s.grid.n_space = r.count("process.n_space", 33);
        s.grid.n_time = r.count("process.n_time", 4096);
        try {
            s.grid.validate();
        } catch (const std::exception& e) {
            throw ConfigError("process.n_time", e.what());
        }
        try {
            detail::node_of(s.grid, s.spde.x_obs);
        } catch (const std::exception& e) {
            throw ConfigError("process.x_obs", e.what());
        }
        bp.theta = theta.value_or(1.0);
        // Gaussian-term constant: least kappa_eps / sqrt(eps) over a dyadic range.
        double c = std::numeric_limits<double>::infinity();
        for (int k = 4; k <= 12; ++k) {
            double e = std::ldexp(1.0, -k);
            c = std::min(c, kappa_eps(s.spde.x_obs, e) / std::sqrt(e));
        }
        bp.c = c;
        break;
    }
    case ProcessKind::Levy: {
        auto& l = s.levy;
        theta = detail::theta_key(r, "process.sigma_theta");
        l.sigma = CoeffSpec(r.expr("process.sigma", tx), theta);
        l.b = CoeffSpec(r.expr("process.b", tx, "0"));
        l.x0 = r.num("process.x0", 0.0);
        l.alpha = r.num("process.b_alpha", 0.0);
        l.nu = detail::parse_measure(r);
        const double var_tol = r.num("process.var_tol", 1e-3);
        const bool gauss = r.flag("process.gaussian_residual", false);
        try {
            s.plan = plan_truncation(l.nu, var_tol, 1e6, gauss);
        } catch (const std::exception& e) {
            throw ConfigError("process.var_tol", e.what());
        }
        bp.theta = theta.value_or(1.0);
        bp.lambda = l.nu.lambda();
        bp.gamma = l.nu.gamma();
        bp.zeta = l.zeta();
        std::vector<double> xs;
        for (int k = 0; k <= 30; ++k)
            xs.push_back(std::pow(10.0, 3.0 * k / 30.0));
        // Psi >= c |xi|^lambda is audited from |xi| = 1 upward.
        bp.c = check_tasoeur1(l.nu, xs).c_hat;
        bp.xi0 = 1.0;
        s.moment_order = l.nu.gamma();
        break;
    }
    case ProcessKind::Counterexample: {
        auto& c = s.counterexample;
        c.x0 = r.num("process.x0", 1.0);
        c.alpha = r.num("process.alpha", 0.5);
        c.t = r.num("process.t", 10.0);
        c.barrier = r.num("process.barrier", 1e-6);
        if (!(c.x0 > 0.0))
            throw ConfigError("process.x0", "must be > 0");
        if (!(c.alpha > 0.0 && c.alpha < 1.0))
            throw ConfigError("process.alpha", "must lie in (0,1)");
        if (!(c.t > 0.0))
            throw ConfigError("process.t", "must be > 0");
        bp.theta = 1.0; // sigma(x) = x
        break;
    }
    }
    if (s.kind == ProcessKind::Spde)
        s.mc.h = s.grid.dt();

    if (s.kind != ProcessKind::Counterexample) {
        if (r.has("coupling.eps")) {
            s.eps = r.list("coupling.eps");
        } else {
            r.str("coupling.eps", "");
            for (int k = 3; k <= 9; ++k)
                s.eps.push_back(std::ldexp(1.0, -k));
        }
        for (double e : s.eps) {
            double m = e / s.step();
            if (!(e > 0.0 && e < 1.0) || std::fabs(m - std::round(m)) > 1e-9 * m || std::round(m) < 1)
                throw ConfigError("coupling.eps", "each eps must lie in (0,1) and be a multiple of the step");
        }
        if (s.eps.size() < 5)
            throw ConfigError("coupling.eps", "need at least 5 values for the exponent fit");
        s.moment_order = r.num("coupling.moment_order", s.moment_order);
    } else {
        r.str("coupling.eps", "");
    }

    s.deltas = r.has("certify.delta") ? r.list("certify.delta") : (r.str("certify.delta", ""), std::vector<double>{0.05});
    for (double d : s.deltas)
        if (!(d > 0.0))
            throw ConfigError("certify.delta", "every delta must be > 0");
    const double xi_max = r.num("certify.xi_max", 1000.0);
    const std::uint64_t xi_points = r.count("certify.xi_points", 2001);
    if (!(xi_max > 0.0) || xi_points < 3)
        throw ConfigError("certify.xi_points", "need xi_max > 0 and at least 3 points");
    s.xi_grid = detail::linear_grid(0.0, xi_max, xi_points);
    if (!(xi_max / s.xi_grid[1] >= std::pow(10.0, 1.5)))
        throw ConfigError("certify.xi_points", "grid spans less than 1.5 decades");
    s.localize = r.flag("certify.localize", s.kind != ProcessKind::Counterexample);
    bp.C = 1.0;
    bp.theta = r.num("certify.theta", bp.theta);
    bp.alpha = r.num("certify.alpha", bp.alpha);
    bp.kappa0 = r.num("certify.kappa0", bp.kappa0);
    bp.c = r.num("certify.c", bp.c);
    bp.lambda = r.num("certify.lambda", bp.lambda);
    bp.gamma = r.num("certify.gamma", bp.gamma);
    bp.zeta = r.num("certify.zeta", bp.zeta);
    bp.xi0 = r.num("certify.xi0", bp.xi0);
    if (r.has("certify.l2_tail")) {
        s.l2_xi = r.list("certify.l2_tail");
    } else {
        r.str("certify.l2_tail", "");
        for (double f : {0.01, 0.03, 0.1, 0.3, 1.0})
            s.l2_xi.push_back(f * xi_max);
    }
    for (double x : s.l2_xi)
        if (!(x > 0.0 && x <= xi_max))
            throw ConfigError("certify.l2_tail", "each Xi must lie in (0, xi_max]");

    s.density_variance = r.num("density.variance", 0.01);
    if (!(s.density_variance > 0.0))
        throw ConfigError("density.variance", "must be > 0");
    const double x_lo = r.num("density.x_min", -5.0), x_hi = r.num("density.x_max", 5.0);
    const std::uint64_t nx = r.count("density.x_points", 201);
    if (!(x_lo < x_hi) || nx < 2)
        throw ConfigError("density.x_points", "need x_min < x_max and at least 2 points");
    s.density_x = detail::linear_grid(x_lo, x_hi, nx);

    s.out_dir = r.str("output.dir", "out/" + s.name);
    r.reject_unused();
    return s;
}

struct BuiltinScenario {
    std::string name;
    std::string tag;
    std::string description;
    std::string text; ///< INI body
};

/// Bundled scenarios; each is also a worked config example.
inline const std::vector<BuiltinScenario>& builtin_scenarios()
{
    static const std::vector<BuiltinScenario> v = [] {
        std::vector<BuiltinScenario> out;
        auto add = [&](std::string name, std::string tag, std::string desc, std::string body) {
            std::string text = "[scenario]\nname = " + name + "\ntag = " + tag + "\ndescription = " + desc + "\n" + body;
            out.push_back({name, tag, desc, text});
        };
        add("gaussian_oracle", "diffusion", "Brownian motion, sigma = 1: the law is N(0,1)",
            "[process]\nkind = brownian\nsigma = 1\nsigma_theta = 1\nb = 0\n"
            "[mc]\nn_paths = 20000\nh = 2^-10\nseed = 1\n"
            "[certify]\ndelta = 0.05\nxi_max = 100\nxi_points = 1001\n"
            "[density]\nx_min = -4\nx_max = 4\nx_points = 161\n");
        add("brownian_holder075", "diffusion", "sigma = |x|^0.75 + 0.1, Hoelder diffusion coefficient",
            "[process]\nkind = brownian\nsigma = abs(x)^0.75 + 0.1\nsigma_theta = 0.75\nb = 0\n"
            "[mc]\nn_paths = 10000\nh = 2^-12\nseed = 1\n"
            "[coupling]\neps = 2^-3, 2^-4, 2^-5, 2^-6, 2^-7, 2^-8, 2^-9\n"
            "[certify]\ndelta = 0.05\nxi_max = 1000\nxi_points = 2001\n"
            "[density]\nvariance = 0.01\nx_min = -4\nx_max = 4\nx_points = 161\n");
        add("brownian_holder060", "diffusion", "sigma = |x|^0.6 + 0.1 with a mean-reverting drift",
            "[process]\nkind = brownian\nsigma = abs(x)^0.6 + 0.1\nsigma_theta = 0.6\nb = -x\n"
            "[mc]\nn_paths = 20000\nh = 2^-10\nseed = 2\n"
            "[certify]\ndelta = 0.05, 0.1\nxi_max = 1000\nxi_points = 2001\n"
            "[density]\nx_min = -3\nx_max = 3\nx_points = 121\n");
        add("pathdep_ou_kappa", "path-dependent", "sigma(x) kappa(H) with an Ornstein-Uhlenbeck auxiliary and a running-sup drift",
            "[process]\nkind = pathdep\nsigma = abs(x)^0.8 + 0.2\nsigma_theta = 0.8\n"
            "kappa = 1 + 0.5 * sin(h)^2\nkappa0 = 1\nb = -x + 0.1 * a1\naggregates = running_sup(x)\n"
            "aux = ou\naux_rate = 1\naux_vol = 1\ntheta1 = 0.5\ntheta2 = 1\ntheta3 = 1\neta = 1\n"
            "[mc]\nn_paths = 10000\nh = 2^-10\nseed = 3\n"
            "[certify]\ndelta = 0.05\nxi_max = 300\nxi_points = 1201\n");
        add("pathdep_running_integral", "path-dependent", "kappa driven by the running integral of x^2, auxiliary read from the path",
            "[process]\nkind = pathdep\nsigma = 1 + 0.5 * cos(x)\nsigma_theta = 1\n"
            "kappa = 1 + a1 / (1 + a1)\nkappa0 = 1\nb = -0.5 * x\naggregates = running_integral(x^2)\n"
            "aux = path\naux_aggregate = 0\n"
            "[mc]\nn_paths = 10000\nh = 2^-10\nseed = 4\n"
            "[certify]\ndelta = 0.05\nxi_max = 300\nxi_points = 1201\n");
        add("spde_additive", "heat-equation", "stochastic heat equation with sigma = 1 on [0,1], Neumann boundary",
            "[process]\nkind = spde\nsigma = 1\nsigma_theta = 1\nb = 0\nu0 = 0\nx_obs = 0.5\nn_space = 33\nn_time = 4096\n"
            "[mc]\nn_paths = 1000\nseed = 5\n"
            "[coupling]\neps = 2^-4, 2^-5, 2^-6, 2^-7, 2^-8\n"
            "[certify]\ndelta = 0.05\nxi_max = 100\nxi_points = 1001\n");
        add("spde_holder", "heat-equation", "stochastic heat equation with sigma = |u|^0.75 + 0.5 and linear damping",
            "[process]\nkind = spde\nsigma = abs(u)^0.75 + 0.5\nsigma_theta = 0.75\nb = -u\nu0 = cos(pi * x)\n"
            "x_obs = 0.5\nn_space = 33\nn_time = 4096\n"
            "[mc]\nn_paths = 1000\nseed = 6\n"
            "[coupling]\neps = 2^-4, 2^-5, 2^-6, 2^-7, 2^-8\n"
            "[certify]\ndelta = 0.05\nxi_max = 100\nxi_points = 1001\n");
        add("levy_two_atoms", "jump",
            "compound Poisson with nu = delta_1 + delta_-1; the decay condition fails, certification is expected to fail",
            "[process]\nkind = levy\nsigma = 1\nsigma_theta = 1\nb = 0\nmeasure = two_atoms\n"
            "[mc]\nn_paths = 20000\nh = 2^-10\nseed = 7\n"
            "[certify]\ndelta = 0.05\nlocalize = false\nxi_max = 100\nxi_points = 1001\n");
        add("levy_atomic_lambda1", "jump", "purely atomic nu = sum_n delta_{1/n} (lambda = 1), singular Levy measure",
            "[process]\nkind = levy\nsigma = 1.5 + cos(x)\nsigma_theta = 1\nb = -0.5 * x\nb_alpha = 1\n"
            "measure = power_atoms\nmeasure_lambda = 1\nmeasure_alpha = 1\nmeasure_gamma = 1.2\nvar_tol = 2^-8\n"
            "[mc]\nn_paths = 5000\nh = 2^-10\nseed = 8\n"
            "[certify]\ndelta = 0.05\nxi_max = 300\nxi_points = 1201\n");
        add("levy_power_density", "jump", "symmetric |z|^-2.5 dz on [-1,1] (lambda = 1.5)",
            "[process]\nkind = levy\nsigma = 1.5 + cos(x)\nsigma_theta = 1\nb = -0.5 * x\nb_alpha = 1\n"
            "measure = symmetric_power_density\nmeasure_lambda = 1.5\nmeasure_gamma = 1.6\nvar_tol = 0.25\n"
            "gaussian_residual = true\n"
            "[mc]\nn_paths = 5000\nh = 2^-10\nseed = 9\n"
            "[certify]\ndelta = 0.05\nxi_max = 300\nxi_points = 1201\n");
        add("atom_counterexample", "atom",
            "dX = X dB - sign(X)|X|^0.5 dt from 1: absorbed at 0 with positive probability, must fail",
            "[process]\nkind = counterexample\nx0 = 1\nalpha = 0.5\nt = 10\n"
            "[mc]\nn_paths = 10000\nh = 1e-3\nseed = 10\n"
            "[certify]\ndelta = 0.05\nxi_max = 100\nxi_points = 1001\n"
            "[density]\nvariance = 0.04\n");
        return out;
    }();
    return v;
}

inline const BuiltinScenario& find_builtin(const std::string& name)
{
    for (const auto& b : builtin_scenarios())
        if (b.name == name)
            return b;
    throw ConfigError("<builtin>", "no bundled scenario named '" + name + "'");
}

struct BuiltinMeasure {
    std::string name;
    std::string tag;
    std::string description;
};

inline const std::vector<BuiltinMeasure>& builtin_measures()
{
    static const std::vector<BuiltinMeasure> v = {
        {"two_atoms", "jump", "delta_1 + delta_-1, compound Poisson"},
        {"power_density", "jump", "z^{-1-lambda} dz on (0,1]"},
        {"symmetric_power_density", "jump", "|z|^{-1-lambda} dz on [-1,1]"},
        {"power_atoms", "jump", "sum_n n^{lambda alpha - 1} delta_{n^-alpha}"},
        {"atoms", "jump", "finite atom list: atoms = z1, rate1, z2, rate2, ..."},
        {"density", "jump", "density expression in z with support = lo, hi, ..."},
        {"series", "jump", "atoms at series_location(n) with series_rate(n)"},
    };
    return v;
}

} // namespace acert
