#pragma once

// Scenario pipeline: simulate and couple, fit the one-step exponent,
// estimate the localized transform per delta, certify, reconstruct, and
// write versioned CSV reports. Exit code 0 certified, 2 not certified,
// 1 error.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fourier.hpp"
#include "scenario.hpp"
#include "sde.hpp"
#include "spde.hpp"

#ifndef ACERT_VERSION
#define ACERT_VERSION "0.1.0"
#endif

namespace acert {

inline constexpr int kExitCertified = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotCertified = 2;

/// Bumped whenever a column changes meaning or order.
inline constexpr int kCsvSchemaVersion = 1;

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    bool plotdata = false;
    std::ostream* log = nullptr;
};

struct DeltaOutcome {
    double delta = 0.0;
    CharFnEstimate charfn;
    DecayBoundReport report;
    L2TailReport l2;
    DensityEstimate density;
};

struct RunResult {
    int exit_code = kExitError;
    bool certified = false;
    std::optional<ExponentFit> one_step;
    std::optional<CounterexampleResult> counterexample;
    std::vector<DeltaOutcome> deltas;
    std::vector<std::string> files;
};

inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    // Shortest text that parses back to the same double.
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string short_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Comment header followed by a column line. Every header line except
/// `generated` is a function of the scenario and seed.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& schema, const Scenario& s,
              const std::vector<std::string>& columns)
        : out_(path)
    {
        if (!out_)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char ts[32];
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out_ << "# acert " << ACERT_VERSION << "\n"
             << "# schema = " << schema << "/" << kCsvSchemaVersion << "\n"
             << "# scenario = " << s.name << "\n"
             << "# scenario_hash = " << hex64(s.hash()) << "\n"
             << "# master_seed = " << s.mc.seed << "\n"
             << "# n_paths = " << s.mc.n_paths << "\n"
             << "# h = " << format_double(s.step()) << "\n"
             << "# variant = " << process_kind_name(s.kind) << "\n"
             << "# localization = " << (s.localize ? "f_delta(r) = min(1, max(0, r - delta))" : "none") << "\n"
             << "# generated = " << ts << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    template <class... T>
    void row(const T&... v)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(v), first = false), ...);
        out_ << "\n";
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }

    std::ofstream out_;
};

/// Drops `# generated` lines so two runs can be compared byte for byte.
inline std::string csv_body(const std::filesystem::path& p)
{
    std::ifstream f(p);
    std::string line, out;
    while (std::getline(f, line))
        if (line.rfind("# generated", 0) != 0)
            out += line + "\n";
    return out;
}

namespace detail {

struct Samples {
    std::vector<double> terminal;
    std::vector<double> sigma; ///< localization argument: |sigma|, or sigma^2 for the heat equation
    std::optional<CoupledEnsemble> ensemble;
};

inline Samples simulate_scenario(const Scenario& s, RunResult& res)
{
    Samples out;
    switch (s.kind) {
    case ProcessKind::Brownian: out.ensemble = couple_one_step(s.brownian, s.eps, s.mc); break;
    case ProcessKind::PathDep: out.ensemble = couple_one_step(s.pathdep, s.eps, s.mc); break;
    case ProcessKind::Levy: out.ensemble = couple_one_step(s.levy, s.plan, s.eps, s.mc); break;
    case ProcessKind::Spde: out.ensemble = couple_spde_one_step(s.spde, s.grid, s.eps, s.mc); break;
    case ProcessKind::Counterexample: {
        const auto& c = s.counterexample;
        res.counterexample = run_counterexample(c.x0, c.alpha, c.t, s.mc, c.barrier);
        out.terminal = res.counterexample->terminal_x;
        out.sigma.resize(out.terminal.size());
        for (std::size_t i = 0; i < out.terminal.size(); ++i)
            out.sigma[i] = std::fabs(out.terminal[i]);
        return out;
    }
    }
    out.terminal = out.ensemble->terminal_x;
    out.sigma = out.ensemble->sigma_at_terminal;
    if (s.kind == ProcessKind::Spde)
        for (auto& v : out.sigma)
            v = v * v;
    return out;
}

} // namespace detail

/// Runs a validated scenario. Simulation and numerical errors propagate.
inline RunResult run_scenario(Scenario s, const RunOptions& opt = {})
{
    namespace fs = std::filesystem;
    if (opt.seed) {
        s.mc.seed = *opt.seed;
        s.config["mc.seed"] = std::to_string(*opt.seed);
    }
    if (opt.workers)
        s.mc.workers = std::max(1u, *opt.workers);
    if (opt.out_dir)
        s.out_dir = *opt.out_dir;
    auto log = [&](const std::string& line) {
        if (opt.log)
            *opt.log << line << "\n";
    };

    RunResult res;
    auto samples = detail::simulate_scenario(s, res);
    if (samples.ensemble && !s.eps.empty())
        res.one_step = fit_one_step_exponent(*samples.ensemble, s.moment_order);

    const Variant v = s.bound_variant();
    res.certified = true;
    for (double delta : s.deltas) {
        DeltaOutcome d;
        d.delta = delta;
        d.charfn = s.localize ? estimate_charfn(samples.terminal, samples.sigma, delta, s.xi_grid, s.mc.workers)
                              : estimate_charfn_unlocalized(samples.terminal, s.xi_grid, s.mc.workers);
        d.report = certify_decay(d.charfn, v, s.bound, s.localize ? -1.0 : delta);
        d.l2 = l2_tail(d.charfn, s.l2_xi);
        d.density = reconstruct_density(d.charfn, s.density_variance, s.density_x);
        res.certified = res.certified && d.report.pass;
        res.deltas.push_back(std::move(d));
    }

    fs::create_directories(s.out_dir);
    const fs::path dir = s.out_dir;
    auto file = [&](const std::string& name) {
        res.files.push_back((dir / name).string());
        return dir / name;
    };
    {
        CsvWriter w(file("charfn.csv"), "charfn", s,
                    {"delta", "xi", "re", "im", "stderr", "modulus_sq_unbiased"});
        for (const auto& d : res.deltas)
            for (std::size_t i = 0; i < d.charfn.xi_grid.size(); ++i)
                w.row(d.delta, d.charfn.xi_grid[i], d.charfn.estimate[i].real(), d.charfn.estimate[i].imag(),
                      d.charfn.stderr[i], d.charfn.modulus_sq_unbiased[i]);
    }
    {
        CsvWriter w(file("bound.csv"), "bound", s, {"delta", "xi", "eps", "modulus", "stderr", "bound", "margin"});
        for (const auto& d : res.deltas)
            for (const auto& r : d.report.rows)
                w.row(d.delta, r.xi, r.eps, r.modulus, r.stderr, r.bound, r.margin);
    }
    {
        CsvWriter w(file("density.csv"), "density", s, {"delta", "x", "density"});
        for (const auto& d : res.deltas)
            for (std::size_t j = 0; j < d.density.x_grid.size(); ++j)
                w.row(d.delta, d.density.x_grid[j], d.density.values[j]);
    }
    {
        CsvWriter w(file("l2tail.csv"), "l2tail", s, {"delta", "xi_max", "partial", "ratio"});
        for (const auto& d : res.deltas)
            for (std::size_t k = 0; k < d.l2.xi_max.size(); ++k)
                w.row(d.delta, d.l2.xi_max[k], d.l2.partial[k], d.l2.ratio[k]);
    }
    {
        CsvWriter w(file("exponents.csv"), "exponents", s, {"quantity", "delta", "value", "ci_lo", "ci_hi", "r2"});
        const std::string na;
        if (res.one_step) {
            const auto& f = *res.one_step;
            w.row("one_step_zero_defect", na, f.zero_defect ? 1.0 : 0.0, na, na, na);
            if (!f.zero_defect) {
                w.row("one_step_slope", na, f.slope, f.ci_lo, f.ci_hi, f.r2);
                w.row("one_step_c_hat", na, f.c_hat(), na, na, na);
            }
            w.row("one_step_moment_order", na, s.moment_order, na, na, na);
        }
        if (res.counterexample) {
            const auto& c = *res.counterexample;
            w.row("atom_mass", na, c.p_atom_hat, c.p_atom_hat - 3 * c.p_atom_stderr, c.p_atom_hat + 3 * c.p_atom_stderr,
                  na);
            w.row("mean_hit_time", na, c.mean_hit_time, na, na, na);
            w.row("hit_time_bound", na, c.bound, na, na, na);
        }
        for (const auto& d : res.deltas) {
            const std::string ds = format_double(d.delta);
            w.row("weight_mass", ds, d.charfn.weight_mass, na, na, na);
            w.row("fitted_C", ds, d.report.fitted_C, na, na, na);
            w.row("l2_proxy", ds, d.report.l2_proxy, na, na, na);
            w.row("bound_tail_exponent", ds, d.report.tail_exponent, na, na, na);
            w.row("empirical_tail_exponent", ds, d.report.empirical_exponent, na, na, na);
            w.row("l2_tail_saturated", ds, d.l2.saturated ? 1.0 : 0.0, na, na, na);
            w.row("density_total_mass", ds, d.density.total_mass, na, na, na);
            w.row("density_min", ds, d.density.min_value, na, na, na);
            w.row("certified", ds, d.report.pass ? 1.0 : 0.0, na, na, na);
        }
    }
    if (opt.plotdata) {
        for (const auto& d : res.deltas) {
            const std::string sfx = "_delta" + short_double(d.delta) + ".csv";
            {
                CsvWriter w(file("plot_charfn" + sfx), "plot_charfn", s, {"x", "y", "band"});
                for (std::size_t i = 0; i < d.charfn.xi_grid.size(); ++i)
                    w.row(d.charfn.xi_grid[i], std::abs(d.charfn.estimate[i]), 3 * d.charfn.stderr[i]);
            }
            {
                CsvWriter w(file("plot_bound" + sfx), "plot_bound", s, {"x", "y", "band"});
                for (const auto& r : d.report.rows)
                    w.row(r.xi, r.bound, r.margin);
            }
            {
                CsvWriter w(file("plot_density" + sfx), "plot_density", s, {"x", "y", "band"});
                for (std::size_t j = 0; j < d.density.x_grid.size(); ++j)
                    w.row(d.density.x_grid[j], d.density.values[j], 0.0);
            }
        }
    }

    log("scenario " + s.name + " (" + process_kind_name(s.kind) + "), hash " + hex64(s.hash()) + ", seed " +
        std::to_string(s.mc.seed));
    if (res.one_step && res.one_step->zero_defect)
        log("one-step defect is identically zero");
    if (res.one_step && !res.one_step->zero_defect)
        log("one-step exponent " + short_double(res.one_step->slope));
    if (res.counterexample)
        log("atom mass " + short_double(res.counterexample->p_atom_hat));
    for (const auto& d : res.deltas)
        log("delta " + short_double(d.delta) + ": " + (d.report.pass ? "certified" : "NOT certified") +
            ", fitted C " + short_double(d.report.fitted_C) + ", l2 proxy " + short_double(d.report.l2_proxy) +
            ", empirical exponent " + short_double(d.report.empirical_exponent));
    if (!res.deltas.empty())
        log(res.deltas.front().report.semantics);
    res.exit_code = res.certified ? kExitCertified : kExitNotCertified;
    return res;
}

/// Config map to exit code: environment overrides, validation, run. Errors
/// are reported on `err`, never thrown.
inline int run_config(ConfigMap cfg, const RunOptions& opt, std::ostream& err, RunResult* out = nullptr)
{
    apply_env_overrides(cfg);
    if (opt.seed)
        cfg["mc.seed"] = std::to_string(*opt.seed);
    Scenario s;
    try {
        s = build_scenario(cfg);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitError;
    }
    try {
        auto r = run_scenario(std::move(s), opt);
        int code = r.exit_code;
        if (out)
            *out = std::move(r);
        return code;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitError;
    }
}

inline int run_config_file(const std::string& path, const RunOptions& opt, std::ostream& err,
                           RunResult* out = nullptr)
{
    ConfigMap cfg;
    try {
        cfg = load_config_file(path);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kExitError;
    }
    return run_config(std::move(cfg), opt, err, out);
}

inline int run_builtin(const std::string& name, const RunOptions& opt, std::ostream& err, RunResult* out = nullptr)
{
    ConfigMap cfg;
    try {
        cfg = parse_config_text(find_builtin(name).text);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kExitError;
    }
    return run_config(std::move(cfg), opt, err, out);
}

} // namespace acert
