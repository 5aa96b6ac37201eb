#include "exitlab/cli.hpp"

#include "exitlab/chung.hpp"
#include "exitlab/config.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/montecarlo.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/small_deviation.hpp"
#include "exitlab/spectral.hpp"
#include "exitlab/tailfit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef EXITLAB_VERSION
#define EXITLAB_VERSION "0.0.0"
#endif

namespace exitlab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Context {
    std::string subcommand;
    config::RunConfig cfg;
    geometry::Domain domain;
    std::ostream& out;

    fs::path artifact(const std::string& ext, const std::string& prefix = "") const {
        fs::create_directories(cfg.output.dir);
        return fs::path(cfg.output.dir) /
               (prefix + subcommand + "-" + domain.name() + "-" + cfg.hash() + "." + ext);
    }

    ordered_json metadata() const {
        ordered_json m;
        m["tool"] = "exitlab";
        m["version"] = version();
        m["subcommand"] = subcommand;
        m["domain"] = domain.name();
        m["config_hash"] = cfg.hash();
        m["seed"] = cfg.mc.seed;
        m["generated"] = timestamp();
        ordered_json c = ordered_json::object();
        std::istringstream lines(cfg.canonical());
        for (std::string line; std::getline(lines, line);) {
            const auto eq = line.find('=');
            c[line.substr(0, eq)] = line.substr(eq + 1);
        }
        m["config"] = c;
        return m;
    }

    void write_csv_header(std::ostream& os) const {
        os << "# exitlab " << version() << "\n"
           << "# subcommand=" << subcommand << " domain=" << domain.name() << " config_hash=" << cfg.hash()
           << " seed=" << cfg.mc.seed << "\n"
           << "# generated=" << timestamp() << "\n";
        std::istringstream lines(cfg.canonical());
        for (std::string line; std::getline(lines, line);) os << "# " << line << "\n";
    }

    void write_json(const ordered_json& body) const {
        ordered_json doc;
        doc["metadata"] = metadata();
        for (const auto& [k, v] : body.items()) doc[k] = v;
        const auto path = artifact("json");
        std::ofstream os(path);
        os << doc.dump(2) << "\n";
        if (!os) throw std::runtime_error("cannot write " + path.string());
        out << path.string() << "\n";
    }
};

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

spectral::SpectralResult solve_spectrum(const Context& ctx) {
    const auto opts = ctx.cfg.spectrum_options();
    if (ctx.cfg.spectral.h.size() >= 2) {
        return spectral::compute_extrapolated(ctx.domain, ctx.cfg.spectral.h, opts).result;
    }
    return spectral::compute_spectrum(ctx.domain, opts);
}

void cmd_spectrum(const Context& ctx) {
    const auto res = solve_spectrum(ctx);
    ordered_json body;
    const bool discrete = res.has_discrete_spectrum();
    body["lambda0"] = discrete ? ordered_json(res.lambda0()) : ordered_json(nullptr);
    body["lambda1"] = finite_or_null(res.lambda1);
    body["threshold"] = finite_or_null(res.threshold);
    body["lambda0_over_threshold"] =
        discrete && std::isfinite(res.threshold) ? ordered_json(res.lambda0() / res.threshold) : ordered_json(nullptr);
    body["amplitude"] = res.amplitude;
    body["h"] = res.h;
    body["h_list"] = ctx.cfg.spectral.h;
    body["L"] = res.arm_length;
    body["extrapolated"] = res.extrapolated;
    body["eigenvalue_list"] = res.eigenvalues;
    body["computed"] = res.computed;
    body["computed_extended"] = res.computed_extended;
    body["v0_at_start"] = res.v0_at(ctx.cfg.domain.start);

    ordered_json fits = ordered_json::array();
    if (discrete && !ctx.domain.arms().empty()) {
        try {
            for (const auto& a : spectral::fit_arm_decay(res, ctx.domain).arms) {
                fits.push_back({{"arm", a.arm},
                                {"rate", a.rate},
                                {"predicted_rate", a.predicted_rate},
                                {"relative_error", std::abs(a.rate / a.predicted_rate - 1.0)},
                                {"coefficient", a.coefficient},
                                {"transverse_correlation", a.transverse_correlation},
                                {"window", {a.window_lo, a.window_hi}},
                                {"samples", a.samples}});
            }
        } catch (const WindowTooShort& e) {
            body["decay_fit_error"] = e.what();
        }
    }
    body["decay_fits"] = fits;

    if (ctx.cfg.spectral.write_v0) {
        const auto path = ctx.artifact("csv", "v0-");
        std::ofstream os(path);
        ctx.write_csv_header(os);
        os << "x1,x2,v0\n";
        for (std::size_t i = 0; i < res.v0.size(); ++i) {
            const auto p = res.grid.point(i);
            os << num(p.x1) << "," << num(p.x2) << "," << num(res.v0[i]) << "\n";
        }
        body["v0_csv"] = path.filename().string();
        ctx.out << path.string() << "\n";
    }
    ctx.write_json(body);
}

void cmd_survival_exact(const Context& ctx) {
    if (!chung::has_exact_survival(ctx.domain)) {
        throw ConfigError("domain.kind", "no closed-form survival for '" + ctx.domain.name() + "'");
    }
    const auto path = ctx.artifact("csv");
    std::ofstream os(path);
    ctx.write_csv_header(os);
    os << "t,value,truncation_terms\n";
    for (double t : ctx.cfg.mc.horizons) {
        const auto v = chung::exact_survival(ctx.domain, ctx.cfg.domain.start, t);
        os << num(t) << "," << num(v.value) << "," << v.terms << "\n";
    }
    if (!os) throw std::runtime_error("cannot write " + path.string());
    ctx.out << path.string() << "\n";
}

montecarlo::SurvivalCurve run_mc(const Context& ctx) {
    return montecarlo::survival_curve(ctx.domain, ctx.cfg.domain.start, ctx.cfg.mc.horizons, ctx.cfg.mc.n,
                                      ctx.cfg.mc.seed, ctx.cfg.mc.policy);
}

void cmd_survival_mc(const Context& ctx) {
    const auto curve = run_mc(ctx);
    const auto path = ctx.artifact("csv");
    std::ofstream os(path);
    ctx.write_csv_header(os);
    os << "# policy=" << curve.policy << "\n";
    os << "t,estimate,stderr,n\n";
    for (std::size_t i = 0; i < curve.horizons.size(); ++i) {
        os << num(curve.horizons[i]) << "," << num(curve.estimates[i]) << "," << num(curve.std_errors[i]) << ","
           << curve.replicas << "\n";
    }
    if (!os) throw std::runtime_error("cannot write " + path.string());
    ctx.out << path.string() << "\n";
}

void cmd_verify_theorem(const Context& ctx) {
    const auto res = solve_spectrum(ctx);
    if (!res.has_discrete_spectrum()) {
        throw NoDiscreteSpectrum("'" + ctx.domain.name() + "' has no eigenvalue below the threshold");
    }
    const auto curve = run_mc(ctx);
    const auto rep = tailfit::verify_theorem1(curve, res, ctx.cfg.domain.start, ctx.cfg.fit.theorem);
    ordered_json body;
    body["rate_fit"] = rep.rate_fit;
    body["rate_predicted"] = rep.rate_predicted;
    body["amplitude_ratio"] = rep.amplitude_ratio;
    body["residual_rate"] = finite_or_null(rep.residual_rate);
    body["lambda1_over_2"] = rep.lambda1_over_2;
    body["pass"] = rep.pass;
    body["rate_fit_stderr"] = rep.rate_fit_stderr;
    body["amplitude_fit"] = rep.amplitude_fit;
    body["amplitude_predicted"] = rep.predicted_amplitude;
    body["residual_rate_stderr"] = finite_or_null(rep.residual_rate_stderr);
    body["residual_rate_without_linear_factor"] = finite_or_null(rep.residual_rate);
    body["residual_rate_with_linear_factor"] = finite_or_null(rep.residual_rate_linear_factor);
    body["rate_ok"] = rep.rate_ok;
    body["amplitude_ok"] = rep.amplitude_ok;
    body["remainder_ok"] = rep.remainder_ok;
    body["lambda0"] = rep.lambda0;
    body["lambda1"] = rep.lambda1;
    body["window"] = {ctx.cfg.fit.theorem.window.lo, ctx.cfg.fit.theorem.window.hi};
    body["n"] = curve.replicas;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        rows.push_back({{"t", rep.times[i]},
                        {"estimate", curve.estimates[i]},
                        {"stderr", curve.std_errors[i]},
                        {"residual", rep.residuals[i]},
                        {"noise_floor", static_cast<bool>(rep.noise_floor[i])}});
    }
    body["residuals"] = rows;
    ctx.write_json(body);
}

void cmd_small_deviation(const Context& ctx) {
    const auto& sd = ctx.cfg.small_deviation;
    const auto kind = ctx.domain.kind();
    if (kind != geometry::DomainKind::Cross && kind != geometry::DomainKind::Corner) {
        throw ConfigError("domain.kind", "small deviation needs a cross or a corner");
    }
    const auto value = sd.source == SurvivalSource::MonteCarlo
                           ? small_deviation_mc(ctx.domain, sd.r, ctx.cfg.mc.n, ctx.cfg.mc.seed, ctx.cfg.mc.policy)
                           : small_deviation_asymptotic(ctx.domain, sd.r, solve_spectrum(ctx));
    ordered_json body;
    body["r"] = value.r;
    body["horizon"] = value.horizon;
    body["probability"] = value.probability;
    body["stderr"] = value.std_error;
    body["source"] = to_string(value.source);
    if (value.source == SurvivalSource::MonteCarlo) body["n"] = ctx.cfg.mc.n;
    ctx.write_json(body);
}

}  // namespace

std::string version() { return EXITLAB_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dirichlet spectra and Brownian exit-time tails on perturbed multi-strips", "exitlab"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::string> output_dir, domain_kind, start, horizons, bridge, replicas;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt_max;
    int threads = 0;

    app.add_option("-c,--config", config_path, "INI file with [domain] [spectral] [mc] [fit] [small_deviation] [output]");
    app.add_option("--set", sets, "Override as section.key=value (repeatable)");
    app.add_option("-o,--output-dir", output_dir, "Artifact directory (output.dir)");
    app.add_option("--threads", threads, "Worker count (capped by EXITLAB_MAX_THREADS)");
    app.add_option("--domain", domain_kind, "domain.kind");
    app.add_option("--start", start, "domain.start as 'x1 x2'");
    app.add_option("--horizons", horizons, "mc.horizons, list or lo:hi:step");
    app.add_option("--replicas", replicas, "mc.n, e.g. 1e6");
    app.add_option("--seed", seed, "mc.seed");
    app.add_option("--dt-max", dt_max, "mc.dt_max");
    app.add_option("--bridge", bridge, "mc.bridge (on/off)");

    const char* subcommands[][2] = {
        {"spectrum", "Discrete spectrum below the threshold, ground mode and arm decay"},
        {"survival-exact", "Closed-form survival at the configured horizons"},
        {"survival-mc", "Monte Carlo survival curve"},
        {"verify-theorem", "Fit the survival tail against the spectral prediction"},
        {"small-deviation", "P(max |min_j W_j| <= r) via the exit-time reduction"},
    };
    for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();

    if (threads > 0) parallel::set_worker_count(threads);
    parallel::apply_worker_cap_from_env();

    try {
        config::Overrides overrides;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError(s, "--set expects section.key=value");
            overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        if (output_dir) overrides.emplace_back("output.dir", *output_dir);
        if (domain_kind) overrides.emplace_back("domain.kind", *domain_kind);
        if (start) overrides.emplace_back("domain.start", *start);
        if (horizons) overrides.emplace_back("mc.horizons", *horizons);
        if (replicas) overrides.emplace_back("mc.n", *replicas);
        if (seed) overrides.emplace_back("mc.seed", std::to_string(*seed));
        if (dt_max) overrides.emplace_back("mc.dt_max", num(*dt_max));
        if (bridge) overrides.emplace_back("mc.bridge", *bridge);

        auto cfg = config_path.empty() ? config::from_overrides(overrides) : config::load(config_path, overrides);
        Context ctx{subcommand, cfg, cfg.build_domain(), out};
        if (subcommand == "spectrum") cmd_spectrum(ctx);
        else if (subcommand == "survival-exact") cmd_survival_exact(ctx);
        else if (subcommand == "survival-mc") cmd_survival_mc(ctx);
        else if (subcommand == "verify-theorem") cmd_verify_theorem(ctx);
        else cmd_small_deviation(ctx);
    } catch (const ConfigError& e) {
        err << "exitlab: invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "exitlab: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        err << "exitlab: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "exitlab: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace exitlab::cli
