#include "rdbp/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdbp/config.hpp"
#include "rdbp/criteria.hpp"
#include "rdbp/engine.hpp"
#include "rdbp/immigration.hpp"
#include "rdbp/lorenz.hpp"

namespace rdbp {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Raised while assembling module inputs from a parsed config.
struct ConfigError : std::runtime_error {
    std::vector<Violation> violations;
    explicit ConfigError(std::vector<Violation> v) : std::runtime_error("config error"), violations(std::move(v)) {}
    ConfigError(std::string path, std::string message)
        : ConfigError(std::vector<Violation>{{std::move(path), std::move(message)}}) {}
};

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string grid;
    std::string trajectories;
};

std::string num(double v) {
    if (is_unbounded(v)) return "inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

ordered_json jnum(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (is_unbounded(*v)) return "unbounded";
    return *v;
}

template <class T>
ordered_json jopt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string prefix_path(const std::string& scope, const std::string& key) {
    return scope.empty() ? key : scope + "." + key;
}

// Claims plus the two means, for the analytic subcommands.
struct AnalyticInputs {
    Distribution claims;
    double m;
    double r;
};

const Distribution& need_claims(const PopulationSection& p, const std::string& scope) {
    if (!p.claims) throw ConfigError(prefix_path(scope, "claims"), "required claim distribution is missing");
    return *p.claims;
}

double need_m(const PopulationSection& p, const std::string& scope) {
    if (p.reproduction) return p.reproduction->mean();
    if (p.m) return *p.m;
    throw ConfigError(prefix_path(scope, "m"), "required: give 'm' or a 'reproduction' law");
}

double need_r(const PopulationSection& p, const std::string& scope) {
    if (p.resources) return p.resources->mean();
    if (p.r) return *p.r;
    throw ConfigError(prefix_path(scope, "r"), "required: give 'r' or a 'resources' law");
}

PopulationParams need_population(const PopulationSection& p, const std::string& scope) {
    const auto& claims = need_claims(p, scope);
    if (!p.reproduction)
        throw ConfigError(prefix_path(scope, "reproduction"), "required reproduction law is missing");
    // "r" alone means every parent produces exactly r.
    auto resources = p.resources ? *p.resources : Distribution::constant(need_r(p, scope));
    return PopulationParams(*p.reproduction, std::move(resources), claims);
}

std::uint64_t need_seed(const ScenarioConfig& cfg, const Options& opt) {
    if (opt.seed) return *opt.seed;
    if (cfg.simulation.seed) return *cfg.simulation.seed;
    throw ConfigError("simulation.seed", "a seed is required for stochastic subcommands (or pass --seed)");
}

std::uint64_t need_count(const std::optional<std::uint64_t>& v, const std::string& path) {
    if (!v) throw ConfigError(path, "required integer is missing");
    return *v;
}

const Policy& need_policy(const ScenarioConfig& cfg) {
    if (!cfg.policy) throw ConfigError("policy", "required policy name is missing");
    return *cfg.policy;
}

std::vector<double> grid_or(const Options& opt, const std::vector<double>& from_config, const std::string& path) {
    if (!opt.grid.empty()) {
        try {
            return parse_grid_spec(opt.grid);
        } catch (const std::exception& e) {
            throw ConfigError("--grid", e.what());
        }
    }
    if (from_config.empty()) throw ConfigError(path, "required grid is missing (or pass --grid)");
    return from_config;
}

std::string csv_header_comment(const std::string& command, const ScenarioConfig& cfg,
                               const std::optional<std::uint64_t>& seed) {
    std::string line = "# schema_version=" + std::to_string(kSchemaVersion) + " command=" + command;
    if (seed) line += " seed=" + std::to_string(*seed);
    line += " config_hash=" + cfg.hash + "\n";
    return line;
}

ordered_json json_header(const std::string& command, const ScenarioConfig& cfg,
                         const std::optional<std::uint64_t>& seed) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    if (seed) j["seed"] = *seed;
    j["config_hash"] = cfg.hash;
    return j;
}

void write_output(const Options& opt, const std::string& content, std::ostream& out) {
    if (opt.out.empty() || opt.out == "-") {
        out << content;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("--out", "cannot write " + opt.out);
    f << content;
}

struct CommandResult {
    int code = kExitOk;
    std::string summary;
};

using Command = std::function<CommandResult(const ScenarioConfig&, const Options&, std::ostream&)>;

// ---------------------------------------------------------------------------

CommandResult cmd_classify(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto& p = cfg.population;
    const auto& claims = need_claims(p, "");
    const double m = need_m(p, "");
    const double r = need_r(p, "");
    const auto rep = lc_criterion_check(claims, m, r);

    auto j = json_header("classify", cfg, std::nullopt);
    j["claims"] = claims.describe();
    j["m"] = m;
    j["r"] = r;
    j["mu"] = claims.mean();
    j["resources_exceed_claims"] = r > m * claims.mean();
    j["status"] = to_string(rep.status);
    j["regime"] = to_string(rep.regime.regime);
    j["critical"] = to_string(rep.regime.critical);
    j["subcritical_reproduction"] = rep.regime.subcritical_reproduction;
    j["tau"] = jnum(rep.tau);
    j["theta"] = jnum(rep.theta);
    j["F_tau"] = jnum(rep.f_tau);
    j["F_theta"] = jnum(rep.f_theta);
    j["wfs_value"] = jnum(rep.wfs_value);
    j["wfs_verdict"] = to_string(rep.regime.wfs.verdict);
    j["sfs_value"] = jnum(rep.sfs_value);
    j["sfs_verdict"] = to_string(rep.regime.sfs.verdict);
    j["lc_wfs_lhs"] = jnum(rep.lc_wfs_lhs);
    j["lc_wfs_rhs"] = jnum(rep.lc_wfs_rhs);
    j["lc_sfs_lhs"] = jnum(rep.lc_sfs_lhs);
    j["lc_sfs_rhs"] = jnum(rep.lc_sfs_rhs);
    j["lc_wfs_extinction"] = jopt(rep.lc_wfs_extinction);
    j["lc_sfs_survival"] = jopt(rep.lc_sfs_survival);
    j["forms_agree"] = rep.forms_agree;
    write_output(opt, j.dump(2) + "\n", out);
    return {kExitOk, "classify: " + to_string(rep.regime.regime) + " (m F(tau)=" + num(rep.wfs_value) +
                         ", m(1-F(theta))=" + num(rep.sfs_value) + ")"};
}

CommandResult cmd_solve_tau(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto& p = cfg.population;
    const auto& claims = need_claims(p, "");
    const double m = need_m(p, "");
    const double r = need_r(p, "");
    const auto tau = solve_tau(claims, m, r);
    const auto theta = solve_theta(claims, m, r);

    auto j = json_header("solve-tau", cfg, std::nullopt);
    j["claims"] = claims.describe();
    j["m"] = m;
    j["r"] = r;
    j["mu"] = claims.mean();
    if (!tau) {
        j["status"] = "case (b): no tau";
        j["tau"] = nullptr;
        j["theta"] = nullptr;
        write_output(opt, j.dump(2) + "\n", out);
        return {kExitDomainSignal, "solve-tau: case (b): no tau (r > m mu)"};
    }
    j["status"] = "ok";
    j["tau"] = jnum(tau);
    j["theta"] = jnum(theta);
    j["F_tau"] = claims.cdf(*tau);
    j["F_theta"] = claims.cdf(*theta);
    j["tau_residual"] = claims.partial_moment(*tau) - r / m;
    j["theta_residual"] = claims.mean() - claims.partial_moment(*theta) - r / m;
    write_output(opt, j.dump(2) + "\n", out);
    return {kExitOk, "solve-tau: tau=" + num(*tau) + " theta=" + num(*theta)};
}

CommandResult cmd_lorenz(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    std::optional<LorenzCurve> curve;
    const auto& kind = cfg.lorenz.curve;
    if (kind == "line-of-equality") {
        curve = LorenzCurve::line_of_equality();
    } else if (kind == "perfect-inequality") {
        curve = LorenzCurve::perfect_inequality();
    } else {
        const auto& claims = need_claims(cfg.population, "");
        if (kind == "empirical") {
            const auto* e = std::get_if<Empirical>(&claims.family());
            if (!e) throw ConfigError("lorenz.curve", "'empirical' needs an empirical claim distribution");
            curve = LorenzCurve::empirical(e->values);
        } else {
            curve = LorenzCurve::analytic(claims);
        }
    }

    std::vector<double> grid;
    if (!opt.grid.empty() && opt.grid.find_first_of(":,") == std::string::npos) {
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(opt.grid.data(), opt.grid.data() + opt.grid.size(), n);
        if (ec != std::errc{} || ptr != opt.grid.data() + opt.grid.size() || n < 2)
            throw ConfigError("--grid", "expected a point count >= 2, from:to:count, or a list");
        grid = unit_grid(n);
    } else if (opt.grid.empty() && cfg.lorenz.grid.empty()) {
        grid = unit_grid(101);
    } else {
        grid = grid_or(opt, cfg.lorenz.grid, "lorenz.grid");
    }
    for (double p : grid)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("lorenz.grid", "grid points must lie in [0, 1]");

    std::string csv = csv_header_comment("lorenz", cfg, std::nullopt);
    csv += "# curve=" + curve->describe() + "\n";
    csv += "p,lc\n";
    for (double p : grid) csv += num(p) + "," + num((*curve)(p)) + "\n";
    write_output(opt, csv, out);
    return {kExitOk, "lorenz: " + std::to_string(grid.size()) + " points of " + curve->describe() +
                         ", gini=" + num(gini(*curve))};
}

CommandResult cmd_sweep(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto& claims = need_claims(cfg.population, "");
    const double r = need_r(cfg.population, "");
    const auto m_grid = grid_or(opt, cfg.m_grid, "sweep.m_grid");
    std::vector<SweepRow> rows;
    try {
        rows = envelope_sweep(claims, r, m_grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(opt.grid.empty() ? "sweep.m_grid" : "--grid", e.what());
    }
    std::string csv = csv_header_comment("sweep", cfg, std::nullopt);
    csv += "m,inv_m,F_tau,F_theta,one_minus_F_theta,regime\n";
    std::map<Regime, int> tally;
    for (const auto& row : rows) {
        ++tally[row.regime];
        csv += num(row.m) + "," + num(row.inv_m) + "," + num(row.f_tau) + "," + num(row.f_theta) + "," +
               num(row.one_minus_f_theta) + "," + to_string(row.regime) + "\n";
    }
    write_output(opt, csv, out);
    std::string summary = "sweep: " + std::to_string(rows.size()) + " rows";
    for (const auto& [regime, n] : tally) summary += ", " + to_string(regime) + "=" + std::to_string(n);
    summary += ", policy-dependent span on 1/m=" + num(policy_dependent_span(rows));
    return {kExitOk, summary};
}

CommandResult cmd_simulate(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto params = need_population(cfg.population, "");
    const auto& policy = need_policy(cfg);
    const auto& sim = cfg.simulation;
    SimulationControls c;
    c.seed = need_seed(cfg, opt);
    c.ancestors = sim.ancestors.value_or(1);
    c.replicates = need_count(sim.replicates, "simulation.replicates");
    c.gen_cap = need_count(sim.gen_cap, "simulation.gen_cap");
    c.pop_cap = sim.pop_cap.value_or(kDefaultPopCap);
    c.threads = sim.threads.value_or(0);

    std::vector<Trajectory> runs;
    const auto est = estimate_extinction(params, policy, c, opt.trajectories.empty() ? nullptr : &runs);

    auto j = json_header("simulate", cfg, c.seed);
    j["policy"] = policy.name();
    j["claims"] = params.claims.describe();
    j["resources"] = params.resources.describe();
    j["m"] = params.m();
    j["r"] = params.r();
    j["ancestors"] = c.ancestors;
    j["replicates"] = est.replicates;
    j["gen_cap"] = c.gen_cap;
    j["pop_cap"] = c.pop_cap;
    j["q_hat"] = est.q_hat;
    j["half_width"] = est.half_width;
    j["extinct"] = est.extinct;
    j["alive_at_horizon"] = est.alive_at_horizon;
    j["censored"] = est.censored;
    j["censored_scored_as"] = "survived";
    j["censoring_bias"] = "q_hat underestimates extinction when censored > 0";
    write_output(opt, j.dump(2) + "\n", out);

    if (!opt.trajectories.empty()) {
        std::ofstream f(opt.trajectories, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("--trajectories", "cannot write " + opt.trajectories);
        f << csv_header_comment("simulate", cfg, c.seed);
        f << "replicate,generation,size\n";
        for (std::size_t i = 0; i < runs.size(); ++i)
            for (std::size_t n = 0; n < runs[i].sizes.size(); ++n)
                f << i << ',' << n << ',' << runs[i].sizes[n] << '\n';
    }
    return {kExitOk, "simulate: q_hat=" + num(est.q_hat) + " +/- " + num(est.half_width) + " over " +
                         std::to_string(est.replicates) + " replicates (censored " + std::to_string(est.censored) +
                         ", seed " + std::to_string(c.seed) + ")"};
}

CommandResult cmd_envelope_mc(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto params = need_population(cfg.population, "");
    const auto& policy = need_policy(cfg);
    const auto& sim = cfg.simulation;
    const auto seed = need_seed(cfg, opt);
    const auto replicates = need_count(sim.replicates, "simulation.replicates");
    const auto horizon = need_count(sim.horizon, "simulation.horizon");
    std::vector<std::uint64_t> grid = sim.ancestor_grid;
    if (!opt.grid.empty()) {
        grid.clear();
        std::vector<double> values;
        try {
            values = parse_grid_spec(opt.grid);
        } catch (const std::exception& e) {
            throw ConfigError("--grid", e.what());
        }
        for (double v : values) {
            if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("--grid", "ancestor counts must be positive integers");
            grid.push_back(static_cast<std::uint64_t>(v));
        }
    }
    if (grid.empty()) grid.push_back(sim.ancestors.value_or(1));

    const auto rows = envelopment_experiment(params, policy, grid, replicates, horizon, seed,
                                             sim.pop_cap.value_or(kDefaultPopCap), sim.threads.value_or(0));
    std::string csv = csv_header_comment("envelope-mc", cfg, seed);
    csv += "# policy=" + policy.name() + " horizon=" + std::to_string(horizon) +
           " pop_cap=" + std::to_string(sim.pop_cap.value_or(kDefaultPopCap)) + "\n";
    csv += "ancestors,replicates,holds,fraction,half_width\n";
    std::string summary = "envelope-mc:";
    for (const auto& row : rows) {
        csv += std::to_string(row.ancestors) + "," + std::to_string(row.replicates) + "," +
               std::to_string(row.holds) + "," + num(row.fraction) + "," + num(row.half_width) + "\n";
        summary += " L=" + std::to_string(row.ancestors) + ":" + num(row.fraction);
    }
    write_output(opt, csv, out);
    return {kExitOk, summary + " (seed " + std::to_string(seed) + ")"};
}

const ImmigrationSection& need_immigration(const ScenarioConfig& cfg) {
    if (!cfg.immigration) throw ConfigError("immigration", "required section is missing");
    return *cfg.immigration;
}

Subpopulation need_subpopulation(const PopulationSection& p, const std::string& scope) {
    return Subpopulation{need_m(p, scope), need_r(p, scope), need_claims(p, scope)};
}

CommandResult cmd_immigration_check(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto& im = need_immigration(cfg);
    ImmigrationScenario sc{need_subpopulation(im.home, "immigration.home"),
                           need_subpopulation(im.immigrant, "immigration.immigrant"), 0.0};
    if (!im.alpha) throw ConfigError("immigration.alpha", "required number is missing");
    sc.alpha = *im.alpha;
    const auto rep = check_equilibrium(sc, im.tolerance);

    auto j = json_header("immigration-check", cfg, std::nullopt);
    j["alpha"] = sc.alpha;
    j["tolerance"] = im.tolerance;
    j["home"] = {{"m", sc.home.m}, {"r", sc.home.r}, {"claims", sc.home.claims.describe()}};
    j["immigrant"] = {{"m", sc.immigrant.m}, {"r", sc.immigrant.r}, {"claims", sc.immigrant.claims.describe()}};
    if (!rep) {
        j["status"] = "resource surplus: no tau";
        write_output(opt, j.dump(2) + "\n", out);
        return {kExitDomainSignal, "immigration-check: resource surplus, no tau"};
    }
    j["status"] = "ok";
    j["tau"] = jnum(rep->tau);
    j["lhs"] = rep->lhs;
    j["rhs"] = rep->rhs;
    j["gap"] = rep->gap;
    j["condition_met"] = rep->condition_met;
    write_output(opt, j.dump(2) + "\n", out);
    return {kExitOk, std::string("immigration-check: ") + (rep->condition_met ? "condition met" : "condition not met") +
                         " (gap=" + num(rep->gap) + ")"};
}

CommandResult cmd_immigration_scan(const ScenarioConfig& cfg, const Options& opt, std::ostream& out) {
    const auto& im = need_immigration(cfg);
    const auto home = need_subpopulation(im.home, "immigration.home");
    const auto immigrant = need_subpopulation(im.immigrant, "immigration.immigrant");
    const auto grid = grid_or(opt, im.alpha_grid, "immigration.alpha_grid");
    AlphaScan scan;
    try {
        scan = scan_alpha(home, immigrant, grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(opt.grid.empty() ? "immigration.alpha_grid" : "--grid", e.what());
    }
    std::string csv = csv_header_comment("immigration-scan", cfg, std::nullopt);
    csv += "alpha,tau,lhs,rhs,gap\n";
    for (const auto& row : scan.rows) {
        if (row.report)
            csv += num(row.alpha) + "," + num(row.report->tau) + "," + num(row.report->lhs) + "," +
                   num(row.report->rhs) + "," + num(row.report->gap) + "\n";
        else
            csv += num(row.alpha) + ",NA,NA,NA,NA\n";
    }
    for (const auto& root : scan.roots)
        csv += "# root alpha=" + num(root.alpha) + " tau=" + num(root.report.tau) + " gap=" + num(root.report.gap) +
               " converged=" + (root.converged ? "true" : "false") + "\n";
    write_output(opt, csv, out);
    return {kExitOk, "immigration-scan: " + std::to_string(scan.rows.size()) + " alphas, " +
                         std::to_string(scan.brackets.size()) + " sign changes, " +
                         std::to_string(scan.roots.size()) + " roots"};
}

void print_violations(const std::vector<Violation>& vs, std::ostream& err) {
    for (const auto& v : vs) err << "error: " << (v.path.empty() ? "<config>" : v.path) << ": " << v.message << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resource dependent branching process toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Options opt;
    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"classify", {"Regime classification with both criterion forms (JSON)", cmd_classify}},
        {"solve-tau", {"Solve the claim thresholds tau and theta (JSON)", cmd_solve_tau}},
        {"lorenz", {"Lorenz curve samples p,LC(p) (CSV)", cmd_lorenz}},
        {"sweep", {"Regime per m over a grid (CSV)", cmd_sweep}},
        {"simulate", {"Monte Carlo extinction estimate (JSON, optional trajectory CSV)", cmd_simulate}},
        {"envelope-mc", {"Coupled S <= Gamma <= W experiment per ancestor count (CSV)", cmd_envelope_mc}},
        {"immigration-check", {"Equilibrium condition for one alpha (JSON)", cmd_immigration_check}},
        {"immigration-scan", {"Equilibrium gap over an alpha grid (CSV)", cmd_immigration_scan}},
    };

    std::map<CLI::App*, const Command*> dispatch;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", opt.config, "Scenario config (JSON)")->required();
        sub->add_option("--out", opt.out, "Output file (default stdout)");
        sub->add_option("--seed", opt.seed, "Seed, overrides simulation.seed");
        sub->add_option("--grid", opt.grid, "Grid spec: from:to:count or a,b,c");
        if (name == "simulate") sub->add_option("--trajectories", opt.trajectories, "Trajectory CSV path");
        dispatch[sub] = &entry.second;
    }
    auto* validate = app.add_subcommand("validate", "List every invariant violation in a config");
    validate->add_option("--config", opt.config, "Scenario config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const auto parsed = load_config(opt.config);

    if (validate->parsed()) {
        if (parsed.unreadable) {
            print_violations(parsed.violations, err);
            return kExitConfigError;
        }
        for (const auto& v : parsed.violations) out << (v.path.empty() ? "<config>" : v.path) << ": " << v.message << "\n";
        if (parsed.violations.empty()) {
            out << "ok: no violations\n";
            return kExitOk;
        }
        return kExitViolations;
    }

    if (!parsed.violations.empty()) {
        print_violations(parsed.violations, err);
        return kExitConfigError;
    }

    for (const auto& [sub, command] : dispatch) {
        if (!sub->parsed()) continue;
        try {
            const auto result = (*command)(parsed.config, opt, out);
            (opt.out.empty() || opt.out == "-" ? err : out) << result.summary << "\n";
            return result.code;
        } catch (const ConfigError& e) {
            print_violations(e.violations, err);
            return kExitConfigError;
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << "\n";
            return kExitConfigError;
        }
    }
    return kExitConfigError;
}

}  // namespace rdbp
