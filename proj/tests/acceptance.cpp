// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdbp/criteria.hpp"
#include "rdbp/distributions.hpp"
#include "rdbp/engine.hpp"
#include "rdbp/immigration.hpp"
#include "rdbp/lorenz.hpp"

using namespace rdbp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1. sfs <= any prefix order <= wfs for every permutation of small claim sets.
Outcome counting_sandwich() {
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t orders = 0;
    std::size_t violations = 0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t t = 1 + gen() % 8;
        std::vector<double> claims(t);
        for (double& x : claims) x = unit(gen) * (inst % 3 == 0 ? 10.0 : 1.0);
        double budget;
        if (inst % 2 == 0) {
            budget = unit(gen) * std::accumulate(claims.begin(), claims.end(), 0.0) * 1.1;
        } else {
            // exactly on a partial sum of an arbitrary subset order
            std::vector<double> shuffled = claims;
            std::shuffle(shuffled.begin(), shuffled.end(), gen);
            budget = 0.0;
            for (std::size_t k = 0; k <= gen() % t; ++k) budget += shuffled[k];
        }
        const auto lo = sfs_count(claims, budget);
        const auto hi = wfs_count(claims, budget);
        std::vector<std::size_t> order(t);
        std::iota(order.begin(), order.end(), std::size_t{0});
        do {
            const auto k = prefix_count(claims, order, budget);
            violations += (k < lo || k > hi);
            ++orders;
        } while (std::next_permutation(order.begin(), order.end()));
    }
    return {violations == 0, std::to_string(orders) + " orders over 500 instances, " + std::to_string(violations) +
                                 " violations"};
}

struct Family {
    std::string name;
    Distribution dist;
};

std::vector<Family> families() {
    return {{"uniform(0,1)", Distribution::uniform(0, 1)},
            {"exponential(1)", Distribution::exponential(1)},
            {"pareto(1,2)", Distribution::pareto(1, 2)}};
}

// 2. LC(F(tau)) = r/(m mu) and LC(F(theta)) = 1 - r/(m mu).
Outcome solver_lc_identity() {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (const auto& [name, d] : families()) {
        const auto lc = LorenzCurve::analytic(d);
        const double mu = d.mean();
        for (int i = 0; i < 100; ++i) {
            const double m = 0.5 + 19.5 * unit(gen);
            const double r = unit(gen) * m * mu;
            const auto tau = solve_tau(d, m, r);
            const auto theta = solve_theta(d, m, r);
            if (!tau || !theta) return {false, name + ": solver returned no threshold with r <= m mu"};
            worst = std::max(worst, std::abs(lc(d.cdf(*tau)) - r / (m * mu)));
            worst = std::max(worst, std::abs(lc(d.cdf(*theta)) - (1 - r / (m * mu))));
        }
    }
    return {worst <= 1e-9, "max deviation " + fmt("%.3g", worst) + " over 300 configurations (tol 1e-9)"};
}

// 3. CDF-form and Lorenz-form verdicts agree outside the critical band.
Outcome verdict_equivalence() {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto fams = families();
    fams.push_back({"near-degenerate(0.5,1e-3)", Distribution::near_degenerate(0.5, 1e-3)});
    int configs = 0;
    int compared = 0;
    int disagreements = 0;
    while (configs < 100) {
        const auto& d = fams[gen() % fams.size()].dist;
        const double mu = d.mean();
        const double m = 1.01 + 14 * unit(gen);
        const double r = unit(gen) * m * mu;
        const auto wfs = wfs_criterion(d, m, r);
        const auto sfs = sfs_criterion(d, m, r);
        if (std::abs(*wfs.value - 1) <= kCriticalBand || std::abs(*sfs.value - 1) <= kCriticalBand) continue;
        ++configs;
        const auto lc = LorenzCurve::analytic(d);
        const bool cdf_wfs_extinct = *wfs.value < 1;
        const bool lc_wfs_extinct = lc(1 / m) > r / (m * mu);
        const bool cdf_sfs_survive = *sfs.value > 1;
        const bool lc_sfs_survive = lc(1 - 1 / m) > 1 - r / (m * mu);
        disagreements += (cdf_wfs_extinct != lc_wfs_extinct) + (cdf_sfs_survive != lc_sfs_survive);
        compared += 2;
        // the report must agree with the direct evaluation
        const auto rep = lc_criterion_check(d, m, r);
        disagreements += !rep.forms_agree;
        disagreements += (*rep.lc_wfs_extinction != lc_wfs_extinct) + (*rep.lc_sfs_survival != lc_sfs_survive);
    }
    return {disagreements == 0, std::to_string(configs) + " configurations, " + std::to_string(compared) +
                                    " verdict pairs, " + std::to_string(disagreements) + " disagreements"};
}

PopulationParams uniform_population(std::vector<double> reproduction, double r) {
    return PopulationParams(ReproductionLaw(std::move(reproduction)), Distribution::constant(r),
                            Distribution::uniform(0, 1));
}

std::vector<double> two_point(std::size_t k) {
    std::vector<double> p(k + 1, 0.0);
    p[0] = 0.5;
    p[k] = 0.5;
    return p;
}

// 4. Sure-extinction regime under weakest-first service.
Outcome extinction_regime() {
    const auto params = uniform_population({0.4, 0.0, 0.6}, 0.05);  // m = 1.2
    const auto cls = classify_regime(params);
    SimulationControls c;
    c.ancestors = 20;
    c.replicates = 500;
    c.gen_cap = 300;
    c.seed = 4;
    const auto est = estimate_extinction(params, Policy::weakest_first(), c);
    const bool ok = cls.regime == Regime::SureExtinction &&
                    std::abs(*cls.wfs.value - 0.346410161513775446) <= 1e-12 && est.q_hat >= 0.99;
    return {ok, "m F(tau)=" + fmt("%.6f", *cls.wfs.value) + " (" + to_string(cls.regime) + "), extinct fraction " +
                    fmt("%.4f", est.q_hat) + " of 500 (need >= 0.99)"};
}

// 5. Sure-survival regime under strongest-first service.
Outcome survival_regime() {
    const auto params = uniform_population(two_point(20), 1.0);  // m = 10
    const auto cls = classify_regime(params);
    SimulationControls c;
    c.ancestors = 200;
    c.replicates = 200;
    c.gen_cap = 100;
    c.pop_cap = 1'000'000;
    c.seed = 5;
    const auto est = estimate_extinction(params, Policy::strongest_first(), c);
    const double surviving = 1.0 - est.q_hat;
    const bool ok = cls.regime == Regime::SureSurvival &&
                    std::abs(*cls.sfs.value - 1.05572809000084097) <= 1e-12 && surviving >= 0.90;
    return {ok, "m(1-F(theta))=" + fmt("%.6f", *cls.sfs.value) + " (" + to_string(cls.regime) +
                    "), surviving fraction " + fmt("%.4f", surviving) + " (censored at pop cap " +
                    std::to_string(est.censored) + ", alive at horizon " + std::to_string(est.alive_at_horizon) +
                    "; need >= 0.90)"};
}

// 6. Unlimited resources reduce to a Galton-Watson process.
Outcome galton_watson_limit() {
    const PopulationParams params(ReproductionLaw({0.25, 0.0, 0.75}), Distribution::constant(1e9),
                                  Distribution::uniform(0, 1));
    // smallest root of q = 0.25 + 0.75 q^2
    const double q = 1.0 / 3.0;
    SimulationControls c;
    c.ancestors = 1;
    c.replicates = 10'000;
    c.gen_cap = 200;
    c.pop_cap = 10'000;  // a line of 10^4 dies out with probability (1/3)^(10^4)
    c.seed = 6;
    const auto est = estimate_extinction(params, Policy::weakest_first(), c);
    return {std::abs(est.q_hat - q) <= 0.02, "q_hat=" + fmt("%.4f", est.q_hat) + " vs 1/3 (tol 0.02), half-width " +
                                                   fmt("%.4f", est.half_width)};
}

// 7. Nearly equal claims: F(tau) and 1 - F(theta) meet at r/(m mu).
Outcome perfect_equality_limit() {
    const auto d = Distribution::near_degenerate(0.5, 1e-3);
    const double m = 4;
    const double r = 0.5;
    const double target = r / (m * d.mean());
    const double f_tau = d.cdf(*solve_tau(d, m, r));
    const double upper = 1 - d.cdf(*solve_theta(d, m, r));

    std::vector<double> grid;
    for (int i = 0; i < 200; ++i) grid.push_back(1.05 + 0.1 * i);
    const auto rows = envelope_sweep(d, r, grid);
    double band = 0.0;
    for (const auto& row : rows) band = std::max(band, policy_band_width(row));
    const auto at_four = envelope_sweep(d, r, std::vector<double>{m});
    const double band_at_four = policy_band_width(at_four[0]);

    const bool ok = std::abs(f_tau - target) <= 1e-2 && std::abs(upper - target) <= 1e-2 && band <= 2e-2;
    return {ok, "F(tau)=" + fmt("%.6f", f_tau) + ", 1-F(theta)=" + fmt("%.6f", upper) + " vs " + fmt("%.4f", target) +
                    "; policy-dependent interval [1-F(theta), F(tau)] width " + fmt("%.2e", band_at_four) +
                    " at m=4, max " + fmt("%.2e", band) + " over 200 sweep rows (tol 2e-2)"};
}

// 8. The sandwich S <= Gamma <= W becomes more likely with more ancestors.
Outcome envelopment_growth() {
    const auto params = uniform_population(two_point(8), 0.5);  // m = 4
    const std::vector<std::uint64_t> grid{10, 1000};
    const auto rows = envelopment_experiment(params, Policy::arrival_order(), grid, 200, 50, 8);
    const bool ok = rows[1].fraction >= rows[0].fraction && rows[1].fraction >= 0.95;
    return {ok, "fraction at L=10: " + fmt("%.3f", rows[0].fraction) + ", at L=1000: " + fmt("%.3f", rows[1].fraction) +
                    " (need monotone and >= 0.95)"};
}

// 9. Empirical Lorenz curves from seeded draws track the analytic curves.
Outcome empirical_lorenz() {
    const std::vector<Family> fams{{"uniform(0,1)", Distribution::uniform(0, 1)},
                                   {"uniform(1,3)", Distribution::uniform(1, 3)},
                                   {"exponential(1)", Distribution::exponential(1)},
                                   {"pareto(1,2)", Distribution::pareto(1, 2)},
                                   {"pareto(1,3)", Distribution::pareto(1, 3)},
                                   {"near-degenerate(0.5,1e-3)", Distribution::near_degenerate(0.5, 1e-3)}};
    const auto grid = unit_grid(20001);
    bool ok = true;
    std::string detail;
    std::uint64_t run = 0;
    for (const auto& [name, d] : fams) {
        const auto sample = sample_stream(d, CounterRng(9), run++, 100'000);
        const auto emp = LorenzCurve::empirical(sample);
        const auto ana = LorenzCurve::analytic(d);
        double sup = 0.0;
        for (double p : grid) sup = std::max(sup, std::abs(emp(p) - ana(p)));
        ok = ok && sup <= 0.01;
        detail += (detail.empty() ? "" : ", ") + name + " " + fmt("%.4f", sup);
    }
    return {ok, "sup distance " + detail + " (tol 0.01)"};
}

// 10. Immigration equation: alpha = 0 and pooling reductions.
Outcome immigration_reductions() {
    const std::vector<Distribution> laws{Distribution::uniform(0, 1), Distribution::exponential(1),
                                         Distribution::pareto(1, 2)};
    double worst_zero = 0.0;
    double worst_pool = 0.0;
    for (const auto& fh : laws) {
        for (const auto& fi : laws) {
            const Subpopulation home{3.0, 0.45 * 3.0 * fh.mean(), fh};
            const Subpopulation imm{2.0, 0.7, fi};
            const auto rep = check_equilibrium({home, imm, 0.0});
            worst_zero = std::max(worst_zero, std::abs(rep->tau - *solve_tau(fh, home.m, home.r)));
            worst_zero = std::max(worst_zero, std::abs(rep->lhs - *wfs_criterion(fh, home.m, home.r).value));
        }
        const double m = 2.5;
        const double rh = 0.3 * m * fh.mean();
        const double ri = 0.8 * m * fh.mean();
        for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
            const auto tau = solve_tau_mixed({{m, rh, fh}, {m, ri, fh}, alpha});
            const double r_eff = (rh + alpha * ri) / (1 + alpha);
            worst_pool = std::max(worst_pool, std::abs(*tau - *solve_tau(fh, m, r_eff)));
        }
    }
    return {worst_zero <= 1e-10 && worst_pool <= 1e-10,
            "alpha=0 max deviation " + fmt("%.3g", worst_zero) + ", pooling max deviation " + fmt("%.3g", worst_pool) +
                " (tol 1e-10)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 11. Every stochastic subcommand is byte-reproducible from its seed.
Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "rdbp_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cfg = dir / "scenario.json";
    std::ofstream(cfg) << R"({
  "schema_version": 1,
  "claims": {"family": "uniform", "a": 0, "b": 1},
  "reproduction": {"pmf": {"0": 0.5, "8": 0.5}},
  "resources": {"family": "exponential", "mean": 0.5},
  "policy": "alternating",
  "simulation": {"ancestors": 10, "replicates": 60, "gen_cap": 25, "pop_cap": 20000, "horizon": 12,
                 "seed": 2024, "ancestor_grid": [1, 10, 100]}
})";
    struct Job {
        std::string command;
        std::string extra;
        std::vector<std::string> files;
    };
    const std::vector<Job> jobs{{"simulate", "--trajectories {dir}/traj{run}.csv", {"simulate{run}.json", "traj{run}.csv"}},
                                {"envelope-mc", "", {"envelope{run}.csv"}}};
    auto expand = [&](std::string s, int run) {
        for (auto [key, value] : {std::pair<std::string, std::string>{"{dir}", dir.string()},
                                  {"{run}", std::to_string(run)}}) {
            for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key)) s.replace(pos, key.size(), value);
        }
        return s;
    };
    std::string detail;
    bool ok = true;
    for (const auto& job : jobs) {
        for (int run = 0; run < 2; ++run) {
            const std::string cmd = std::string("\"") + RDBP_CLI + "\" " + job.command + " --config \"" +
                                    cfg.string() + "\" --out \"" + (dir / expand(job.files[0], run)).string() + "\" " +
                                    expand(job.extra, run) + " >/dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return {false, job.command + " exited nonzero"};
        }
        for (const auto& f : job.files) {
            const auto a = slurp(dir / expand(f, 0));
            const auto b = slurp(dir / expand(f, 1));
            const bool same = !a.empty() && a == b && a.find("2024") != std::string::npos;
            ok = ok && same;
            detail += (detail.empty() ? "" : ", ") + expand(f, 0) + (same ? " identical" : " DIFFERS");
        }
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"counting sandwich over all priority orders", counting_sandwich},
        {"solver and Lorenz-curve identity", solver_lc_identity},
        {"CDF-form and Lorenz-form verdict equivalence", verdict_equivalence},
        {"extinction regime Monte Carlo", extinction_regime},
        {"survival regime Monte Carlo", survival_regime},
        {"Galton-Watson limit", galton_watson_limit},
        {"perfect-equality limit", perfect_equality_limit},
        {"envelopment fraction growth", envelopment_growth},
        {"empirical Lorenz consistency", empirical_lorenz},
        {"immigration reductions", immigration_reductions},
        {"determinism of stochastic subcommands", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
