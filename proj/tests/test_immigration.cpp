#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rdbp/criteria.hpp"
#include "rdbp/immigration.hpp"

using namespace rdbp;

namespace {

Subpopulation sub(double m, double r, Distribution claims) { return {m, r, std::move(claims)}; }

std::vector<double> alpha_grid(double to, int points) {
    std::vector<double> g;
    for (int i = 0; i < points; ++i) g.push_back(to * i / (points - 1));
    return g;
}

}  // namespace

TEST_CASE("symmetric scenarios") {
    const auto u = sub(4, 0.5, Distribution::uniform(0, 1));
    for (double alpha : {1.0, 3.0}) {
        const ImmigrationScenario sc{u, u, alpha};
        CHECK(*solve_tau_mixed(sc) == doctest::Approx(0.5).epsilon(1e-13));
        const auto rep = *check_equilibrium(sc);
        CHECK(rep.lhs == doctest::Approx(2.0));
        CHECK(rep.gap == 0.0);
        CHECK(rep.condition_met);
    }
}

TEST_CASE("subcritical symmetric case fails the lower bound") {
    const auto u = sub(1.2, 0.05, Distribution::uniform(0, 1));
    const auto rep = *check_equilibrium({u, u, 2.0});
    CHECK(rep.gap == 0.0);
    CHECK(rep.lhs == doctest::Approx(0.346410161513775446).epsilon(1e-12));
    CHECK_FALSE(rep.condition_met);
}

TEST_CASE("mixed uniform and exponential claims") {
    const ImmigrationScenario sc{sub(2, 0.3, Distribution::uniform(0, 1)), sub(2, 0.3, Distribution::exponential(1)),
                                 1.0};
    const auto rep = *check_equilibrium(sc);
    CHECK(rep.tau == doctest::Approx(0.597951178732090319).epsilon(1e-12));
    CHECK(rep.lhs == doctest::Approx(1.19590235746418064).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(0.900125588604254069).epsilon(1e-12));
    CHECK(rep.gap == doctest::Approx(0.295776768859926570).epsilon(1e-12));
    CHECK_FALSE(rep.condition_met);
}

TEST_CASE("resource surplus is reported, not thrown") {
    const auto u = sub(2, 5, Distribution::uniform(0, 1));
    CHECK_FALSE(solve_tau_mixed({u, u, 1.0}).has_value());
    CHECK_FALSE(check_equilibrium({u, u, 1.0}).has_value());
}

TEST_CASE("residual of the mixed equation") {
    oracle::TestRng rng(8);
    const std::vector<Distribution> laws{Distribution::uniform(0, 1), Distribution::exponential(1.5),
                                         Distribution::pareto(1, 2.5), Distribution::uniform(0, 2)};
    for (int i = 0; i < 200; ++i) {
        const auto& fh = laws[rng.below(laws.size())];
        const auto& fi = laws[rng.below(laws.size())];
        const double mh = rng.uniform(1, 6);
        const double mi = rng.uniform(1, 6);
        const double alpha = rng.uniform(0, 5);
        const double cap = mh * fh.mean() + alpha * mi * fi.mean();
        const double share = rng.uniform(0.01, 0.99);
        const double rh = share * mh * fh.mean();
        const double ri = share * mi * fi.mean();
        const ImmigrationScenario sc{sub(mh, rh, fh), sub(mi, ri, fi), alpha};
        const double tau = *solve_tau_mixed(sc);
        const double lhs = mh * fh.partial_moment(tau) + alpha * mi * fi.partial_moment(tau);
        CHECK(std::abs(lhs - (rh + alpha * ri)) <= 1e-12 * std::max(1.0, cap));
    }
}

TEST_CASE("alpha = 0 reduces to the single population") {
    const std::vector<Distribution> laws{Distribution::uniform(0, 1), Distribution::exponential(1),
                                         Distribution::pareto(1, 2)};
    for (const auto& fh : laws)
        for (const auto& fi : laws) {
            const auto home = sub(3, 0.4 * fh.mean() * 3, fh);
            const auto rep = *check_equilibrium({home, sub(2, 0.7, fi), 0.0});
            const double tau = *solve_tau(fh, 3, home.r);
            CHECK(std::abs(rep.tau - tau) <= 1e-10);
            CHECK(std::abs(rep.lhs - *wfs_criterion(fh, 3, home.r).value) <= 1e-10);
        }
}

TEST_CASE("pooling identity for equal laws and equal reproduction") {
    for (const auto& f : {Distribution::uniform(0, 1), Distribution::exponential(2), Distribution::pareto(1, 3)}) {
        const double m = 2.5;
        const double rh = 0.3 * m * f.mean();
        const double ri = 0.7 * m * f.mean();
        for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
            const double tau = *solve_tau_mixed({sub(m, rh, f), sub(m, ri, f), alpha});
            const double r_eff = (rh + alpha * ri) / (1 + alpha);
            CHECK(std::abs(tau - *solve_tau(f, m, r_eff)) <= 1e-10);
        }
    }
}

TEST_CASE("scan over alpha") {
    SUBCASE("identical subpopulations have no gap") {
        const auto u = sub(4, 0.5, Distribution::uniform(0, 1));
        const auto grid = alpha_grid(5, 11);
        const auto scan = scan_alpha(u, u, grid);
        REQUIRE(scan.rows.size() == 11);
        for (const auto& row : scan.rows) CHECK(row.report->gap == 0.0);
        CHECK(scan.brackets.empty());
        CHECK(scan.roots.size() == 11);
    }
    SUBCASE("sign change is refined to a root") {
        // immigrant resources chosen so that its own threshold is 1/2
        const auto home = sub(2, 0.81, Distribution::uniform(0, 1));
        const auto imm = sub(3, 0.270612031293149594, Distribution::exponential(1));
        const auto grid = alpha_grid(20, 41);
        const auto scan = scan_alpha(home, imm, grid);
        CHECK(scan.rows.front().report->gap > 0);
        CHECK(scan.rows.back().report->gap < 0);
        REQUIRE(scan.brackets.size() == 1);
        REQUIRE(scan.roots.size() == 1);
        const auto& root = scan.roots[0];
        CHECK(root.converged);
        CHECK(root.alpha > grid[scan.brackets[0].first]);
        CHECK(root.alpha < grid[scan.brackets[0].second]);
        const auto recheck = *check_equilibrium({home, imm, root.alpha});
        CHECK(std::abs(recheck.gap) <= 1e-10);
        CHECK(recheck.condition_met);
    }
    SUBCASE("any reported root rechecks to zero gap") {
        const auto home = sub(4, 0.5, Distribution::uniform(0, 1));
        const auto imm = sub(2.2, 0.5, Distribution::uniform(0, 2));
        const auto scan = scan_alpha(home, imm, alpha_grid(10, 101));
        CHECK(scan.rows.size() == 101);
        for (const auto& root : scan.roots) {
            CHECK(std::abs(check_equilibrium({home, imm, root.alpha})->gap) <= 1e-10);
        }
    }
    SUBCASE("single point grid") {
        const auto home = sub(4, 0.5, Distribution::uniform(0, 1));
        const auto imm = sub(2.2, 0.5, Distribution::uniform(0, 2));
        const std::vector<double> one{1.0};
        const auto scan = scan_alpha(home, imm, one);
        CHECK(scan.rows.size() == 1);
        CHECK(scan.brackets.empty());
    }
}
