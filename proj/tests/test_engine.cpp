#include <algorithm>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "rdbp/engine.hpp"

using namespace rdbp;

namespace {

PopulationParams constant_params(std::size_t offspring, double claim, double production) {
    return PopulationParams(ReproductionLaw::constant(offspring), Distribution::constant(production),
                            Distribution::constant(claim));
}

PopulationParams uniform_params(std::vector<double> probs, double r) {
    return PopulationParams(ReproductionLaw(std::move(probs)), Distribution::constant(r), Distribution::uniform(0, 1));
}

}  // namespace

TEST_CASE("counting examples") {
    const std::vector<double> c{0.3, 0.5, 0.9};
    CHECK(wfs_count(c, 1.0) == 2);
    CHECK(sfs_count(c, 1.0) == 1);
    CHECK(wfs_count(c, 0.2) == 0);
    CHECK(sfs_count(c, 0.8) == 0);
    CHECK(wfs_count(c, 1.7) == 3);
    CHECK(sfs_count(c, 5.0) == 3);
    CHECK(wfs_count(std::vector<double>{}, 3.0) == 0);

    const std::vector<double> arrival{0.9, 0.3, 0.5};
    CHECK(policy_count(Policy::arrival_order(), arrival, 1.0) == 1);
    CHECK(policy_count(Policy::reverse_arrival(), arrival, 1.0) == 2);
    CHECK(policy_count(Policy::alternating(), arrival, 1.0) == 1);
    for (const auto& name : {"weakest-first", "strongest-first", "arrival", "reverse-arrival", "alternating"}) {
        CHECK(policy_count(Policy::from_name(name), std::vector<double>{}, 1.0) == 0);
        CHECK(policy_count(Policy::from_name(name), arrival, 0.0) == 0);
    }
    CHECK_THROWS_AS(Policy::from_name("random"), std::invalid_argument);
}

TEST_CASE("policy orders") {
    const std::vector<double> c{0.5, 0.1, 0.5, 0.9, 0.2};
    CHECK(Policy::weakest_first().order(c) == std::vector<std::size_t>{1, 4, 0, 2, 3});
    CHECK(Policy::strongest_first().order(c) == std::vector<std::size_t>{3, 0, 2, 4, 1});
    CHECK(Policy::alternating().order(c) == std::vector<std::size_t>{1, 3, 4, 2, 0});
    CHECK(Policy::reverse_arrival().order(c) == std::vector<std::size_t>{4, 3, 2, 1, 0});

    const auto bad = Policy::custom("bad", [](std::span<const double> x) {
        return std::vector<std::size_t>(x.size(), 0);
    });
    CHECK_THROWS_AS(bad.order(c), std::logic_error);
}

TEST_CASE("sandwich over every priority order") {
    oracle::TestRng rng(1);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t t = 1 + rng.below(7);
        std::vector<double> claims(t);
        for (double& x : claims) x = rng.uniform(0, 1);
        const double s = rng.uniform(0, 1.2 * static_cast<double>(t) * 0.5);
        const auto lo = sfs_count(claims, s);
        const auto hi = wfs_count(claims, s);
        oracle::for_each_permutation(t, [&](const std::vector<std::size_t>& order) {
            const auto k = prefix_count(claims, order, s);
            CHECK(lo <= k);
            CHECK(k <= hi);
        });
    }
}

TEST_CASE("sandwich holds exactly at budgets equal to prefix sums") {
    // budgets that sit exactly on a partial sum are where naive summation order matters
    oracle::TestRng rng(2);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t t = 2 + rng.below(5);
        std::vector<double> claims(t);
        for (double& x : claims) x = rng.uniform(0, 1);
        std::vector<double> sorted = claims;
        std::sort(sorted.begin(), sorted.end());
        double s = 0;
        for (std::size_t k = 0; k < 1 + rng.below(t); ++k) s += sorted[k];
        const auto lo = sfs_count(claims, s);
        const auto hi = wfs_count(claims, s);
        oracle::for_each_permutation(t, [&](const std::vector<std::size_t>& order) {
            const auto k = prefix_count(claims, order, s);
            CHECK(lo <= k);
            CHECK(k <= hi);
        });
    }
}

TEST_CASE("large claim sets match a sorted scan") {
    // multiples of 1/1024 below 64 keep every partial sum exact in double
    oracle::TestRng rng(12);
    for (int inst = 0; inst < 300; ++inst) {
        const std::size_t t = 33 + rng.below(3000);
        std::vector<double> claims(t);
        for (double& x : claims) x = static_cast<double>(rng.below(64 * 1024)) / 1024;
        auto asc = claims;
        std::sort(asc.begin(), asc.end());
        auto scan = [](const std::vector<double>& sorted, double s) {
            double sum = 0;
            for (std::size_t i = 0; i < sorted.size(); ++i)
                if ((sum += sorted[i]) > s) return i;
            return sorted.size();
        };
        const std::vector<double> desc(asc.rbegin(), asc.rend());
        double s = 0;
        if (inst % 2 == 0) {
            for (std::size_t k = 0; k < rng.below(t); ++k) s += (inst % 4 == 0 ? asc : desc)[k];
        } else {
            s = static_cast<double>(rng.below(1 << 20)) / 1024 * static_cast<double>(t) / 64;
        }
        CHECK(wfs_count(claims, s) == scan(asc, s));
        CHECK(sfs_count(claims, s) == scan(desc, s));
    }
}

TEST_CASE("count monotonicity and permutation invariance") {
    oracle::TestRng rng(3);
    for (int inst = 0; inst < 300; ++inst) {
        const std::size_t t = rng.below(12);
        std::vector<double> claims(t);
        for (double& x : claims) x = rng.uniform(0, 2);
        const double s1 = rng.uniform(0, 5);
        const double s2 = s1 + rng.uniform(0, 3);
        CHECK(wfs_count(claims, s1) <= wfs_count(claims, s2));
        CHECK(sfs_count(claims, s1) <= sfs_count(claims, s2));

        auto more = claims;
        more.push_back(rng.uniform(0, 2));
        CHECK(wfs_count(claims, s1) <= wfs_count(more, s1));

        auto shuffled = claims;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        CHECK(wfs_count(shuffled, s1) == wfs_count(claims, s1));
        CHECK(sfs_count(shuffled, s1) == sfs_count(claims, s1));
        CHECK(policy_count(Policy::weakest_first(), claims, s1) == wfs_count(claims, s1));
        CHECK(policy_count(Policy::strongest_first(), claims, s1) == sfs_count(claims, s1));
    }
}

TEST_CASE("step examples") {
    const CounterRng rng(1);
    auto r = step(1, constant_params(2, 1, 1.5), Policy::weakest_first(), rng, 0, 0);
    CHECK(r.descendants == 2);
    CHECK(r.budget == 1.5);
    CHECK(r.next == 1);
    r = step(1, constant_params(2, 1, 2.5), Policy::weakest_first(), rng, 0, 0);
    CHECK(r.next == 2);
    r = step(0, constant_params(2, 1, 2.5), Policy::weakest_first(), rng, 0, 0);
    CHECK(r.next == 0);
    CHECK(r.descendants == 0);
    r = step(10, constant_params(2, 1, 2.5), Policy::weakest_first(), rng, 0, 0, 15);
    CHECK(r.cap_reached);
}

TEST_CASE("trajectories are absorbing and deterministic") {
    const auto params = uniform_params({0.4, 0, 0.6}, 0.3);
    const CounterRng rng(77);
    for (std::uint64_t run = 0; run < 50; ++run) {
        const auto a = simulate_trajectory(params, Policy::arrival_order(), 5, 60, 100000, rng, run);
        const auto b = simulate_trajectory(params, Policy::arrival_order(), 5, 60, 100000, rng, run);
        CHECK(a.sizes == b.sizes);
        CHECK(a.sizes.front() == 5);
        const auto zero = std::find(a.sizes.begin(), a.sizes.end(), 0u);
        if (zero != a.sizes.end()) {
            CHECK(a.outcome == Trajectory::Outcome::Extinct);
            CHECK(std::all_of(zero, a.sizes.end(), [](auto v) { return v == 0; }));
            CHECK(a.at_generation == static_cast<std::uint64_t>(zero - a.sizes.begin()));
        }
    }
}

TEST_CASE("pop cap ends a trajectory") {
    const auto params = constant_params(3, 0.1, 10);
    const auto t = simulate_trajectory(params, Policy::weakest_first(), 1, 100, 1000, CounterRng(1), 0);
    CHECK(t.outcome == Trajectory::Outcome::PopCapReached);
    CHECK(t.sizes.back() <= 1000);
}

TEST_CASE("extinction estimates") {
    SimulationControls ctl;
    ctl.replicates = 200;
    ctl.seed = 5;
    ctl.gen_cap = 50;

    const auto dead = estimate_extinction(uniform_params({1.0}, 1.0), Policy::weakest_first(), ctl);
    CHECK(dead.q_hat == 1.0);
    CHECK(dead.extinct == 200);
    CHECK(dead.half_width == 0.0);

    const auto gw = PopulationParams(ReproductionLaw({0.25, 0, 0.75}), Distribution::constant(1e9),
                                     Distribution::uniform(0, 1));
    ctl.replicates = 4000;
    // a line of 10^4 dies out with probability (1/3)^(10^4)
    ctl.pop_cap = 10000;
    const auto est = estimate_extinction(gw, Policy::weakest_first(), ctl);
    CHECK(std::abs(est.q_hat - oracle::extinction_fixed_point({0.25, 0, 0.75})) <= 0.03);
    CHECK(est.extinct + est.alive_at_horizon + est.censored == est.replicates);
    CHECK(est.half_width == doctest::Approx(binomial_half_width(est.q_hat, est.replicates)));
}

TEST_CASE("estimates do not depend on the thread count") {
    const auto params = uniform_params({0.4, 0, 0.6}, 0.3);
    SimulationControls ctl;
    ctl.replicates = 300;
    ctl.ancestors = 3;
    ctl.gen_cap = 40;
    ctl.seed = 99;
    std::vector<Trajectory> one;
    std::vector<Trajectory> many;
    ctl.threads = 1;
    const auto a = estimate_extinction(params, Policy::alternating(), ctl, &one);
    ctl.threads = 7;
    const auto b = estimate_extinction(params, Policy::alternating(), ctl, &many);
    CHECK(a.extinct == b.extinct);
    CHECK(a.censored == b.censored);
    REQUIRE(one.size() == many.size());
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].sizes == many[i].sizes);
}

TEST_CASE("envelopment experiment") {
    const auto params = uniform_params({0.5, 0, 0, 0, 0, 0, 0, 0, 0.5}, 0.5);
    const std::vector<std::uint64_t> grid{1, 5, 20};

    // one generation: the sandwich is the deterministic rearrangement property
    for (const auto& policy : {Policy::arrival_order(), Policy::alternating(), Policy::reverse_arrival()}) {
        const auto rows = envelopment_experiment(params, policy, grid, 100, 1, 3, 100000, 2);
        for (const auto& row : rows) CHECK(row.holds == row.replicates);
    }

    // weakest-first policy coincides with W, so only S <= W is at stake
    const auto wf = envelopment_experiment(params, Policy::weakest_first(), grid, 60, 10, 4, 100000, 2);
    const auto arr = envelopment_experiment(params, Policy::arrival_order(), grid, 60, 10, 4, 100000, 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(wf[i].fraction >= arr[i].fraction);
        CHECK(wf[i].ancestors == grid[i]);
    }

    const auto again = envelopment_experiment(params, Policy::arrival_order(), grid, 60, 10, 4, 100000, 5);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(again[i].holds == arr[i].holds);
}
