#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdbp/distributions.hpp"
#include "rdbp/random.hpp"

namespace rdbp {

// ---------------------------------------------------------------------------
// Counting processes
//
// Every policy serves claimants in its priority order and stops at the first
// claimant whose cumulative claim would exceed the budget. Cumulative sums are
// correctly rounded, so the count depends only on which claims form each
// prefix, not on the order they were added in.
// ---------------------------------------------------------------------------

/// Weakest-first count N(t, s): longest ascending prefix with sum <= s.
std::size_t wfs_count(std::span<const double> claims, double budget);

/// Strongest-first count M(t, s): longest descending prefix with sum <= s.
std::size_t sfs_count(std::span<const double> claims, double budget);

/// Longest prefix of `order` (indices into claims) whose sum is <= s.
std::size_t prefix_count(std::span<const double> claims, std::span<const std::size_t> order, double budget);

/// Priority rule of a society.
class Policy {
public:
    enum class Kind { WeakestFirst, StrongestFirst, ArrivalOrder, ReverseArrival, Alternating, Custom };

    /// Maps the claims of one generation to a priority permutation of their indices.
    using OrderFn = std::function<std::vector<std::size_t>(std::span<const double>)>;

    static Policy weakest_first() { return Policy(Kind::WeakestFirst); }
    static Policy strongest_first() { return Policy(Kind::StrongestFirst); }
    /// Slot order, i.e. the order descendants were drawn in.
    static Policy arrival_order() { return Policy(Kind::ArrivalOrder); }
    static Policy reverse_arrival() { return Policy(Kind::ReverseArrival); }
    /// Smallest, largest, second smallest, second largest, ...
    static Policy alternating() { return Policy(Kind::Alternating); }
    static Policy custom(std::string name, OrderFn order);

    /// Parses "weakest-first", "strongest-first", "arrival", "reverse-arrival", "alternating".
    static Policy from_name(const std::string& name);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    /// Priority order; ties between equal claims keep slot order.
    std::vector<std::size_t> order(std::span<const double> claims) const;

private:
    explicit Policy(Kind kind);

    Kind kind_;
    std::string name_;
    OrderFn custom_;
};

/// Count served under `policy`; identical to wfs_count / sfs_count for the two extremal policies.
std::size_t policy_count(const Policy& policy, std::span<const double> claims, double budget);

// ---------------------------------------------------------------------------
// Generation recursion
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultPopCap = 1'000'000;

struct StepResult {
    std::uint64_t next = 0;
    std::uint64_t descendants = 0;
    double budget = 0.0;
    /// The generation would materialize more than pop_cap descendants; no
    /// claims were drawn and `next` is meaningless.
    bool cap_reached = false;
};

/// One generation: parent slot k draws offspring and production from key
/// (run, generation, k); descendant slot j draws its claim from (run, generation, j).
StepResult step(std::uint64_t pop_size, const PopulationParams& params, const Policy& policy,
                const CounterRng& rng, std::uint64_t run, std::uint64_t generation,
                std::uint64_t pop_cap = kDefaultPopCap);

struct Trajectory {
    enum class Outcome { Extinct, AliveAtHorizon, PopCapReached };

    /// Gamma_0 .. Gamma_T. Ends at the extinction generation (its 0 included)
    /// or at the last generation before the cap was hit.
    std::vector<std::uint64_t> sizes;
    Outcome outcome = Outcome::AliveAtHorizon;
    /// Generation of extinction or of the cap event.
    std::uint64_t at_generation = 0;
};

std::string to_string(Trajectory::Outcome outcome);

Trajectory simulate_trajectory(const PopulationParams& params, const Policy& policy, std::uint64_t ancestors,
                               std::uint64_t generations, std::uint64_t pop_cap, const CounterRng& rng,
                               std::uint64_t run);

struct SimulationControls {
    std::uint64_t ancestors = 1;
    std::size_t replicates = 1;
    std::uint64_t gen_cap = 100;
    std::uint64_t pop_cap = kDefaultPopCap;
    std::uint64_t seed = 0;
    /// 0 picks hardware concurrency. Output never depends on it.
    unsigned threads = 0;
};

struct ExtinctionEstimate {
    double q_hat = 0.0;
    std::size_t replicates = 0;
    std::size_t extinct = 0;
    std::size_t alive_at_horizon = 0;
    /// Runs that hit pop_cap; scored as survived, which biases q_hat downward.
    std::size_t censored = 0;
    /// 1.96 * sqrt(q_hat (1 - q_hat) / replicates).
    double half_width = 0.0;
};

/// Monte Carlo extinction probability; replicate i uses run index i.
ExtinctionEstimate estimate_extinction(const PopulationParams& params, const Policy& policy,
                                       const SimulationControls& controls,
                                       std::vector<Trajectory>* trajectories = nullptr);

struct EnvelopmentRow {
    std::uint64_t ancestors = 0;
    std::size_t replicates = 0;
    std::size_t holds = 0;
    double fraction = 0.0;
    double half_width = 0.0;
};

/// Runs the strongest-first, `policy` and weakest-first processes on shared
/// (run, generation, slot) streams for `horizon` generations and reports, per
/// starting size L, how often S_n(L) <= Gamma_n(L) <= W_n(L) at the horizon.
/// A process that hit pop_cap counts as +infinity in the comparison.
std::vector<EnvelopmentRow> envelopment_experiment(const PopulationParams& params, const Policy& policy,
                                                   std::span<const std::uint64_t> ancestor_grid,
                                                   std::size_t replicates, std::uint64_t horizon,
                                                   std::uint64_t seed, std::uint64_t pop_cap = kDefaultPopCap,
                                                   unsigned threads = 0);

/// 95% normal-approximation half-width for a binomial proportion.
double binomial_half_width(double fraction, std::size_t n);

}  // namespace rdbp
