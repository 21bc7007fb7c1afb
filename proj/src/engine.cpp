#include "rdbp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "rdbp/exact_sum.hpp"

namespace rdbp {

namespace {

// Runs fn(0..n-1) on a small pool. Callers write results by index, so the
// thread count never changes the output.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

// Whether the correctly rounded sum of values[order[0..k)] exceeds budget.
// A plain running sum decides unless it lies within its error bound of the
// budget; only then is the prefix summed exactly.
template <class At>
bool prefix_exceeds(double naive, std::size_t k, double budget, At&& at) {
    const double slack = static_cast<double>(k) * 0x1.0p-52 * naive + 2 * (std::nextafter(budget, kUnbounded) - budget);
    if (naive > budget + slack) return true;
    if (naive < budget - slack) return false;
    ExactSum exact;
    for (std::size_t i = 0; i < k; ++i) exact.add(at(i));
    return exact.value() > budget;
}

template <class At>
std::size_t count_prefix(std::size_t n, double budget, At&& at) {
    double naive = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        naive += at(i);
        if (prefix_exceeds(naive, i + 1, budget, at)) return i;
    }
    return n;
}

// Largest k such that the k first elements of `v` under `before` sum to at
// most budget. Partitions in place instead of sorting: every candidate prefix
// is a multiset of extreme values, whose sum does not depend on the order
// within it.
template <class Before>
std::size_t extreme_prefix_count(std::vector<double>& v, double budget, Before before) {
    const auto begin = v.begin();
    auto first = v.begin();
    auto last = v.end();
    auto at = [&](std::size_t i) { return begin[static_cast<std::ptrdiff_t>(i)]; };
    double base = 0.0;  // plain sum of [begin, first)
    while (last - first > 32) {
        const auto mid = first + (last - first) / 2;
        std::nth_element(first, mid, last, before);
        double lower = 0.0;
        for (auto it = first; it <= mid; ++it) lower += *it;
        const auto k = static_cast<std::size_t>(mid - begin) + 1;
        if (prefix_exceeds(base + lower, k, budget, at)) {
            last = mid;
        } else {
            base += lower;
            first = mid + 1;
        }
    }
    std::sort(first, last, before);
    for (auto it = first; it != last; ++it) {
        base += *it;
        const auto k = static_cast<std::size_t>(it - begin) + 1;
        if (prefix_exceeds(base, k, budget, at)) return k - 1;
    }
    return static_cast<std::size_t>(last - begin);
}

// Size at the horizon with the cap mapped to +infinity.
struct FinalSize {
    bool exploded = false;
    std::uint64_t size = 0;
};

bool at_most(const FinalSize& a, const FinalSize& b) {
    if (b.exploded) return true;
    if (a.exploded) return false;
    return a.size <= b.size;
}

FinalSize final_size(const Trajectory& t) {
    if (t.outcome == Trajectory::Outcome::PopCapReached) return {true, 0};
    if (t.outcome == Trajectory::Outcome::Extinct) return {false, 0};
    return {false, t.sizes.back()};
}

}  // namespace

std::size_t wfs_count(std::span<const double> claims, double budget) {
    std::vector<double> v(claims.begin(), claims.end());
    return extreme_prefix_count(v, budget, std::less<>());
}

std::size_t sfs_count(std::span<const double> claims, double budget) {
    std::vector<double> v(claims.begin(), claims.end());
    return extreme_prefix_count(v, budget, std::greater<>());
}

std::size_t prefix_count(std::span<const double> claims, std::span<const std::size_t> order, double budget) {
    return count_prefix(order.size(), budget, [&](std::size_t i) { return claims[order[i]]; });
}

Policy::Policy(Kind kind) : kind_(kind) {
    switch (kind) {
        case Kind::WeakestFirst:
            name_ = "weakest-first";
            break;
        case Kind::StrongestFirst:
            name_ = "strongest-first";
            break;
        case Kind::ArrivalOrder:
            name_ = "arrival";
            break;
        case Kind::ReverseArrival:
            name_ = "reverse-arrival";
            break;
        case Kind::Alternating:
            name_ = "alternating";
            break;
        case Kind::Custom:
            name_ = "custom";
            break;
    }
}

Policy Policy::custom(std::string name, OrderFn order) {
    if (!order) throw std::invalid_argument("policy: custom order function is empty");
    Policy p(Kind::Custom);
    p.name_ = std::move(name);
    p.custom_ = std::move(order);
    return p;
}

Policy Policy::from_name(const std::string& name) {
    if (name == "weakest-first") return weakest_first();
    if (name == "strongest-first") return strongest_first();
    if (name == "arrival") return arrival_order();
    if (name == "reverse-arrival") return reverse_arrival();
    if (name == "alternating") return alternating();
    throw std::invalid_argument("unknown policy '" + name +
                                "' (expected weakest-first, strongest-first, arrival, reverse-arrival, alternating)");
}

std::vector<std::size_t> Policy::order(std::span<const double> claims) const {
    std::vector<std::size_t> idx(claims.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto ascending = [&] {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return claims[a] < claims[b]; });
    };
    switch (kind_) {
        case Kind::ArrivalOrder:
            return idx;
        case Kind::ReverseArrival:
            std::reverse(idx.begin(), idx.end());
            return idx;
        case Kind::WeakestFirst:
            ascending();
            return idx;
        case Kind::StrongestFirst:
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return claims[a] > claims[b]; });
            return idx;
        case Kind::Alternating: {
            ascending();
            std::vector<std::size_t> out;
            out.reserve(idx.size());
            std::size_t lo = 0;
            std::size_t hi = idx.size();
            while (lo < hi) {
                out.push_back(idx[lo++]);
                if (lo < hi) out.push_back(idx[--hi]);
            }
            return out;
        }
        case Kind::Custom:
            break;
    }
    auto out = custom_(claims);
    std::vector<bool> seen(claims.size(), false);
    bool ok = out.size() == claims.size();
    for (std::size_t i : out) {
        if (!ok || i >= seen.size() || seen[i]) {
            ok = false;
            break;
        }
        seen[i] = true;
    }
    if (!ok) throw std::logic_error("policy '" + name_ + "' did not return a permutation of the claim indices");
    return out;
}

std::size_t policy_count(const Policy& policy, std::span<const double> claims, double budget) {
    switch (policy.kind()) {
        case Policy::Kind::WeakestFirst:
            return wfs_count(claims, budget);
        case Policy::Kind::StrongestFirst:
            return sfs_count(claims, budget);
        default:
            break;
    }
    const auto order = policy.order(claims);
    return prefix_count(claims, order, budget);
}

StepResult step(std::uint64_t pop_size, const PopulationParams& params, const Policy& policy,
                const CounterRng& rng, std::uint64_t run, std::uint64_t generation, std::uint64_t pop_cap) {
    StepResult out;
    if (pop_size == 0) return out;
    ExactSum budget;
    for (std::uint64_t k = 0; k < pop_size; ++k) {
        const StreamKey key{run, generation, k};
        out.descendants += params.reproduction.draw(rng, key);
        budget.add(params.resources.draw(rng, key, Channel::Production));
    }
    out.budget = budget.value();
    if (out.descendants > pop_cap) {
        out.cap_reached = true;
        return out;
    }
    std::vector<double> claims(out.descendants);
    double total = 0.0;
    for (std::uint64_t j = 0; j < out.descendants; ++j) {
        claims[j] = params.claims.draw(rng, StreamKey{run, generation, j}, Channel::Claim);
        total += claims[j];
    }
    // every prefix sum is at most the total, so all are served under any order
    const bool all_fit = !prefix_exceeds(total, claims.size(), out.budget, [&](std::size_t i) { return claims[i]; });
    out.next = all_fit ? out.descendants : policy_count(policy, claims, out.budget);
    return out;
}

std::string to_string(Trajectory::Outcome outcome) {
    switch (outcome) {
        case Trajectory::Outcome::Extinct:
            return "extinct";
        case Trajectory::Outcome::AliveAtHorizon:
            return "alive";
        case Trajectory::Outcome::PopCapReached:
            return "pop-cap";
    }
    return "?";
}

Trajectory simulate_trajectory(const PopulationParams& params, const Policy& policy, std::uint64_t ancestors,
                               std::uint64_t generations, std::uint64_t pop_cap, const CounterRng& rng,
                               std::uint64_t run) {
    Trajectory t;
    t.sizes.push_back(ancestors);
    if (ancestors == 0) {
        t.outcome = Trajectory::Outcome::Extinct;
        return t;
    }
    std::uint64_t pop = ancestors;
    for (std::uint64_t n = 0; n < generations; ++n) {
        const auto s = step(pop, params, policy, rng, run, n, pop_cap);
        if (s.cap_reached) {
            t.outcome = Trajectory::Outcome::PopCapReached;
            t.at_generation = n + 1;
            return t;
        }
        pop = s.next;
        t.sizes.push_back(pop);
        if (pop == 0) {
            t.outcome = Trajectory::Outcome::Extinct;
            t.at_generation = n + 1;
            return t;
        }
    }
    t.outcome = Trajectory::Outcome::AliveAtHorizon;
    t.at_generation = generations;
    return t;
}

double binomial_half_width(double fraction, std::size_t n) {
    if (n == 0) return 0.0;
    return 1.96 * std::sqrt(fraction * (1.0 - fraction) / static_cast<double>(n));
}

ExtinctionEstimate estimate_extinction(const PopulationParams& params, const Policy& policy,
                                       const SimulationControls& controls, std::vector<Trajectory>* trajectories) {
    if (controls.replicates == 0) throw std::invalid_argument("estimate_extinction: replicates must be >= 1");
    if (controls.gen_cap == 0) throw std::invalid_argument("estimate_extinction: gen_cap must be >= 1");
    const CounterRng rng(controls.seed);
    std::vector<Trajectory> runs(controls.replicates);
    parallel_for(controls.replicates, controls.threads, [&](std::size_t i) {
        runs[i] = simulate_trajectory(params, policy, controls.ancestors, controls.gen_cap, controls.pop_cap, rng, i);
    });

    ExtinctionEstimate est;
    est.replicates = controls.replicates;
    for (const auto& t : runs) {
        switch (t.outcome) {
            case Trajectory::Outcome::Extinct:
                ++est.extinct;
                break;
            case Trajectory::Outcome::AliveAtHorizon:
                ++est.alive_at_horizon;
                break;
            case Trajectory::Outcome::PopCapReached:
                ++est.censored;
                break;
        }
    }
    est.q_hat = static_cast<double>(est.extinct) / static_cast<double>(est.replicates);
    est.half_width = binomial_half_width(est.q_hat, est.replicates);
    if (trajectories) *trajectories = std::move(runs);
    return est;
}

std::vector<EnvelopmentRow> envelopment_experiment(const PopulationParams& params, const Policy& policy,
                                                   std::span<const std::uint64_t> ancestor_grid,
                                                   std::size_t replicates, std::uint64_t horizon,
                                                   std::uint64_t seed, std::uint64_t pop_cap, unsigned threads) {
    if (replicates == 0) throw std::invalid_argument("envelopment_experiment: replicates must be >= 1");
    const CounterRng rng(seed);
    const auto wfs = Policy::weakest_first();
    const auto sfs = Policy::strongest_first();
    const bool same_as_wfs = policy.kind() == Policy::Kind::WeakestFirst;

    std::vector<EnvelopmentRow> rows;
    for (std::size_t li = 0; li < ancestor_grid.size(); ++li) {
        const std::uint64_t L = ancestor_grid[li];
        std::vector<char> holds(replicates, 0);
        parallel_for(replicates, threads, [&](std::size_t rep) {
            const std::uint64_t run = (static_cast<std::uint64_t>(li) << 32) | rep;
            const auto w = final_size(simulate_trajectory(params, wfs, L, horizon, pop_cap, rng, run));
            const auto s = final_size(simulate_trajectory(params, sfs, L, horizon, pop_cap, rng, run));
            const auto g =
                same_as_wfs ? w : final_size(simulate_trajectory(params, policy, L, horizon, pop_cap, rng, run));
            holds[rep] = at_most(s, g) && at_most(g, w);
        });
        EnvelopmentRow row;
        row.ancestors = L;
        row.replicates = replicates;
        row.holds = static_cast<std::size_t>(std::count(holds.begin(), holds.end(), 1));
        row.fraction = static_cast<double>(row.holds) / static_cast<double>(replicates);
        row.half_width = binomial_half_width(row.fraction, replicates);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rdbp
