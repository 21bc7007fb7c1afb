#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rdbp/distributions.hpp"

namespace rdbp {

/// Reproduction mean, resource mean and claim law of one subpopulation.
/// Only these three enter the equilibrium conditions.
struct Subpopulation {
    double m = 0.0;
    double r = 0.0;
    Distribution claims;

    static Subpopulation from(const PopulationParams& p) { return {p.m(), p.r(), p.claims}; }
};

/// Home population plus a non-integrating immigrant population whose size
/// settles at `alpha` times the home size.
struct ImmigrationScenario {
    Subpopulation home;
    Subpopulation immigrant;
    double alpha = 0.0;
};

/// Shared threshold tau solving
///   m_h PM_h(tau) + alpha m_i PM_i(tau) = r_h + alpha r_i,
/// smallest root. Empty in the resource-surplus case
/// r_h + alpha r_i > m_h mu_h + alpha m_i mu_i.
std::optional<double> solve_tau_mixed(const ImmigrationScenario& scenario);

inline constexpr double kEquilibriumTolerance = 1e-9;

struct EquilibriumReport {
    double tau = 0.0;
    double lhs = 0.0;  // m_h F_h(tau)
    double rhs = 0.0;  // m_i F_i(tau)
    double gap = 0.0;  // lhs - rhs
    bool condition_met = false;
};

/// Necessary condition m_h F_h(tau) = m_i F_i(tau) >= 1. Empty on resource surplus.
std::optional<EquilibriumReport> check_equilibrium(const ImmigrationScenario& scenario,
                                                   double tolerance = kEquilibriumTolerance);

struct AlphaScanRow {
    double alpha = 0.0;
    std::optional<EquilibriumReport> report;  // empty on resource surplus
};

struct AlphaRoot {
    double alpha = 0.0;
    EquilibriumReport report;
    bool converged = false;  // |gap| <= 1e-10 reached
};

struct AlphaScan {
    std::vector<AlphaScanRow> rows;
    /// Consecutive grid indices whose gaps have opposite strict signs.
    std::vector<std::pair<std::size_t, std::size_t>> brackets;
    /// One per bracket (refined by bisection on alpha) and one per grid point with gap exactly 0.
    std::vector<AlphaRoot> roots;
};

inline constexpr double kAlphaRootTolerance = 1e-10;

/// Evaluates gap(alpha) over an ascending nonnegative grid and refines every sign change.
AlphaScan scan_alpha(const Subpopulation& home, const Subpopulation& immigrant, std::span<const double> alpha_grid);

}  // namespace rdbp
