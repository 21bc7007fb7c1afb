#include "rdbp/immigration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdbp/bisect.hpp"

namespace rdbp {

namespace {

void check_subpopulation(const Subpopulation& s, const char* which) {
    if (!(std::isfinite(s.m) && s.m > 0.0)) throw std::invalid_argument(std::string(which) + ": m must be positive");
    if (!(std::isfinite(s.r) && s.r >= 0.0))
        throw std::invalid_argument(std::string(which) + ": r must be nonnegative");
    if (!(s.claims.mean() > 0.0)) throw std::invalid_argument(std::string(which) + ": mean claim must be positive");
}

}  // namespace

std::optional<double> solve_tau_mixed(const ImmigrationScenario& sc) {
    check_subpopulation(sc.home, "home");
    check_subpopulation(sc.immigrant, "immigrant");
    if (!(std::isfinite(sc.alpha) && sc.alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");

    const auto& h = sc.home;
    const auto& i = sc.immigrant;
    const double a = sc.alpha;
    const double target = h.r + a * i.r;
    const double capacity = h.m * h.claims.mean() + a * i.m * i.claims.mean();
    if (target > capacity) return std::nullopt;

    const bool with_immigrants = a > 0.0;
    auto demand = [&](double x) {
        double v = h.m * h.claims.partial_moment(x);
        if (with_immigrants) v += a * i.m * i.claims.partial_moment(x);
        return v;
    };
    auto covered = [&](double x) { return demand(x) >= target; };

    // Search the union of the relevant supports.
    auto floor_of = [](const Distribution& d) { return d.is_continuous() ? d.support_min() : 0.0; };
    double lo = floor_of(h.claims);
    double hi = h.claims.support_max();
    if (with_immigrants) {
        lo = std::min(lo, floor_of(i.claims));
        hi = std::max(hi, i.claims.support_max());
    }
    if (target >= capacity) return hi;
    if (covered(lo)) return lo;
    if (is_unbounded(hi)) {
        hi = expand_until(covered, std::max(lo, h.claims.quantile(0.5)));
        if (!std::isfinite(hi)) return kUnbounded;
    }
    return first_true(covered, lo, hi);
}

std::optional<EquilibriumReport> check_equilibrium(const ImmigrationScenario& sc, double tolerance) {
    const auto tau = solve_tau_mixed(sc);
    if (!tau) return std::nullopt;
    EquilibriumReport rep;
    rep.tau = *tau;
    rep.lhs = sc.home.m * sc.home.claims.cdf(*tau);
    rep.rhs = sc.immigrant.m * sc.immigrant.claims.cdf(*tau);
    rep.gap = rep.lhs - rep.rhs;
    rep.condition_met = std::abs(rep.gap) <= tolerance && std::min(rep.lhs, rep.rhs) >= 1.0 - tolerance;
    return rep;
}

AlphaScan scan_alpha(const Subpopulation& home, const Subpopulation& immigrant, std::span<const double> alpha_grid) {
    for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
        if (!(alpha_grid[k] >= 0.0)) throw std::invalid_argument("scan_alpha: alpha must be nonnegative");
        if (k > 0 && !(alpha_grid[k] >= alpha_grid[k - 1]))
            throw std::invalid_argument("scan_alpha: alpha grid must be ascending");
    }
    auto at = [&](double alpha) { return check_equilibrium(ImmigrationScenario{home, immigrant, alpha}); };

    AlphaScan scan;
    for (double alpha : alpha_grid) {
        scan.rows.push_back({alpha, at(alpha)});
        const auto& rep = scan.rows.back().report;
        if (rep && rep->gap == 0.0) scan.roots.push_back({alpha, *rep, true});
    }

    // Pair each strict sign with the previous strict sign, skipping exact zeros and surplus points.
    std::optional<std::size_t> prev;
    for (std::size_t k = 0; k < scan.rows.size(); ++k) {
        const auto& rep = scan.rows[k].report;
        if (!rep || rep->gap == 0.0) continue;
        if (prev && (scan.rows[*prev].report->gap > 0.0) != (rep->gap > 0.0)) scan.brackets.emplace_back(*prev, k);
        prev = k;
    }

    for (const auto& [left, right] : scan.brackets) {
        double lo = scan.rows[left].alpha;
        double hi = scan.rows[right].alpha;
        const bool lo_positive = scan.rows[left].report->gap > 0.0;
        AlphaRoot root{lo, *scan.rows[left].report, false};
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = lo + (hi - lo) / 2;
            const auto rep = at(mid);
            if (!rep) break;
            root = {mid, *rep, std::abs(rep->gap) <= kAlphaRootTolerance};
            if (root.converged || !(mid > lo && mid < hi)) break;
            if ((rep->gap > 0.0) == lo_positive)
                lo = mid;
            else
                hi = mid;
        }
        scan.roots.push_back(root);
    }
    std::sort(scan.roots.begin(), scan.roots.end(),
              [](const AlphaRoot& a, const AlphaRoot& b) { return a.alpha < b.alpha; });
    return scan;
}

}  // namespace rdbp
