#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdbp/distributions.hpp"

namespace rdbp {

/// Half-width of the band around 1 in which no extinction verdict is issued.
inline constexpr double kCriticalBand = 1e-9;

/// Claim threshold tau: smallest tau with PM(tau) >= r/m. Empty when r > m*mu.
/// r == m*mu gives the essential supremum of the claims (possibly kUnbounded).
std::optional<double> solve_tau(const Distribution& claims, double m, double r);

/// Upper-tail threshold theta: smallest theta with mu - PM(theta) <= r/m,
/// searched from the essential infimum for continuous laws. Empty when r > m*mu.
std::optional<double> solve_theta(const Distribution& claims, double m, double r);

enum class Verdict { ExtinctionCertain, SurvivalPossible, Critical };

struct CriterionResult {
    /// m F(tau) for the weakest-first process, m (1 - F(theta)) for the
    /// strongest-first one; empty in the resource-surplus case r > m*mu.
    std::optional<double> value;
    /// tau or theta.
    std::optional<double> threshold;
    Verdict verdict = Verdict::Critical;
};

CriterionResult wfs_criterion(const Distribution& claims, double m, double r);
CriterionResult sfs_criterion(const Distribution& claims, double m, double r);
inline CriterionResult wfs_criterion(const PopulationParams& p) { return wfs_criterion(p.claims, p.m(), p.r()); }
inline CriterionResult sfs_criterion(const PopulationParams& p) { return sfs_criterion(p.claims, p.m(), p.r()); }

enum class Regime { SureExtinction, SureSurvival, PolicyDependent, Critical };

/// Which criterion sits inside the critical band.
enum class CriticalCriterion { None, WeakestFirst, StrongestFirst, Both };

struct RegimeClassification {
    Regime regime = Regime::Critical;
    CriticalCriterion critical = CriticalCriterion::None;
    /// m <= 1: every policy dies out, the criteria are not consulted.
    bool subcritical_reproduction = false;
    CriterionResult wfs;
    CriterionResult sfs;
};

RegimeClassification classify_regime(const Distribution& claims, double m, double r);
inline RegimeClassification classify_regime(const PopulationParams& p) {
    return classify_regime(p.claims, p.m(), p.r());
}

enum class ReportStatus { Ok, SubcriticalReproduction, ResourceSurplus };

/// Both forms of the weakest-first and strongest-first criteria side by side.
struct CriterionReport {
    ReportStatus status = ReportStatus::Ok;
    std::optional<double> tau;
    std::optional<double> theta;
    std::optional<double> f_tau;
    std::optional<double> f_theta;
    std::optional<double> wfs_value;    // m F(tau)
    std::optional<double> sfs_value;    // m (1 - F(theta))
    std::optional<double> lc_wfs_lhs;   // LC(1/m)
    std::optional<double> lc_wfs_rhs;   // r / (m mu)
    std::optional<double> lc_sfs_lhs;   // LC(1 - 1/m)
    std::optional<double> lc_sfs_rhs;   // 1 - r / (m mu)
    /// LC(1/m) > r/(m mu): weakest-first extinction in Lorenz form.
    std::optional<bool> lc_wfs_extinction;
    /// LC(1 - 1/m) > 1 - r/(m mu): strongest-first survival in Lorenz form.
    std::optional<bool> lc_sfs_survival;
    /// CDF and Lorenz forms agree wherever the CDF form left the critical band.
    bool forms_agree = true;
    RegimeClassification regime;
};

CriterionReport lc_criterion_check(const Distribution& claims, double m, double r);
inline CriterionReport lc_criterion_check(const PopulationParams& p) {
    return lc_criterion_check(p.claims, p.m(), p.r());
}

struct SweepRow {
    double m = 0.0;
    double inv_m = 0.0;
    std::optional<double> f_tau;
    std::optional<double> f_theta;
    std::optional<double> one_minus_f_theta;
    Regime regime = Regime::Critical;
};

/// Regime per m, with F(tau) and F(theta) recomputed at every grid point.
/// m_grid must be ascending with every entry > 1.
std::vector<SweepRow> envelope_sweep(const Distribution& claims, double r, std::span<const double> m_grid);

/// Interval [1 - F(theta), F(tau)] on the 1/m axis where the fate depends on
/// the policy, as drawn for fixed parameters. Zero when the interval is empty
/// or the row has no thresholds.
double policy_band_width(const SweepRow& row);

/// max - min of inv_m over rows classified PolicyDependent; 0 if none.
double policy_dependent_span(std::span<const SweepRow> rows);

std::string to_string(Verdict v);
std::string to_string(Regime r);
std::string to_string(CriticalCriterion c);
std::string to_string(ReportStatus s);

}  // namespace rdbp
