#include "rdbp/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdbp/bisect.hpp"
#include "rdbp/lorenz.hpp"

namespace rdbp {

namespace {

void check_rates(double m, double r) {
    if (!(std::isfinite(m) && m > 0.0)) throw std::invalid_argument("m must be finite and positive");
    if (!(std::isfinite(r) && r >= 0.0)) throw std::invalid_argument("r must be finite and nonnegative");
}

// Left end of the search. For laws with atoms PM jumps at the support
// minimum, so the search has to start below it.
double search_floor(const Distribution& claims) { return claims.is_continuous() ? claims.support_min() : 0.0; }

template <class Pred>
double smallest_in_support(const Distribution& claims, Pred&& pred) {
    const double lo = search_floor(claims);
    if (pred(lo)) return lo;
    double hi = claims.support_max();
    if (is_unbounded(hi)) {
        hi = expand_until(pred, std::max(lo, claims.quantile(0.5)));
        if (!std::isfinite(hi)) return kUnbounded;
    }
    return first_true(pred, lo, hi);
}

Verdict verdict_for(double value) {
    if (std::abs(value - 1.0) <= kCriticalBand) return Verdict::Critical;
    return value > 1.0 ? Verdict::SurvivalPossible : Verdict::ExtinctionCertain;
}

}  // namespace

std::optional<double> solve_tau(const Distribution& claims, double m, double r) {
    check_rates(m, r);
    const double mu = claims.mean();
    if (r > m * mu) return std::nullopt;
    const double target = r / m;
    if (target >= mu) return claims.support_max();
    return smallest_in_support(claims, [&](double x) { return claims.partial_moment(x) >= target; });
}

std::optional<double> solve_theta(const Distribution& claims, double m, double r) {
    check_rates(m, r);
    const double mu = claims.mean();
    if (r > m * mu) return std::nullopt;
    const double target = r / m;
    return smallest_in_support(claims, [&](double x) { return mu - claims.partial_moment(x) <= target; });
}

CriterionResult wfs_criterion(const Distribution& claims, double m, double r) {
    CriterionResult out;
    out.threshold = solve_tau(claims, m, r);
    if (!out.threshold) {
        out.verdict = Verdict::SurvivalPossible;
        return out;
    }
    out.value = m * claims.cdf(*out.threshold);
    out.verdict = verdict_for(*out.value);
    return out;
}

CriterionResult sfs_criterion(const Distribution& claims, double m, double r) {
    CriterionResult out;
    out.threshold = solve_theta(claims, m, r);
    if (!out.threshold) {
        out.verdict = Verdict::SurvivalPossible;
        return out;
    }
    out.value = m * (1.0 - claims.cdf(*out.threshold));
    out.verdict = verdict_for(*out.value);
    return out;
}

RegimeClassification classify_regime(const Distribution& claims, double m, double r) {
    RegimeClassification out;
    out.wfs = wfs_criterion(claims, m, r);
    out.sfs = sfs_criterion(claims, m, r);
    if (m <= 1.0) {
        out.subcritical_reproduction = true;
        out.regime = Regime::SureExtinction;
        return out;
    }
    const bool wfs_critical = out.wfs.verdict == Verdict::Critical;
    const bool sfs_critical = out.sfs.verdict == Verdict::Critical;
    if (wfs_critical || sfs_critical) {
        out.regime = Regime::Critical;
        out.critical = wfs_critical && sfs_critical ? CriticalCriterion::Both
                       : wfs_critical               ? CriticalCriterion::WeakestFirst
                                                    : CriticalCriterion::StrongestFirst;
        return out;
    }
    if (out.wfs.verdict == Verdict::ExtinctionCertain)
        out.regime = Regime::SureExtinction;
    else if (out.sfs.verdict == Verdict::SurvivalPossible)
        out.regime = Regime::SureSurvival;
    else
        out.regime = Regime::PolicyDependent;
    return out;
}

CriterionReport lc_criterion_check(const Distribution& claims, double m, double r) {
    CriterionReport out;
    out.regime = classify_regime(claims, m, r);
    out.tau = out.regime.wfs.threshold;
    out.theta = out.regime.sfs.threshold;
    out.wfs_value = out.regime.wfs.value;
    out.sfs_value = out.regime.sfs.value;
    if (out.tau) out.f_tau = claims.cdf(*out.tau);
    if (out.theta) out.f_theta = claims.cdf(*out.theta);

    if (m <= 1.0) {
        out.status = ReportStatus::SubcriticalReproduction;
        return out;
    }
    if (r > m * claims.mean()) {
        out.status = ReportStatus::ResourceSurplus;
        return out;
    }

    const auto lc = LorenzCurve::analytic(claims);
    const double share = std::min(r / (m * claims.mean()), 1.0);
    out.lc_wfs_lhs = lc(1.0 / m);
    out.lc_wfs_rhs = share;
    out.lc_sfs_lhs = lc(1.0 - 1.0 / m);
    out.lc_sfs_rhs = 1.0 - share;
    out.lc_wfs_extinction = *out.lc_wfs_lhs > *out.lc_wfs_rhs;
    out.lc_sfs_survival = *out.lc_sfs_lhs > *out.lc_sfs_rhs;

    const auto& wfs = out.regime.wfs;
    const auto& sfs = out.regime.sfs;
    if (wfs.verdict != Verdict::Critical)
        out.forms_agree = out.forms_agree && (wfs.verdict == Verdict::ExtinctionCertain) == *out.lc_wfs_extinction;
    if (sfs.verdict != Verdict::Critical)
        out.forms_agree = out.forms_agree && (sfs.verdict == Verdict::SurvivalPossible) == *out.lc_sfs_survival;
    return out;
}

std::vector<SweepRow> envelope_sweep(const Distribution& claims, double r, std::span<const double> m_grid) {
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (!(m_grid[i] > 1.0)) throw std::invalid_argument("envelope_sweep: every m must exceed 1");
        if (i > 0 && !(m_grid[i] > m_grid[i - 1]))
            throw std::invalid_argument("envelope_sweep: m_grid must be strictly ascending");
    }
    std::vector<SweepRow> rows;
    rows.reserve(m_grid.size());
    for (double m : m_grid) {
        const auto cls = classify_regime(claims, m, r);
        SweepRow row;
        row.m = m;
        row.inv_m = 1.0 / m;
        row.regime = cls.regime;
        if (cls.wfs.threshold) row.f_tau = claims.cdf(*cls.wfs.threshold);
        if (cls.sfs.threshold) {
            row.f_theta = claims.cdf(*cls.sfs.threshold);
            row.one_minus_f_theta = 1.0 - *row.f_theta;
        }
        rows.push_back(row);
    }
    return rows;
}

double policy_band_width(const SweepRow& row) {
    if (!row.f_tau || !row.one_minus_f_theta) return 0.0;
    return std::max(0.0, *row.f_tau - *row.one_minus_f_theta);
}

double policy_dependent_span(std::span<const SweepRow> rows) {
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& row : rows) {
        if (row.regime != Regime::PolicyDependent) continue;
        lo = std::min(lo, row.inv_m);
        hi = std::max(hi, row.inv_m);
    }
    return hi >= lo ? hi - lo : 0.0;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ExtinctionCertain:
            return "ExtinctionCertain";
        case Verdict::SurvivalPossible:
            return "SurvivalPossible";
        case Verdict::Critical:
            return "Critical";
    }
    return "?";
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::SureExtinction:
            return "SureExtinction";
        case Regime::SureSurvival:
            return "SureSurvival";
        case Regime::PolicyDependent:
            return "PolicyDependent";
        case Regime::Critical:
            return "Critical";
    }
    return "?";
}

std::string to_string(CriticalCriterion c) {
    switch (c) {
        case CriticalCriterion::None:
            return "none";
        case CriticalCriterion::WeakestFirst:
            return "weakest-first";
        case CriticalCriterion::StrongestFirst:
            return "strongest-first";
        case CriticalCriterion::Both:
            return "both";
    }
    return "?";
}

std::string to_string(ReportStatus s) {
    switch (s) {
        case ReportStatus::Ok:
            return "ok";
        case ReportStatus::SubcriticalReproduction:
            return "subcritical reproduction";
        case ReportStatus::ResourceSurplus:
            return "resource surplus";
    }
    return "?";
}

}  // namespace rdbp
