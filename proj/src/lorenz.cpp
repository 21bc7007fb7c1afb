#include "rdbp/lorenz.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "rdbp/bisect.hpp"

namespace rdbp {

namespace {

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error(std::string(what) + " must lie in [0, 1]");
}

// Gastwirth integral of the step quantile of a sorted sample: linear between
// the points (k/n, S_k / S_n).
double piecewise_share(const Empirical& e, double p) {
    const std::size_t n = e.values.size();
    const double total = e.prefix.back();
    if (p >= 1.0) return 1.0;
    const double pos = p * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::floor(pos));
    if (k >= n) return 1.0;
    const double share = (e.prefix[k] + (pos - static_cast<double>(k)) * e.values[k]) / total;
    return std::min(share, 1.0);
}

}  // namespace

LorenzCurve LorenzCurve::analytic(Distribution dist) {
    if (!(dist.mean() > 0.0)) throw std::invalid_argument("lorenz: law must have a positive mean");
    return LorenzCurve(Kind::Analytic, std::make_shared<const Distribution>(std::move(dist)));
}

LorenzCurve LorenzCurve::empirical(std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("lorenz: sample must be nonempty");
    auto dist = Distribution::empirical(std::vector<double>(sample.begin(), sample.end()));
    if (!(dist.mean() > 0.0)) throw std::invalid_argument("lorenz: sample total must be positive");
    return LorenzCurve(Kind::EmpiricalPiecewiseLinear, std::make_shared<const Distribution>(std::move(dist)));
}

LorenzCurve LorenzCurve::line_of_equality() { return LorenzCurve(Kind::LineOfEquality, nullptr); }

LorenzCurve LorenzCurve::perfect_inequality() { return LorenzCurve(Kind::PerfectInequality, nullptr); }

double LorenzCurve::operator()(double p) const {
    check_unit(p, "p");
    switch (kind_) {
        case Kind::LineOfEquality:
            return p;
        case Kind::PerfectInequality:
            return p < 1.0 ? 0.0 : 1.0;
        case Kind::EmpiricalPiecewiseLinear:
            return piecewise_share(std::get<Empirical>(dist_->family()), p);
        case Kind::Analytic:
            break;
    }
    if (const auto* e = std::get_if<Empirical>(&dist_->family())) return piecewise_share(*e, p);
    if (std::holds_alternative<Constant>(dist_->family())) return p;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    return std::min(dist_->partial_moment(dist_->quantile(p)) / dist_->mean(), 1.0);
}

double LorenzCurve::inverse(double y) const {
    check_unit(y, "share");
    switch (kind_) {
        case Kind::LineOfEquality:
            return y;
        case Kind::PerfectInequality:
            return y > 0.0 ? 1.0 : 0.0;
        default:
            break;
    }
    return first_true([&](double p) { return (*this)(p) >= y; }, 0.0, 1.0);
}

std::string LorenzCurve::describe() const {
    switch (kind_) {
        case Kind::LineOfEquality:
            return "line-of-equality";
        case Kind::PerfectInequality:
            return "perfect-inequality";
        case Kind::EmpiricalPiecewiseLinear:
            return "empirical(n=" + std::to_string(std::get<Empirical>(dist_->family()).values.size()) + ")";
        case Kind::Analytic:
            break;
    }
    return "analytic " + dist_->describe();
}

std::string to_string(DominanceVerdict::Kind kind) {
    switch (kind) {
        case DominanceVerdict::Kind::Dominates:
            return "Dominates";
        case DominanceVerdict::Kind::DominatedBy:
            return "DominatedBy";
        case DominanceVerdict::Kind::Equal:
            return "Equal";
        case DominanceVerdict::Kind::Crossing:
            return "Crossing";
    }
    return "?";
}

std::vector<double> unit_grid(std::size_t points) {
    if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> grid(points);
    const double last = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / last;
    grid.back() = 1.0;
    return grid;
}

DominanceVerdict lc_dominates(const LorenzCurve& a, const LorenzCurve& b, std::size_t grid_size) {
    if (grid_size < 3) throw std::invalid_argument("lc_dominates: grid_size must be at least 3");
    bool above = false;
    bool below = false;
    int last_sign = 0;
    double last_p = 0.0;
    DominanceVerdict verdict;
    for (double p : unit_grid(grid_size)) {
        const double d = a(p) - b(p);
        int sign = 0;
        if (d > kDominanceTolerance) sign = 1;
        if (d < -kDominanceTolerance) sign = -1;
        if (sign == 0) continue;
        (sign > 0 ? above : below) = true;
        if (last_sign != 0 && sign != last_sign && verdict.kind != DominanceVerdict::Kind::Crossing) {
            verdict.kind = DominanceVerdict::Kind::Crossing;
            verdict.left = last_p;
            verdict.right = p;
            verdict.witness = (last_p + p) / 2;
        }
        last_sign = sign;
        last_p = p;
    }
    if (above && below) return verdict;
    if (above) verdict.kind = DominanceVerdict::Kind::Dominates;
    else if (below) verdict.kind = DominanceVerdict::Kind::DominatedBy;
    else verdict.kind = DominanceVerdict::Kind::Equal;
    return verdict;
}

double gini(const LorenzCurve& curve, std::size_t grid_size) {
    const auto grid = unit_grid(grid_size);
    double area = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        area += (grid[i] - grid[i - 1]) * (curve(grid[i]) + curve(grid[i - 1])) / 2;
    return 1.0 - 2.0 * area;
}

}  // namespace rdbp
