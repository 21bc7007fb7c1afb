#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdbp/distributions.hpp"

namespace rdbp {

/// Lorenz curve of a nonnegative law: LC(p) is the share of the total held by
/// the fraction p with the smallest values.
///
/// Analytic curves evaluate PM(F^-1(p)) / mu for continuous families and the
/// exact Gastwirth integral for families with atoms. The two limit shapes are
/// kept as their own kinds because no finite-mean continuous law reaches
/// perfect inequality.
class LorenzCurve {
public:
    enum class Kind { Analytic, EmpiricalPiecewiseLinear, LineOfEquality, PerfectInequality };

    static LorenzCurve analytic(Distribution dist);
    /// Piecewise-linear curve through (k/n, share of the k smallest values).
    static LorenzCurve empirical(std::span<const double> sample);
    static LorenzCurve line_of_equality();
    static LorenzCurve perfect_inequality();

    Kind kind() const { return kind_; }

    double operator()(double p) const;
    /// Smallest p with LC(p) >= y.
    double inverse(double y) const;

    std::string describe() const;

private:
    LorenzCurve(Kind kind, std::shared_ptr<const Distribution> dist) : kind_(kind), dist_(std::move(dist)) {}

    Kind kind_;
    // Analytic: the law itself. EmpiricalPiecewiseLinear: the sample held as
    // an Empirical law, which carries exactly the sorted values and sums needed.
    std::shared_ptr<const Distribution> dist_;
};

inline constexpr std::size_t kDefaultDominanceGrid = 1025;
inline constexpr double kDominanceTolerance = 1e-12;

struct DominanceVerdict {
    enum class Kind { Dominates, DominatedBy, Equal, Crossing };
    Kind kind = Kind::Equal;
    // Crossing only: consecutive grid points with opposite strict signs of
    // a - b, and their midpoint.
    double left = 0.0;
    double right = 0.0;
    double witness = 0.0;
};

std::string to_string(DominanceVerdict::Kind kind);

/// Compares a against b on a uniform grid of `grid_size` points in [0, 1].
DominanceVerdict lc_dominates(const LorenzCurve& a, const LorenzCurve& b,
                              std::size_t grid_size = kDefaultDominanceGrid);

/// Uniform grid 0, 1/(n-1), ..., 1.
std::vector<double> unit_grid(std::size_t points);

/// 1 - 2 * integral of LC, trapezoid rule on a uniform grid.
double gini(const LorenzCurve& curve, std::size_t grid_size = kDefaultDominanceGrid);

}  // namespace rdbp
