#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdbp/random.hpp"

namespace rdbp {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double x) { return x == kUnbounded; }

struct Uniform {
    double a;
    double b;
};

struct Exponential {
    double rate;
};

/// Classical Pareto on [scale, inf) with shape > 1 so the mean is finite.
struct Pareto {
    double scale;
    double shape;
};

/// Uniform(center - halfwidth, center + halfwidth); a continuous stand-in for
/// the perfectly equal law.
struct NearDegenerate {
    double center;
    double halfwidth;
};

struct Constant {
    double value;
};

/// Sorted sample with exactly rounded prefix sums.
struct Empirical {
    std::vector<double> values;
    std::vector<double> prefix;  // prefix[k] = sum of the k smallest values
};

/// Nonnegative law used for claims and per-capita production.
///
/// cdf, quantile and partial_moment are closed forms for the parametric
/// families and exact step functions for Empirical and Constant. quantile is
/// the left-continuous inverse inf{x : F(x) >= t}; quantile(1) is the
/// essential supremum and may be kUnbounded.
class Distribution {
public:
    using Family = std::variant<Uniform, Exponential, Pareto, NearDegenerate, Constant, Empirical>;

    static Distribution uniform(double a, double b);
    static Distribution exponential(double rate);
    static Distribution pareto(double scale, double shape);
    static Distribution near_degenerate(double center, double halfwidth);
    static Distribution constant(double value);
    static Distribution empirical(std::vector<double> sample);

    double cdf(double x) const;
    double quantile(double t) const;
    /// PM(x) = integral of u dF(u) over [0, x]; PM(kUnbounded) is the mean.
    double partial_moment(double x) const;
    double mean() const { return mean_; }

    double support_min() const;
    double support_max() const;
    /// False for families with atoms (Empirical, Constant).
    bool is_continuous() const;

    /// Inverse-transform draw from u in (0, 1).
    double from_uniform(double u) const;
    double draw(const CounterRng& rng, const StreamKey& key, Channel channel) const {
        return from_uniform(rng.uniform(key, channel));
    }

    const Family& family() const { return family_; }
    std::string describe() const;

private:
    explicit Distribution(Family family);
    double raw_quantile(double t) const;

    Family family_;
    double mean_ = 0.0;
};

/// `count` draws keyed (run, 0, 0..count-1) on the Sample channel.
std::vector<double> sample_stream(const Distribution& dist, const CounterRng& rng, std::uint64_t run,
                                  std::size_t count);

/// Offspring law (p_0, ..., p_J).
class ReproductionLaw {
public:
    /// Requires nonnegative entries summing to 1 within 1e-12. The
    /// nontriviality assumptions (p_0 > 0, some p_j > 0 with j > 1) are not
    /// enforced here; see nontriviality_violations().
    explicit ReproductionLaw(std::vector<double> probabilities);

    /// Degenerate law: every parent has exactly `offspring` children.
    static ReproductionLaw constant(std::size_t offspring);

    double mean() const { return mean_; }
    std::size_t max_offspring() const { return probabilities_.size() - 1; }
    std::span<const double> probabilities() const { return probabilities_; }

    std::uint64_t from_uniform(double u) const;
    std::uint64_t draw(const CounterRng& rng, const StreamKey& key) const {
        return from_uniform(rng.uniform(key, Channel::Offspring));
    }

    std::vector<std::string> nontriviality_violations() const;

private:
    std::vector<double> probabilities_;
    std::vector<double> cumulative_;
    double mean_ = 0.0;
};

/// Reproduction, resource and claim laws of one population.
struct PopulationParams {
    PopulationParams(ReproductionLaw reproduction, Distribution resources, Distribution claims);

    ReproductionLaw reproduction;
    Distribution resources;
    Distribution claims;

    double m() const { return reproduction.mean(); }
    double r() const { return resources.mean(); }
    double mu() const { return claims.mean(); }
    bool resources_exceed_claims() const { return r() > m() * mu(); }
};

}  // namespace rdbp
