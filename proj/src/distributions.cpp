#include "rdbp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rdbp/exact_sum.hpp"

namespace rdbp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_point(double x) {
    if (std::isnan(x) || x < 0.0) throw std::domain_error("argument must be nonnegative, got " + std::to_string(x));
}

void check_probability(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("probability must lie in [0, 1], got " + std::to_string(t));
}

double uniform_cdf(double a, double b, double x) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return (x - a) / (b - a);
}

double uniform_pm(double a, double b, double x) {
    if (x <= a) return 0.0;
    if (x >= b) return (a + b) / 2;
    return (x - a) * (x + a) / (2 * (b - a));
}

double compute_mean(const Distribution::Family& family) {
    return std::visit(overloaded{
                          [](const Uniform& d) { return (d.a + d.b) / 2; },
                          [](const Exponential& d) { return 1.0 / d.rate; },
                          [](const Pareto& d) { return d.shape * d.scale / (d.shape - 1); },
                          [](const NearDegenerate& d) { return d.center; },
                          [](const Constant& d) { return d.value; },
                          [](const Empirical& d) { return d.prefix.back() / static_cast<double>(d.values.size()); },
                      },
                      family);
}

// Number of sample values <= x.
std::size_t count_at_most(const Empirical& d, double x) {
    return static_cast<std::size_t>(std::upper_bound(d.values.begin(), d.values.end(), x) - d.values.begin());
}

}  // namespace

Distribution::Distribution(Family family) : family_(std::move(family)), mean_(compute_mean(family_)) {}

Distribution Distribution::uniform(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b), "uniform: bounds must be finite");
    require(a >= 0.0, "uniform: lower bound must be nonnegative");
    require(b > a, "uniform: upper bound must exceed lower bound");
    return Distribution(Uniform{a, b});
}

Distribution Distribution::exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exponential: rate must be positive");
    return Distribution(Exponential{rate});
}

Distribution Distribution::pareto(double scale, double shape) {
    require(std::isfinite(scale) && scale > 0.0, "pareto: scale must be positive");
    require(std::isfinite(shape) && shape > 1.0, "pareto: shape must exceed 1 for a finite mean");
    return Distribution(Pareto{scale, shape});
}

Distribution Distribution::near_degenerate(double center, double halfwidth) {
    require(std::isfinite(center) && std::isfinite(halfwidth), "near-degenerate: parameters must be finite");
    require(halfwidth > 0.0, "near-degenerate: halfwidth must be positive");
    require(center - halfwidth >= 0.0, "near-degenerate: support must be nonnegative");
    return Distribution(NearDegenerate{center, halfwidth});
}

Distribution Distribution::constant(double value) {
    require(std::isfinite(value) && value >= 0.0, "constant: value must be finite and nonnegative");
    return Distribution(Constant{value});
}

Distribution Distribution::empirical(std::vector<double> sample) {
    require(!sample.empty(), "empirical: sample must be nonempty");
    for (double v : sample) require(std::isfinite(v) && v >= 0.0, "empirical: values must be finite and nonnegative");
    std::sort(sample.begin(), sample.end());
    std::vector<double> prefix;
    prefix.reserve(sample.size() + 1);
    prefix.push_back(0.0);
    ExactSum sum;
    for (double v : sample) {
        sum.add(v);
        prefix.push_back(sum.value());
    }
    return Distribution(Empirical{std::move(sample), std::move(prefix)});
}

double Distribution::cdf(double x) const {
    check_point(x);
    return std::visit(overloaded{
                          [x](const Uniform& d) { return uniform_cdf(d.a, d.b, x); },
                          [x](const NearDegenerate& d) {
                              return uniform_cdf(d.center - d.halfwidth, d.center + d.halfwidth, x);
                          },
                          [x](const Exponential& d) { return -std::expm1(-d.rate * x); },
                          [x](const Pareto& d) { return x <= d.scale ? 0.0 : 1.0 - std::pow(d.scale / x, d.shape); },
                          [x](const Constant& d) { return x < d.value ? 0.0 : 1.0; },
                          [x](const Empirical& d) {
                              return static_cast<double>(count_at_most(d, x)) / static_cast<double>(d.values.size());
                          },
                      },
                      family_);
}

double Distribution::quantile(double t) const {
    check_probability(t);
    double x = raw_quantile(t);
    // closed forms can land one ulp short of F(x) >= t
    if (is_continuous() && t > 0.0 && t < 1.0)
        while (x < kUnbounded && cdf(x) < t) x = std::nextafter(x, kUnbounded);
    return x;
}

double Distribution::raw_quantile(double t) const {
    return std::visit(overloaded{
                          [t](const Uniform& d) { return t == 1.0 ? d.b : d.a + t * (d.b - d.a); },
                          [t](const NearDegenerate& d) {
                              const double a = d.center - d.halfwidth;
                              const double b = d.center + d.halfwidth;
                              return t == 1.0 ? b : a + t * (b - a);
                          },
                          [t](const Exponential& d) { return t == 1.0 ? kUnbounded : -std::log1p(-t) / d.rate; },
                          [t](const Pareto& d) {
                              return t == 1.0 ? kUnbounded : d.scale * std::pow(1.0 - t, -1.0 / d.shape);
                          },
                          [](const Constant& d) { return d.value; },
                          [t](const Empirical& d) {
                              const std::size_t n = d.values.size();
                              const double nd = static_cast<double>(n);
                              if (t == 0.0) return d.values.front();
                              // smallest k with k/n >= t, matching cdf()'s k/n arithmetic
                              auto k = static_cast<std::size_t>(std::ceil(t * nd));
                              k = std::clamp<std::size_t>(k, 1, n);
                              while (k > 1 && static_cast<double>(k - 1) / nd >= t) --k;
                              while (k < n && static_cast<double>(k) / nd < t) ++k;
                              return d.values[k - 1];
                          },
                      },
                      family_);
}

double Distribution::partial_moment(double x) const {
    check_point(x);
    if (is_unbounded(x)) return mean_;
    return std::visit(overloaded{
                          [x](const Uniform& d) { return uniform_pm(d.a, d.b, x); },
                          [x](const NearDegenerate& d) {
                              return uniform_pm(d.center - d.halfwidth, d.center + d.halfwidth, x);
                          },
                          [x](const Exponential& d) {
                              const double z = d.rate * x;
                              return (-std::expm1(-z) - z * std::exp(-z)) / d.rate;
                          },
                          [this, x](const Pareto& d) {
                              return x <= d.scale ? 0.0 : mean_ * (1.0 - std::pow(d.scale / x, d.shape - 1));
                          },
                          [x](const Constant& d) { return x < d.value ? 0.0 : d.value; },
                          [x](const Empirical& d) {
                              return d.prefix[count_at_most(d, x)] / static_cast<double>(d.values.size());
                          },
                      },
                      family_);
}

double Distribution::support_min() const {
    return std::visit(overloaded{
                          [](const Uniform& d) { return d.a; },
                          [](const NearDegenerate& d) { return d.center - d.halfwidth; },
                          [](const Exponential&) { return 0.0; },
                          [](const Pareto& d) { return d.scale; },
                          [](const Constant& d) { return d.value; },
                          [](const Empirical& d) { return d.values.front(); },
                      },
                      family_);
}

double Distribution::support_max() const {
    return std::visit(overloaded{
                          [](const Uniform& d) { return d.b; },
                          [](const NearDegenerate& d) { return d.center + d.halfwidth; },
                          [](const Exponential&) { return kUnbounded; },
                          [](const Pareto&) { return kUnbounded; },
                          [](const Constant& d) { return d.value; },
                          [](const Empirical& d) { return d.values.back(); },
                      },
                      family_);
}

bool Distribution::is_continuous() const {
    return !std::holds_alternative<Constant>(family_) && !std::holds_alternative<Empirical>(family_);
}

double Distribution::from_uniform(double u) const {
    check_probability(u);
    return raw_quantile(u);
}

std::string Distribution::describe() const {
    std::ostringstream out;
    out.precision(17);
    std::visit(overloaded{
                   [&](const Uniform& d) { out << "uniform(a=" << d.a << ", b=" << d.b << ")"; },
                   [&](const NearDegenerate& d) {
                       out << "near-degenerate(center=" << d.center << ", halfwidth=" << d.halfwidth << ")";
                   },
                   [&](const Exponential& d) { out << "exponential(rate=" << d.rate << ")"; },
                   [&](const Pareto& d) { out << "pareto(scale=" << d.scale << ", shape=" << d.shape << ")"; },
                   [&](const Constant& d) { out << "constant(" << d.value << ")"; },
                   [&](const Empirical& d) { out << "empirical(n=" << d.values.size() << ")"; },
               },
               family_);
    return out.str();
}

std::vector<double> sample_stream(const Distribution& dist, const CounterRng& rng, std::uint64_t run,
                                  std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = dist.draw(rng, StreamKey{run, 0, i}, Channel::Sample);
    return out;
}

ReproductionLaw::ReproductionLaw(std::vector<double> probabilities) : probabilities_(std::move(probabilities)) {
    require(!probabilities_.empty(), "reproduction law: probabilities must be nonempty");
    ExactSum total;
    ExactSum weighted;
    cumulative_.reserve(probabilities_.size());
    for (std::size_t j = 0; j < probabilities_.size(); ++j) {
        const double p = probabilities_[j];
        require(std::isfinite(p) && p >= 0.0, "reproduction law: probabilities must be nonnegative");
        total.add(p);
        weighted.add(static_cast<double>(j) * p);
        cumulative_.push_back(total.value());
    }
    const double sum = total.value();
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "reproduction law: probabilities sum to " << sum << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
    mean_ = weighted.value();
}

ReproductionLaw ReproductionLaw::constant(std::size_t offspring) {
    std::vector<double> p(offspring + 1, 0.0);
    p[offspring] = 1.0;
    return ReproductionLaw(std::move(p));
}

std::uint64_t ReproductionLaw::from_uniform(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
        // u beyond the rounded total: take the largest supported value
        std::size_t j = probabilities_.size() - 1;
        while (j > 0 && probabilities_[j] == 0.0) --j;
        return j;
    }
    return static_cast<std::uint64_t>(it - cumulative_.begin());
}

std::vector<std::string> ReproductionLaw::nontriviality_violations() const {
    std::vector<std::string> out;
    if (!(probabilities_[0] > 0.0)) out.emplace_back("p_0 > 0 required");
    bool branching = false;
    for (std::size_t j = 2; j < probabilities_.size(); ++j) branching = branching || probabilities_[j] > 0.0;
    if (!branching) out.emplace_back("p_j > 0 required for some j > 1");
    return out;
}

PopulationParams::PopulationParams(ReproductionLaw reproduction_, Distribution resources_, Distribution claims_)
    : reproduction(std::move(reproduction_)), resources(std::move(resources_)), claims(std::move(claims_)) {
    require(claims.mean() > 0.0, "claims: mean claim must be positive");
}

}  // namespace rdbp
