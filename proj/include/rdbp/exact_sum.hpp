#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace rdbp {

// Shewchuk-style expansion of a running sum. value() is the correctly rounded
// sum of everything added so far, so it depends only on the multiset of
// addends and is monotone in each of them.
class ExactSum {
public:
    void add(double x) {
        std::size_t kept = 0;
        for (double y : partials_) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials_[kept++] = lo;
            x = hi;
        }
        partials_.resize(kept);
        partials_.push_back(x);
    }

    double value() const {
        std::size_t n = partials_.size();
        if (n == 0) return 0.0;
        double hi = partials_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = partials_[--n];
            hi = x + y;
            const double yr = hi - x;
            lo = y - yr;
            if (lo != 0.0) break;
        }
        // round-half-even correction when the tail would have pushed us over
        if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi) hi = x;
        }
        return hi;
    }

    void clear() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

}  // namespace rdbp
