#pragma once

#include <cmath>
#include <limits>

namespace rdbp {

/// Smallest double x in [lo, hi] for which `pred` holds, assuming `pred` is
/// monotone (false then true) and pred(hi) is true. Runs to full double
/// resolution: the result is adjacent to a point where pred fails.
template <class Pred>
double first_true(Pred&& pred, double lo, double hi) {
    if (pred(lo)) return lo;
    for (;;) {
        const double mid = lo + (hi - lo) / 2;
        if (!(mid > lo && mid < hi)) break;
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Grows `start` geometrically until pred holds; returns +inf if it never does.
template <class Pred>
double expand_until(Pred&& pred, double start) {
    double hi = start > 1.0 ? start : 1.0;
    while (std::isfinite(hi) && !pred(hi)) hi *= 2;
    return hi;
}

}  // namespace rdbp
