#pragma once

#include "sympb/core.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

namespace sympb::roots {

/// Root of f on [a, b] given f(a), f(b) of opposite sign (or one of them
/// zero). Returns the bracket endpoint of the final interval with the
/// smaller residual; the bracket width is driven to a few ulps.
template <class F>
double bracketed(F&& f, double a, double b, double fa, double fb, const char* what = "root") {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw SolveError(std::string(what) + ": root not bracketed");
    std::uintmax_t max_iter = 200;
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
    auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
    if (lo == hi) return lo;
    double flo = f(lo);
    double fhi = f(hi);
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

template <class F>
double bracketed(F&& f, double a, double b, const char* what = "root") {
    return bracketed(f, a, b, f(a), f(b), what);
}

/// Sample f at n+1 equispaced points of [a, b] and return the first
/// subinterval whose endpoint values change sign in the requested direction
/// (`rising`: from negative to non-negative; otherwise positive to
/// non-positive). The values at the returned endpoints are passed back so the
/// caller can refine without re-evaluating.
struct Bracket {
    double a, b, fa, fb;
};

template <class F>
std::optional<Bracket> first_sign_change(F&& f, double a, double b, int n, bool rising) {
    double x0 = a;
    double f0 = f(x0);
    for (int i = 1; i <= n; ++i) {
        double x1 = a + (b - a) * static_cast<double>(i) / n;
        double f1 = f(x1);
        bool change = rising ? (f0 < 0.0 && f1 >= 0.0) : (f0 > 0.0 && f1 <= 0.0);
        if (change) return Bracket{x0, x1, f0, f1};
        x0 = x1;
        f0 = f1;
    }
    return std::nullopt;
}

/// Local minimum of f on [a, b] (Brent). Returns (argmin, min).
template <class F>
std::pair<double, double> minimize(F&& f, double a, double b) {
    std::uintmax_t max_iter = 200;
    return boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2,
                                                 max_iter);
}

}  // namespace sympb::roots
