#pragma once

#include "sympb/core.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <vector>

namespace sympb {

/// Periodic cubic interpolant of samples on the uniform grid
/// x_j = 2 pi j / N. Built as a Boost cardinal cubic B-spline over the data
/// extended periodically by `kPad` nodes on each side; the influence of the
/// artificial end conditions decays like 0.268^kPad and is far below double
/// precision at the nodes we evaluate.
class PeriodicSpline {
public:
    static constexpr int kPad = 32;

    PeriodicSpline() = default;
    explicit PeriodicSpline(const std::vector<double>& y) : n_(static_cast<int>(y.size())) {
        if (n_ < 4) throw DomainError("PeriodicSpline: need at least 4 samples");
        h_ = two_pi / n_;
        std::vector<double> ext(static_cast<std::size_t>(n_ + 2 * kPad + 1));
        for (int j = -kPad; j <= n_ + kPad; ++j) ext[j + kPad] = y[((j % n_) + n_) % n_];
        spline_ = Spline(ext.begin(), ext.end(), -kPad * h_, h_);
    }

    double operator()(double x) const { return spline_(wrap_2pi(x)); }
    double prime(double x) const { return spline_.prime(wrap_2pi(x)); }
    int size() const { return n_; }
    double step() const { return h_; }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    int n_ = 0;
    double h_ = 0.0;
    Spline spline_;
};

}  // namespace sympb
