#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sympb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// det(a, b) for column vectors a, b: the oriented area form.
inline double det(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotation by +pi/2: J(x, y) = (-y, x).
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

/// Reduce an angle to [0, 2pi).
inline double wrap_2pi(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Reduce an angle to [-pi, pi).
inline double wrap_pm_pi(double x) { return wrap_2pi(x + pi) - pi; }

/// Distance between two angles on the circle.
inline double circle_distance(double a, double b) { return std::abs(wrap_pm_pi(a - b)); }

// Error hierarchy. Every failure mode of the library surfaces as one of
// these; the CLI maps them onto exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TableError : public Error {
public:
    using Error::Error;
};
class KindMismatch : public Error {
public:
    using Error::Error;
};
class GeometryError : public Error {
public:
    using Error::Error;
};
class SolveError : public Error {
public:
    using Error::Error;
};
class ChartError : public Error {
public:
    using Error::Error;
};
class SearchError : public Error {
public:
    using Error::Error;
};
class DomainError : public Error {
public:
    using Error::Error;
};
class ConsistencyError : public Error {
public:
    using Error::Error;
};
class NotSaddle : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Analysis refused because the dissipation is too weak for the requested
/// construction. Distinct from a plain error: the CLI exits with code 2.
class NotContracted : public Error {
public:
    using Error::Error;
};

}  // namespace sympb
