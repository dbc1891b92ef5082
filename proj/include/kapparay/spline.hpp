#pragma once

#include <span>
#include <vector>

namespace kapparay {

struct SplineValue {
    double f = 0.0;
    double df = 0.0;
    double d2f = 0.0;
};

/// Natural cubic interpolating spline (zero second derivative at both ends).
/// Beyond the end knots it continues linearly, which keeps it C2.
class NaturalCubicSpline {
public:
    NaturalCubicSpline() = default;

    /// Knots must be strictly increasing; at least two are required.
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

    SplineValue operator()(double x) const;

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

    /// Second derivatives at the knots of the natural spline through (x, y).
    static std::vector<double> second_derivatives(std::span<const double> x,
                                                  std::span<const double> y);

    /// Evaluate the natural spline with precomputed second derivatives m.
    static SplineValue evaluate(std::span<const double> x, std::span<const double> y,
                                std::span<const double> m, double at);

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

}  // namespace kapparay
