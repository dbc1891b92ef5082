#include "kapparay/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace kapparay {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw std::invalid_argument("spline: knot/value size mismatch");
    if (x_.size() < 2) throw std::invalid_argument("spline: at least two knots required");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline: knots must be strictly increasing");
    }
    m_ = second_derivatives(x_, y_);
}

SplineValue NaturalCubicSpline::operator()(double x) const { return evaluate(x_, y_, m_, x); }

std::vector<double> NaturalCubicSpline::second_derivatives(std::span<const double> x,
                                                           std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;

    // Tridiagonal system for interior second derivatives, Thomas algorithm.
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double h0 = x[i + 1] - x[i];
        const double h1 = x[i + 2] - x[i + 1];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = x[i + 1] - x[i];
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
        m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    return m;
}

SplineValue NaturalCubicSpline::evaluate(std::span<const double> x, std::span<const double> y,
                                         std::span<const double> m, double at) {
    const std::size_t n = x.size();
    if (at <= x.front()) {
        const double h = x[1] - x[0];
        const double slope = (y[1] - y[0]) / h - h * (2.0 * m[0] + m[1]) / 6.0;
        return {y[0] + slope * (at - x[0]), slope, 0.0};
    }
    if (at >= x.back()) {
        const double h = x[n - 1] - x[n - 2];
        const double slope = (y[n - 1] - y[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
        return {y[n - 1] + slope * (at - x[n - 1]), slope, 0.0};
    }
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - at) / h;
    const double b = (at - x[i]) / h;
    SplineValue v;
    v.f = a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    v.df = (y[i + 1] - y[i]) / h + ((1.0 - 3.0 * a * a) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
    v.d2f = a * m[i] + b * m[i + 1];
    return v;
}

}  // namespace kapparay
