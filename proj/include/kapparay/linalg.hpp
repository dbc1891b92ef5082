#pragma once

#include <cmath>

namespace kapparay {

/// Point or direction in the (range, depth) plane. Depth grows downward.
struct Vec2 {
    double r = 0.0;
    double z = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.r * b.r + a.z * b.z; }
inline double norm(Vec2 a) { return std::hypot(a.r, a.z); }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.r + b.r, a.z + b.z}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.r - b.r, a.z - b.z}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.r, s * a.z}; }

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Row-major 2x2 matrix. For variation matrices rows are (p, z) and columns (p0, z0).
struct Mat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const { return a11 * a22 - a12 * a21; }

    Mat2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    double operator()(int i, int j) const {
        if (i == 0) return j == 0 ? a11 : a12;
        return j == 0 ? a21 : a22;
    }
    double& operator()(int i, int j) {
        if (i == 0) return j == 0 ? a11 : a12;
        return j == 0 ? a21 : a22;
    }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}

inline Mat2 operator*(double s, const Mat2& a) {
    return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}

}  // namespace kapparay
