#pragma once

// Waveguide geometry and refractive index.
//
// Coordinates: r is range (m), z is depth (m) and grows DOWNWARD. The free
// surface is z = 0 and the bottom is z = z_b(r) > 0. Internal normals point
// into the water column, so the bottom normal has N_z < 0 and the surface
// normal is (0, 1).

#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "kapparay/linalg.hpp"
#include "kapparay/spline.hpp"

namespace kapparay {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Refractive index n = c0 / c and the partial derivatives needed downstream.
struct IndexSample {
    double n = 1.0;
    double n_r = 0.0;
    double n_z = 0.0;
    double n_zz = 0.0;
};

/// Canonical Munk profile c(z) = c_axis (1 + eps (eta + exp(-eta) - 1)), eta = 2 (z - axis) / scale.
struct MunkParameters {
    double axis_speed = 1500.0;
    double axis_depth = 1300.0;
    double scale_depth = 1300.0;
    double epsilon = 0.00737;
};

class SoundSpeedField {
public:
    enum class Kind { constant, linear_gradient, munk, gridded };

    static SoundSpeedField constant(double c0, double speed);

    /// c(r, z) = surface_speed + dc_dz z + dc_dr r. Gradients in 1/s.
    static SoundSpeedField linear_gradient(double c0, double surface_speed, double dc_dz,
                                           double dc_dr = 0.0);

    static SoundSpeedField munk(double c0, const MunkParameters& params = {});

    /// speeds is row-major with depths.size() rows and ranges.size() columns.
    /// A single range column gives a range-independent profile. The index is
    /// interpolated with a tensor-product natural cubic spline; queries are
    /// accepted within `margin` metres outside the grid rectangle, plus a
    /// rounding skin of 1e-6 of the grid extent.
    static SoundSpeedField gridded(double c0, std::vector<double> ranges, std::vector<double> depths,
                                   std::vector<double> speeds, double margin = 0.0);

    IndexSample index_at(double r, double z) const;
    double sound_speed(double r, double z) const;

    Kind kind() const;
    double reference_speed() const { return c0_; }

private:
    struct Constant {
        double speed;
    };
    struct Linear {
        double surface_speed;
        double dc_dz;
        double dc_dr;
    };
    struct Munk {
        MunkParameters p;
    };
    struct Grid;

    SoundSpeedField(double c0, std::variant<Constant, Linear, Munk, std::shared_ptr<const Grid>> model)
        : c0_(c0), model_(std::move(model)) {}

    double c0_;
    std::variant<Constant, Linear, Munk, std::shared_ptr<const Grid>> model_;
};

/// Local boundary frame at a reflection point.
struct NormalFrame {
    double n_r = 0.0;  ///< internal unit normal, range component (cos alpha)
    double n_z = 1.0;  ///< internal unit normal, depth component (sin alpha)
    double alpha = 0.0;  ///< normal angle in [0, 2 pi)
    /// Signed curvature N_z d(alpha)/dr. Positive when the boundary is concave
    /// as seen from the water (a bottom bowl), negative for a mound.
    double curvature = 0.0;
    double radius = kInfinity;  ///< 1 / |curvature|

    Vec2 normal() const { return {n_r, n_z}; }
};

struct BottomSample {
    double depth = 0.0;
    double slope = 0.0;
    double second_derivative = 0.0;
    NormalFrame frame;
};

/// Frame of a boundary z = f(r) with given slope and second derivative.
/// `water_below` is true for the surface (water at larger z).
NormalFrame frame_from_profile(double slope, double second_derivative, bool water_below);

/// Flat free surface z = 0.
NormalFrame surface_frame();

class Bathymetry {
public:
    enum class Kind { flat, linear_slope, sinusoidal, circular_arc, piecewise };

    static Bathymetry flat(double depth);

    /// z_b = depth + slope r on [r_min, r_max].
    static Bathymetry linear_slope(double depth, double slope, double r_min, double r_max);

    /// z_b = depth + amplitude sin(wavenumber r + phase).
    static Bathymetry sinusoidal(double depth, double amplitude, double wavenumber, double phase = 0.0);

    /// Arc of a circle centred at (center_r, center_z). A bowl lies below its
    /// centre (water-side concave); a mound lies above it.
    static Bathymetry circular_arc(double center_r, double center_z, double radius, bool bowl,
                                   double r_min, double r_max);

    /// Natural C2 spline through (r, z_b) pairs.
    static Bathymetry piecewise(std::vector<double> ranges, std::vector<double> depths);

    /// Two-column text file: r z_b per line, '#' comments, strictly increasing r.
    static Bathymetry from_file(const std::filesystem::path& path);

    BottomSample bottom_at(double r) const;
    double depth_at(double r) const;

    bool contains(double r) const { return r >= r_min_ && r <= r_max_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    Kind kind() const { return kind_; }

private:
    Bathymetry(Kind kind, std::vector<double> params, double r_min, double r_max)
        : kind_(kind), params_(std::move(params)), r_min_(r_min), r_max_(r_max) {}

    void check_positive_depth() const;
    void require_in_domain(double r) const;
    SplineValue profile(double r) const;

    Kind kind_;
    std::vector<double> params_;
    double r_min_;
    double r_max_;
    std::shared_ptr<const NaturalCubicSpline> spline_;
};

std::string to_string(SoundSpeedField::Kind kind);
std::string to_string(Bathymetry::Kind kind);

}  // namespace kapparay
