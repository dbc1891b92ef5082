#pragma once

// Finite-difference verification of the analytic variation matrix.
//
// Everything here differentiates whole traces numerically with respect to the
// launch pulse p0 and depth z0; none of it calls kappa_matrix or k_matrix.

#include <string>
#include <vector>

#include "kapparay/environment.hpp"
#include "kapparay/linalg.hpp"
#include "kapparay/propagation.hpp"
#include "kapparay/reflection.hpp"

namespace kapparay {

struct BeamPerturbation {
    double h_p = 1e-6;  ///< launch pulse step
    double h_z = 1e-4;  ///< launch depth step (m)
    int richardson_levels = 2;

    BeamPerturbation scaled(double factor) const { return {h_p * factor, h_z * factor, richardson_levels}; }
};

struct JacobianEstimate {
    Mat2 jacobian;      ///< centered differences at the (possibly halved) step actually used
    Mat2 error;         ///< Richardson estimate of |jacobian - exact| per entry
    Mat2 extrapolated;  ///< Richardson-extrapolated Jacobian
    BeamPerturbation used;
    std::vector<BoundaryId> bounce_sequence;
};

/// Centered-difference Jacobian of (p, z) at r_query with respect to (p0, z0).
/// The perturbed rays must reproduce the central ray's bounce sequence; the
/// steps are halved up to five times before PerturbationTooLarge is thrown.
JacobianEstimate fd_jacobian(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                             const BeamPerturbation& pert, double r_query);

/// Entrywise |numeric - analytic| / |analytic|. Entries smaller than 1e-4 of
/// the matrix scale use that scale instead, after rescaling the off-diagonal
/// entries by the length h_z / h_p so mixed units compare.
Mat2 relative_errors(const Mat2& numeric, const Mat2& analytic, double length_scale);
double max_relative_error(const Mat2& numeric, const Mat2& analytic, double length_scale);

struct KappaVerification {
    Mat2 analytic;  ///< propagated q including the analytic jump
    Mat2 numeric;   ///< finite-difference Jacobian
    double max_rel_err = 0.0;
    KappaMatrix kappa_analytic;
    Mat2 kappa_numeric;  ///< numeric Jacobian with the smooth flights before/after the bounce removed
    BounceRecord bounce;
    JacobianEstimate estimate;
};

/// Compares the analytic variation matrix after exactly one bounce with the
/// finite-difference Jacobian of the trace.
KappaVerification verify_kappa(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                               const BeamPerturbation& pert, double r_after_bounce);

struct ConvergenceStudy {
    std::vector<double> scales;  ///< perturbation multipliers 1, 1/2, 1/4, ...
    std::vector<double> errors;  ///< max relative error over significant entries
    std::vector<double> orders;  ///< log2 of successive error ratios
    double mean_order = 0.0;
};

/// Repeats verify_kappa with the perturbation halved `levels - 1` times.
ConvergenceStudy convergence_study(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                                   const BeamPerturbation& base, double r_after_bounce, int levels = 3);

struct BeamOffset {
    double dr = 0.0;
    double dz = 0.0;
};

/// Offset of a neighbouring ray's hit point, to first order:
///   dr = (t_r N_z / N_t) dz0,  dz = -(t_r N_r / N_t) dz0
/// where dz0 = z - z~ is the depth separation of the parallel rays at equal range.
BeamOffset beam_geometry_check(Vec2 t, Vec2 normal, double delta_z);

/// The same offset from an explicit line-line intersection with a planar boundary.
BeamOffset planar_intersection(Vec2 t, Vec2 normal, double delta_z);

/// A single bounce set up so that the incident ray meets a boundary with
/// normal angle alpha at grazing angle theta, where the index is 1 with the
/// given gradients and the boundary has the given curvature. Bottom normals
/// need sin(alpha) < 0; for sin(alpha) > 0 the depth-mirrored configuration
/// (-theta, -alpha, -n_z) is built, which has the same jump matrix.
struct BounceScenario {
    std::string name;
    SoundSpeedField env;
    Bathymetry bath;
    TraceConfig cfg;
    double r_query = 0.0;
    BeamPerturbation pert;         ///< default verification steps
    BeamPerturbation convergence;  ///< base of the h-halving ladder
};

BounceScenario local_bounce_scenario(double theta, double alpha, double curvature, double n_z, double n_r);

/// The standard verification matrix: flat-linear, arc-homogeneous, arc-linear, sinusoidal-munk.
std::vector<BounceScenario> standard_scenarios();
BounceScenario standard_scenario(const std::string& name);

}  // namespace kapparay
