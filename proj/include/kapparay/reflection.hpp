#pragma once

#include "kapparay/environment.hpp"
#include "kapparay/linalg.hpp"
#include "kapparay/ray_core.hpp"

namespace kapparay {

/// |t_r|, |t1_r| and |<t, N>| below this are treated as singular reflections.
inline constexpr double kSingularGuard = 1e-6;

/// Everything known about a ray at the instant it hits a boundary.
struct ReflectionContext {
    Vec2 t;          ///< incident unit tangent (cos theta, sin theta)
    NormalFrame frame;
    IndexSample sample;  ///< index and derivatives at the hit point
    double n_t = 0.0;    ///< <t, N>, negative for an incoming ray
    Vec2 t1;             ///< reflected unit tangent

    /// Builds the context for an incident pulse p. Throws GeometryError when
    /// the ray is not moving against the internal normal.
    static ReflectionContext make(double p, const IndexSample& sample, const NormalFrame& frame);
};

/// Jump matrix applied to the variation matrix at a bounce, q -> kappa q.
struct KappaMatrix {
    double k11 = 1.0;
    double k12 = 0.0;
    double k21 = 0.0;
    double k22 = 1.0;

    Mat2 matrix() const { return {k11, k12, k21, k22}; }
    double det() const { return k11 * k22 - k12 * k21; }
};

/// Mirror law t1 = t - 2 N <t, N>. Throws GeometryError unless <t, N> < 0.
Vec2 reflect_direction(Vec2 t, Vec2 normal);

/// Reflected pulse n t1_z; a tangential ray (<t, N> = 0) keeps its pulse.
/// Throws GeometryError if <t, N> > 0 and SteepRayError if the reflected ray is vertical.
double reflect_pulse(double p, Vec2 t, Vec2 normal, double n);

/// The same jump written as p (1 - 2 N_z (N_r t_r / t_z + N_z)); undefined at t_z = 0.
double reflect_pulse_quotient(double p, Vec2 t, Vec2 normal);

/// kappa11 = -t1r/tr, kappa22 = -tr/t1r, kappa21 = 0 and
///
///   kappa12 = 2/N_t [ -K n t1r tr
///                     + N_z ((tr^2 + t1r^2) / (2 tr t1r) - N_r^2) n_z
///                     + N_r N_z^2 n_r ]
///
/// with K the signed boundary curvature. Throws SingularReflectionError for
/// vertical incident/reflected rays and tangential hits.
KappaMatrix kappa_matrix(const ReflectionContext& ctx);

/// p -> n t1_z, z unchanged, q -> kappa q.
RayState apply_reflection(const RayState& state, const ReflectionContext& ctx);
RayState apply_reflection(const RayState& state, const ReflectionContext& ctx, const KappaMatrix& kappa);

/// Both sides of the two direction identities used when linearizing the jump:
///   1 - 2 N_z^2 + 2 N_z N_r t_z / t_r          == -t1r / t_r
///   1 + (t_r N_z / N_t)(t1z / t1r - t_z / t_r)  == -t_r / t1r
struct IdentityCheck {
    double lhs1 = 0.0;
    double rhs1 = 0.0;
    double lhs2 = 0.0;
    double rhs2 = 0.0;
};

/// Pure algebra in t and N with t1 = t - 2 N <t, N>; only the denominators
/// t_r, t1_r and <t, N> must be nonzero.
IdentityCheck identity_checks(Vec2 t, Vec2 normal);

}  // namespace kapparay
