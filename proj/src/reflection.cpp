#include "kapparay/reflection.hpp"

#include <cmath>
#include <sstream>

#include "kapparay/errors.hpp"

namespace kapparay {

namespace {

void require_regular(Vec2 t, Vec2 t1, double n_t) {
    if (std::abs(t.r) < kSingularGuard || std::abs(t1.r) < kSingularGuard || std::abs(n_t) < kSingularGuard) {
        std::ostringstream os;
        os << "singular reflection: t_r = " << t.r << ", t1_r = " << t1.r << ", <t,N> = " << n_t;
        throw SingularReflectionError(os.str());
    }
}

}  // namespace

Vec2 reflect_direction(Vec2 t, Vec2 normal) {
    const double n_t = dot(t, normal);
    if (!(n_t < 0.0)) {
        std::ostringstream os;
        os << "ray is not incoming: <t,N> = " << n_t;
        throw GeometryError(os.str());
    }
    return t - (2.0 * n_t) * normal;
}

double reflect_pulse(double p, Vec2 t, Vec2 normal, double n) {
    (void)p;  // t already encodes p / n
    if (dot(t, normal) > 0.0) throw GeometryError("ray is moving away from the boundary");
    const double p1 = n * (t.z - 2.0 * dot(t, normal) * normal.z);
    if (!(std::abs(p1) < n)) throw SteepRayError("reflected ray is vertical");
    return p1;
}

double reflect_pulse_quotient(double p, Vec2 t, Vec2 normal) {
    return p * (1.0 - 2.0 * normal.z * (normal.r * t.r / t.z + normal.z));
}

ReflectionContext ReflectionContext::make(double p, const IndexSample& sample, const NormalFrame& frame) {
    ReflectionContext ctx;
    const double n = sample.n;
    if (!(std::abs(p) < n)) throw SteepRayError("incident ray is vertical");
    ctx.t = {std::sqrt((n - p) * (n + p)) / n, p / n};
    ctx.frame = frame;
    ctx.sample = sample;
    ctx.n_t = dot(ctx.t, frame.normal());
    ctx.t1 = reflect_direction(ctx.t, frame.normal());
    return ctx;
}

KappaMatrix kappa_matrix(const ReflectionContext& ctx) {
    const Vec2 t = ctx.t;
    const Vec2 t1 = ctx.t1;
    require_regular(t, t1, ctx.n_t);

    const double nr = ctx.frame.n_r;
    const double nz = ctx.frame.n_z;
    const IndexSample& s = ctx.sample;

    const double curvature_term = -ctx.frame.curvature * s.n * t1.r * t.r;
    const double depth_gradient_term = nz * ((t.r * t.r + t1.r * t1.r) / (2.0 * t.r * t1.r) - nr * nr) * s.n_z;
    const double range_gradient_term = nr * nz * nz * s.n_r;

    KappaMatrix k;
    k.k11 = -t1.r / t.r;
    k.k12 = (curvature_term + depth_gradient_term + range_gradient_term) * 2.0 / ctx.n_t;
    k.k21 = 0.0;
    k.k22 = -t.r / t1.r;
    return k;
}

RayState apply_reflection(const RayState& state, const ReflectionContext& ctx) {
    return apply_reflection(state, ctx, kappa_matrix(ctx));
}

RayState apply_reflection(const RayState& state, const ReflectionContext& ctx, const KappaMatrix& kappa) {
    RayState out = state;
    out.p = reflect_pulse(state.p, ctx.t, ctx.frame.normal(), ctx.sample.n);
    out.q = kappa.matrix() * state.q;
    return out;
}

IdentityCheck identity_checks(Vec2 t, Vec2 normal) {
    const double n_t = dot(t, normal);
    const Vec2 t1 = t - (2.0 * n_t) * normal;
    require_regular(t, t1, n_t);
    const double nr = normal.r;
    const double nz = normal.z;
    IdentityCheck c;
    c.lhs1 = 1.0 - 2.0 * nz * nz + 2.0 * nz * nr * t.z / t.r;
    c.rhs1 = -t1.r / t.r;
    c.lhs2 = 1.0 + (t.r * nz / n_t) * (t1.z / t1.r - t.z / t.r);
    c.rhs2 = -t.r / t1.r;
    return c;
}

}  // namespace kapparay
