#include "kapparay/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kapparay/errors.hpp"

namespace kapparay {

namespace {

constexpr int kMaxHalvings = 5;

struct EndPoint {
    double p;
    double z;
    std::vector<BoundaryId> sequence;
};

std::vector<BoundaryId> sequence_of(const TraceResult& tr) {
    std::vector<BoundaryId> seq;
    for (const auto& b : tr.bounces) seq.push_back(b.boundary);
    return seq;
}

TraceConfig anchored(const SoundSpeedField& env, const TraceConfig& cfg, double r_query) {
    TraceConfig c = cfg;
    c.r_end = r_query;
    if (!c.p0) c.p0 = env.index_at(c.r_start, c.z0).n * std::sin(c.theta0);
    return c;
}

std::optional<EndPoint> end_point(const SoundSpeedField& env, const Bathymetry& bath, TraceConfig c,
                                  double p0, double z0) {
    c.p0 = p0;
    c.z0 = z0;
    const TraceResult tr = trace_ray(env, bath, c);
    if (tr.status != TraceStatus::completed) return std::nullopt;
    return EndPoint{tr.last().p, tr.last().z, sequence_of(tr)};
}

// Centered differences at one perturbation size; nullopt on a sequence mismatch.
std::optional<Mat2> centered(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& c,
                             const std::vector<BoundaryId>& sequence, double h_p, double h_z) {
    const double p0 = *c.p0;
    const double z0 = c.z0;
    const auto pp = end_point(env, bath, c, p0 + h_p, z0);
    const auto pm = end_point(env, bath, c, p0 - h_p, z0);
    const auto zp = end_point(env, bath, c, p0, z0 + h_z);
    const auto zm = end_point(env, bath, c, p0, z0 - h_z);
    for (const auto* e : {&pp, &pm, &zp, &zm}) {
        if (!e->has_value() || (*e)->sequence != sequence) return std::nullopt;
    }
    Mat2 d;
    d.a11 = (pp->p - pm->p) / (2.0 * h_p);
    d.a21 = (pp->z - pm->z) / (2.0 * h_p);
    d.a12 = (zp->p - zm->p) / (2.0 * h_z);
    d.a22 = (zp->z - zm->z) / (2.0 * h_z);
    return d;
}

Mat2 scaled(const Mat2& m, double length) { return {m.a11, m.a12 * length, m.a21 / length, m.a22}; }

double max_abs(const Mat2& m) {
    return std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21), std::abs(m.a22)});
}

constexpr double kFloorFraction = 1e-4;

// Largest relative error over the entries that are not negligible.
double significant_error(const Mat2& numeric, const Mat2& analytic, double length) {
    const Mat2 a = scaled(analytic, length);
    const Mat2 rel = relative_errors(numeric, analytic, length);
    const double floor = kFloorFraction * max_abs(a);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (std::abs(a(i, j)) >= floor) worst = std::max(worst, rel(i, j));
        }
    }
    return worst;
}

}  // namespace

Mat2 relative_errors(const Mat2& numeric, const Mat2& analytic, double length_scale) {
    const Mat2 a = scaled(analytic, length_scale);
    const Mat2 n = scaled(numeric, length_scale);
    const double floor = kFloorFraction * max_abs(a);
    Mat2 out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double denom = std::max(std::abs(a(i, j)), floor);
            out(i, j) = denom > 0.0 ? std::abs(n(i, j) - a(i, j)) / denom : std::abs(n(i, j) - a(i, j));
        }
    }
    return out;
}

double max_relative_error(const Mat2& numeric, const Mat2& analytic, double length_scale) {
    return max_abs(relative_errors(numeric, analytic, length_scale));
}

JacobianEstimate fd_jacobian(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                             const BeamPerturbation& pert, double r_query) {
    if (!(pert.h_p > 0.0) || !(pert.h_z > 0.0)) throw std::invalid_argument("perturbation steps must be positive");
    if (pert.richardson_levels < 2) throw std::invalid_argument("at least two Richardson levels are required");

    const TraceConfig c = anchored(env, cfg, r_query);
    JacobianEstimate est;
    if (r_query == c.r_start) {
        // Zero-length flow: the map is the identity.
        est.jacobian = est.extrapolated = Mat2::identity();
        est.error = {0.0, 0.0, 0.0, 0.0};
        est.used = pert;
        return est;
    }
    const TraceResult central = trace_ray(env, bath, c);
    if (central.status != TraceStatus::completed) {
        throw std::runtime_error("fd_jacobian: central ray did not reach r_query (" + to_string(central.status) +
                                 ": " + central.message + ")");
    }
    est.bounce_sequence = sequence_of(central);

    BeamPerturbation h = pert;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, h = h.scaled(0.5)) {
        std::vector<Mat2> levels;
        for (int l = 0; l < h.richardson_levels; ++l) {
            const double f = std::ldexp(1.0, -l);
            const auto d = centered(env, bath, c, est.bounce_sequence, h.h_p * f, h.h_z * f);
            if (!d) break;
            levels.push_back(*d);
        }
        if (static_cast<int>(levels.size()) < h.richardson_levels) continue;

        est.used = h;
        est.jacobian = levels[0];
        // D(h) = J + C h^2  =>  J ~ D(h/2) + (D(h/2) - D(h)) / 3,  |D(h) - J| ~ 4/3 |D(h) - D(h/2)|
        const Mat2& d0 = levels[0];
        const Mat2& d1 = levels[1];
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                est.extrapolated(i, j) = d1(i, j) + (d1(i, j) - d0(i, j)) / 3.0;
                est.error(i, j) = 4.0 / 3.0 * std::abs(d0(i, j) - d1(i, j));
            }
        }
        return est;
    }
    std::ostringstream os;
    os << "perturbed rays change bounce sequence even at h_p = " << h.h_p * 2.0 << ", h_z = " << h.h_z * 2.0;
    throw PerturbationTooLarge(os.str());
}

KappaVerification verify_kappa(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                               const BeamPerturbation& pert, double r_after_bounce) {
    const TraceConfig c = anchored(env, cfg, r_after_bounce);
    const TraceResult central = trace_ray(env, bath, c);
    if (central.status != TraceStatus::completed) {
        throw std::runtime_error("verify_kappa: central ray did not complete (" + to_string(central.status) + ")");
    }
    if (central.bounces.size() != 1) {
        throw std::invalid_argument("verify_kappa: expected exactly one bounce before r_after_bounce, got " +
                                    std::to_string(central.bounces.size()));
    }
    KappaVerification v;
    v.estimate = fd_jacobian(env, bath, c, pert, r_after_bounce);
    v.analytic = central.last().q;
    v.numeric = v.estimate.jacobian;
    v.bounce = central.bounces.front();
    v.kappa_analytic = v.bounce.kappa;
    v.max_rel_err = max_relative_error(v.numeric, v.analytic, v.estimate.used.h_z / v.estimate.used.h_p);

    // Strip the smooth flights: J = post * kappa * pre.
    RayState reflected;
    reflected.r = v.bounce.r;
    reflected.z = v.bounce.z;
    reflected.p = v.bounce.p_after;
    reflected.q = Mat2::identity();
    const Mat2 post = integrate_free(env, reflected, r_after_bounce, c.step).q;
    v.kappa_numeric = post.inverse() * v.numeric * v.bounce.q_before.inverse();
    return v;
}

ConvergenceStudy convergence_study(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg,
                                   const BeamPerturbation& base, double r_after_bounce, int levels) {
    if (levels < 2) throw std::invalid_argument("convergence_study: need at least two levels");
    ConvergenceStudy s;
    const double length = base.h_z / base.h_p;
    for (int l = 0; l < levels; ++l) {
        const double f = std::ldexp(1.0, -l);
        const KappaVerification v = verify_kappa(env, bath, cfg, base.scaled(f), r_after_bounce);
        s.scales.push_back(f);
        s.errors.push_back(significant_error(v.numeric, v.analytic, length));
    }
    double sum = 0.0;
    for (std::size_t i = 1; i < s.errors.size(); ++i) {
        s.orders.push_back(std::log2(s.errors[i - 1] / s.errors[i]));
        sum += s.orders.back();
    }
    s.mean_order = sum / static_cast<double>(s.orders.size());
    return s;
}

BeamOffset beam_geometry_check(Vec2 t, Vec2 normal, double delta_z) {
    const double n_t = dot(t, normal);
    if (std::abs(n_t) < kSingularGuard) throw GeometryError("beam geometry: ray tangent to the boundary");
    return {t.r * normal.z / n_t * delta_z, -t.r * normal.r / n_t * delta_z};
}

BeamOffset planar_intersection(Vec2 t, Vec2 normal, double delta_z) {
    // Neighbour ray x(s) = (0, -delta_z) + s t meets the line u (-N_z, N_r)
    // through the central hit point at the origin.
    const Vec2 tangent{-normal.z, normal.r};
    const double det = t.r * (-tangent.z) - (-tangent.r) * t.z;
    if (std::abs(det) < kSingularGuard) throw GeometryError("planar intersection: ray parallel to the boundary");
    const double s = (0.0 * (-tangent.z) - (-tangent.r) * delta_z) / det;
    return {s * t.r, -delta_z + s * t.z};
}

BounceScenario local_bounce_scenario(double theta, double alpha, double curvature, double n_z, double n_r) {
    if (std::sin(alpha) > 0.0) {
        theta = -theta;
        alpha = -alpha;
        n_z = -n_z;
    }
    const Vec2 normal = unit_from_angle(alpha);
    const Vec2 t = unit_from_angle(theta);
    if (!(normal.z < -kSingularGuard)) throw std::invalid_argument("local scenario: boundary normal is horizontal");
    const double n_t = dot(t, normal);
    if (!(t.r > kSingularGuard) || !(n_t < -kSingularGuard)) {
        throw std::invalid_argument("local scenario: ray does not approach the boundary moving forward in range");
    }
    const Vec2 t1 = t - (2.0 * n_t) * normal;
    if (!(t1.r > kSingularGuard)) throw std::invalid_argument("local scenario: reflected ray reverses in range");

    constexpr double hit_r = 0.0;
    // Deep enough for the arc, shallow enough that c stays positive up to the surface.
    const double hit_z = std::min(100.0, 0.5 / std::max(std::abs(n_z), 1e-12));
    constexpr double c_hit = 1500.0;

    double span = 2.0;
    std::optional<Bathymetry> bath;
    const double slope = -normal.r / normal.z;
    if (curvature == 0.0) {
        bath = Bathymetry::linear_slope(hit_z, slope, hit_r - span, hit_r + span);
    } else {
        const double radius = 1.0 / std::abs(curvature);
        const bool bowl = curvature > 0.0;
        const Vec2 center = Vec2{hit_r, hit_z} + (bowl ? radius : -radius) * normal;
        const double room = radius - std::abs(hit_r - center.r);
        span = std::min(span, 0.45 * room);
        bath = Bathymetry::circular_arc(center.r, center.z, radius, bowl, hit_r - span, hit_r + span);
    }

    // n = c_hit / c with c linear and n(hit) = 1, grad n(hit) = (n_r, n_z).
    SoundSpeedField env = SoundSpeedField::linear_gradient(
        c_hit, c_hit * (1.0 + n_z * hit_z + n_r * hit_r), -c_hit * n_z, -c_hit * n_r);

    const double step = span / 20.0;
    RayState at_hit;
    at_hit.r = hit_r;
    at_hit.z = hit_z;
    at_hit.p = t.z;  // n = 1 at the hit point
    const RayState start = integrate_free(env, at_hit, hit_r - span, step);
    if (!(start.z > 0.0 && start.z < bath->depth_at(start.r))) {
        throw std::invalid_argument("local scenario: launch point falls outside the water column");
    }

    TraceConfig cfg;
    cfg.r_start = start.r;
    cfg.r_end = hit_r + span;
    cfg.z0 = start.z;
    cfg.p0 = start.p;
    cfg.theta0 = std::asin(start.p / env.index_at(start.r, start.z).n);
    cfg.step = step;

    std::ostringstream name;
    name << "local(theta=" << theta * 180.0 / std::numbers::pi << ",alpha=" << alpha * 180.0 / std::numbers::pi
         << ")";
    return BounceScenario{name.str(), std::move(env), std::move(*bath), cfg, hit_r + span,
                          BeamPerturbation{1e-6, 1e-6, 2}, BeamPerturbation{1e-3, 1e-3, 2}};
}

std::vector<BounceScenario> standard_scenarios() {
    std::vector<BounceScenario> out;
    for (const char* name : {"flat-linear", "arc-homogeneous", "arc-linear", "sinusoidal-munk"}) {
        out.push_back(standard_scenario(name));
    }
    return out;
}

BounceScenario standard_scenario(const std::string& name) {
    constexpr double deg = std::numbers::pi / 180.0;
    TraceConfig cfg;
    if (name == "flat-linear") {
        cfg.r_start = 0.0;
        cfg.z0 = 50.0;
        cfg.theta0 = 10.0 * deg;
        cfg.step = 5.0;
        return {name, SoundSpeedField::linear_gradient(1500.0, 1480.0, 0.1), Bathymetry::flat(200.0), cfg,
                1400.0, BeamPerturbation{1e-6, 1e-4, 2}, BeamPerturbation{1e-3, 1e-1, 2}};
    }
    if (name == "arc-homogeneous") {
        cfg.r_start = -30.0;
        cfg.z0 = 40.0;
        cfg.theta0 = 15.0 * deg;
        cfg.step = 0.5;
        return {name, SoundSpeedField::constant(1500.0, 1500.0),
                Bathymetry::circular_arc(0.0, 10.0, 50.0, true, -45.0, 45.0), cfg, 30.0,
                BeamPerturbation{1e-6, 1e-4, 2}, BeamPerturbation{1e-3, 1e-1, 2}};
    }
    if (name == "arc-linear") {
        cfg.r_start = -30.0;
        cfg.z0 = 40.0;
        cfg.theta0 = 15.0 * deg;
        cfg.step = 0.5;
        // n_z = 0.01 at z = 30 m
        return {name, SoundSpeedField::linear_gradient(1500.0, 1950.0, -15.0),
                Bathymetry::circular_arc(0.0, 10.0, 50.0, true, -45.0, 45.0), cfg, 30.0,
                BeamPerturbation{1e-6, 1e-4, 2}, BeamPerturbation{1e-3, 1e-1, 2}};
    }
    if (name == "sinusoidal-munk") {
        cfg.r_start = 0.0;
        cfg.z0 = 1000.0;
        cfg.theta0 = 16.0 * deg;
        cfg.step = 25.0;
        return {name, SoundSpeedField::munk(1500.0),
                Bathymetry::sinusoidal(4500.0, 200.0, 2.0 * std::numbers::pi / 10000.0), cfg, 20000.0,
                BeamPerturbation{1e-6, 1e-4, 2}, BeamPerturbation{1e-3, 1e-1, 2}};
    }
    throw std::invalid_argument("unknown verification preset: " + name);
}

}  // namespace kapparay
