#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kapparay/environment.hpp"
#include "kapparay/ray_core.hpp"
#include "kapparay/reflection.hpp"

namespace kapparay {

enum class BoundaryId { surface, bottom };

enum class TraceStatus { completed, backscattered, steep_ray, max_bounces, domain_exit, singular_reflection };

std::string to_string(BoundaryId id);
std::string to_string(TraceStatus status);

/// Replaces the analytic jump matrix at every bounce. Used by mutation tests.
using KappaHook = std::function<KappaMatrix(const ReflectionContext&)>;

struct TraceConfig {
    double r_start = 0.0;
    double r_end = 1000.0;
    double z0 = 100.0;
    double theta0 = 0.0;  ///< launch grazing angle (rad), positive pointing down
    /// Launch pulse; overrides theta0 when set. The finite-difference oracle
    /// perturbs this directly.
    std::optional<double> p0;
    double step = 10.0;
    double bisection_tolerance = 1e-9;
    double steep_cutoff = 89.5 * std::numbers::pi / 180.0;
    std::size_t max_bounces = 10000;
    KappaHook kappa_hook;
};

struct TraceSample {
    double r = 0.0;
    double z = 0.0;
    double p = 0.0;
    Mat2 q;
    std::optional<BoundaryId> bounce;  ///< set on the post-reflection sample of a bounce
};

struct BounceRecord {
    double r = 0.0;
    double z = 0.0;
    BoundaryId boundary = BoundaryId::bottom;
    double theta_incident = 0.0;
    double p_before = 0.0;
    double p_after = 0.0;
    KappaMatrix kappa;
    Mat2 q_before;
    NormalFrame frame;
    IndexSample sample;
};

struct TraceResult {
    std::vector<TraceSample> samples;
    std::vector<BounceRecord> bounces;
    TraceStatus status = TraceStatus::completed;
    std::string message;

    const TraceSample& last() const { return samples.back(); }
};

/// Classical RK4 step of (z, p, q) jointly; q uses K at the stage values, so
/// the propagated q is the exact Jacobian of the discrete step map.
RayState rk4_step(const SoundSpeedField& env, const RayState& y, double h);

/// Marches from r_start toward r_end on the fixed grid r_start + k * step,
/// reflecting at the surface and bottom. Abnormal endings are reported in
/// TraceResult::status; an invalid configuration throws std::invalid_argument.
TraceResult trace_ray(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg);

/// One trace per launch angle (rad). Runs on up to `threads` workers
/// (0 = hardware concurrency); output order follows `angles`.
std::vector<TraceResult> trace_fan(const SoundSpeedField& env, const Bathymetry& bath,
                                   const TraceConfig& cfg, std::span<const double> angles,
                                   unsigned threads = 0);

/// Propagates a ray state to r1 (either direction) in equal RK4 steps no
/// longer than `step`, ignoring boundaries.
RayState integrate_free(const SoundSpeedField& env, const RayState& start, double r1, double step);

/// Geometric spreading |q21| = |dz/dp0| at range r, linear between samples.
double spreading_at(const TraceResult& result, double r);

}  // namespace kapparay
