#include "kapparay/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kapparay/errors.hpp"

namespace kapparay {

std::string to_string(BoundaryId id) { return id == BoundaryId::surface ? "surface" : "bottom"; }

std::string to_string(TraceStatus status) {
    switch (status) {
        case TraceStatus::completed: return "completed";
        case TraceStatus::backscattered: return "backscattered";
        case TraceStatus::steep_ray: return "steep_ray";
        case TraceStatus::max_bounces: return "max_bounces";
        case TraceStatus::domain_exit: return "domain_exit";
        case TraceStatus::singular_reflection: return "singular_reflection";
    }
    return "unknown";
}

namespace {

struct Derivative {
    double dz;
    double dp;
    Mat2 dq;
};

Derivative derivative(const SoundSpeedField& env, double r, double z, double p, const Mat2& q) {
    const IndexSample s = env.index_at(r, z);
    const RayRhs rhs = ray_rhs(s, p);
    return {rhs.dz_dr, rhs.dp_dr, k_matrix(s, p).matrix() * q};
}

// Signed distance-like event function: positive outside the water column.
double outside(const Bathymetry& bath, BoundaryId id, const RayState& y) {
    return id == BoundaryId::surface ? -y.z : y.z - bath.depth_at(y.r);
}

// Trace stopped by an abnormal condition inside a step.
struct Stop {
    TraceStatus status;
    std::string message;
};

class Tracer {
public:
    Tracer(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg)
        : env_(env), bath_(bath), cfg_(cfg), sin_cutoff_(std::sin(cfg.steep_cutoff)) {}

    TraceResult run();

private:
    // Range in [a, b] at which the step from y crosses boundary id; g(a) <= 0 < g(b).
    double locate(const RayState& y, BoundaryId id, double a, double b) const;
    // Returns the earliest crossing in (y.r, y.r + h], if any.
    std::optional<std::pair<double, BoundaryId>> find_event(const RayState& y, const RayState& end,
                                                            double h) const;
    std::optional<Stop> reflect(RayState& y, BoundaryId id, TraceResult& out) const;
    void check_steep(const RayState& y) const;
    // RK4 step of length h, halved while its stages leave the field's domain.
    RayState step_within_domain(const RayState& y, double& h) const;

    const SoundSpeedField& env_;
    const Bathymetry& bath_;
    const TraceConfig& cfg_;
    double sin_cutoff_;
    std::optional<BoundaryId> just_reflected_;
};

void Tracer::check_steep(const RayState& y) const {
    const double n = env_.index_at(y.r, y.z).n;
    if (!(std::abs(y.p) < n * sin_cutoff_)) {
        std::ostringstream os;
        os << "ray exceeded the steep-angle cutoff at r = " << y.r;
        throw SteepRayError(os.str());
    }
}

RayState Tracer::step_within_domain(const RayState& y, double& h) const {
    for (int halvings = 0;; ++halvings) {
        try {
            return rk4_step(env_, y, h);
        } catch (const DomainError&) {
            if (halvings == 30) throw;
            h *= 0.5;
        }
    }
}

double Tracer::locate(const RayState& y, BoundaryId id, double a, double b) const {
    const auto g = [&](double r) { return outside(bath_, id, rk4_step(env_, y, r - y.r)); };
    double ga = g(a);
    double gb = g(b);
    if (ga > 0.0) ga = 0.0;  // start lies on the boundary to rounding
    // Illinois variant of regula falsi; converges to the root at floating resolution.
    int side = 0;
    double c = a;
    for (int it = 0; it < 200; ++it) {
        c = (a * gb - b * ga) / (gb - ga);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        const double gc = g(c);
        constexpr double eps = std::numeric_limits<double>::epsilon();
        if (gc == 0.0) break;
        if (gc < 0.0) {
            a = c;
            ga = gc;
            if (side == -1) gb *= 0.5;
            side = -1;
        } else {
            b = c;
            gb = gc;
            if (side == 1) ga *= 0.5;
            side = 1;
        }
        if (std::abs(gc) <= 4.0 * eps * (1.0 + std::abs(y.z)) || b - a <= 4.0 * eps * (1.0 + std::abs(c))) break;
    }
    return c;
}

std::optional<std::pair<double, BoundaryId>> Tracer::find_event(const RayState& y, const RayState& end,
                                                                double h) const {
    std::optional<RayState> mid;
    const auto midpoint = [&]() -> const RayState& {
        if (!mid) mid = rk4_step(env_, y, 0.5 * h);
        return *mid;
    };

    std::optional<std::pair<double, BoundaryId>> best;
    for (const BoundaryId id : {BoundaryId::surface, BoundaryId::bottom}) {
        const bool fresh = just_reflected_ != id;
        double a = y.r;
        double b = 0.0;
        if (outside(bath_, id, end) > 0.0) {
            b = end.r;
            if (!fresh) {
                // Leaving the boundary and coming back within one step: need an interior point.
                if (!(outside(bath_, id, midpoint()) < 0.0)) {
                    throw SingularReflectionError("ray grazes the " + to_string(id) + " after reflection");
                }
                a = midpoint().r;
            }
        } else if (outside(bath_, id, midpoint()) > 0.0) {
            if (!fresh) throw SingularReflectionError("ray grazes the " + to_string(id) + " after reflection");
            b = midpoint().r;
        } else {
            continue;
        }
        const double root = locate(y, id, a, b);
        if (!best || root < best->first) best = std::make_pair(root, id);
    }
    return best;
}

std::optional<Stop> Tracer::reflect(RayState& y, BoundaryId id, TraceResult& out) const {
    const IndexSample sample = env_.index_at(y.r, y.z);
    const NormalFrame frame = id == BoundaryId::surface ? surface_frame() : bath_.bottom_at(y.r).frame;

    ReflectionContext ctx;
    try {
        ctx = ReflectionContext::make(y.p, sample, frame);
    } catch (const GeometryError& e) {
        return Stop{TraceStatus::singular_reflection, e.what()};
    }
    if (!(ctx.t1.r > 0.0)) {
        std::ostringstream os;
        os << "reflected ray reverses in range at r = " << y.r << " (t1_r = " << ctx.t1.r << ")";
        return Stop{TraceStatus::backscattered, os.str()};
    }

    BounceRecord rec;
    rec.r = y.r;
    rec.z = y.z;
    rec.boundary = id;
    rec.theta_incident = grazing_angle(sample.n, y.p);
    rec.p_before = y.p;
    rec.q_before = y.q;
    rec.frame = frame;
    rec.sample = sample;
    try {
        rec.kappa = cfg_.kappa_hook ? cfg_.kappa_hook(ctx) : kappa_matrix(ctx);
        y = apply_reflection(y, ctx, rec.kappa);
    } catch (const SingularReflectionError& e) {
        return Stop{TraceStatus::singular_reflection, e.what()};
    }
    rec.p_after = y.p;
    out.bounces.push_back(rec);
    return std::nullopt;
}

TraceResult Tracer::run() {
    TraceResult out;
    const IndexSample s0 = env_.index_at(cfg_.r_start, cfg_.z0);
    RayState y;
    y.r = cfg_.r_start;
    y.z = cfg_.z0;
    y.p = cfg_.p0 ? *cfg_.p0 : s0.n * std::sin(cfg_.theta0);
    y.q = Mat2::identity();
    if (!(std::abs(y.p) < s0.n * sin_cutoff_)) {
        throw std::invalid_argument("launch angle exceeds the steep-angle cutoff");
    }
    out.samples.push_back({y.r, y.z, y.p, y.q, std::nullopt});

    const double r_stop = std::min(cfg_.r_end, bath_.r_max());
    std::size_t k = 0;
    try {
        while (y.r < r_stop) {
            const double node = cfg_.r_start + static_cast<double>(k + 1) * cfg_.step;
            double target = std::min(node, r_stop);
            double h = target - y.r;
            if (!(h > 0.0)) {
                ++k;
                continue;
            }
            const RayState end = step_within_domain(y, h);
            target = y.r + h;
            const auto event = find_event(y, end, h);
            if (event) {
                RayState hit = rk4_step(env_, y, event->first - y.r);
                if (auto stop = reflect(hit, event->second, out)) {
                    out.status = stop->status;
                    out.message = stop->message;
                    return out;
                }
                check_steep(hit);
                y = hit;
                just_reflected_ = event->second;
                out.samples.push_back({y.r, y.z, y.p, y.q, event->second});
                if (out.bounces.size() >= cfg_.max_bounces && y.r < r_stop) {
                    out.status = TraceStatus::max_bounces;
                    out.message = "maximum bounce count reached";
                    return out;
                }
                continue;
            }
            y = end;
            just_reflected_.reset();
            check_steep(y);
            out.samples.push_back({y.r, y.z, y.p, y.q, std::nullopt});
            if (target == node) ++k;
        }
    } catch (const SteepRayError& e) {
        out.status = TraceStatus::steep_ray;
        out.message = e.what();
        return out;
    } catch (const DomainError& e) {
        out.status = TraceStatus::domain_exit;
        out.message = e.what();
        return out;
    } catch (const SingularReflectionError& e) {
        out.status = TraceStatus::singular_reflection;
        out.message = e.what();
        return out;
    }
    if (r_stop < cfg_.r_end) {
        out.status = TraceStatus::domain_exit;
        out.message = "ray left the bathymetry domain";
    }
    return out;
}

void validate(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg) {
    if (!(cfg.r_end > cfg.r_start)) throw std::invalid_argument("trace: r_end must exceed r_start");
    if (!(cfg.step > 0.0)) throw std::invalid_argument("trace: step must be positive");
    if (!(cfg.bisection_tolerance > 0.0)) throw std::invalid_argument("trace: bisection tolerance must be positive");
    if (!(cfg.steep_cutoff > 0.0 && cfg.steep_cutoff < std::numbers::pi / 2)) {
        throw std::invalid_argument("trace: steep cutoff must lie in (0, 90) degrees");
    }
    if (!bath.contains(cfg.r_start)) throw std::invalid_argument("trace: r_start outside the bathymetry domain");
    const double launch = cfg.p0 ? *cfg.p0 : cfg.theta0;
    const bool surface_source = cfg.z0 == 0.0 && launch > 0.0;
    if (!((cfg.z0 > 0.0 || surface_source) && cfg.z0 < bath.depth_at(cfg.r_start))) {
        throw std::invalid_argument("trace: source depth must lie inside the water column");
    }
    if (!cfg.p0 && !(std::abs(cfg.theta0) < cfg.steep_cutoff)) {
        throw std::invalid_argument("trace: launch angle exceeds the steep-angle cutoff");
    }
    (void)env;
}

}  // namespace

RayState rk4_step(const SoundSpeedField& env, const RayState& y, double h) {
    const Derivative k1 = derivative(env, y.r, y.z, y.p, y.q);
    const double h2 = 0.5 * h;
    const Derivative k2 = derivative(env, y.r + h2, y.z + h2 * k1.dz, y.p + h2 * k1.dp, y.q + h2 * k1.dq);
    const Derivative k3 = derivative(env, y.r + h2, y.z + h2 * k2.dz, y.p + h2 * k2.dp, y.q + h2 * k2.dq);
    const Derivative k4 = derivative(env, y.r + h, y.z + h * k3.dz, y.p + h * k3.dp, y.q + h * k3.dq);
    const double h6 = h / 6.0;
    RayState out;
    out.r = y.r + h;
    out.z = y.z + h6 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    out.p = y.p + h6 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    out.q = y.q + h6 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    return out;
}

TraceResult trace_ray(const SoundSpeedField& env, const Bathymetry& bath, const TraceConfig& cfg) {
    validate(env, bath, cfg);
    return Tracer(env, bath, cfg).run();
}

std::vector<TraceResult> trace_fan(const SoundSpeedField& env, const Bathymetry& bath,
                                   const TraceConfig& cfg, std::span<const double> angles,
                                   unsigned threads) {
    std::vector<TraceConfig> configs(angles.size(), cfg);
    for (std::size_t i = 0; i < angles.size(); ++i) {
        configs[i].theta0 = angles[i];
        configs[i].p0.reset();
        validate(env, bath, configs[i]);
    }
    std::vector<TraceResult> results(angles.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, angles.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < angles.size(); ++i) results[i] = Tracer(env, bath, configs[i]).run();
        return results;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < angles.size(); i += threads) results[i] = Tracer(env, bath, configs[i]).run();
        });
    }
    return results;
}

RayState integrate_free(const SoundSpeedField& env, const RayState& start, double r1, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("integrate_free: step must be positive");
    const double span = r1 - start.r;
    const auto count = static_cast<std::size_t>(std::ceil(std::abs(span) / step));
    if (count == 0) return start;
    const double h = span / static_cast<double>(count);
    RayState y = start;
    for (std::size_t i = 0; i < count; ++i) y = rk4_step(env, y, h);
    y.r = r1;
    return y;
}

double spreading_at(const TraceResult& result, double r) {
    const auto& s = result.samples;
    if (s.empty() || r < s.front().r || r > s.back().r) {
        throw std::out_of_range("spreading_at: range outside the sampled trajectory");
    }
    const auto it = std::lower_bound(s.begin(), s.end(), r, [](const TraceSample& a, double v) { return a.r < v; });
    if (it->r == r || it == s.begin()) return std::abs(it->q.a21);
    const auto prev = it - 1;
    const double w = (r - prev->r) / (it->r - prev->r);
    return (1.0 - w) * std::abs(prev->q.a21) + w * std::abs(it->q.a21);
}

}  // namespace kapparay
