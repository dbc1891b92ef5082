// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kapparay/cli.hpp"
#include "kapparay/oracle.hpp"
#include "kapparay/propagation.hpp"
#include "kapparay/ray_core.hpp"
#include "kapparay/reflection.hpp"

using namespace kapparay;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1. det q = 1 along long multi-bounce traces.
Outcome symplecticity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto between = [&](double a, double b) { return a + (b - a) * u(rng); };

    int qualifying = 0, attempts = 0;
    double worst = 0.0, growth = 0.0;
    std::map<std::string, int> mix;
    while (qualifying < 24 && attempts < 400) {
        ++attempts;
        const int profile = attempts % 4;
        const int bottom = (attempts / 4) % 4;
        const bool deep = profile == 2;
        const double depth = deep ? between(2500.0, 4000.0) : between(150.0, 600.0);

        std::optional<SoundSpeedField> env;
        switch (profile) {
            case 0: env = SoundSpeedField::constant(1500.0, between(1450.0, 1550.0)); break;
            case 1:
                env = SoundSpeedField::linear_gradient(1500.0, between(1480.0, 1520.0), between(-0.05, 0.05),
                                                       between(-1e-4, 1e-4));
                break;
            case 2: env = SoundSpeedField::munk(1500.0); break;
            default: {
                std::vector<double> depths, speeds;
                const double g = between(-0.04, 0.04), curv = between(-1e-4, 1e-4);
                for (int i = 0; i <= 30; ++i) {
                    const double z = 1.3 * depth * i / 30.0;
                    depths.push_back(z);
                    speeds.push_back(1500.0 + g * z + curv * (z - 0.5 * depth) * (z - 0.5 * depth));
                }
                env = SoundSpeedField::gridded(1500.0, {0.0}, depths, speeds);
            }
        }
        std::optional<Bathymetry> bath;
        const double r_end = deep ? 150000.0 : 30000.0;
        switch (bottom) {
            case 0: bath = Bathymetry::flat(depth); break;
            case 1: bath = Bathymetry::linear_slope(depth, between(-0.3, 0.3) * depth / r_end, 0.0, r_end); break;
            case 2: {
                // Slopes up to 0.05 rad; rougher bottoms make the ray family chaotic and det q
                // is then limited by rounding in entries of size |q|^2 ~ 1/eps.
                const double amplitude = between(0.02, 0.05) * depth;
                bath = Bathymetry::sinusoidal(depth, amplitude, between(0.01, 0.05) / amplitude, between(0.0, 6.0));
                break;
            }
            default: {
                std::vector<double> rs, zs;
                for (int i = 0; i <= 8; ++i) {
                    rs.push_back(r_end * i / 8.0);
                    zs.push_back(depth * between(0.85, 1.15));
                }
                bath = Bathymetry::piecewise(rs, zs);
            }
        }
        TraceConfig cfg;
        cfg.z0 = between(0.1, 0.6) * depth;
        cfg.theta0 = (u(rng) < 0.5 ? -1 : 1) * between(deep ? 14.0 : 4.0, deep ? 25.0 : 30.0) * kDeg;
        cfg.r_end = r_end;
        cfg.step = deep ? 100.0 : 20.0;
        const TraceResult tr = trace_ray(*env, *bath, cfg);
        if (tr.bounces.size() < 10) continue;
        ++qualifying;
        ++mix[to_string(env->kind()) + "/" + to_string(bath->kind())];
        for (const auto& smp : tr.samples) {
            worst = std::max(worst, std::abs(smp.q.det() - 1.0));
            growth = std::max({growth, std::abs(smp.q.a11 * smp.q.a22), std::abs(smp.q.a12 * smp.q.a21)});
        }
    }
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = qualifying >= 20 && worst < 1e-6 && elapsed < 10.0;
    o.detail = std::to_string(qualifying) + " traces with >= 10 bounces over " + std::to_string(mix.size()) +
               " profile/bathymetry pairs, max |det q - 1| " + sci(worst) + " (max |q11 q22|, |q12 q21| " +
               sci(growth) + "), " + sci(elapsed) + " s";
    return o;
}

// 2. Flat-boundary and homogeneous-medium forms of the jump matrix.
Outcome kappa_special_cases() {
    double worst_identity = 0.0, worst_gradient = 0.0, worst_homogeneous = 0.0;
    for (double theta = 2.0; theta < 89.0; theta += 1.0) {
        const double tz = std::sin(theta * kDeg);
        for (const auto& [p, frame] : {std::pair{tz, frame_from_profile(0, 0, false)}, std::pair{-tz, surface_frame()}}) {
            const KappaMatrix a = kappa_matrix(ReflectionContext::make(p, {1.0, 0.0, 0.0, 0.0}, frame));
            worst_identity = std::max({worst_identity, std::abs(a.k11 + 1), std::abs(a.k12), std::abs(a.k21),
                                       std::abs(a.k22 + 1)});
            for (const double n_z : {0.01, -0.004, 2e-5}) {
                const KappaMatrix b = kappa_matrix(ReflectionContext::make(p, {1.0, 0.0, n_z, 0.0}, frame));
                worst_gradient = std::max({worst_gradient, std::abs(b.k12 - 2 * n_z / p), std::abs(b.k11 + 1),
                                           std::abs(b.k22 + 1), std::abs(b.k21)});
            }
        }
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    while (checked < 10000) {
        const Vec2 t = unit_from_angle(angle(rng));
        const Vec2 N = unit_from_angle(angle(rng));
        const double n_t = dot(t, N);
        const Vec2 t1 = t - (2 * n_t) * N;
        if (!(n_t < -1e-3 && t.r > 1e-3 && t1.r > 1e-3)) continue;
        ++checked;
        NormalFrame frame;
        frame.n_r = N.r;
        frame.n_z = N.z;
        frame.curvature = 0.05 * u(rng);
        const double n = 1.0 + 0.2 * u(rng);
        const auto ctx = ReflectionContext::make(n * t.z, {n, 0.0, 0.0, 0.0}, frame);
        const KappaMatrix k = kappa_matrix(ctx);
        const double t_r = ctx.t.r, t1_r = ctx.t1.r;
        const double expected = -2 * frame.curvature * n * t1_r * t_r / ctx.n_t;
        worst_homogeneous = std::max({worst_homogeneous, std::abs(k.k12 - expected) / std::max(1.0, std::abs(expected)),
                                      std::abs(k.k11 + t1_r / t_r) / std::max(1.0, t1_r / t_r),
                                      std::abs(k.k22 + t_r / t1_r) / std::max(1.0, t_r / t1_r)});
    }
    Outcome o;
    o.pass = worst_identity < 1e-12 && worst_gradient < 1e-12 && worst_homogeneous < 1e-12;
    o.detail = "flat n_z=0 dev " + sci(worst_identity) + ", flat 2n_z/t_z dev " + sci(worst_gradient) +
               ", homogeneous curved dev " + sci(worst_homogeneous) + " (limit 1e-12)";
    return o;
}

// 3. Finite-difference oracle on the four standard scenarios.
Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    std::ostringstream detail;
    for (const BounceScenario& s : standard_scenarios()) {
        const KappaVerification v = verify_kappa(s.env, s.bath, s.cfg, s.pert, s.r_query);
        const ConvergenceStudy c = convergence_study(s.env, s.bath, s.cfg, s.convergence, s.r_query, 3);
        bool ok = v.max_rel_err < 1e-3 && c.orders.size() == 2;
        detail << s.name << " err " << sci(v.max_rel_err) << " orders";
        for (double ord : c.orders) {
            ok = ok && std::abs(ord - 2.0) <= 0.3;
            char buf[16];
            std::snprintf(buf, sizeof buf, " %.2f", ord);
            detail << buf;
        }
        detail << "; ";
        o.pass = o.pass && ok;
    }
    const double elapsed = seconds_since(t0);
    o.pass = o.pass && elapsed < 30.0;
    detail << sci(elapsed) << " s";
    o.detail = detail.str();
    return o;
}

// 4. Direction identities over random valid pairs.
Outcome derivation_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    double worst = 0.0;
    int checked = 0;
    while (checked < 10000) {
        const Vec2 t = unit_from_angle(angle(rng));
        const Vec2 N = unit_from_angle(angle(rng));
        const double n_t = dot(t, N);
        const Vec2 t1 = t - (2 * n_t) * N;
        if (!(n_t < -1e-3 && t.r > 1e-3 && t1.r > 1e-3)) continue;
        ++checked;
        const IdentityCheck c = identity_checks(t, N);
        worst = std::max({worst, std::abs(c.lhs1 - c.rhs1), std::abs(c.lhs2 - c.rhs2)});
    }
    const double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = worst < 1e-10 && elapsed < 1.0;
    o.detail = std::to_string(checked) + " pairs, max |lhs - rhs| " + sci(worst) + ", " + sci(elapsed) + " s";
    return o;
}

// 5. Closed-form variation matrix of a free homogeneous flight.
Outcome closed_form_flow() {
    double worst_trace = 0.0, worst_fd = 0.0;
    for (const double speed : {1500.0, 1400.0}) {
        for (const double theta : {-35.0, 5.0, 20.0}) {
            const auto env = SoundSpeedField::constant(1500.0, speed);
            const auto bath = Bathymetry::flat(20000.0);
            TraceConfig cfg;
            cfg.z0 = 10000.0;
            cfg.theta0 = theta * kDeg;
            cfg.r_end = 5000.0;
            cfg.step = 100.0;
            const TraceResult tr = trace_ray(env, bath, cfg);
            if (!tr.bounces.empty()) return {false, "unexpected bounce"};
            const double n = 1500.0 / speed, p = n * std::sin(cfg.theta0), w = std::sqrt(n * n - p * p);
            const auto closed = [&](double R) { return Mat2{1.0, 0.0, R * n * n / (w * w * w), 1.0}; };
            for (const auto& s : tr.samples) {
                if (s.r == 0.0) continue;
                worst_trace = std::max(worst_trace, max_relative_error(s.q, closed(s.r), 1.0));
            }
            const JacobianEstimate est = fd_jacobian(env, bath, cfg, {}, 4000.0);
            worst_fd = std::max(worst_fd, max_relative_error(est.jacobian, closed(4000.0), 1.0));
        }
    }
    Outcome o;
    o.pass = worst_trace < 1e-8 && worst_fd < 1e-6;
    o.detail = "trace vs closed form " + sci(worst_trace) + " (< 1e-8), finite differences " + sci(worst_fd) +
               " (< 1e-6)";
    return o;
}

// 6. K against centred differences of the ray equations, second-order convergence.
Outcome k_matrix_validation() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> depths, speeds;
    for (int i = 0; i <= 100; ++i) {
        depths.push_back(50.0 * i);
        speeds.push_back(1500.0 + 0.016 * depths.back() - 25.0 * std::exp(-depths.back() / 800.0));
    }
    const std::vector<SoundSpeedField> fields{
        SoundSpeedField::munk(1500.0),
        SoundSpeedField::linear_gradient(1500.0, 1490.0, 0.03, 2e-4),
        SoundSpeedField::gridded(1500.0, {0.0}, depths, speeds),
    };
    const auto error = [](const SoundSpeedField& f, double r, double z, double p, double h_z, double h_p) {
        const IndexSample s = f.index_at(r, z);
        const KMatrix k = k_matrix(s, p);
        const RayRhs pp = ray_rhs(s, p + h_p), pm = ray_rhs(s, p - h_p);
        const RayRhs zp = ray_rhs(f.index_at(r, z + h_z), p), zm = ray_rhs(f.index_at(r, z - h_z), p);
        const double fd[4] = {(pp.dp_dr - pm.dp_dr) / (2 * h_p), (zp.dp_dr - zm.dp_dr) / (2 * h_z),
                              (pp.dz_dr - pm.dz_dr) / (2 * h_p), (zp.dz_dr - zm.dz_dr) / (2 * h_z)};
        const double an[4] = {k.k11, k.k12, k.k21, k.k22};
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(fd[i] - an[i]) / std::max(std::abs(an[i]), 1e-14));
        return worst;
    };
    int points = 0, measured = 0;
    double min_order = 10.0, max_order = 0.0, worst_fine = 0.0;
    bool ok = true;
    while (points < 100) {
        const std::size_t which = points % fields.size();
        const SoundSpeedField& f = fields[which];
        const double r = 20000.0 * u(rng);
        double z = 200.0 + 4500.0 * u(rng);
        // Spline knots every 50 m: keep the stencil inside one cubic piece.
        if (which == 2) z = 50.0 * std::floor(z / 50.0) + 10.0 + 30.0 * u(rng);
        const double n = f.index_at(r, z).n;
        const double p = n * std::sin((-60.0 + 120.0 * u(rng)) * kDeg);
        ++points;
        const double e1 = error(f, r, z, p, 4.0, 1e-3);
        const double e2 = error(f, r, z, p, 2.0, 5e-4);
        worst_fine = std::max(worst_fine, e2);
        if (e2 > 1e-8) {
            ++measured;
            const double order = std::log2(e1 / e2);
            min_order = std::min(min_order, order);
            max_order = std::max(max_order, order);
            ok = ok && std::abs(order - 2.0) <= 0.3;
        }
        ok = ok && e2 < 1e-3;
    }
    Outcome o;
    o.pass = ok && measured >= 50;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d points, order measured at %d: %.2f .. %.2f, max rel err at fine step %.3e",
                  points, measured, min_order, max_order, worst_fine);
    o.detail = buf;
    return o;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

// 7. Tabulated jump matrix at curvature 0.02, n_z 0.01, n_r 0.
Outcome figure_scan() {
    RunConfig cfg;
    std::ostringstream out, err;
    if (cmd_kappa_scan(cfg, out, err) != 0) return {false, "kappa-scan failed"};
    std::map<std::pair<double, double>, std::array<double, 3>> table;
    int flat_rows = 0;
    bool flat_ok = true;
    for (const auto& row : csv_rows(out.str())) {
        if (row[0] == "theta_deg" || row[5] != "1") continue;
        const double theta = std::stod(row[0]), alpha = std::stod(row[1]);
        const std::array<double, 3> k{std::stod(row[2]), std::stod(row[3]), std::stod(row[4])};
        table[{theta, alpha}] = k;
        if (alpha == 90.0) {
            ++flat_rows;
            const double tr = std::cos(theta * kDeg), tz = std::sin(theta * kDeg);
            const double k12 = 2.0 * (0.01 - 0.02 * 1.0 * tr * tr) / tz;
            flat_ok = flat_ok && k[0] == -1.0 && k[2] == -1.0 && rel(k[1], k12) < 1e-14;
        }
    }
    const std::vector<std::pair<double, double>> pairs{{20, 250}, {10, 240}, {40, 300}, {-30, 100}, {-40, 110}};
    double worst = 0.0;
    for (const auto& [theta, alpha] : pairs) {
        const auto it = table.find({theta, alpha});
        if (it == table.end()) return {false, "scan row missing for sampled pair"};
        const BounceScenario s = local_bounce_scenario(theta * kDeg, alpha * kDeg, 0.02, 0.01, 0.0);
        const KappaVerification v = verify_kappa(s.env, s.bath, s.cfg, s.pert, s.r_query);
        const auto& k = it->second;
        worst = std::max({worst, rel(v.kappa_numeric.a11, k[0]), rel(v.kappa_numeric.a12, k[1]),
                          rel(v.kappa_numeric.a22, k[2])});
    }
    Outcome o;
    o.pass = flat_ok && flat_rows > 0 && worst < 1e-3;
    o.detail = std::to_string(flat_rows) + " valid alpha = 90 rows " + (flat_ok ? "exact" : "MISMATCH") +
               ", oracle vs scan at 5 pairs max rel diff " + sci(worst) + " (< 1e-3)";
    return o;
}

// 8. Byte-identical output for identical inputs.
Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "kapparay_acceptance";
    fs::create_directories(dir);
    const fs::path cfg = dir / "munk.cfg";
    std::ofstream(cfg) << "[environment]\nkind = munk\n[bathymetry]\nkind = sinusoidal\ndepth = 4500\n"
                          "amplitude = 200\nwavenumber = 0.000628\n[trace]\nz0 = 1000\ntheta0_deg = 12\n"
                          "r_end = 60000\nstep = 50\n[fan]\nangle_min_deg = -20\nangle_max_deg = 20\n"
                          "angle_count = 17\nthreads = 0\n[verify]\npreset = random\nrandom_cases = 3\n"
                          "identity_samples = 500\n";
    const auto run = [&](std::vector<std::string> args) {
        args.insert(args.begin(), "kapparay");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return out.str();
    };
    int identical = 0, total = 0;
    for (const std::string cmd : {"trace", "fan", "kappa-scan", "verify"}) {
        const std::vector<std::string> args{cmd, "--config", cfg.string(), "--seed", "99"};
        const std::string a = run(args);
        const std::string b = run(args);
        ++total;
        identical += !a.empty() && a == b;
    }
    Outcome o;
    o.pass = identical == total;
    o.detail = std::to_string(identical) + "/" + std::to_string(total) + " commands byte identical across two runs";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"symplecticity", symplecticity},
        {"kappa special cases", kappa_special_cases},
        {"oracle equivalence", oracle_equivalence},
        {"derivation identities", derivation_identities},
        {"closed-form flow", closed_form_flow},
        {"K-matrix validation", k_matrix_validation},
        {"figure scan vs oracle", figure_scan},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << "  "
                  << o.detail << "\n";
    }
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}
