#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kapparay/config.hpp"
#include "kapparay/environment.hpp"
#include "kapparay/oracle.hpp"
#include "kapparay/propagation.hpp"
#include "kapparay/reflection.hpp"

namespace kapparay {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitVerificationFailed = 1, kExitUsage = 2 };

struct KappaScanParams {
    std::vector<double> theta_deg;  ///< defaults to -90 + 10 k, k = 0..18
    double alpha_min_deg = 0.0;
    double alpha_max_deg = 360.0;
    double alpha_step_deg = 1.0;
    double curvature = 0.02;
    double n_z = 0.01;
    double n_r = 0.0;
    double n = 1.0;
};

struct KappaScanRow {
    double theta_deg = 0.0;
    double alpha_deg = 0.0;
    std::optional<KappaMatrix> kappa;  ///< empty where the reflection is not admissible
};

/// Jump matrix over a (theta, alpha) grid for a fixed local medium and curvature.
/// Rows are admissible when the ray moves forward in range before and after
/// the bounce and approaches the boundary (<t, N> < 0).
std::vector<KappaScanRow> kappa_scan(const KappaScanParams& params);

/// Jump matrix of one (theta, alpha) pair in degrees, or nullopt if not
/// admissible. Multiples of 90 degrees give exact axis-aligned vectors.
std::optional<KappaMatrix> kappa_at(double theta_deg, double alpha_deg, const KappaScanParams& params);

/// (cos, sin) of an angle in degrees, exact at multiples of 90.
Vec2 unit_from_degrees(double deg);

struct VerifyParams {
    std::string preset = "all";  ///< all | flat-linear | arc-homogeneous | arc-linear | sinusoidal-munk | random | custom
    int random_cases = 5;
    double tolerance = 1e-3;
    double order_target = 2.0;
    double order_tolerance = 0.3;
    int identity_samples = 10000;
    std::optional<double> r_query;  ///< custom preset
    BeamPerturbation pert;
    BeamPerturbation convergence{1e-3, 1e-1, 2};
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    bool corrupt_kappa12 = false;  ///< mutation check: flips the sign of kappa12 at every bounce
};

/// Everything a configuration file can specify. Sections are optional; each
/// command checks for the pieces it needs.
struct RunConfig {
    std::string source = "<defaults>";
    std::string hash = fnv1a_hex("");
    std::optional<SoundSpeedField> env;
    std::optional<Bathymetry> bath;
    TraceConfig trace;
    bool has_launch_angle = false;
    std::optional<std::vector<double>> fan_angles_deg;
    unsigned threads = 0;
    KappaScanParams scan;
    VerifyParams verify;

    static RunConfig from_file(const ConfigFile& file);
};

int cmd_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_fan(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_kappa_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, const VerifyOptions& opts, std::ostream& out, std::ostream& err);

/// Full command line: `kapparay <trace|fan|kappa-scan|verify> [--config p] [--output p] [--seed n]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kapparay
