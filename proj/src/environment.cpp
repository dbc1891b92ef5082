#include "kapparay/environment.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kapparay/errors.hpp"

namespace kapparay {

namespace {

// n = c0 / c with derivatives from those of c.
IndexSample index_from_speed(double c0, double c, double c_r, double c_z, double c_zz) {
    IndexSample s;
    s.n = c0 / c;
    s.n_r = -c0 * c_r / (c * c);
    s.n_z = -c0 * c_z / (c * c);
    s.n_zz = -c0 * c_zz / (c * c) + 2.0 * c0 * c_z * c_z / (c * c * c);
    return s;
}

std::string coordinate_message(const char* what, double value) {
    std::ostringstream os;
    os << what << " = " << value << " is outside the declared domain";
    return os.str();
}

}  // namespace

struct SoundSpeedField::Grid {
    std::vector<double> ranges;
    std::vector<double> depths;
    // Index values and depth-spline second derivatives, one vector per range column.
    std::vector<std::vector<double>> columns;
    std::vector<std::vector<double>> column_m;
    double margin = 0.0;
};

SoundSpeedField SoundSpeedField::constant(double c0, double speed) {
    if (!(c0 > 0.0) || !(speed > 0.0)) throw std::invalid_argument("sound speeds must be positive");
    return {c0, Constant{speed}};
}

SoundSpeedField SoundSpeedField::linear_gradient(double c0, double surface_speed, double dc_dz,
                                                 double dc_dr) {
    if (!(c0 > 0.0) || !(surface_speed > 0.0)) throw std::invalid_argument("sound speeds must be positive");
    return {c0, Linear{surface_speed, dc_dz, dc_dr}};
}

SoundSpeedField SoundSpeedField::munk(double c0, const MunkParameters& params) {
    if (!(c0 > 0.0) || !(params.axis_speed > 0.0) || !(params.scale_depth > 0.0)) {
        throw std::invalid_argument("Munk profile: speeds and scale depth must be positive");
    }
    return {c0, Munk{params}};
}

SoundSpeedField SoundSpeedField::gridded(double c0, std::vector<double> ranges,
                                         std::vector<double> depths, std::vector<double> speeds,
                                         double margin) {
    if (!(c0 > 0.0)) throw std::invalid_argument("reference speed must be positive");
    if (ranges.empty()) throw std::invalid_argument("gridded field: no range columns");
    if (depths.size() < 2) throw std::invalid_argument("gridded field: at least two depths required");
    if (speeds.size() != ranges.size() * depths.size()) {
        throw std::invalid_argument("gridded field: expected depths x ranges speed values");
    }
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (!(ranges[i] > ranges[i - 1])) throw std::invalid_argument("gridded field: ranges must increase");
    }
    for (std::size_t i = 1; i < depths.size(); ++i) {
        if (!(depths[i] > depths[i - 1])) throw std::invalid_argument("gridded field: depths must increase");
    }
    if (margin < 0.0) throw std::invalid_argument("gridded field: margin must be non-negative");

    auto grid = std::make_shared<Grid>();
    const std::size_t nr = ranges.size();
    grid->columns.assign(nr, std::vector<double>(depths.size()));
    for (std::size_t i = 0; i < depths.size(); ++i) {
        for (std::size_t j = 0; j < nr; ++j) {
            const double c = speeds[i * nr + j];
            if (!(c > 0.0)) throw std::invalid_argument("gridded field: sound speed must be positive");
            grid->columns[j][i] = c0 / c;
        }
    }
    for (const auto& col : grid->columns) {
        grid->column_m.push_back(NaturalCubicSpline::second_derivatives(depths, col));
    }
    grid->ranges = std::move(ranges);
    grid->depths = std::move(depths);
    // A rounding skin so boundary hits on the grid edge stay inside the domain.
    const double extent = std::max(grid->depths.back() - grid->depths.front(),
                                   grid->ranges.back() - grid->ranges.front());
    grid->margin = margin + 1e-6 * std::max(extent, 1.0);
    return {c0, std::shared_ptr<const Grid>(std::move(grid))};
}

SoundSpeedField::Kind SoundSpeedField::kind() const {
    switch (model_.index()) {
        case 0: return Kind::constant;
        case 1: return Kind::linear_gradient;
        case 2: return Kind::munk;
        default: return Kind::gridded;
    }
}

IndexSample SoundSpeedField::index_at(double r, double z) const {
    if (!std::isfinite(r)) throw DomainError(coordinate_message("r", r), "r", r);
    if (!std::isfinite(z)) throw DomainError(coordinate_message("z", z), "z", z);

    if (const auto* m = std::get_if<Constant>(&model_)) {
        return {c0_ / m->speed, 0.0, 0.0, 0.0};
    }
    if (const auto* m = std::get_if<Linear>(&model_)) {
        const double c = m->surface_speed + m->dc_dz * z + m->dc_dr * r;
        if (!(c > 0.0)) throw DomainError(coordinate_message("z", z) + " (sound speed not positive)", "z", z);
        return index_from_speed(c0_, c, m->dc_dr, m->dc_dz, 0.0);
    }
    if (const auto* m = std::get_if<Munk>(&model_)) {
        const auto& p = m->p;
        const double scale = 2.0 / p.scale_depth;
        const double eta = scale * (z - p.axis_depth);
        const double e = std::exp(-eta);
        const double c = p.axis_speed * (1.0 + p.epsilon * (eta + e - 1.0));
        const double c_z = p.axis_speed * p.epsilon * (1.0 - e) * scale;
        const double c_zz = p.axis_speed * p.epsilon * e * scale * scale;
        if (!(c > 0.0)) throw DomainError(coordinate_message("z", z) + " (sound speed not positive)", "z", z);
        return index_from_speed(c0_, c, 0.0, c_z, c_zz);
    }

    const Grid& g = *std::get<std::shared_ptr<const Grid>>(model_);
    if (z < g.depths.front() - g.margin || z > g.depths.back() + g.margin) {
        throw DomainError(coordinate_message("z", z), "z", z);
    }
    const std::size_t nr = g.ranges.size();
    if (nr > 1 && (r < g.ranges.front() - g.margin || r > g.ranges.back() + g.margin)) {
        throw DomainError(coordinate_message("r", r), "r", r);
    }

    if (nr == 1) {
        const SplineValue v = NaturalCubicSpline::evaluate(g.depths, g.columns[0], g.column_m[0], z);
        if (!(v.f > 0.0)) throw DomainError(coordinate_message("z", z) + " (index not positive)", "z", z);
        return {v.f, 0.0, v.df, v.d2f};
    }

    std::vector<double> f(nr), fz(nr), fzz(nr);
    for (std::size_t j = 0; j < nr; ++j) {
        const SplineValue v = NaturalCubicSpline::evaluate(g.depths, g.columns[j], g.column_m[j], z);
        f[j] = v.f;
        fz[j] = v.df;
        fzz[j] = v.d2f;
    }
    const auto across = [&](const std::vector<double>& y) {
        const auto m = NaturalCubicSpline::second_derivatives(g.ranges, y);
        return NaturalCubicSpline::evaluate(g.ranges, y, m, r);
    };
    const SplineValue v = across(f);
    IndexSample s{v.f, v.df, across(fz).f, across(fzz).f};
    if (!(s.n > 0.0)) throw DomainError(coordinate_message("z", z) + " (index not positive)", "z", z);
    return s;
}

double SoundSpeedField::sound_speed(double r, double z) const { return c0_ / index_at(r, z).n; }

NormalFrame frame_from_profile(double slope, double second_derivative, bool water_below) {
    const double s2 = 1.0 + slope * slope;
    const double s = std::sqrt(s2);
    NormalFrame f;
    if (water_below) {
        f.n_r = -slope / s;
        f.n_z = 1.0 / s;
        f.curvature = second_derivative / (s2 * s);
    } else {
        f.n_r = slope / s;
        f.n_z = -1.0 / s;
        f.curvature = -second_derivative / (s2 * s);
    }
    f.alpha = std::atan2(f.n_z, f.n_r);
    if (f.alpha < 0.0) f.alpha += 2.0 * std::numbers::pi;
    f.radius = f.curvature == 0.0 ? kInfinity : 1.0 / std::abs(f.curvature);
    return f;
}

NormalFrame surface_frame() { return frame_from_profile(0.0, 0.0, true); }

Bathymetry Bathymetry::flat(double depth) {
    Bathymetry b(Kind::flat, {depth}, -kInfinity, kInfinity);
    b.check_positive_depth();
    return b;
}

Bathymetry Bathymetry::linear_slope(double depth, double slope, double r_min, double r_max) {
    if (!(r_max > r_min) || !std::isfinite(r_min) || !std::isfinite(r_max)) {
        throw std::invalid_argument("linear-slope bathymetry needs a finite domain r_min < r_max");
    }
    Bathymetry b(Kind::linear_slope, {depth, slope}, r_min, r_max);
    b.check_positive_depth();
    return b;
}

Bathymetry Bathymetry::sinusoidal(double depth, double amplitude, double wavenumber, double phase) {
    Bathymetry b(Kind::sinusoidal, {depth, amplitude, wavenumber, phase}, -kInfinity, kInfinity);
    b.check_positive_depth();
    return b;
}

Bathymetry Bathymetry::circular_arc(double center_r, double center_z, double radius, bool bowl,
                                    double r_min, double r_max) {
    if (!(radius > 0.0)) throw std::invalid_argument("circular arc: radius must be positive");
    if (!(r_max > r_min)) throw std::invalid_argument("circular arc: need r_min < r_max");
    if (!(r_min > center_r - radius) || !(r_max < center_r + radius)) {
        throw std::invalid_argument("circular arc: domain must lie strictly inside the circle's range span");
    }
    Bathymetry b(Kind::circular_arc, {center_r, center_z, radius, bowl ? 1.0 : 0.0}, r_min, r_max);
    b.check_positive_depth();
    return b;
}

Bathymetry Bathymetry::piecewise(std::vector<double> ranges, std::vector<double> depths) {
    auto spline = std::make_shared<NaturalCubicSpline>(std::move(ranges), std::move(depths));
    const double lo = spline->knots().front();
    const double hi = spline->knots().back();
    Bathymetry b(Kind::piecewise, {}, lo, hi);
    b.spline_ = std::move(spline);
    b.check_positive_depth();
    return b;
}

Bathymetry Bathymetry::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bathymetry file " + path.string());
    std::vector<double> r, z;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        is.imbue(std::locale::classic());
        double a = 0.0, b = 0.0;
        if (!(is >> a)) {
            is.clear();
            std::string rest;
            if (is >> rest) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected two numbers");
            }
            continue;  // blank or comment-only line
        }
        std::string extra;
        if (!(is >> b) || (is >> extra)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected two numbers");
        }
        if (!r.empty() && !(a > r.back())) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": ranges must be strictly increasing");
        }
        r.push_back(a);
        z.push_back(b);
    }
    if (r.size() < 2) throw std::runtime_error(path.string() + ": need at least two (r, z_b) pairs");
    return piecewise(std::move(r), std::move(z));
}

SplineValue Bathymetry::profile(double r) const {
    const auto& p = params_;
    switch (kind_) {
        case Kind::flat: return {p[0], 0.0, 0.0};
        case Kind::linear_slope: return {p[0] + p[1] * r, p[1], 0.0};
        case Kind::sinusoidal: {
            const double phase = p[2] * r + p[3];
            return {p[0] + p[1] * std::sin(phase), p[1] * p[2] * std::cos(phase),
                    -p[1] * p[2] * p[2] * std::sin(phase)};
        }
        case Kind::circular_arc: {
            const double x = r - p[0];
            const double radius = p[2];
            const double s = std::sqrt((radius - x) * (radius + x));
            const double sign = p[3] != 0.0 ? 1.0 : -1.0;  // bowl lies below the centre
            return {p[1] + sign * s, -sign * x / s, -sign * radius * radius / (s * s * s)};
        }
        case Kind::piecewise: return (*spline_)(r);
    }
    return {};
}

void Bathymetry::require_in_domain(double r) const {
    if (!std::isfinite(r) || !contains(r)) throw DomainError(coordinate_message("r", r), "r", r);
}

double Bathymetry::depth_at(double r) const {
    require_in_domain(r);
    return profile(r).f;
}

BottomSample Bathymetry::bottom_at(double r) const {
    require_in_domain(r);
    const SplineValue v = profile(r);
    return {v.f, v.df, v.d2f, frame_from_profile(v.df, v.d2f, false)};
}

void Bathymetry::check_positive_depth() const {
    const auto fail = [] { throw std::invalid_argument("bathymetry must stay strictly below the surface (z_b > 0)"); };
    switch (kind_) {
        case Kind::flat:
            if (!(params_[0] > 0.0)) fail();
            return;
        case Kind::linear_slope:
            if (!(profile(r_min_).f > 0.0) || !(profile(r_max_).f > 0.0)) fail();
            return;
        case Kind::sinusoidal:
            if (!(params_[0] - std::abs(params_[1]) > 0.0)) fail();
            return;
        case Kind::circular_arc:
        case Kind::piecewise: {
            // Sample densely between knots / across the arc domain.
            const int n = kind_ == Kind::piecewise ? 16 * static_cast<int>(spline_->knots().size()) : 1024;
            for (int i = 0; i <= n; ++i) {
                const double r = r_min_ + (r_max_ - r_min_) * i / n;
                if (!(profile(r).f > 0.0)) fail();
            }
            return;
        }
    }
}

std::string to_string(SoundSpeedField::Kind kind) {
    switch (kind) {
        case SoundSpeedField::Kind::constant: return "constant";
        case SoundSpeedField::Kind::linear_gradient: return "linear-gradient";
        case SoundSpeedField::Kind::munk: return "munk";
        case SoundSpeedField::Kind::gridded: return "gridded";
    }
    return "unknown";
}

std::string to_string(Bathymetry::Kind kind) {
    switch (kind) {
        case Bathymetry::Kind::flat: return "flat";
        case Bathymetry::Kind::linear_slope: return "linear-slope";
        case Bathymetry::Kind::sinusoidal: return "sinusoidal";
        case Bathymetry::Kind::circular_arc: return "circular-arc";
        case Bathymetry::Kind::piecewise: return "piecewise";
    }
    return "unknown";
}

}  // namespace kapparay
