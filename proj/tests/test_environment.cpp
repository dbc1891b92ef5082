#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kapparay/environment.hpp"
#include "kapparay/errors.hpp"
#include "kapparay/spline.hpp"

using namespace kapparay;

namespace {

double n_of(const SoundSpeedField& f, double r, double z) { return f.reference_speed() / f.sound_speed(r, z); }

// Worst relative mismatch between analytic derivatives and centred differences at step h.
double derivative_mismatch(const SoundSpeedField& f, double r, double z, double h) {
    const IndexSample s = f.index_at(r, z);
    const double n_z = (n_of(f, r, z + h) - n_of(f, r, z - h)) / (2 * h);
    const double n_r = (n_of(f, r + h, z) - n_of(f, r - h, z)) / (2 * h);
    const double n_zz = (f.index_at(r, z + h).n_z - f.index_at(r, z - h).n_z) / (2 * h);
    const double scale_1 = std::max({std::abs(s.n_z), std::abs(s.n_r), 1e-12});
    const double scale_2 = std::max(std::abs(s.n_zz), 1e-15);
    return std::max({std::abs(n_z - s.n_z) / scale_1, std::abs(n_r - s.n_r) / scale_1,
                     std::abs(n_zz - s.n_zz) / scale_2});
}

SoundSpeedField munk_grid(double dz) {
    const SoundSpeedField munk = SoundSpeedField::munk(1500.0);
    std::vector<double> depths;
    for (double z = 0.0; z <= 5000.0 + 1e-9; z += dz) depths.push_back(z);
    std::vector<double> speeds;
    for (double z : depths) speeds.push_back(munk.sound_speed(0.0, z));
    return SoundSpeedField::gridded(1500.0, {0.0}, depths, speeds);
}

}  // namespace

TEST_CASE("constant field has unit index and no gradients") {
    const auto f = SoundSpeedField::constant(1500.0, 1500.0);
    for (double r : {0.0, 123.0, 1e5}) {
        for (double z : {0.0, 50.0, 4000.0}) {
            const IndexSample s = f.index_at(r, z);
            CHECK(s.n == 1.0);
            CHECK(s.n_r == 0.0);
            CHECK(s.n_z == 0.0);
            CHECK(s.n_zz == 0.0);
        }
    }
}

TEST_CASE("linear gradient: n_z at the surface equals g to first order") {
    const double g = 1e-5;
    const auto f = SoundSpeedField::linear_gradient(1500.0, 1500.0, -1500.0 * g);
    const IndexSample s = f.index_at(0.0, 0.0);
    CHECK(s.n == doctest::Approx(1.0));
    CHECK(s.n_z == doctest::Approx(g).epsilon(1e-12));
    CHECK(derivative_mismatch(f, 200.0, 300.0, 1e-2) < 1e-7);
}

TEST_CASE("analytic fields match centred differences with second-order convergence") {
    const std::vector<SoundSpeedField> fields = {
        SoundSpeedField::linear_gradient(1500.0, 1480.0, 0.05, -0.002),
        SoundSpeedField::munk(1500.0),
    };
    for (const auto& f : fields) {
        CAPTURE(to_string(f.kind()));
        for (const auto& [r, z] : std::vector<std::pair<double, double>>{{0, 100}, {5000, 1000}, {1e4, 3500}}) {
            const double e1 = derivative_mismatch(f, r, z, 4.0);
            const double e2 = derivative_mismatch(f, r, z, 2.0);
            CHECK(e2 < 1e-5);
            if (e1 > 1e-9) CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
        }
    }
}

TEST_CASE("gridded Munk profile reproduces the analytic gradient") {
    const SoundSpeedField munk = SoundSpeedField::munk(1500.0);
    const SoundSpeedField grid = munk_grid(1.0);
    for (double z = 200.0; z <= 4800.0; z += 137.0) {
        CAPTURE(z);
        const IndexSample a = munk.index_at(0.0, z);
        const IndexSample b = grid.index_at(0.0, z);
        CHECK(std::abs(b.n - a.n) / a.n < 1e-10);
        CHECK(std::abs(b.n_z - a.n_z) / std::abs(a.n_z) < 1e-6);
        CHECK(b.n_r == 0.0);
    }
}

TEST_CASE("gridded field with range dependence has consistent derivatives") {
    std::vector<double> ranges{0, 1000, 2000, 3000};
    std::vector<double> depths{0, 250, 500, 750, 1000};
    std::vector<double> speeds;
    for (double z : depths) {
        for (double r : ranges) speeds.push_back(1500.0 + 0.02 * z + 0.001 * r + 1e-5 * z * z);
    }
    const auto f = SoundSpeedField::gridded(1500.0, ranges, depths, speeds);
    CHECK(f.sound_speed(1000.0, 500.0) == doctest::Approx(1500.0 + 10.0 + 1.0 + 2.5));
    CHECK(derivative_mismatch(f, 1500.0, 400.0, 1e-3) < 1e-5);
}

TEST_CASE("fields reject queries outside their domain") {
    const auto grid = SoundSpeedField::gridded(1500.0, {0.0, 100.0}, {0.0, 100.0}, {1500, 1500, 1510, 1510}, 5.0);
    CHECK_NOTHROW(grid.index_at(104.0, 50.0));
    CHECK_THROWS_AS(grid.index_at(106.0, 50.0), DomainError);
    CHECK_THROWS_AS(grid.index_at(50.0, -6.0), DomainError);
    const auto steep = SoundSpeedField::linear_gradient(1500.0, 1500.0, -1.0);
    CHECK_THROWS_AS(steep.index_at(0.0, 2000.0), DomainError);
    CHECK_THROWS_AS(SoundSpeedField::gridded(1500.0, {0.0}, {0.0, 10.0}, {1500.0}), std::invalid_argument);
}

TEST_CASE("flat bottom frame") {
    const auto b = Bathymetry::flat(1000.0);
    const BottomSample s = b.bottom_at(250.0);
    CHECK(s.depth == 1000.0);
    CHECK(s.slope == 0.0);
    CHECK(s.frame.curvature == 0.0);
    CHECK(s.frame.n_r == 0.0);
    CHECK(s.frame.n_z == -1.0);
}

TEST_CASE("sinusoidal bottom at a crest") {
    const double A = 20.0, k = 2 * std::numbers::pi / 1000.0;
    const auto b = Bathymetry::sinusoidal(500.0, A, k);
    const double crest = std::numbers::pi / 2 / k;
    const BottomSample s = b.bottom_at(crest);
    CHECK(s.depth == doctest::Approx(520.0));
    CHECK(std::abs(s.slope) < 1e-12);
    CHECK(std::abs(s.frame.curvature) == doctest::Approx(A * k * k).epsilon(1e-12));
    const double h = 1e-2;
    const double d2 = (b.depth_at(crest + h) - 2 * b.depth_at(crest) + b.depth_at(crest - h)) / (h * h);
    CHECK(s.second_derivative == doctest::Approx(d2).epsilon(1e-5));
}

TEST_CASE("circular arc has curvature 1/R everywhere") {
    const double R = 50.0;
    const auto bowl = Bathymetry::circular_arc(0.0, 10.0, R, true, -45.0, 45.0);
    const auto mound = Bathymetry::circular_arc(0.0, 200.0, R, false, -45.0, 45.0);
    for (double r = -44.0; r <= 44.0; r += 4.0) {
        const BottomSample b = bowl.bottom_at(r);
        const BottomSample m = mound.bottom_at(r);
        CHECK(std::abs(b.frame.curvature * R - 1.0) < 1e-8);
        CHECK(std::abs(m.frame.curvature * R + 1.0) < 1e-8);
        CHECK(b.frame.n_r * b.frame.n_r + b.frame.n_z * b.frame.n_z == doctest::Approx(1.0));
        CHECK(b.frame.n_z < 0.0);
        // The normal is perpendicular to the tangent (1, slope).
        CHECK(std::abs(b.frame.n_r + b.frame.n_z * b.slope) < 1e-12);
    }
    CHECK_THROWS_AS(bowl.bottom_at(46.0), DomainError);
}

TEST_CASE("surface frame") {
    const NormalFrame f = surface_frame();
    CHECK(f.n_r == 0.0);
    CHECK(std::abs(f.n_z) == 1.0);
    CHECK(f.curvature == 0.0);
    CHECK(f.n_r * f.n_r + f.n_z * f.n_z == 1.0);
}

TEST_CASE("piecewise bathymetry passes through its knots and is C2") {
    const std::vector<double> r{0, 2000, 5000, 8000};
    const std::vector<double> z{1000, 950, 1100, 1000};
    const auto b = Bathymetry::piecewise(r, z);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(b.depth_at(r[i]) == doctest::Approx(z[i]).epsilon(1e-14));
    const double h = 1e-6;
    const BottomSample left = b.bottom_at(2000.0 - h);
    const BottomSample right = b.bottom_at(2000.0 + h);
    CHECK(left.second_derivative == doctest::Approx(right.second_derivative).epsilon(1e-6));
    CHECK(b.bottom_at(0.0).second_derivative == doctest::Approx(0.0));
}

TEST_CASE("natural spline approximates a smooth function between knots") {
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(0.25 * i);
        y.push_back(std::sin(x.back()));
    }
    const NaturalCubicSpline s(x, y);
    for (double t = 1.0; t < 9.0; t += 0.37) {
        const SplineValue v = s(t);
        CHECK(v.f == doctest::Approx(std::sin(t)).epsilon(1e-4));
        CHECK(v.df == doctest::Approx(std::cos(t)).epsilon(1e-3));
    }
}

TEST_CASE("bathymetry file loading") {
    const auto b = Bathymetry::from_file(KAPPARAY_TEST_DATA "/ridge.bathy");
    CHECK(b.kind() == Bathymetry::Kind::piecewise);
    CHECK(b.depth_at(5000.0) == doctest::Approx(1100.0));
    CHECK(b.r_max() == 8000.0);
    try {
        (void)Bathymetry::from_file(KAPPARAY_TEST_DATA "/bad_order.bathy");
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS(Bathymetry::from_file(KAPPARAY_TEST_DATA "/missing.bathy"));
}

TEST_CASE("bathymetry constructors validate depth") {
    CHECK_THROWS_AS(Bathymetry::flat(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Bathymetry::sinusoidal(10.0, 20.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Bathymetry::linear_slope(100.0, -0.1, 0.0, 2000.0), std::invalid_argument);
}
