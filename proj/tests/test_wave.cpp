#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <oslab/errors.hpp>
#include <oslab/geometry.hpp>
#include <oslab/wave.hpp>

#include <cmath>

using namespace oslab;
using geometry::ObstacleConfig;

namespace {

ObstacleConfig centered_triangle(double side, double r = 1.0) {
    // equilateral triangle with its centroid at the origin, so a pulse at
    // the origin sits in the interior pocket between the discs
    const double rad = side / std::sqrt(3.0);
    ObstacleConfig c;
    for (int k = 0; k < 3; ++k) {
        const double ang = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
        c.obstacles.push_back({rad * Eigen::Vector2d(std::cos(ang), std::sin(ang)), r});
    }
    return c;
}

} // namespace

TEST_CASE("grid construction fixes spacing, step and masks") {
    const auto cfg = centered_triangle(6.0);
    const auto grid = wave::make_grid(&cfg, 20.0, 250, 0.9, 30);
    CHECK(grid.dx == doctest::Approx(0.08));
    CHECK(grid.dt == doctest::Approx(0.9 * 0.08 / std::sqrt(2.0)));

    // mask covers roughly the disc areas
    long masked = 0;
    for (auto b : grid.mask) masked += b;
    const double cellArea = grid.dx * grid.dx;
    const double discArea = 3.0 * M_PI;
    CHECK(std::abs(masked * cellArea - discArea) < 0.1 * discArea);

    // absorber ramps from the boundary inward, interior damping is zero
    CHECK(grid.sigma[grid.idx(0, 125)] > 0.0);
    CHECK(grid.sigma[grid.idx(125, 125)] == 0.0);
    CHECK(grid.interiorCell(125, 125));
    CHECK_FALSE(grid.interiorCell(10, 125));
}

TEST_CASE("time steps beyond the stability limit are rejected") {
    auto grid = wave::make_grid(nullptr, 8.0, 64, 0.9, 10);
    grid.dt *= 1.3;
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.4);
    CHECK_THROWS_AS(wave::fdtd_run(grid, pulse, 1.0, 1.0), CFLViolationError);
}

TEST_CASE("runaway fields are caught") {
    // a negative damping polynomial turns the sponge into an amplifier
    const auto grid = wave::make_grid(nullptr, 8.0, 80, 0.9, 16, {0.0, 0.0, 0.0, -60.0});
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.4);
    CHECK_THROWS_AS(wave::fdtd_run(grid, pulse, 40.0, 1.0), UnstableBlowupError);
}

TEST_CASE("nonsense run parameters are rejected") {
    const auto grid = wave::make_grid(nullptr, 8.0, 64, 0.9, 10);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.4);
    CHECK_THROWS_AS(wave::fdtd_run(grid, pulse, -1.0, 1.0), InvalidConfigError);
    CHECK_THROWS_AS(wave::fdtd_run(grid, pulse, 1.0, 0.0), InvalidConfigError);
    CHECK_THROWS_AS(wave::gaussian_pulse(grid, 0.0, 0.0, -0.5), InvalidConfigError);

    wave::WaveState bad = pulse;
    bad.u.resize(10);
    CHECK_THROWS_AS(wave::fdtd_run(grid, bad, 1.0, 1.0), DimensionMismatchError);
}

TEST_CASE("energy is conserved until the wavefront reaches the absorber") {
    const auto grid = wave::make_grid(nullptr, 16.0, 200, 0.9, 30);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.5);
    // absorber starts 5.6 length units from the center; stop well before
    const auto trace = wave::fdtd_run(grid, pulse, 4.0, 2.0, 0.25);
    REQUIRE(trace.samples.size() > 4);
    const double e0 = trace.samples[1].total; // skip the Taylor start-up sample
    for (size_t i = 1; i < trace.samples.size(); ++i) {
        CHECK(std::abs(trace.samples[i].total - e0) <= 1e-3 * e0);
    }
    for (size_t i = 1; i < trace.samples.size(); ++i) {
        CHECK(trace.samples[i].t > trace.samples[i - 1].t);
    }
    CHECK(trace.causalWindowOk);
}

TEST_CASE("the absorber only removes energy") {
    const auto grid = wave::make_grid(nullptr, 16.0, 200, 0.9, 30);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.5);
    const auto trace = wave::fdtd_run(grid, pulse, 16.0, 2.0, 0.25);
    double peak = 0.0;
    for (const auto& s : trace.samples) peak = std::max(peak, s.total);
    bool decaying = false;
    for (size_t i = 1; i < trace.samples.size(); ++i) {
        const auto& prev = trace.samples[i - 1];
        const auto& cur = trace.samples[i];
        if (prev.total < 0.999 * peak) decaying = true;
        if (decaying) CHECK(cur.total <= prev.total * (1.0 + 1e-9));
    }
    CHECK(decaying);
    CHECK(trace.samples.back().total < 0.1 * peak);
    // the causal window is over by t = 16 on this grid
    CHECK_FALSE(trace.causalWindowOk);
}

TEST_CASE("sponge reflections are tiny") {
    const auto grid = wave::make_grid(nullptr, 16.0, 256, 0.9, 48);
    CHECK(wave::absorber_reflection(grid) < 1e-4);
}

TEST_CASE("fit window defaults to the last three quarters") {
    const auto grid = wave::make_grid(nullptr, 12.0, 128, 0.9, 20);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.5);
    const auto def = wave::fdtd_run(grid, pulse, 8.0, 1.5, 0.5);
    CHECK(def.fitStart == doctest::Approx(2.0));
    const auto spec = wave::fdtd_run(grid, pulse, 8.0, 1.5, 0.5, 3.0);
    CHECK(spec.fitStart == doctest::Approx(3.0));
}

TEST_CASE("free-space local energy decays at the dispersive rate") {
    // E_R(t) ~ t^-4 for velocity data with nonzero mean, i.e. amplitude
    // slope -2 after halving
    const auto grid = wave::make_grid(nullptr, 28.0, 420, 0.9, 48);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.5);
    const auto trace = wave::fdtd_run(grid, pulse, 18.0, 2.0, 0.5, 7.0);
    CHECK(trace.causalWindowOk);
    const double amplitudeSlope = 0.5 * trace.fittedSlope;
    CHECK(amplitudeSlope < -1.6);
    CHECK(amplitudeSlope > -2.4);
}

TEST_CASE("obstacles pin the field without destabilizing the run") {
    const auto cfg = centered_triangle(6.0);
    const auto grid = wave::make_grid(&cfg, 24.0, 300, 0.9, 40);
    const auto pulse = wave::gaussian_pulse(grid, 0.0, 0.0, 0.5);
    const auto trace = wave::fdtd_run(grid, pulse, 12.0, 2.0, 0.5);
    CHECK(trace.maxAbs < 10.0);
    CHECK(trace.samples.back().local < trace.samples.front().local);
    // the pulse mask keeps data off the obstacles
    for (size_t c = 0; c < grid.mask.size(); ++c) {
        if (grid.mask[c]) CHECK(pulse.v[static_cast<long>(c)] == 0.0);
    }
}
