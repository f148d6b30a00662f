#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oslab/errors.hpp"
#include "oslab/geometry.hpp"

namespace oslab::wave {

// Uniform square grid on [-extent/2, extent/2]^2 with cell centers, a
// Dirichlet mask for the obstacles (cell center inside a disc), and a
// polynomial sponge absorber along the outer frame.
struct WaveGrid {
    double extent = 0.0;
    int nx = 0;
    double dx = 0.0;
    double dt = 0.0;
    int absorberCells = 0;
    std::vector<double> absorberPoly; // sigma(depth) coefficients, depth in [0,1]
    std::vector<std::uint8_t> mask;   // 1 = obstacle interior (field pinned to 0)
    std::vector<double> sigma;        // per-cell damping

    double x(int i) const { return -0.5 * extent + (i + 0.5) * dx; }
    size_t idx(int i, int j) const {
        return static_cast<size_t>(j) * static_cast<size_t>(nx) + static_cast<size_t>(i);
    }
    bool interiorCell(int i, int j) const {
        return i >= absorberCells && j >= absorberCells && i < nx - absorberCells &&
               j < nx - absorberCells;
    }
};

// dtFactor is the fraction of the stability limit dx/sqrt(2); values above
// 1 are rejected at run time. Passing nullptr for obstacles gives free space.
WaveGrid make_grid(const geometry::ObstacleConfig* obstacles, double extent, int nx,
                   double dtFactor = 0.9, int absorberCells = 48,
                   std::vector<double> absorberPoly = {0.0, 0.0, 0.0, 40.0});

struct WaveState {
    Eigen::VectorXd u;  // displacement
    Eigen::VectorXd v;  // velocity
};

// Gaussian data of width sigma centered at (cx, cy); when onVelocity is
// true the pulse is placed on u_t (nonzero mean data, the generic case),
// otherwise on u.
WaveState gaussian_pulse(const WaveGrid& grid, double cx, double cy, double sigma,
                         double amplitude = 1.0, bool onVelocity = true);

struct EnergySample {
    double t = 0.0;
    double local = 0.0; // energy inside the ball of radius R
    double total = 0.0; // energy over the whole non-absorbing interior
};

struct EnergyTrace {
    double radius = 0.0;
    std::vector<EnergySample> samples;
    // least-squares slope of log(local energy) against log t over the
    // fitted window [fitStart, T]
    double fittedSlope = 0.0;
    double fitStart = 0.0;
    bool causalWindowOk = false; // R + T fits inside the absorber-free box
    double maxAbs = 0.0;
};

// Leapfrog integration of u_tt = lap u with Dirichlet obstacles and the
// sponge boundary; samples E_R(t) and total energy every sampleEvery time
// units and fits the local-energy decay slope on [fitStart, T]. A negative
// fitStart selects the default window start T/4.
// Throws CFLViolationError when the grid time step breaks dt <= dx/sqrt(2)
// and UnstableBlowupError when the field exceeds 1e6 times its initial
// amplitude.
EnergyTrace fdtd_run(const WaveGrid& grid, const WaveState& initial, double tEnd, double radius,
                     double sampleEvery = 0.5, double fitStart = -1.0);

// Inject an outgoing pulse next to the sponge and report the energy
// fraction reflected back into the interior; a quality figure for the
// absorber profile.
double absorber_reflection(const WaveGrid& grid);

} // namespace oslab::wave
