#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "oslab/errors.hpp"
#include "oslab/geometry.hpp"

namespace oslab::billiard {

using geometry::ObstacleConfig;

// Point of the reduced phase space: obstacle index, arclength along its
// boundary (counterclockwise, s in [0, 2*pi*r)), and tangential momentum
// eta in [-1, 1].
struct BoundaryPhasePoint {
    int obstacle = 0;
    double s = 0.0;
    double eta = 0.0;
};

struct Ray {
    Eigen::Vector2d origin;
    Eigen::Vector2d direction; // unit length
};

enum class Branch { Plus, Minus };

enum class StepKind { Hit, Escape };

struct BilliardStep {
    StepKind kind = StepKind::Escape;
    BoundaryPhasePoint arrival{};
    double time = 0.0;     // flight length along the ray (Escape: +inf)
    bool occluded = false; // Minus branch only: the continuation of the ray
                           // past the exit point strikes another obstacle
};

// Boundary chart helpers for disc number j.
double perimeter(const ObstacleConfig& config, int j);
Eigen::Vector2d boundary_point(const ObstacleConfig& config, int j, double s);
Eigen::Vector2d boundary_tangent(const ObstacleConfig& config, int j, double s);
Eigen::Vector2d boundary_normal(const ObstacleConfig& config, int j, double s);

// Unit ray leaving (resp. entering) the boundary point:
// direction = eta * T + sqrt(1 - eta^2) * nu.
Ray lift(const ObstacleConfig& config, const BoundaryPhasePoint& p);

// One step of the open billiard map. Branch::Plus follows the ray to its
// first transversal entry into another obstacle; Branch::Minus returns the
// exit-side intersection with that same obstacle (the shadow step).
// Throws GlancingError when the closest approach is tangent within
// glancingTol (tolerance on the ray/circle discriminant).
BilliardStep step(const ObstacleConfig& config, const BoundaryPhasePoint& p, Branch branch,
                  double glancingTol = 1e-12);

// Flight length of the Plus step; throws NoHitError on escape.
double flight_time(const ObstacleConfig& config, const BoundaryPhasePoint& p);

// Analytic Jacobian of the Plus step in (s, eta) coordinates.
Eigen::Matrix2d map_jacobian_analytic(const ObstacleConfig& config, const BoundaryPhasePoint& p);

// Centered-difference Jacobian. The nominal step is widened internally and
// Richardson-extrapolated so the entries carry ~1e-10 noise rather than the
// ~1e-8 of a plain second-order stencil. Throws NearGlancingError when the
// stencil straddles an escape or a change of target obstacle, or when
// |eta| is too close to 1 for the stencil to fit.
Eigen::Matrix2d map_jacobian(const ObstacleConfig& config, const BoundaryPhasePoint& p,
                             double baseStep = 1e-6);

struct PeriodicOrbit {
    std::vector<int> word;                  // visited obstacle indices
    std::vector<BoundaryPhasePoint> points; // departure coordinates per leg
    std::vector<Eigen::Vector2d> vertices;  // reflection points
    double length = 0.0;                    // total geometric length
    Eigen::Matrix2d monodromy;              // product of per-leg Jacobians
    int iterations = 0;
};

// Locate the closed broken geodesic visiting the obstacles in the cyclic
// order given by word (length >= 2, no two cyclically adjacent entries
// equal). Minimizes total chord length over boundary angles by a damped
// Newton method started from a coordinate-descent sweep.
PeriodicOrbit find_periodic_orbit(const ObstacleConfig& config, const std::vector<int>& word,
                                  int maxNewtonIter = 80);

struct PhaseBox {
    int obstacle = 0;
    double s0 = 0.0, s1 = 0.0;
    double eta0 = 0.0, eta1 = 0.0;

    double area() const { return (s1 - s0) * (eta1 - eta0); }
};

struct CoverLevelStats {
    int depth = 0;
    long boxCount = 0;
    double totalArea = 0.0;
};

struct TrappedSetCover {
    int depth = 0;
    std::vector<PhaseBox> boxes; // finest level
    double totalArea = 0.0;
    std::vector<CoverLevelStats> levels;
    // least-squares slope of log(boxCount) against depth * log 2, a crude
    // box-counting dimension estimate (levels >= 2 required, else 0)
    double dimensionEstimate = 0.0;
};

// Hierarchical outer cover of the trapped set: start from the full
// rectangles [0, perimeter) x [-1, 1] and quadrisect the surviving boxes at
// each level. A box at level n survives iff it contains a point whose
// forward and backward iterates complete n bounces without escaping. The
// point is found by a deterministic in-box pattern search seeded from a
// samplesPerSide^2 grid, from departure points of short periodic words, and
// from orbit points of the surviving points of the previous level; boxes
// whose search fails get retried with seeds shed by newly accepted
// neighbours until no further box revives. Levels are nested by
// construction and do not depend on the requested final depth, so a depth
// n+1 cover refines the depth n one.
TrappedSetCover trapped_set_cover(const ObstacleConfig& config, int depth, int samplesPerSide = 8,
                                  int workers = 1);

// Top Lyapunov exponent along the orbit of the given periodic word
// (log of the monodromy spectral radius divided by the word length).
double lyapunov_exponent(const ObstacleConfig& config, const std::vector<int>& word);

// Average expansion rate over trapped-set cover boxes: iterate the map
// forward from each sampled box center for up to `steps` bounces and return
// the total log ||DF|| divided by the total number of bounces taken.
double lyapunov_estimate(const ObstacleConfig& config, const TrappedSetCover& cover,
                         int steps = 6, int maxSamples = 256);

} // namespace oslab::billiard
