#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oslab/errors.hpp"

namespace oslab::geometry {

struct DiscObstacle {
    Eigen::Vector2d center;
    double radius = 1.0;
};

struct ObstacleConfig {
    std::vector<DiscObstacle> obstacles;

    int count() const { return static_cast<int>(obstacles.size()); }
    const DiscObstacle& disc(int j) const { return obstacles.at(static_cast<size_t>(j)); }
};

// Strictly positive iff the closed discs are pairwise disjoint.
double disjoint_margin(const ObstacleConfig& config);
bool check_disjoint(const ObstacleConfig& config);

// Signed clearance between point p and the convex hull of two discs
// (negative inside). The hull is swept by discs interpolated between the
// two endpoints, so the minimum is over a convex 1-d profile.
double hull_clearance(const Eigen::Vector2d& p, const DiscObstacle& a, const DiscObstacle& b);

// Smallest clearance dist(center_i, hull(O_j, O_k)) - r_i over all triples.
// No-eclipse holds iff this is strictly positive (tangency counts as a
// violation). Requires J >= 2; with J = 2 there is no triple and the
// condition is vacuously true (margin +inf).
double no_eclipse_margin(const ObstacleConfig& config);
bool check_no_eclipse(const ObstacleConfig& config);

// Text format: one obstacle per line, "cx cy r", '#' starts a comment.
ObstacleConfig parse_obstacles(std::istream& in, const std::string& name = "<stream>");
ObstacleConfig load_obstacles(const std::string& path);
void save_obstacles(const ObstacleConfig& config, const std::string& path);

// Deterministic random configurations for tests and demos. Centers are
// drawn in [-boxHalf, boxHalf]^2, radii in [rMin, rMax]; resamples until
// pairwise disjoint.
ObstacleConfig random_config(std::uint64_t seed, int J, double boxHalf, double rMin, double rMax);

// As above but rejects until the no-eclipse margin is at least minMargin.
ObstacleConfig random_no_eclipse_config(std::uint64_t seed, int J, double boxHalf, double rMin,
                                        double rMax, double minMargin = 0.05);

} // namespace oslab::geometry
