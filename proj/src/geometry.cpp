#include "oslab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace oslab::geometry {

namespace {

void require_at_least_two(const ObstacleConfig& config, const char* op) {
    if (config.count() < 2) {
        throw InvalidConfigError(std::string(op) + " needs at least two obstacles, got " +
                                 std::to_string(config.count()));
    }
    for (int j = 0; j < config.count(); ++j) {
        if (!(config.disc(j).radius > 0.0)) {
            throw InvalidConfigError("obstacle " + std::to_string(j) + " has non-positive radius");
        }
    }
}

} // namespace

double disjoint_margin(const ObstacleConfig& config) {
    require_at_least_two(config, "disjointness check");
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.count(); ++i) {
        for (int j = i + 1; j < config.count(); ++j) {
            const auto& a = config.disc(i);
            const auto& b = config.disc(j);
            double gap = (a.center - b.center).norm() - a.radius - b.radius;
            margin = std::min(margin, gap);
        }
    }
    return margin;
}

bool check_disjoint(const ObstacleConfig& config) {
    return disjoint_margin(config) > 0.0;
}

double hull_clearance(const Eigen::Vector2d& p, const DiscObstacle& a, const DiscObstacle& b) {
    // Minimize g(t) = |p - c(t)| - r(t) over t in [0,1], where c(t), r(t)
    // interpolate the two discs. g is convex, so the minimum is at an
    // endpoint or at a stationary point of the quadratic obtained by
    // squaring g'(t) = 0.
    const Eigen::Vector2d u = b.center - a.center;
    const Eigen::Vector2d d = p - a.center;
    const double dr = b.radius - a.radius;
    const double U = u.squaredNorm();
    const double A = d.dot(u);
    const double S = d.squaredNorm();

    auto eval = [&](double t) { return (d - t * u).norm() - (a.radius + t * dr); };

    double best = std::min(eval(0.0), eval(1.0));
    const double denom = U - dr * dr;
    if (U > 0.0 && denom > 0.0) {
        const double disc = (U * S - A * A) / denom;
        const double off = std::abs(dr) * std::sqrt(std::max(disc, 0.0)) / U;
        for (double t : {A / U - off, A / U + off}) {
            if (t <= 0.0 || t >= 1.0) continue;
            // reject the spurious root introduced by squaring
            if ((t * U - A) * dr < 0.0 && dr != 0.0) continue;
            best = std::min(best, eval(t));
        }
    }
    return best;
}

double no_eclipse_margin(const ObstacleConfig& config) {
    if (check_disjoint(config) == false) {
        throw InvalidConfigError("no-eclipse check requires pairwise disjoint obstacles");
    }
    const int J = config.count();
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j) {
        for (int k = j + 1; k < J; ++k) {
            for (int i = 0; i < J; ++i) {
                if (i == j || i == k) continue;
                const auto& oi = config.disc(i);
                double m = hull_clearance(oi.center, config.disc(j), config.disc(k)) - oi.radius;
                margin = std::min(margin, m);
            }
        }
    }
    return margin; // +inf when J == 2: no triple to obstruct
}

bool check_no_eclipse(const ObstacleConfig& config) {
    return no_eclipse_margin(config) > 0.0;
}

ObstacleConfig parse_obstacles(std::istream& in, const std::string& name) {
    ObstacleConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        double cx, cy, r;
        if (!(fields >> cx)) continue; // blank or comment-only line
        if (!(fields >> cy >> r)) {
            throw InvalidConfigError(name + ":" + std::to_string(lineno) +
                                     ": expected 'cx cy r'");
        }
        std::string extra;
        if (fields >> extra) {
            throw InvalidConfigError(name + ":" + std::to_string(lineno) +
                                     ": trailing tokens after 'cx cy r'");
        }
        if (!(r > 0.0) || !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(r)) {
            throw InvalidConfigError(name + ":" + std::to_string(lineno) +
                                     ": radius must be positive and entries finite");
        }
        config.obstacles.push_back({{cx, cy}, r});
    }
    if (config.obstacles.empty()) {
        throw InvalidConfigError(name + ": no obstacles found");
    }
    return config;
}

ObstacleConfig load_obstacles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open obstacle file: " + path);
    return parse_obstacles(in, path);
}

void save_obstacles(const ObstacleConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write obstacle file: " + path);
    out << "# disc obstacles: cx cy r\n";
    char buf[128];
    for (const auto& o : config.obstacles) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", o.center.x(), o.center.y(),
                      o.radius);
        out << buf;
    }
    if (!out.good()) throw IoError("failed writing obstacle file: " + path);
}

ObstacleConfig random_config(std::uint64_t seed, int J, double boxHalf, double rMin, double rMax) {
    if (J < 2) throw InvalidConfigError("random_config needs J >= 2");
    if (!(rMin > 0.0) || rMax < rMin || boxHalf <= 0.0) {
        throw InvalidConfigError("random_config: need 0 < rMin <= rMax and boxHalf > 0");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-boxHalf, boxHalf);
    std::uniform_real_distribution<double> rad(rMin, rMax);
    for (int attempt = 0; attempt < 20000; ++attempt) {
        ObstacleConfig config;
        for (int j = 0; j < J; ++j) {
            double cx = pos(rng), cy = pos(rng), r = rad(rng);
            config.obstacles.push_back({{cx, cy}, r});
        }
        if (check_disjoint(config)) return config;
    }
    throw InvalidConfigError("random_config: could not place disjoint discs with given bounds");
}

ObstacleConfig random_no_eclipse_config(std::uint64_t seed, int J, double boxHalf, double rMin,
                                        double rMax, double minMargin) {
    std::mt19937_64 seeder(seed);
    for (int attempt = 0; attempt < 20000; ++attempt) {
        ObstacleConfig config = random_config(seeder(), J, boxHalf, rMin, rMax);
        if (no_eclipse_margin(config) >= minMargin) return config;
    }
    throw InvalidConfigError("random_no_eclipse_config: rejection sampling failed");
}

} // namespace oslab::geometry
