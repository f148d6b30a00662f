#include "oslab/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "oslab/threadpool.hpp"

namespace oslab::billiard {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_arclength(double s, double per) {
    double r = std::fmod(s, per);
    if (r < 0.0) r += per;
    // fmod can return per exactly after the correction when s is a tiny
    // negative number
    if (r >= per) r = 0.0;
    return r;
}

void check_index(const ObstacleConfig& config, int j) {
    if (j < 0 || j >= config.count()) {
        throw InvalidConfigError("obstacle index " + std::to_string(j) + " out of range");
    }
}

struct CirclePoint {
    Eigen::Vector2d pos, tangent, normal;
};

CirclePoint chart(const ObstacleConfig& config, int j, double s) {
    const auto& o = config.disc(j);
    const double phi = s / o.radius;
    const Eigen::Vector2d nu(std::cos(phi), std::sin(phi));
    const Eigen::Vector2d tau(-std::sin(phi), std::cos(phi));
    return {o.center + o.radius * nu, tau, nu};
}

struct RootPair {
    double tIn = 0.0, tOut = 0.0, disc = 0.0, tClosest = 0.0;
    bool hits = false;
};

RootPair ray_circle(const Ray& ray, const Eigen::Vector2d& center, double radius) {
    const Eigen::Vector2d m = center - ray.origin;
    const double b = m.dot(ray.direction);
    const double disc = b * b - (m.squaredNorm() - radius * radius);
    RootPair out;
    out.disc = disc;
    out.tClosest = b;
    if (disc > 0.0) {
        const double root = std::sqrt(disc);
        out.tIn = b - root;
        out.tOut = b + root;
        out.hits = true;
    }
    return out;
}

BoundaryPhasePoint arrival_coordinates(const ObstacleConfig& config, int target,
                                       const Ray& ray, double t) {
    const auto& o = config.disc(target);
    const Eigen::Vector2d p = ray.origin + t * ray.direction;
    double phi = std::atan2(p.y() - o.center.y(), p.x() - o.center.x());
    if (phi < 0.0) phi += kTwoPi;
    BoundaryPhasePoint q;
    q.obstacle = target;
    q.s = wrap_arclength(o.radius * phi, kTwoPi * o.radius);
    const Eigen::Vector2d tau(-std::sin(phi), std::cos(phi));
    q.eta = std::clamp(ray.direction.dot(tau), -1.0, 1.0);
    return q;
}

} // namespace

double perimeter(const ObstacleConfig& config, int j) {
    check_index(config, j);
    return kTwoPi * config.disc(j).radius;
}

Eigen::Vector2d boundary_point(const ObstacleConfig& config, int j, double s) {
    check_index(config, j);
    return chart(config, j, s).pos;
}

Eigen::Vector2d boundary_tangent(const ObstacleConfig& config, int j, double s) {
    check_index(config, j);
    return chart(config, j, s).tangent;
}

Eigen::Vector2d boundary_normal(const ObstacleConfig& config, int j, double s) {
    check_index(config, j);
    return chart(config, j, s).normal;
}

Ray lift(const ObstacleConfig& config, const BoundaryPhasePoint& p) {
    check_index(config, p.obstacle);
    if (std::abs(p.eta) > 1.0) {
        throw InvalidConfigError("tangential momentum must lie in [-1, 1]");
    }
    const CirclePoint c = chart(config, p.obstacle, p.s);
    const double nu = std::sqrt(std::max(0.0, 1.0 - p.eta * p.eta));
    return {c.pos, p.eta * c.tangent + nu * c.normal};
}

BilliardStep step(const ObstacleConfig& config, const BoundaryPhasePoint& p, Branch branch,
                  double glancingTol) {
    const Ray ray = lift(config, p);
    const double tMin = 1e-12;

    int target = -1;
    RootPair best;
    best.tIn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.count(); ++i) {
        if (i == p.obstacle) continue; // outward ray cannot re-enter a convex obstacle
        const auto& o = config.disc(i);
        RootPair roots = ray_circle(ray, o.center, o.radius);
        if (roots.hits && roots.disc >= glancingTol && roots.tIn > tMin &&
            roots.tIn < best.tIn) {
            best = roots;
            target = i;
        }
    }

    // A near-tangent pass that would occur before the first solid hit makes
    // the trajectory ill-defined.
    for (int i = 0; i < config.count(); ++i) {
        if (i == p.obstacle || i == target) continue;
        const auto& o = config.disc(i);
        RootPair roots = ray_circle(ray, o.center, o.radius);
        if (std::abs(roots.disc) < glancingTol && roots.tClosest > tMin &&
            roots.tClosest < best.tIn + std::sqrt(glancingTol)) {
            throw GlancingError("ray is tangent to obstacle " + std::to_string(i) +
                                " within tolerance");
        }
    }

    BilliardStep result;
    if (target < 0) {
        result.kind = StepKind::Escape;
        result.time = std::numeric_limits<double>::infinity();
        return result;
    }

    result.kind = StepKind::Hit;
    if (branch == Branch::Plus) {
        result.time = best.tIn;
        result.arrival = arrival_coordinates(config, target, ray, best.tIn);
    } else {
        result.time = best.tOut;
        result.arrival = arrival_coordinates(config, target, ray, best.tOut);
        for (int i = 0; i < config.count() && !result.occluded; ++i) {
            if (i == p.obstacle || i == target) continue;
            const auto& o = config.disc(i);
            RootPair roots = ray_circle(ray, o.center, o.radius);
            if (roots.hits && roots.disc >= glancingTol && roots.tIn > best.tOut - tMin) {
                result.occluded = true;
            }
        }
    }
    return result;
}

double flight_time(const ObstacleConfig& config, const BoundaryPhasePoint& p) {
    BilliardStep st = step(config, p, Branch::Plus);
    if (st.kind == StepKind::Escape) {
        throw NoHitError("ray escapes to infinity, flight time undefined");
    }
    return st.time;
}

Eigen::Matrix2d map_jacobian_analytic(const ObstacleConfig& config, const BoundaryPhasePoint& p) {
    BilliardStep st = step(config, p, Branch::Plus);
    if (st.kind == StepKind::Escape) {
        throw NoHitError("map Jacobian undefined: ray escapes");
    }
    const double c0 = std::sqrt(std::max(0.0, 1.0 - p.eta * p.eta));
    const double c1 = std::sqrt(std::max(0.0, 1.0 - st.arrival.eta * st.arrival.eta));
    if (c0 < 1e-12 || c1 < 1e-12) {
        throw NearGlancingError("derivative unbounded at tangential departure or arrival");
    }
    const double ell = st.time;
    const double k0 = 1.0 / config.disc(p.obstacle).radius;
    const double k1 = 1.0 / config.disc(st.arrival.obstacle).radius;
    Eigen::Matrix2d df;
    df(0, 0) = -(c0 + ell * k0) / c1;
    df(0, 1) = -ell / (c0 * c1);
    df(1, 0) = -(k0 * c1 + k1 * c0 + k0 * k1 * ell);
    df(1, 1) = -(c1 + k1 * ell) / c0;
    return df;
}

Eigen::Matrix2d map_jacobian(const ObstacleConfig& config, const BoundaryPhasePoint& p,
                             double baseStep) {
    if (!(baseStep > 0.0)) throw InvalidConfigError("difference step must be positive");
    BilliardStep center = step(config, p, Branch::Plus);
    if (center.kind == StepKind::Escape) {
        throw NearGlancingError("difference stencil sits on an escaping ray");
    }
    const int target = center.arrival.obstacle;
    const double per = perimeter(config, p.obstacle);
    const double perTarget = perimeter(config, target);

    // widen the nominal step so that function roundoff (~1e-16/h) and the
    // fourth-order truncation left after Richardson extrapolation balance
    const double hS = 256.0 * baseStep * std::max(1.0, std::abs(p.s));
    double hEta = 256.0 * baseStep;
    const double etaRoom = 1.0 - std::abs(p.eta) - 1e-9;
    if (etaRoom < 2.0 * baseStep) {
        throw NearGlancingError("eta too close to +-1 for a difference stencil");
    }
    hEta = std::min(hEta, etaRoom / 2.0);

    auto probe = [&](double s, double eta) -> Eigen::Vector2d {
        BoundaryPhasePoint q{p.obstacle, wrap_arclength(s, per), eta};
        BilliardStep st;
        try {
            st = step(config, q, Branch::Plus);
        } catch (const GlancingError&) {
            throw NearGlancingError("difference stencil hits a glancing ray");
        }
        if (st.kind == StepKind::Escape || st.arrival.obstacle != target) {
            throw NearGlancingError("difference stencil straddles an escape boundary");
        }
        return {st.arrival.s, st.arrival.eta};
    };

    auto column = [&](int coord, double h) -> Eigen::Vector2d {
        const Eigen::Vector2d fp =
            coord == 0 ? probe(p.s + h, p.eta) : probe(p.s, p.eta + h);
        const Eigen::Vector2d fm =
            coord == 0 ? probe(p.s - h, p.eta) : probe(p.s, p.eta - h);
        Eigen::Vector2d d;
        d[0] = std::remainder(fp[0] - fm[0], perTarget) / (2.0 * h);
        d[1] = (fp[1] - fm[1]) / (2.0 * h);
        return d;
    };

    Eigen::Matrix2d jac;
    for (int coord = 0; coord < 2; ++coord) {
        const double h = coord == 0 ? hS : hEta;
        const Eigen::Vector2d wide = column(coord, h);
        const Eigen::Vector2d tight = column(coord, 0.5 * h);
        jac.col(coord) = (4.0 * tight - wide) / 3.0;
    }
    return jac;
}

namespace {

struct ChordDerivatives {
    double length = 0.0;
    double dA = 0.0, dB = 0.0;       // d length / d phi at either endpoint
    double dAA = 0.0, dBB = 0.0, dAB = 0.0;
};

ChordDerivatives chord(const ObstacleConfig& config, int ja, double phiA, int jb, double phiB) {
    const auto& oa = config.disc(ja);
    const auto& ob = config.disc(jb);
    const Eigen::Vector2d ta(-std::sin(phiA), std::cos(phiA));
    const Eigen::Vector2d na(std::cos(phiA), std::sin(phiA));
    const Eigen::Vector2d tb(-std::sin(phiB), std::cos(phiB));
    const Eigen::Vector2d nb(std::cos(phiB), std::sin(phiB));
    const Eigen::Vector2d pa = oa.center + oa.radius * na;
    const Eigen::Vector2d pb = ob.center + ob.radius * nb;
    const Eigen::Vector2d diff = pb - pa;
    ChordDerivatives out;
    out.length = diff.norm();
    const Eigen::Vector2d u = diff / out.length;
    const double ra = oa.radius, rb = ob.radius;
    const double tau_a = ta.dot(u), tau_b = tb.dot(u);
    out.dA = -ra * tau_a;
    out.dB = rb * tau_b;
    out.dAA = ra * na.dot(u) + ra * ra * (1.0 - tau_a * tau_a) / out.length;
    out.dBB = -rb * nb.dot(u) + rb * rb * (1.0 - tau_b * tau_b) / out.length;
    out.dAB = -ra * rb * (ta.dot(tb) - tau_a * tau_b) / out.length;
    return out;
}

double orbit_length(const ObstacleConfig& config, const std::vector<int>& word,
                    const Eigen::VectorXd& phi) {
    const int n = static_cast<int>(word.size());
    double len = 0.0;
    for (int k = 0; k < n; ++k) {
        const int kn = (k + 1) % n;
        len += chord(config, word[static_cast<size_t>(k)], phi[k],
                     word[static_cast<size_t>(kn)], phi[kn])
                   .length;
    }
    return len;
}

} // namespace

PeriodicOrbit find_periodic_orbit(const ObstacleConfig& config, const std::vector<int>& word,
                                  int maxNewtonIter) {
    const int n = static_cast<int>(word.size());
    if (n < 2) throw InvalidWordError("word must visit at least two obstacles");
    for (int k = 0; k < n; ++k) {
        check_index(config, word[static_cast<size_t>(k)]);
        if (word[static_cast<size_t>(k)] == word[static_cast<size_t>((k + 1) % n)]) {
            throw InvalidWordError("cyclically adjacent word letters must differ");
        }
    }

    // Start from a coordinate-descent sweep over boundary angles, then
    // minimize total chord length with a damped Newton method. The Hessian
    // is the cyclic tridiagonal matrix of chord second derivatives.
    Eigen::VectorXd phi(n);
    for (int k = 0; k < n; ++k) {
        // aim each starting point at the centroid of the other word discs
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int m = 0; m < n; ++m) {
            if (m != k) acc += config.disc(word[static_cast<size_t>(m)]).center;
        }
        acc /= double(n - 1);
        const Eigen::Vector2d dir = acc - config.disc(word[static_cast<size_t>(k)]).center;
        phi[k] = std::atan2(dir.y(), dir.x());
    }

    const int gridPoints = 128;
    for (int sweep = 0; sweep < 4; ++sweep) {
        for (int k = 0; k < n; ++k) {
            const int kp = (k + n - 1) % n;
            const int kn = (k + 1) % n;
            double bestPhi = phi[k];
            double bestVal = std::numeric_limits<double>::infinity();
            for (int g = 0; g < gridPoints; ++g) {
                const double cand = kTwoPi * g / gridPoints;
                const double val =
                    chord(config, word[static_cast<size_t>(kp)], phi[kp],
                          word[static_cast<size_t>(k)], cand)
                        .length +
                    chord(config, word[static_cast<size_t>(k)], cand,
                          word[static_cast<size_t>(kn)], phi[kn])
                        .length;
                if (val < bestVal) {
                    bestVal = val;
                    bestPhi = cand;
                }
            }
            phi[k] = bestPhi;
        }
    }

    double value = orbit_length(config, word, phi);
    int iterations = 0;
    for (; iterations < maxNewtonIter; ++iterations) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) {
            const int kn = (k + 1) % n;
            ChordDerivatives cd = chord(config, word[static_cast<size_t>(k)], phi[k],
                                        word[static_cast<size_t>(kn)], phi[kn]);
            grad[k] += cd.dA;
            grad[kn] += cd.dB;
            hess(k, k) += cd.dAA;
            hess(kn, kn) += cd.dBB;
            hess(k, kn) += cd.dAB;
            hess(kn, k) += cd.dAB;
        }
        if (grad.lpNorm<Eigen::Infinity>() < 1e-13 * std::max(1.0, value)) break;

        double lambda = 0.0;
        bool accepted = false;
        for (int trial = 0; trial < 24 && !accepted; ++trial) {
            Eigen::MatrixXd damped = hess;
            damped.diagonal().array() += lambda;
            Eigen::VectorXd dphi = damped.ldlt().solve(-grad);
            if (dphi.allFinite()) {
                Eigen::VectorXd cand = phi + dphi;
                const double candValue = orbit_length(config, word, cand);
                if (candValue < value + 1e-15 * std::max(1.0, value)) {
                    phi = cand;
                    value = candValue;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda == 0.0 ? 1e-8 : lambda * 10.0;
        }
        if (!accepted) {
            throw NoConvergenceError("orbit search stalled for word of length " +
                                     std::to_string(n));
        }
    }
    if (iterations >= maxNewtonIter) {
        throw NoConvergenceError("orbit search did not converge in " +
                                 std::to_string(maxNewtonIter) + " iterations");
    }

    PeriodicOrbit orbit;
    orbit.word = word;
    orbit.iterations = iterations;
    orbit.vertices.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const auto& o = config.disc(word[static_cast<size_t>(k)]);
        orbit.vertices[static_cast<size_t>(k)] =
            o.center + o.radius * Eigen::Vector2d(std::cos(phi[k]), std::sin(phi[k]));
    }

    double residual = 0.0;
    orbit.points.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int kp = (k + n - 1) % n;
        const int kn = (k + 1) % n;
        const Eigen::Vector2d in =
            (orbit.vertices[static_cast<size_t>(k)] - orbit.vertices[static_cast<size_t>(kp)])
                .normalized();
        const Eigen::Vector2d out =
            (orbit.vertices[static_cast<size_t>(kn)] - orbit.vertices[static_cast<size_t>(k)])
                .normalized();
        const Eigen::Vector2d normal(std::cos(phi[k]), std::sin(phi[k]));
        const Eigen::Vector2d reflected = in - 2.0 * in.dot(normal) * normal;
        residual = std::max(residual, (out - reflected).norm());

        const auto& o = config.disc(word[static_cast<size_t>(k)]);
        BoundaryPhasePoint pt;
        pt.obstacle = word[static_cast<size_t>(k)];
        pt.s = wrap_arclength(o.radius * phi[k], kTwoPi * o.radius);
        const Eigen::Vector2d tangent(-std::sin(phi[k]), std::cos(phi[k]));
        pt.eta = std::clamp(out.dot(tangent), -1.0, 1.0);
        orbit.points[static_cast<size_t>(k)] = pt;

        orbit.length += chord(config, word[static_cast<size_t>(k)], phi[k],
                              word[static_cast<size_t>(kn)], phi[kn])
                            .length;
    }
    if (residual > 1e-10) {
        throw NoConvergenceError("orbit reflection residual " + std::to_string(residual) +
                                 " exceeds 1e-10");
    }

    orbit.monodromy = Eigen::Matrix2d::Identity();
    for (int k = 0; k < n; ++k) {
        orbit.monodromy =
            map_jacobian_analytic(config, orbit.points[static_cast<size_t>(k)]) * orbit.monodromy;
    }
    return orbit;
}

namespace {

// Quality of a candidate trapped point, compared lexicographically: bounces
// completed in the worse time direction, total bounces, then how narrowly the
// first failing ray misses. The refinement search climbs this score.
struct SurvivalScore {
    int minSteps = 0;
    int totalSteps = 0;
    double miss = std::numeric_limits<double>::infinity();

    bool better_than(const SurvivalScore& o) const {
        if (minSteps != o.minSteps) return minSteps > o.minSteps;
        if (totalSteps != o.totalSteps) return totalSteps > o.totalSteps;
        return miss < o.miss;
    }
    bool full(int cap) const { return minSteps >= cap; }
};

// Smallest gap between the departing ray and any other disc, zero on a graze.
double ray_miss_distance(const ObstacleConfig& config, const BoundaryPhasePoint& p) {
    const Ray ray = lift(config, p);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < config.count(); ++j) {
        if (j == p.obstacle) continue;
        const auto& o = config.disc(j);
        const double proj = std::max(0.0, (o.center - ray.origin).dot(ray.direction));
        const double gap = (ray.origin + proj * ray.direction - o.center).norm() - o.radius;
        best = std::min(best, gap);
    }
    return std::max(best, 0.0);
}

// Bounces completed in one time direction (up to cap) plus the miss distance
// of the bounce that failed, zero if none did.
std::pair<int, double> directional_survival(const ObstacleConfig& config,
                                            const BoundaryPhasePoint& start, int cap,
                                            bool backward) {
    BoundaryPhasePoint p = start;
    if (backward) p.eta = -p.eta;
    for (int k = 0; k < cap; ++k) {
        BilliardStep st;
        try {
            st = step(config, p, Branch::Plus);
        } catch (const GlancingError&) {
            return {k, 0.0};
        }
        if (st.kind == StepKind::Escape) return {k, ray_miss_distance(config, p)};
        p = st.arrival;
    }
    return {cap, 0.0};
}

SurvivalScore survival_score(const ObstacleConfig& config, const BoundaryPhasePoint& p, int cap) {
    const auto [f, fMiss] = directional_survival(config, p, cap, false);
    const auto [b, bMiss] = directional_survival(config, p, cap, true);
    SurvivalScore s;
    s.minSteps = std::min(f, b);
    s.totalSteps = f + b;
    s.miss = fMiss + bMiss;
    return s;
}

// Deterministic pattern search confined to the box: probe the eight
// neighbours (axes and diagonals, so oblique survivor bands are walkable at
// full stride), move to the best improvement, halve the step when nothing
// improves and double it again after a success. Succeeds when a point
// survives cap bounces both ways.
bool refine_witness(const ObstacleConfig& config, const PhaseBox& box, int cap, int budget,
                    BoundaryPhasePoint& point, SurvivalScore& score) {
    static constexpr int kDirS[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDirE[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double ds = box.s1 - box.s0;
    const double de = box.eta1 - box.eta0;
    double h = 0.25;
    int evals = 0;
    while (!score.full(cap) && h > 1e-14 && evals < budget) {
        bool moved = false;
        for (int t = 0; t < 8; ++t) {
            BoundaryPhasePoint cand;
            cand.obstacle = box.obstacle;
            cand.s = std::clamp(point.s + kDirS[t] * h * ds, box.s0, box.s1);
            cand.eta = std::clamp(point.eta + kDirE[t] * h * de, box.eta0, box.eta1);
            const SurvivalScore trial = survival_score(config, cand, cap);
            ++evals;
            if (trial.better_than(score)) {
                point = cand;
                score = trial;
                moved = true;
            }
        }
        h = moved ? std::min(0.25, 2.0 * h) : 0.5 * h;
    }
    return score.full(cap);
}

// Search the box for a point surviving cap bounces forward and backward.
// Candidates are the provided seeds (orbit points of the previous level's
// witnesses that landed here) and the best points of the m x m sample grid;
// the most promising few are refined by pattern search.
bool find_box_witness(const ObstacleConfig& config, const PhaseBox& box, int cap, int m,
                      int budget, const BoundaryPhasePoint* seeds, int nSeeds,
                      BoundaryPhasePoint& witness) {
    constexpr int kPool = 8;   // candidates ranked by initial score
    constexpr int kRefine = 4; // how many of them get a pattern search
    BoundaryPhasePoint pool[kPool];
    SurvivalScore poolScore[kPool];
    int nPool = 0;
    auto consider = [&](const BoundaryPhasePoint& p) {
        const SurvivalScore sc = survival_score(config, p, cap);
        int at = nPool;
        while (at > 0 && sc.better_than(poolScore[at - 1])) --at;
        if (at >= kPool) return;
        for (int t = std::min(nPool, kPool - 1); t > at; --t) {
            pool[t] = pool[t - 1];
            poolScore[t] = poolScore[t - 1];
        }
        pool[at] = p;
        poolScore[at] = sc;
        if (nPool < kPool) ++nPool;
    };

    for (int t = 0; t < nSeeds; ++t) consider(seeds[t]);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            BoundaryPhasePoint p;
            p.obstacle = box.obstacle;
            p.s = box.s0 + (a + 0.5) * (box.s1 - box.s0) / m;
            p.eta = box.eta0 + (b + 0.5) * (box.eta1 - box.eta0) / m;
            consider(p);
        }
    }

    const int tries = std::min(nPool, kRefine);
    for (int t = 0; t < tries; ++t) {
        if (refine_witness(config, box, cap, budget, pool[t], poolScore[t])) {
            witness = pool[t];
            return true;
        }
    }
    return false;
}

bool box_contains(const PhaseBox& box, const BoundaryPhasePoint& p) {
    return p.obstacle == box.obstacle && p.s >= box.s0 && p.s <= box.s1 && p.eta >= box.eta0 &&
           p.eta <= box.eta1;
}

// Quadrisection from the full rectangles keeps every level-L box an exact
// cell of a per-obstacle 2^L x 2^L grid, so boxes index by integer cell keys.
std::uint64_t cell_key(int obstacle, std::uint64_t is, std::uint64_t ie) {
    return (static_cast<std::uint64_t>(obstacle) << 42) | (is << 21) | ie;
}

std::uint64_t point_cell_key(const ObstacleConfig& config, const BoundaryPhasePoint& p,
                             int level) {
    const auto n = static_cast<long long>(std::uint64_t{1} << level);
    const double cs = perimeter(config, p.obstacle) / static_cast<double>(n);
    const double ce = 2.0 / static_cast<double>(n);
    const auto is = std::clamp(static_cast<long long>(std::floor(p.s / cs)), 0ll, n - 1);
    const auto ie = std::clamp(static_cast<long long>(std::floor((p.eta + 1.0) / ce)), 0ll, n - 1);
    return cell_key(p.obstacle, static_cast<std::uint64_t>(is), static_cast<std::uint64_t>(ie));
}

std::uint64_t box_cell_key(const ObstacleConfig& config, const PhaseBox& box, int level) {
    BoundaryPhasePoint center;
    center.obstacle = box.obstacle;
    center.s = 0.5 * (box.s0 + box.s1);
    center.eta = 0.5 * (box.eta0 + box.eta1);
    return point_cell_key(config, center, level);
}

} // namespace

TrappedSetCover trapped_set_cover(const ObstacleConfig& config, int depth, int samplesPerSide,
                                  int workers) {
    if (depth < 0) throw InvalidConfigError("cover depth must be nonnegative");
    if (depth > 20) throw InvalidConfigError("cover depth is limited to 20");
    if (samplesPerSide < 1) throw InvalidConfigError("need at least one sample per box side");
    if (!geometry::check_disjoint(config)) {
        throw InvalidConfigError("trapped-set cover requires disjoint obstacles");
    }

    TrappedSetCover cover;
    std::vector<PhaseBox> current;
    for (int j = 0; j < config.count(); ++j) {
        current.push_back({j, 0.0, perimeter(config, j), -1.0, 1.0});
    }
    double area = 0.0;
    for (const auto& b : current) area += b.area();
    cover.levels.push_back({0, static_cast<long>(current.size()), area});

    const int m = samplesPerSide;

    // Departure points of short periodic orbits are exact trapped points and
    // anchor the refinement at every level. Words are enumerated up to a
    // budget, rotation duplicates skipped; a word whose orbit solve fails is
    // simply not used.
    std::vector<BoundaryPhasePoint> anchors;
    {
        const int J = config.count();
        for (int p = 2; p <= 8; ++p) {
            double combos = J;
            for (int i = 1; i < p; ++i) combos *= J - 1;
            if (combos > 4096) break;
            std::vector<int> word(static_cast<size_t>(p), 0);
            const long total = static_cast<long>(combos + 0.5);
            for (long code = 0; code < total; ++code) {
                long x = code;
                word[0] = static_cast<int>(x % J);
                x /= J;
                bool ok = true;
                for (int i = 1; i < p; ++i) {
                    const int digit = static_cast<int>(x % (J - 1));
                    x /= J - 1;
                    word[static_cast<size_t>(i)] =
                        (word[static_cast<size_t>(i - 1)] + 1 + digit) % J;
                }
                ok = word[static_cast<size_t>(p - 1)] != word[0];
                for (int r = 1; r < p && ok; ++r) {
                    for (int i = 0; i < p; ++i) {
                        const int a = word[static_cast<size_t>((i + r) % p)];
                        const int b = word[static_cast<size_t>(i)];
                        if (a != b) {
                            if (a < b) ok = false; // a smaller rotation exists
                            break;
                        }
                    }
                }
                if (!ok) continue;
                try {
                    const PeriodicOrbit orbit = find_periodic_orbit(config, word);
                    anchors.insert(anchors.end(), orbit.points.begin(), orbit.points.end());
                } catch (const Error&) {
                }
            }
        }
    }

    std::vector<BoundaryPhasePoint> witnesses(current.size());
    std::vector<char> hasWitness(current.size(), 0);
    for (int level = 1; level <= depth; ++level) {
        std::vector<PhaseBox> children;
        children.reserve(current.size() * 4);
        for (const auto& box : current) {
            const double sm = 0.5 * (box.s0 + box.s1);
            const double em = 0.5 * (box.eta0 + box.eta1);
            children.push_back({box.obstacle, box.s0, sm, box.eta0, em});
            children.push_back({box.obstacle, sm, box.s1, box.eta0, em});
            children.push_back({box.obstacle, box.s0, sm, em, box.eta1});
            children.push_back({box.obstacle, sm, box.s1, em, box.eta1});
        }
        std::unordered_map<std::uint64_t, size_t> childAt;
        childAt.reserve(children.size() * 2);
        for (size_t i = 0; i < children.size(); ++i) {
            const PhaseBox& b = children[i];
            childAt.emplace(box_cell_key(config, b, level), i);
        }

        // Orbits of near-trapped points shadow the rest of the trapped set,
        // so the orbit of a box's witness drops candidates into exactly the
        // other boxes that matter, each already exponentially close to a
        // surviving point. Planting is serial so seed order never depends on
        // the worker count.
        constexpr size_t kMaxSeeds = 6;
        std::vector<std::vector<BoundaryPhasePoint>> seeds(children.size());
        auto plant = [&](const BoundaryPhasePoint& q) {
            const auto it = childAt.find(point_cell_key(config, q, level));
            if (it == childAt.end()) return;
            auto& list = seeds[it->second];
            if (list.size() < kMaxSeeds && box_contains(children[it->second], q)) {
                list.push_back(q);
            }
        };
        auto plant_orbit = [&](const BoundaryPhasePoint& witness) {
            for (const bool backward : {false, true}) {
                BoundaryPhasePoint q = witness;
                for (int j = 0; j < level; ++j) {
                    plant(q);
                    if (backward) q.eta = -q.eta;
                    BilliardStep st;
                    try {
                        st = step(config, q, Branch::Plus);
                    } catch (const GlancingError&) {
                        break;
                    }
                    if (st.kind == StepKind::Escape) break;
                    q = st.arrival;
                    if (backward) q.eta = -q.eta;
                }
                plant(q);
            }
        };
        for (const auto& a : anchors) plant(a);
        for (size_t w = 0; w < witnesses.size(); ++w) {
            if (hasWitness[w]) plant_orbit(witnesses[w]);
        }

        // deeper witnesses sit in exponentially thinner survivor bands, so
        // the search allowance grows with the level
        const int budget = 600 + 300 * level;
        std::vector<char> keep(children.size(), 0);
        std::vector<BoundaryPhasePoint> childWitness(children.size());
        // polish accepted witnesses well past the required depth so the
        // seeds handed to descendants stay close to the trapped set for
        // several more generations
        const int polishCap = level + 8;
        parallel_for(static_cast<long>(children.size()), workers, [&](long i) {
            const size_t ci = static_cast<size_t>(i);
            const auto& list = seeds[ci];
            const bool found =
                find_box_witness(config, children[ci], level, m, budget, list.data(),
                                 static_cast<int>(list.size()), childWitness[ci]);
            if (found) {
                SurvivalScore sc = survival_score(config, childWitness[ci], polishCap);
                refine_witness(config, children[ci], polishCap, 600, childWitness[ci], sc);
            }
            keep[ci] = found ? 1 : 0;
        });

        // Repair rounds: witnesses discovered in this level can shadow boxes
        // whose own search failed, so replant from the new witnesses and
        // retry the failures until nothing more is revived.
        std::vector<size_t> fresh;
        for (size_t i = 0; i < children.size(); ++i) {
            if (keep[i]) fresh.push_back(i);
        }
        for (int round = 0; round < 16 && !fresh.empty(); ++round) {
            for (auto& list : seeds) list.clear();
            for (const size_t ci : fresh) plant_orbit(childWitness[ci]);
            std::vector<size_t> todo;
            for (size_t i = 0; i < children.size(); ++i) {
                if (!keep[i] && !seeds[i].empty()) todo.push_back(i);
            }
            if (todo.empty()) break;
            std::vector<char> revived(todo.size(), 0);
            parallel_for(static_cast<long>(todo.size()), workers, [&](long t) {
                const size_t ci = todo[static_cast<size_t>(t)];
                const auto& list = seeds[ci];
                const bool found =
                    find_box_witness(config, children[ci], level, 0, budget, list.data(),
                                     static_cast<int>(list.size()), childWitness[ci]);
                if (found) {
                    SurvivalScore sc = survival_score(config, childWitness[ci], polishCap);
                    refine_witness(config, children[ci], polishCap, 600, childWitness[ci], sc);
                }
                revived[static_cast<size_t>(t)] = found ? 1 : 0;
            });
            fresh.clear();
            for (size_t t = 0; t < todo.size(); ++t) {
                if (revived[t]) {
                    keep[todo[t]] = 1;
                    fresh.push_back(todo[t]);
                }
            }
        }
        std::vector<PhaseBox> kept;
        std::vector<BoundaryPhasePoint> keptWitness;
        kept.reserve(children.size());
        keptWitness.reserve(children.size());
        for (size_t i = 0; i < children.size(); ++i) {
            if (keep[i]) {
                kept.push_back(children[i]);
                keptWitness.push_back(childWitness[i]);
            }
        }
        current.swap(kept);
        witnesses.swap(keptWitness);
        hasWitness.assign(current.size(), 1);
        area = 0.0;
        for (const auto& b : current) area += b.area();
        cover.levels.push_back({level, static_cast<long>(current.size()), area});
    }

    cover.depth = depth;
    cover.boxes = std::move(current);
    cover.totalArea = area;

    // slope of log2(boxCount) against depth over the deeper half of levels
    const int first = std::max(1, depth / 2);
    int pts = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& lv : cover.levels) {
        if (lv.depth < first || lv.boxCount <= 0) continue;
        const double x = lv.depth;
        const double y = std::log2(static_cast<double>(lv.boxCount));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts >= 2 && pts * sxx - sx * sx > 0) {
        cover.dimensionEstimate = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    }
    return cover;
}

double lyapunov_exponent(const ObstacleConfig& config, const std::vector<int>& word) {
    PeriodicOrbit orbit = find_periodic_orbit(config, word);
    const double tr = orbit.monodromy.trace();
    const double det = orbit.monodromy.determinant();
    const double disc = tr * tr - 4.0 * det;
    double rho;
    if (disc <= 0.0) {
        rho = std::sqrt(std::abs(det)); // elliptic/parabolic: modulus of the pair
    } else {
        rho = 0.5 * (std::abs(tr) + std::sqrt(disc));
    }
    return std::log(rho) / static_cast<double>(word.size());
}

double lyapunov_estimate(const ObstacleConfig& config, const TrappedSetCover& cover, int steps,
                         int maxSamples) {
    if (cover.boxes.empty()) throw NoConvergenceError("cover has no boxes to sample");
    if (steps < 1) throw InvalidConfigError("need at least one step");
    const size_t stride = std::max<size_t>(1, cover.boxes.size() / static_cast<size_t>(maxSamples));
    double logSum = 0.0;
    long bounces = 0;
    for (size_t i = 0; i < cover.boxes.size(); i += stride) {
        const auto& box = cover.boxes[i];
        BoundaryPhasePoint p{box.obstacle, 0.5 * (box.s0 + box.s1), 0.5 * (box.eta0 + box.eta1)};
        Eigen::Matrix2d acc_df = Eigen::Matrix2d::Identity();
        int done = 0;
        try {
            for (; done < steps; ++done) {
                BilliardStep st = step(config, p, Branch::Plus);
                if (st.kind == StepKind::Escape) break;
                acc_df = map_jacobian_analytic(config, p) * acc_df;
                p = st.arrival;
            }
        } catch (const Error&) {
            done = 0; // glancing or tangential sample, skip it
        }
        if (done > 0) {
            logSum += std::log(acc_df.jacobiSvd().singularValues()(0));
            bounces += done;
        }
    }
    if (bounces == 0) throw NoConvergenceError("no cover sample completed a single bounce");
    return logSum / static_cast<double>(bounces);
}

} // namespace oslab::billiard
