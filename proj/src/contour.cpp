#include "oslab/contour.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oslab::contour {

namespace {

using Cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
constexpr double kPi = std::numbers::pi;

struct PathPiece {
    std::function<Cd(double)> pos;
    std::function<Cd(double)> vel; // d pos / d s
    double s0 = 0.0, s1 = 1.0;
    double length = 0.0;
};

struct QuadState {
    long evals = 0;
    long cap = 0;
};

Vec simpson_recurse(const std::function<Vec(double)>& g, double a, double b, const Vec& fa,
                    const Vec& fm, const Vec& fb, double tol, int depth, QuadState& state) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    if ((state.evals += 2) > state.cap) {
        throw ConvergenceFailureError("contour quadrature exceeded its evaluation budget");
    }
    const Vec flm = g(lm);
    const Vec frm = g(rm);
    const Vec s1 = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const Vec s2 = (b - a) / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb);
    const double err = (s2 - s1).norm() / 15.0;
    // the estimator cannot resolve differences at rounding scale of the
    // panel contribution, so refining past that point only burns budget
    const double floor = 1e-15 * (s1.norm() + s2.norm());
    if (err <= tol || err <= floor || depth >= 44) {
        return s2 + (s2 - s1) / 15.0;
    }
    return simpson_recurse(g, a, m, fa, flm, fm, 0.5 * tol, depth + 1, state) +
           simpson_recurse(g, m, b, fm, frm, fb, 0.5 * tol, depth + 1, state);
}

// Integrate f(lambda) d lambda along the piece, f vector valued, splitting
// into initial panels short enough to resolve the e^{-i t lambda}
// oscillation before the adaptive refinement takes over.
Vec integrate_piece(const std::function<Vec(Cd)>& f, const PathPiece& piece, double t,
                    double tol, QuadState& state) {
    auto g = [&](double s) -> Vec { return f(piece.pos(s)) * piece.vel(s); };
    const double paramLen = piece.s1 - piece.s0;
    const double speed = piece.length / std::max(paramLen, 1e-300);
    const double maxPanelArc = std::min(1.0, kPi / (2.0 * (t + 1.0)));
    const int panels = std::max(1, static_cast<int>(std::ceil(piece.length / maxPanelArc)));
    const double step = paramLen / panels;

    Vec total;
    Vec fRight;
    for (int p = 0; p < panels; ++p) {
        const double a = piece.s0 + p * step;
        const double b = a + step;
        const double m = 0.5 * (a + b);
        if ((state.evals += p == 0 ? 3 : 2) > state.cap) {
            throw ConvergenceFailureError("contour quadrature exceeded its evaluation budget");
        }
        const Vec fa = p == 0 ? g(a) : fRight;
        const Vec fm = g(m);
        const Vec fb = g(b);
        const double panelTol = tol * (step * speed) / std::max(piece.length, 1e-300);
        const Vec part = simpson_recurse(g, a, b, fa, fm, fb, panelTol, 0, state);
        total = p == 0 ? part : Vec(total + part);
        fRight = fb;
    }
    return total;
}

void require_dissipative(const Eigen::MatrixXcd& a) {
    const double defect = dissipativity_defect(a);
    const double scale = std::max(1.0, a.norm());
    if (defect > 1e-12 * scale) {
        throw NotDissipativeError("generator has positive symmetric part, defect = " +
                                  std::to_string(defect));
    }
}

double operator_two_norm(const Eigen::MatrixXcd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
}

// Truncation radius making the neglected tails smaller than tailTol, using
// |1 + i lambda|^{-k} <= |s|^{-k} and the resolvent bound min(2, 2/|s|)
// valid for |s| >= 2 ||A|| + 2 on the shifted line; phaseBound caps
// |exp(-i t lambda)| on that line.
double truncation_radius(double normA, int k, double phaseBound, double tailTol, double cap) {
    const double base = 2.0 * normA + 2.0;
    const double lam = std::pow(2.0 * phaseBound / (kPi * k * tailTol), 1.0 / k);
    const double radius = std::max(base, lam);
    if (radius > cap) {
        throw TailTooLargeError("needed truncation radius " + std::to_string(radius) +
                                " exceeds cap " + std::to_string(cap));
    }
    return radius;
}

std::function<Vec(Cd)> resolvent_integrand(const Eigen::MatrixXcd& a, int k, double t,
                                           const Vec& u) {
    return [&a, k, t, u](Cd lambda) -> Vec {
        const Cd iLambda = Cd(0.0, 1.0) * lambda;
        Eigen::MatrixXcd shifted = a;
        shifted.diagonal().array() += iLambda;
        const Vec solved = shifted.partialPivLu().solve(u);
        const Cd phase = std::exp(Cd(0.0, -1.0) * t * lambda);
        const Cd weight = std::pow(Cd(1.0, 0.0) + iLambda, -k);
        return phase * weight * solved;
    };
}

PathPiece segment(Cd from, Cd to) {
    PathPiece p;
    p.pos = [from, to](double s) { return from + s * (to - from); };
    p.vel = [from, to](double) { return to - from; };
    p.length = std::abs(to - from);
    return p;
}

void validate_inputs(const Eigen::MatrixXcd& a, int k, double t, const Vec& u) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw BadDimensionError("generator must be square");
    }
    if (u.size() != a.rows()) throw DimensionMismatchError("vector does not match generator");
    if (k < 2) throw InvalidConfigError("need k >= 2 for an absolutely convergent contour");
    if (t < 0.0) throw InvalidConfigError("contour representation requires t >= 0");
    require_dissipative(a);
}

} // namespace

double dissipativity_defect(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw BadDimensionError("generator must be square");
    }
    const Eigen::MatrixXcd sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
    if (es.info() != Eigen::Success) {
        throw ConvergenceFailureError("symmetric part eigensolve failed");
    }
    return es.eigenvalues().maxCoeff();
}

Eigen::VectorXcd semigroup_contour(const Eigen::MatrixXcd& a, int k, double t,
                                   const Eigen::VectorXcd& u, const ContourOptions& opts) {
    validate_inputs(a, k, t, u);
    const double lam = truncation_radius(operator_two_norm(a), k, std::exp(0.5 * t),
                                         opts.tolerance / 10.0, opts.lambdaCap);
    auto f = resolvent_integrand(a, k, t, u);
    QuadState state{0, opts.maxEvaluations};
    PathPiece line = segment(Cd(-lam, 0.5), Cd(lam, 0.5));
    const Vec integral = integrate_piece(f, line, t, opts.tolerance / 3.0, state);
    return integral * Cd(-1.0 / (2.0 * kPi), 0.0);
}

DeformedCheck deformed_contour_check(const Eigen::MatrixXcd& a, int k, double t,
                                     const Eigen::VectorXcd& u, double depth, double arcRadius,
                                     const ContourOptions& opts) {
    validate_inputs(a, k, t, u);
    if (!(depth > 0.0) || depth >= 0.5) {
        throw InvalidConfigError("contour depth must lie in (0, 0.5)");
    }
    double eps = arcRadius;
    if (eps == 0.0) eps = std::min(0.45, std::max(1.5 * depth, depth + 0.01));
    if (!(eps > depth) || eps >= 0.5) {
        throw InvalidConfigError("arc radius must satisfy depth < eps < 0.5");
    }

    // with the straight-line reference the circuit closes at Im = 1/2 and
    // the tails must absorb its exp(t/2) amplification; standalone, the
    // pushed-down line carries exp(-t depth) and truncates far earlier
    const double phaseBound = opts.compareStraight ? std::exp(0.5 * t) : std::exp(-depth * t);
    const double lam = truncation_radius(operator_two_norm(a), k, phaseBound,
                                         opts.tolerance / 10.0, opts.lambdaCap);
    const double xArc = std::sqrt(eps * eps - depth * depth);

    std::vector<PathPiece> pieces;
    if (opts.compareStraight) pieces.push_back(segment(Cd(-lam, 0.5), Cd(-lam, -depth)));
    pieces.push_back(segment(Cd(-lam, -depth), Cd(-xArc, -depth)));
    {
        // circular detour over the origin, traversed left to right
        const double thetaL = std::atan2(-depth, -xArc) + 2.0 * kPi; // in (pi, 3 pi/2)
        const double thetaR = std::atan2(-depth, xArc);              // in (-pi/2, 0)
        PathPiece arc;
        arc.pos = [eps, thetaL, thetaR](double s) {
            const double th = thetaL + s * (thetaR - thetaL);
            return eps * Cd(std::cos(th), std::sin(th));
        };
        arc.vel = [eps, thetaL, thetaR](double s) {
            const double th = thetaL + s * (thetaR - thetaL);
            return Cd(0.0, 1.0) * eps * Cd(std::cos(th), std::sin(th)) * (thetaR - thetaL);
        };
        arc.length = eps * std::abs(thetaR - thetaL);
        pieces.push_back(arc);
    }
    pieces.push_back(segment(Cd(xArc, -depth), Cd(lam, -depth)));
    if (opts.compareStraight) pieces.push_back(segment(Cd(lam, -depth), Cd(lam, 0.5)));

    // resolvent poles sit at i * spec(A); refuse paths passing through one,
    // and paths that dip below one: a pole between the horizontal line and
    // the deformed path breaks contour independence by its residue
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, false);
    if (es.info() != Eigen::Success) {
        throw ConvergenceFailureError("eigensolve for pole locations failed");
    }
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        const Cd pole = Cd(0.0, 1.0) * es.eigenvalues()[j];
        const double tol = 1e-8 * (1.0 + std::abs(pole));
        if (pole.imag() > -depth + tol && std::abs(pole.real()) < lam &&
            std::abs(pole) > eps + tol) {
            throw PoleOnPathError("resolvent pole at (" + std::to_string(pole.real()) + ", " +
                                  std::to_string(pole.imag()) +
                                  ") lies above the deformed path");
        }
        for (const auto& piece : pieces) {
            const int probes = std::max(8, static_cast<int>(piece.length * 64));
            for (int q = 0; q <= probes; ++q) {
                const double s = piece.s0 + (piece.s1 - piece.s0) * q / probes;
                if (std::abs(piece.pos(s) - pole) < tol) {
                    throw PoleOnPathError("resolvent pole at (" + std::to_string(pole.real()) +
                                          ", " + std::to_string(pole.imag()) +
                                          ") lies on the deformed path");
                }
            }
        }
    }

    auto f = resolvent_integrand(a, k, t, u);
    DeformedCheck out;
    if (opts.compareStraight) {
        QuadState state{0, opts.maxEvaluations};
        PathPiece line = segment(Cd(-lam, 0.5), Cd(lam, 0.5));
        out.straight = integrate_piece(f, line, t, opts.tolerance / 3.0, state) *
                       Cd(-1.0 / (2.0 * kPi), 0.0);
    }
    {
        QuadState state{0, opts.maxEvaluations};
        Vec acc;
        bool first = true;
        for (const auto& piece : pieces) {
            const Vec part =
                integrate_piece(f, piece, t, opts.tolerance / (3.0 * pieces.size()), state);
            acc = first ? part : Vec(acc + part);
            first = false;
        }
        out.deformed = acc * Cd(-1.0 / (2.0 * kPi), 0.0);
    }
    out.difference = opts.compareStraight ? (out.straight - out.deformed).norm()
                                          : std::numeric_limits<double>::quiet_NaN();
    return out;
}

Eigen::MatrixXcd generator_block_resolvent(std::complex<double> lambda,
                                           const Eigen::MatrixXcd& resolvent,
                                           const Eigen::VectorXd& chi) {
    const int n = static_cast<int>(resolvent.rows());
    if (resolvent.cols() != n || n < 1) throw BadDimensionError("resolvent must be square");
    if (chi.size() != n) throw DimensionMismatchError("cutoff length must match resolvent");

    const Eigen::MatrixXcd chiD = chi.cast<Cd>().asDiagonal();
    const Eigen::MatrixXcd cutRes = chiD * resolvent * chiD;
    const Cd il = Cd(0.0, 1.0) * lambda;
    const Cd lam2 = lambda * lambda;

    Eigen::MatrixXcd block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = il * cutRes;
    block.topRightCorner(n, n) = -cutRes;
    block.bottomLeftCorner(n, n) =
        Eigen::MatrixXcd((chi.array() * chi.array()).matrix().cast<Cd>().asDiagonal()) +
        lam2 * cutRes;
    block.bottomRightCorner(n, n) = il * cutRes;
    return block;
}

} // namespace oslab::contour
