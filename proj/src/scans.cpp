#include "oslab/scans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oslab/fit.hpp"
#include "oslab/threadpool.hpp"

namespace oslab::scans {

namespace {

using Cd = std::complex<double>;

// Largest singular value of the inverse of the factored matrix, by power
// iteration with forward/adjoint solves. Deterministic start vector.
double sigma_max_of_inverse(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int n,
                            double relTol = 1e-10, int maxIter = 20000) {
    std::mt19937_64 rng(0x1e50111eULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = Cd(gauss(rng), gauss(rng));
    v /= v.norm();
    double sigma = 0.0;
    int stagnant = 0;
    for (int it = 0; it < maxIter; ++it) {
        Eigen::VectorXcd w = lu.solve(v);
        const double estimate = w.norm();
        if (!std::isfinite(estimate)) {
            throw SingularResolventError("resolvent apply overflowed, matrix is singular");
        }
        v = lu.adjoint().solve(w);
        v /= v.norm();
        if (std::abs(estimate - sigma) <= relTol * std::max(estimate, 1e-300)) {
            if (++stagnant >= 3) return estimate;
        } else {
            stagnant = 0;
        }
        sigma = estimate;
    }
    return sigma;
}

} // namespace

OperatorFamily named_family(const std::string& name, double dilationCutoff) {
    if (name == "baker-open") {
        return [](int dim) { return quant::baker_open(dim); };
    }
    if (name == "baker-closed") {
        return [](int dim) { return quant::baker_closed(dim); };
    }
    if (name == "dilation") {
        return [dilationCutoff](int dim) { return quant::dilation_model(dim, dilationCutoff); };
    }
    throw InvalidConfigError("unknown operator family: " + name);
}

int iterations_for_dimension(double delta, int dim) {
    if (!(delta > 0.0)) throw InvalidConfigError("delta must be positive");
    if (dim < 1) throw BadDimensionError("dimension must be positive");
    const double h = 1.0 / (2.0 * std::numbers::pi * dim);
    return static_cast<int>(std::ceil(delta * std::log(1.0 / h)));
}

GapReport power_norm_scan(const OperatorFamily& family, double delta,
                          const std::vector<int>& dims, int workers) {
    if (dims.empty()) throw InvalidConfigError("power norm scan needs at least one dimension");
    GapReport report;
    report.delta = delta;
    report.entries.resize(dims.size());
    parallel_for(static_cast<long>(dims.size()), workers, [&](long i) {
        const int dim = dims[static_cast<size_t>(i)];
        const TorusOperator m = family(dim);
        GapEntry e;
        e.dim = dim;
        e.h = m.h();
        e.iterations = iterations_for_dimension(delta, dim);
        Eigen::MatrixXcd power = m.m;
        for (int k = 1; k < e.iterations; ++k) power = power * m.m;
        e.powerNorm = quant::sigma_max(power);
        e.ampSup = quant::sigma_max(m.m);
        report.entries[static_cast<size_t>(i)] = e;
    });

    // The power bound powerNorm <= h^gamma * ampSup^N(h) carries no constant
    // factor, so the fitted model log(ratio) = gamma * log h is proportional:
    // gamma is the least-squares slope through the origin.
    std::vector<double> logH, logRatio;
    for (const auto& e : report.entries) {
        if (e.powerNorm <= 0.0 || e.ampSup <= 0.0) continue;
        logH.push_back(std::log(e.h));
        logRatio.push_back(std::log(e.powerNorm) - e.iterations * std::log(e.ampSup));
    }
    if (!logH.empty()) {
        report.fittedGamma = fit_proportional(logH, logRatio);
    } else {
        report.fittedGamma = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

NeumannResult neumann_resolvent(const TorusOperator& m, int n) {
    if (n < 1) throw InvalidConfigError("Neumann sum needs n >= 1 terms");
    const int dim = m.dim;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(dim, dim);
    for (int k = 1; k < n; ++k) {
        power = power * m.m;
        sum += power;
    }
    power = power * m.m; // M^n
    Eigen::MatrixXcd cap = Eigen::MatrixXcd::Identity(dim, dim) - power;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cap);
    if (lu.rcond() < 1e-14) {
        throw SingularPowerError("I - M^n is numerically singular for n = " + std::to_string(n));
    }
    NeumannResult out;
    // R = sum * cap^{-1}, computed through transposed solves
    const Eigen::MatrixXcd rT = lu.transpose().solve(sum.transpose());
    out.resolvent = rT.transpose();
    const Eigen::MatrixXcd residual =
        (Eigen::MatrixXcd::Identity(dim, dim) - m.m) * out.resolvent -
        Eigen::MatrixXcd::Identity(dim, dim);
    out.residual = quant::sigma_max(residual);
    return out;
}

ResolventReport resolvent_norm_scan(const OperatorFamily& family, double delta, double gamma,
                                    const std::vector<int>& dims,
                                    const std::vector<std::complex<double>>& zs, double tau0,
                                    double h0, bool zInUnitsOfHLogH, int workers) {
    if (dims.empty() || zs.empty()) {
        throw InvalidConfigError("resolvent scan needs dimensions and z values");
    }
    if (!(tau0 > 0.0)) throw InvalidConfigError("tau0 must be positive");
    ResolventReport report;
    report.delta = delta;
    report.gamma = gamma;
    report.tau0 = tau0;
    report.entries.resize(dims.size() * zs.size());

    parallel_for(static_cast<long>(dims.size()), workers, [&](long i) {
        const int dim = dims[static_cast<size_t>(i)];
        const TorusOperator m = family(dim);
        const double h = m.h();
        const double logInvH = std::log(1.0 / h);
        const quant::SymbolGrid tGrid =
            quant::sample_symbol(dim, [tau0](double, double) { return Cd(tau0, 0.0); });
        for (size_t zi = 0; zi < zs.size(); ++zi) {
            const Cd zEff = zInUnitsOfHLogH ? zs[zi] * h * logInvH : zs[zi];
            const TorusOperator mz = quant::apply_damping(m, zEff, tGrid);
            // the amplitude hypothesis is about the damped map, so A and the
            // bound are per (dim, z), not per dim
            const double ampSup = quant::sigma_max(mz.m);
            const double a = std::max(1.0, ampSup);
            Eigen::MatrixXcd shifted =
                Eigen::MatrixXcd::Identity(dim, dim) - mz.m;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
            if (lu.rcond() < 1e-14) {
                throw SingularResolventError("I - M_z numerically singular at dim " +
                                             std::to_string(dim));
            }
            ResolventEntry e;
            e.dim = dim;
            e.h = h;
            e.z = zEff;
            e.norm = sigma_max_of_inverse(lu, dim);
            e.bound = 2.0 * delta * logInvH * std::pow(h, -delta * std::log(a));
            e.ampSup = ampSup;
            e.hypothesisOk = ampSup < std::exp(gamma / delta);
            report.entries[static_cast<size_t>(i) * zs.size() + zi] = e;
        }
    });

    for (const auto& e : report.entries) {
        if (e.hypothesisOk && e.h <= h0 && e.norm > e.bound) ++report.violations;
    }
    return report;
}

std::vector<std::complex<double>> spectrum(const TorusOperator& m, int cap) {
    if (m.dim > cap) {
        throw BadDimensionError("spectrum requested for dim " + std::to_string(m.dim) +
                                " above cap " + std::to_string(cap));
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m.m, false);
    if (es.info() != Eigen::Success) {
        throw ConvergenceFailureError("eigenvalue iteration failed to converge");
    }
    std::vector<Cd> vals(es.eigenvalues().data(), es.eigenvalues().data() + m.dim);
    std::sort(vals.begin(), vals.end(), [](const Cd& a, const Cd& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return vals;
}

} // namespace oslab::scans
