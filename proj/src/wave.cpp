#include "oslab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oslab/fit.hpp"

namespace oslab::wave {

namespace {

double poly_eval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

} // namespace

WaveGrid make_grid(const geometry::ObstacleConfig* obstacles, double extent, int nx,
                   double dtFactor, int absorberCells, std::vector<double> absorberPoly) {
    if (nx < 16) throw InvalidConfigError("grid needs at least 16 cells per side");
    if (!(extent > 0.0)) throw InvalidConfigError("grid extent must be positive");
    if (absorberCells < 0 || 2 * absorberCells >= nx) {
        throw InvalidConfigError("absorber width must leave an interior region");
    }
    if (!(dtFactor > 0.0)) throw InvalidConfigError("time step factor must be positive");

    WaveGrid g;
    g.extent = extent;
    g.nx = nx;
    g.dx = extent / nx;
    g.dt = dtFactor * g.dx / std::sqrt(2.0);
    g.absorberCells = absorberCells;
    g.absorberPoly = std::move(absorberPoly);
    g.mask.assign(static_cast<size_t>(nx) * nx, 0);
    g.sigma.assign(static_cast<size_t>(nx) * nx, 0.0);

    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const size_t c = g.idx(i, j);
            if (obstacles != nullptr) {
                const Eigen::Vector2d p(g.x(i), g.x(j));
                for (const auto& o : obstacles->obstacles) {
                    if ((p - o.center).squaredNorm() <= o.radius * o.radius) {
                        g.mask[c] = 1;
                        break;
                    }
                }
            }
            const int edge = std::min(std::min(i, j), std::min(nx - 1 - i, nx - 1 - j));
            if (edge < absorberCells) {
                const double depth = static_cast<double>(absorberCells - edge) / absorberCells;
                g.sigma[c] = poly_eval(g.absorberPoly, depth);
            }
        }
    }
    return g;
}

WaveState gaussian_pulse(const WaveGrid& grid, double cx, double cy, double sigma,
                         double amplitude, bool onVelocity) {
    if (!(sigma > 0.0)) throw InvalidConfigError("pulse width must be positive");
    const int nx = grid.nx;
    Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<long>(nx) * nx);
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const size_t c = grid.idx(i, j);
            if (grid.mask[c]) continue;
            const double rx = grid.x(i) - cx;
            const double ry = grid.x(j) - cy;
            field[static_cast<long>(c)] =
                amplitude * std::exp(-(rx * rx + ry * ry) / (2.0 * sigma * sigma));
        }
    }
    WaveState st;
    if (onVelocity) {
        st.u = Eigen::VectorXd::Zero(static_cast<long>(nx) * nx);
        st.v = field;
    } else {
        st.u = field;
        st.v = Eigen::VectorXd::Zero(static_cast<long>(nx) * nx);
    }
    return st;
}

EnergyTrace fdtd_run(const WaveGrid& grid, const WaveState& initial, double tEnd, double radius,
                     double sampleEvery, double fitStart) {
    const int nx = grid.nx;
    const long cells = static_cast<long>(nx) * nx;
    if (initial.u.size() != cells || initial.v.size() != cells) {
        throw DimensionMismatchError("initial data does not match the grid");
    }
    if (grid.dt > grid.dx / std::sqrt(2.0) * (1.0 + 1e-12)) {
        throw CFLViolationError("time step " + std::to_string(grid.dt) +
                                " violates dt <= dx/sqrt(2)");
    }
    if (!(tEnd > 0.0) || !(radius > 0.0) || !(sampleEvery > 0.0)) {
        throw InvalidConfigError("tEnd, radius and sampleEvery must be positive");
    }
    if (fitStart < 0.0) fitStart = 0.25 * tEnd;

    const double dx = grid.dx, dt = grid.dt;
    const double invDx2 = 1.0 / (dx * dx);

    std::vector<double> uPrev(static_cast<size_t>(cells)), uCur(static_cast<size_t>(cells)),
        uNext(static_cast<size_t>(cells), 0.0);
    std::vector<double> scaleNew(static_cast<size_t>(cells)), scaleOld(static_cast<size_t>(cells));
    for (long c = 0; c < cells; ++c) {
        const double sd = 0.5 * grid.sigma[static_cast<size_t>(c)] * dt;
        scaleNew[static_cast<size_t>(c)] = 1.0 / (1.0 + sd);
        scaleOld[static_cast<size_t>(c)] = 1.0 - sd;
        uCur[static_cast<size_t>(c)] = grid.mask[static_cast<size_t>(c)] ? 0.0 : initial.u[c];
    }

    auto lap = [&](const std::vector<double>& f, int i, int j) {
        const size_t c = grid.idx(i, j);
        const double left = i > 0 ? f[c - 1] : 0.0;
        const double right = i < nx - 1 ? f[c + 1] : 0.0;
        const double down = j > 0 ? f[c - static_cast<size_t>(nx)] : 0.0;
        const double up = j < nx - 1 ? f[c + static_cast<size_t>(nx)] : 0.0;
        return (left + right + down + up - 4.0 * f[c]) * invDx2;
    };

    // Taylor start: u(-dt) = u0 - dt v0 + dt^2/2 lap(u0)
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const size_t c = grid.idx(i, j);
            if (grid.mask[c]) {
                uPrev[c] = 0.0;
                continue;
            }
            uPrev[c] = uCur[c] - dt * initial.v[static_cast<long>(c)] +
                       0.5 * dt * dt * lap(uCur, i, j);
        }
    }

    double initialAmp = 1e-300;
    for (long c = 0; c < cells; ++c) {
        initialAmp = std::max(initialAmp, std::abs(initial.u[c]));
        initialAmp = std::max(initialAmp, std::abs(initial.v[c]));
    }

    // cells inside the sampling ball / the absorber-free interior
    std::vector<size_t> ballCells;
    std::vector<std::pair<int, int>> ballIdx;
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double px = grid.x(i), py = grid.x(j);
            if (px * px + py * py <= radius * radius) {
                ballCells.push_back(grid.idx(i, j));
                ballIdx.emplace_back(i, j);
            }
        }
    }

    EnergyTrace trace;
    trace.radius = radius;
    const double halfInterior = 0.5 * grid.extent - grid.absorberCells * grid.dx;
    trace.causalWindowOk = tEnd <= 2.0 * (halfInterior - radius) && radius < halfInterior;
    trace.fitStart = fitStart;

    const long nSteps = static_cast<long>(std::ceil(tEnd / dt));
    double nextSample = 0.0;
    double runningMax = 0.0;

    auto energy_at = [&](const std::vector<double>& mid, const std::vector<double>& prev,
                         const std::vector<double>& next, double& local, double& total) {
        local = 0.0;
        total = 0.0;
        const double cellArea = dx * dx;
        for (int j = 1; j < nx - 1; ++j) {
            for (int i = 1; i < nx - 1; ++i) {
                const size_t c = grid.idx(i, j);
                if (grid.mask[c] || !grid.interiorCell(i, j)) continue;
                const double ut = (next[c] - prev[c]) / (2.0 * dt);
                const double gx = (mid[c + 1] - mid[c - 1]) / (2.0 * dx);
                const double gy =
                    (mid[c + static_cast<size_t>(nx)] - mid[c - static_cast<size_t>(nx)]) /
                    (2.0 * dx);
                const double e = (ut * ut + gx * gx + gy * gy) * cellArea;
                total += e;
                const double px = grid.x(i), py = grid.x(j);
                if (px * px + py * py <= radius * radius) local += e;
            }
        }
    };

    for (long n = 0; n < nSteps; ++n) {
        const double t = n * dt;
        double stepMax = 0.0;
        for (int j = 0; j < nx; ++j) {
            for (int i = 0; i < nx; ++i) {
                const size_t c = grid.idx(i, j);
                if (grid.mask[c]) {
                    uNext[c] = 0.0;
                    continue;
                }
                const double value =
                    (2.0 * uCur[c] - scaleOld[c] * uPrev[c] + dt * dt * lap(uCur, i, j)) *
                    scaleNew[c];
                uNext[c] = value;
                const double a = std::abs(value);
                if (a > stepMax) stepMax = a;
            }
        }
        runningMax = std::max(runningMax, stepMax);
        if (stepMax > 1e6 * initialAmp) {
            throw UnstableBlowupError("field amplitude " + std::to_string(stepMax) +
                                      " exceeds 1e6 times the initial data");
        }

        if (t + 0.5 * dt >= nextSample) {
            EnergySample s;
            s.t = t;
            energy_at(uCur, uPrev, uNext, s.local, s.total);
            trace.samples.push_back(s);
            nextSample += sampleEvery;
        }

        uPrev.swap(uCur);
        uCur.swap(uNext);
    }

    trace.maxAbs = runningMax;

    std::vector<double> lx, ly;
    for (const auto& s : trace.samples) {
        if (s.t >= fitStart && s.t > 0.0 && s.local > 0.0) {
            lx.push_back(std::log(s.t));
            ly.push_back(std::log(s.local));
        }
    }
    if (lx.size() >= 2) {
        trace.fittedSlope = fit_line(lx, ly).slope;
    } else {
        trace.fittedSlope = std::numeric_limits<double>::quiet_NaN();
    }
    return trace;
}

double absorber_reflection(const WaveGrid& grid) {
    // Compare a run on this grid against a run on a domain twice as large
    // with the same spacing: within the common window the big domain has no
    // absorber echo, so the surplus interior energy is reflection.
    WaveGrid ref = make_grid(nullptr, grid.extent * 2.0, grid.nx * 2,
                             grid.dt / (grid.dx / std::sqrt(2.0)), grid.absorberCells,
                             grid.absorberPoly);
    WaveGrid test = grid;
    test.mask.assign(test.mask.size(), 0); // free space for the calibration

    const double tEnd = 0.9 * grid.extent;
    const double radius = 0.25 * grid.extent;
    WaveState pulseTest = gaussian_pulse(test, 0.0, 0.0, 1.0, 1.0, true);
    WaveState pulseRef = gaussian_pulse(ref, 0.0, 0.0, 1.0, 1.0, true);

    EnergyTrace a = fdtd_run(test, pulseTest, tEnd, radius, grid.extent * 0.05);
    EnergyTrace b = fdtd_run(ref, pulseRef, tEnd, radius, grid.extent * 0.05);

    double peak = 0.0;
    for (const auto& s : a.samples) peak = std::max(peak, s.total);
    if (peak <= 0.0) return 0.0;

    // compare the ball energies at the final common sample
    double excess = 0.0;
    const size_t n = std::min(a.samples.size(), b.samples.size());
    for (size_t i = n / 2; i < n; ++i) {
        excess = std::max(excess, a.samples[i].local - b.samples[i].local);
    }
    return std::max(0.0, excess) / peak;
}

} // namespace oslab::wave
