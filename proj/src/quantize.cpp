#include "oslab/quantize.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>
#include <vector>

namespace oslab::quant {

namespace {

using Cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Values of the trigonometric interpolant of f (samples on k/N) at the
// doubled grid j/(2N): zero-pad the centered spectrum, splitting the
// Nyquist coefficient for even N.
Eigen::VectorXcd interp_doubled(const Eigen::VectorXcd& f) {
    const int n = static_cast<int>(f.size());
    Eigen::FFT<double> fft;
    std::vector<Cd> in(f.data(), f.data() + n), spec;
    fft.fwd(spec, in);
    std::vector<Cd> spec2(static_cast<size_t>(2 * n), Cd(0.0, 0.0));
    if (n % 2 == 1) {
        for (int q = -(n - 1) / 2; q <= (n - 1) / 2; ++q) {
            spec2[static_cast<size_t>((q + 2 * n) % (2 * n))] =
                spec[static_cast<size_t>((q + n) % n)];
        }
    } else {
        const int half = n / 2;
        for (int q = -half + 1; q <= half - 1; ++q) {
            spec2[static_cast<size_t>((q + 2 * n) % (2 * n))] =
                spec[static_cast<size_t>((q + n) % n)];
        }
        spec2[static_cast<size_t>(half)] = 0.5 * spec[static_cast<size_t>(half)];
        spec2[static_cast<size_t>(2 * n - half)] = 0.5 * spec[static_cast<size_t>(half)];
    }
    std::vector<Cd> out;
    fft.inv(out, spec2);
    Eigen::VectorXcd res(2 * n);
    for (int j = 0; j < 2 * n; ++j) res[j] = 2.0 * out[static_cast<size_t>(j)];
    return res;
}

void check_grid(const SymbolGrid& a) {
    if (a.dim < 1 || a.values.rows() != a.dim || a.values.cols() != a.dim) {
        throw BadDimensionError("symbol grid must be square with matching dim");
    }
}

double taper(double v, double edge, double width) {
    const double a = std::abs(v);
    if (a <= edge - width) return 1.0;
    if (a >= edge) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (a - edge + width) / width));
}

} // namespace

TorusOperator quantize_weyl(const SymbolGrid& a) {
    check_grid(a);
    const int n = a.dim;
    const bool realSymbol = a.isReal(0.0);

    Eigen::MatrixXcd mid(2 * n, n);
    for (int l = 0; l < n; ++l) {
        mid.col(l) = interp_doubled(a.values.col(l));
    }
    if (realSymbol) {
        // the interpolant of real periodic samples is real; drop rounding junk
        mid = mid.real().cast<Cd>();
    }

    // g(s, d) = (1/N) sum_l mid(s, l) exp(+2 pi i l d / N)
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd g(2 * n, n);
    std::vector<Cd> row(static_cast<size_t>(n)), out;
    for (int s = 0; s < 2 * n; ++s) {
        for (int l = 0; l < n; ++l) row[static_cast<size_t>(l)] = mid(s, l);
        fft.inv(out, row);
        for (int d = 0; d < n; ++d) g(s, d) = out[static_cast<size_t>(d)];
    }

    TorusOperator op;
    op.dim = n;
    op.m.resize(n, n);
    for (int m = 0; m < n; ++m) {
        for (int c = 0; c < n; ++c) {
            const int s = (m + c) % (2 * n);
            const int d = ((m - c) % n + n) % n;
            op.m(m, c) = g(s, d);
        }
    }
    return op;
}

std::pair<double, double> baker_classical(double x, double xi) {
    const double xw = x - std::floor(x);
    const double xiw = xi - std::floor(xi);
    const int branch = std::min(2, static_cast<int>(std::floor(3.0 * xiw)));
    return {(xw + branch) / 3.0, 3.0 * xiw - branch};
}

std::optional<std::pair<double, double>> baker_classical_open(double x, double xi) {
    const double xiw = xi - std::floor(xi);
    const int branch = std::min(2, static_cast<int>(std::floor(3.0 * xiw)));
    if (branch == 1) return std::nullopt;
    return baker_classical(x, xi);
}

namespace {

TorusOperator baker_common(int dim, bool open) {
    if (dim < 3 || dim % 3 != 0) {
        throw BadDimensionError("baker dimension N must be divisible by 3, got " +
                                std::to_string(dim));
    }
    const int third = dim / 3;
    const Eigen::MatrixXcd fBig = dft_matrix(dim);
    const Eigen::MatrixXcd fSmallAdj = dft_matrix(third).adjoint();
    Eigen::MatrixXcd blocks = Eigen::MatrixXcd::Zero(dim, dim);
    for (int b = 0; b < 3; ++b) {
        if (open && b == 1) continue;
        blocks.block(b * third, b * third, third, third) = fSmallAdj;
    }
    return make_operator(blocks * fBig);
}

} // namespace

TorusOperator baker_closed(int dim) { return baker_common(dim, false); }
TorusOperator baker_open(int dim) { return baker_common(dim, true); }

std::pair<double, double> dilation_classical(double x, double xi) {
    return {0.5 * x, 2.0 * xi};
}

TorusOperator dilation_model(int dim, double cutoff) {
    if (dim < 8) throw BadDimensionError("dilation model needs dimension >= 8");
    if (!(cutoff > 0.0) || cutoff >= 0.5) {
        throw InvalidConfigError("dilation cutoff must lie in (0, 0.5)");
    }
    const int n = dim;

    // momentum cutoff in the square's coordinates, xi_model = 2 l/N - 1
    Eigen::VectorXd phiD(n), phiA(n);
    for (int l = 0; l < n; ++l) {
        phiD[l] = taper(2.0 * l / n - 1.0, 0.5, cutoff);
        phiA[l] = taper(2.0 * l / n - 1.0, 0.5, cutoff);
    }
    const Eigen::MatrixXcd fBig = dft_matrix(n);
    Eigen::MatrixXcd momCut = fBig.adjoint() * phiD.cast<Cd>().asDiagonal() * fBig;

    // metaplectic half-rescaling: read the doubled-grid interpolant at the
    // points 2 x_model, which sit on half-integer indices (4k - N) mod 2N
    Eigen::MatrixXcd rescale(n, n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e[k] = 1.0;
        const Eigen::VectorXcd dbl = interp_doubled(e);
        for (int m = 0; m < n; ++m) {
            const int j = ((4 * m - n) % (2 * n) + 2 * n) % (2 * n);
            rescale(m, k) = std::numbers::sqrt2 * dbl[j];
        }
    }
    // built column-by-column above, rows indexed by output position

    Eigen::MatrixXcd full = phiA.cast<Cd>().asDiagonal() * (rescale * momCut);
    return make_operator(std::move(full));
}

TorusOperator apply_damping(const TorusOperator& m, std::complex<double> z,
                            const SymbolGrid& t) {
    check_grid(t);
    if (t.dim != m.dim) throw DimensionMismatchError("return-time grid does not match operator");
    if (!t.isReal(1e-14)) throw InvalidConfigError("return-time symbol must be real");
    if (t.values.real().minCoeff() <= 0.0) {
        throw InvalidConfigError("return-time symbol must be positive");
    }
    if (z == 0.0) return m; // Op(exp(0)) is the identity

    const double h = m.h();
    const bool constantT = (t.values.array() == t.values(0, 0)).all();
    if (constantT) {
        // the quantization of a constant symbol is exactly that multiple of
        // the identity, so skip the FFT round-trip
        const Cd factor = std::exp(Cd(0.0, 1.0) * z * t.values(0, 0) / h);
        return make_operator(m.m * factor);
    }
    SymbolGrid damped;
    damped.dim = t.dim;
    damped.values = (Cd(0.0, 1.0) * z / h * t.values.array()).exp().matrix();
    return make_operator(m.m * quantize_weyl(damped).m);
}

double cantor_distance(double xi) {
    double x = xi - std::floor(xi);
    double scale = 1.0;
    for (int depth = 0; depth < 64; ++depth) {
        if (x <= 1.0 / 3.0) {
            x *= 3.0;
            scale /= 3.0;
        } else if (x >= 2.0 / 3.0) {
            x = 3.0 * x - 2.0;
            scale /= 3.0;
        } else {
            return scale * std::min(x - 1.0 / 3.0, 2.0 / 3.0 - x);
        }
    }
    return 0.0; // inside the set to double precision
}

EscapeWeight baker_escape_weight(int dim, double c0, double slope, double inner) {
    if (dim < 1) throw BadDimensionError("weight grid dimension must be positive");
    if (!(c0 > 0.0) || !(slope > 0.0) || inner < 0.0) {
        throw InvalidConfigError("weight parameters must be positive");
    }
    auto formula = [c0, slope, inner](double, double xi) {
        return std::min(c0, slope * std::max(0.0, cantor_distance(xi) - inner));
    };
    EscapeWeight w;
    w.g0.dim = dim;
    w.g0.values.resize(dim, dim);
    for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) {
            w.g0.values(k, l) = formula(static_cast<double>(k) / dim,
                                        static_cast<double>(l) / dim);
        }
    }
    w.c0 = w.g0.values.real().maxCoeff();
    w.closedForm = formula;
    return w;
}

namespace {

double bilinear_periodic(const SymbolGrid& g, double x, double xi) {
    const int n = g.dim;
    const double fx = (x - std::floor(x)) * n;
    const double fy = (xi - std::floor(xi)) * n;
    const int i0 = static_cast<int>(fx) % n;
    const int j0 = static_cast<int>(fy) % n;
    const int i1 = (i0 + 1) % n;
    const int j1 = (j0 + 1) % n;
    const double ax = fx - std::floor(fx);
    const double ay = fy - std::floor(fy);
    return (1 - ax) * (1 - ay) * g.values(i0, j0).real() +
           ax * (1 - ay) * g.values(i1, j0).real() +
           (1 - ax) * ay * g.values(i0, j1).real() + ax * ay * g.values(i1, j1).real();
}

} // namespace

EscapeWeightCheck check_escape_weight(const EscapeWeight& w, double window2, double window3,
                                      int samples) {
    if (samples < 16) throw InvalidConfigError("need at least 16 samples");
    auto eval = [&](double x, double xi) {
        return w.closedForm ? w.closedForm(x, xi) : bilinear_periodic(w.g0, x, xi);
    };
    EscapeWeightCheck report;
    report.window2 = window2;
    report.window3 = window3;
    report.minIncrement = std::numeric_limits<double>::infinity();
    const int nx = 16;
    const int nXi = samples / nx;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nXi; ++j) {
            const double x = (i + 0.5) / nx;
            const double xi = (j + 0.5) / nXi;
            const double d = cantor_distance(xi);
            if (d > window3) continue;
            auto image = baker_classical_open(x, xi);
            if (!image) continue; // middle band escapes immediately
            ++report.samples;
            const double inc = eval(image->first, image->second) - eval(x, xi);
            if (inc < -1e-9) ++report.monotoneViolations;
            if (d > window2) {
                report.minIncrement = std::min(report.minIncrement, inc);
                if (inc < 1.0 - 1e-9) ++report.growthViolations;
            }
        }
    }
    if (!std::isfinite(report.minIncrement)) report.minIncrement = 0.0;
    return report;
}

ConjugationResult conjugate_escape(const TorusOperator& m, const EscapeWeight& w) {
    if (w.g0.dim != m.dim) throw DimensionMismatchError("weight grid does not match operator");
    if (!w.g0.isReal(1e-14)) throw InvalidConfigError("escape weight must be real");
    if (!(w.T > 0.0)) throw InvalidConfigError("weight exponent T must be positive");

    const double h = m.h();
    const double scale = w.T * std::log(1.0 / h);
    const Eigen::MatrixXcd g = quantize_weyl(w.g0).m;
    const Eigen::MatrixXcd herm = 0.5 * (g + g.adjoint());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success) {
        throw ConvergenceFailureError("eigendecomposition of the weight failed");
    }
    const Eigen::VectorXd mu = es.eigenvalues();
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::VectorXd grow = (scale * mu.array()).exp();
    const Eigen::VectorXd shrink = (-scale * mu.array()).exp();
    const Eigen::MatrixXcd d = v * grow.cast<Cd>().asDiagonal() * v.adjoint();
    const Eigen::MatrixXcd dInv = v * shrink.cast<Cd>().asDiagonal() * v.adjoint();

    ConjugationResult res;
    res.conjugated = make_operator(dInv * m.m * d);
    res.normD = std::exp(scale * mu.maxCoeff());
    res.normDinv = std::exp(-scale * mu.minCoeff());
    res.bound = std::pow(h, -w.T * w.c0);
    return res;
}

double egorov_defect(const TorusOperator& u, const SymbolGrid& a,
                     const SymbolGrid& aPulledBack) {
    check_grid(a);
    check_grid(aPulledBack);
    if (a.dim != u.dim || aPulledBack.dim != u.dim) {
        throw DimensionMismatchError("symbol grids must match the operator dimension");
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(u.m);
    if (lu.rcond() < 1e-13) {
        throw SingularError("map is numerically singular, cannot conjugate");
    }
    const Eigen::MatrixXcd lhs = lu.solve(quantize_weyl(a).m * u.m);
    return sigma_max(lhs - quantize_weyl(aPulledBack).m);
}

} // namespace oslab::quant
