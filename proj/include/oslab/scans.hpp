#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "oslab/quantize.hpp"
#include "oslab/torus_op.hpp"

namespace oslab::scans {

using quant::TorusOperator;

using OperatorFamily = std::function<TorusOperator(int)>;

// Families addressable by name from configs: "baker-open", "baker-closed",
// "dilation". The cutoff only affects the dilation model.
OperatorFamily named_family(const std::string& name, double dilationCutoff = 0.15);

// Number of map iterations matched to the Planck parameter, ceil(delta *
// log(1/h)) with h = 1/(2 pi N).
int iterations_for_dimension(double delta, int dim);

struct GapEntry {
    int dim = 0;
    double h = 0.0;
    int iterations = 0;   // N(h)
    double powerNorm = 0.0; // || M^N(h) ||
    double ampSup = 0.0;    // sigma_max(M)
};

struct GapReport {
    double delta = 0.0;
    std::vector<GapEntry> entries;
    // least-squares exponent of log(powerNorm / ampSup^iterations) =
    // gamma * log h (proportional model, the bound has no constant factor).
    // NaN when no entry is usable.
    double fittedGamma = 0.0;
};

GapReport power_norm_scan(const OperatorFamily& family, double delta,
                          const std::vector<int>& dims, int workers = 1);

struct NeumannResult {
    Eigen::MatrixXcd resolvent; // sum_{k<n} M^k (I - M^n)^{-1}
    double residual = 0.0;      // || (I - M) R - I ||
};

// Resolvent of I - M through the finite Neumann sum; throws
// SingularPowerError when I - M^n is numerically singular.
NeumannResult neumann_resolvent(const TorusOperator& m, int n);

struct ResolventEntry {
    int dim = 0;
    double h = 0.0;
    std::complex<double> z;     // effective spectral parameter used
    double norm = 0.0;          // || (I - M_z)^{-1} ||
    double bound = 0.0;         // 2 delta |log h| h^{-delta log A}
    double ampSup = 1.0;        // measured sup amplification of M_z
    bool hypothesisOk = false;  // ampSup < exp(gamma / delta)
};

struct ResolventReport {
    double delta = 0.0, gamma = 0.0, tau0 = 1.0;
    std::vector<ResolventEntry> entries;
    int violations = 0; // bound exceeded where the hypothesis holds and h <= h0
};

// Scan the damped resolvent over spectral parameters. The z values are
// interpreted in units of h |log h| (the natural window of the gap bound)
// unless zInUnitsOfHLogH is false. h0 limits where violations are counted;
// the default counts every dimension.
ResolventReport resolvent_norm_scan(const OperatorFamily& family, double delta, double gamma,
                                    const std::vector<int>& dims,
                                    const std::vector<std::complex<double>>& zs,
                                    double tau0 = 1.0, double h0 = 1.0,
                                    bool zInUnitsOfHLogH = true, int workers = 1);

// Eigenvalues sorted by decreasing modulus (ties by real, then imaginary
// part). Dimensions above the cap are refused with BadDimensionError.
std::vector<std::complex<double>> spectrum(const TorusOperator& m, int cap = 2187);

} // namespace oslab::scans
