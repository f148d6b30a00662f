#pragma once

#include <complex>
#include <optional>
#include <utility>

#include "oslab/torus_op.hpp"

namespace oslab::quant {

// Weyl quantization on the torus from grid samples of the symbol. The
// symbol is extended to midpoints by trigonometric interpolation in x, and
// the matrix entries are assembled with FFTs in the momentum index:
//   entry(m, n) = (1/N) sum_l a~((m+n)/2N, l/N) exp(2 pi i l (m-n) / N).
// Real symbols give Hermitian matrices; x-only symbols give diagonal
// matrices; xi-only symbols give circulants diagonalized by the DFT.
TorusOperator quantize_weyl(const SymbolGrid& a);

// Three-branch torus shift map: on the band xi in (a/3, (a+1)/3) it acts as
// (x, xi) -> ((x + a)/3, 3 xi - a). The open variant removes the middle
// branch a = 1. Input outside the allowed bands has no image.
std::pair<double, double> baker_classical(double x, double xi);
std::optional<std::pair<double, double>> baker_classical_open(double x, double xi);

// Quantizations on dimension N divisible by 3 (throws BadDimensionError
// otherwise). The closed map is unitary; the open one censors the middle
// momentum band, making M*M an orthogonal projection.
TorusOperator baker_closed(int dim);
TorusOperator baker_open(int dim);

// Linear dilation (x, xi) -> (x/2, 2 xi) through the hyperbolic fixed point
// of the square ]-1,1[^2; coordinates here are the square's own, related to
// torus coordinates by x = 2 x_torus - 1.
std::pair<double, double> dilation_classical(double x, double xi);

// Open quantization of the dilation: smooth position cutoff, metaplectic
// rescaling by Fourier interpolation, smooth momentum cutoff. cutoff is the
// width of the cosine taper at the edges of the departure/arrival windows.
TorusOperator dilation_model(int dim, double cutoff = 0.15);

// M -> M * Op(exp(i z t / h)) for a real positive return-time symbol t.
// The factor has modulus exp(-Im z * t / h): Im z > 0 damps, Im z < 0
// amplifies; constant t and real z multiply M by a unimodular scalar.
TorusOperator apply_damping(const TorusOperator& m, std::complex<double> z,
                            const SymbolGrid& t);

// Distance from xi (periodized) to the middle-thirds Cantor set.
double cantor_distance(double xi);

struct EscapeWeight {
    SymbolGrid g0;      // bounded weight, zero near the trapped set
    double T = 0.5;     // log(1/h) prefactor used when conjugating
    double c0 = 0.0;    // sup of g0, the exponent cap
    // optional exact evaluator; validity checks fall back to bilinear
    // interpolation of the grid when absent
    std::function<double(double, double)> closedForm;
};

// Weight adapted to the open baker map: g0(x, xi) = min(c0, slope * max(0,
// cantor_distance(xi) - inner)). Grows along escaping orbits.
EscapeWeight baker_escape_weight(int dim, double c0 = 2.5, double slope = 27.0,
                                 double inner = 0.005);

struct EscapeWeightCheck {
    int samples = 0;
    int monotoneViolations = 0; // g0(F(rho)) - g0(rho) < 0 inside the window
    int growthViolations = 0;   // increment < 1 between the two shells
    double minIncrement = 0.0;
    double window2 = 0.0, window3 = 0.0;
};

// Sampled validity check of the weight along the open baker dynamics: the
// increment g0(F(rho)) - g0(rho) must be nonnegative on the outer window
// {d <= window3} and at least 1 on the shell {window2 < d <= window3}.
// Violations are reported, not fatal.
EscapeWeightCheck check_escape_weight(const EscapeWeight& w, double window2 = 1.0 / 54.0,
                                      double window3 = 1.0 / 18.0, int samples = 4096);

struct ConjugationResult {
    TorusOperator conjugated; // exp(-Op(g)) M exp(Op(g))
    double normD = 0.0;       // || exp(Op(g)) ||
    double normDinv = 0.0;    // || exp(-Op(g)) ||
    double bound = 0.0;       // h^{-T c0}, the nominal growth cap
};

// Conjugate by the exponential of the quantized weight g = T log(1/h) g0.
// Op(g) is symmetrized before exponentiating, so D is positive definite
// Hermitian and the conjugation preserves the spectrum.
ConjugationResult conjugate_escape(const TorusOperator& m, const EscapeWeight& w);

// || U^{-1} Op(a) U - Op(aPulledBack) ||. The caller supplies the grid of
// the transported symbol; for a quantized map U of classical map F the
// natural choice is aPulledBack = a o F, and the defect should vanish like
// 1/N as the dimension grows.
double egorov_defect(const TorusOperator& u, const SymbolGrid& a, const SymbolGrid& aPulledBack);

} // namespace oslab::quant
