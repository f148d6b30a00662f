#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include "oslab/errors.hpp"

namespace oslab::quant {

// Dense operator on the N-dimensional quantum torus space; the effective
// Planck parameter is tied to the dimension by h = 1 / (2 pi N).
struct TorusOperator {
    int dim = 0;
    Eigen::MatrixXcd m;

    double h() const { return 1.0 / (2.0 * std::numbers::pi * dim); }
};

TorusOperator make_operator(Eigen::MatrixXcd m);
TorusOperator identity_operator(int dim);

// Samples of a symbol on the N x N phase-space grid (x_k, xi_l) = (k/N, l/N);
// values(k, l) = a(x_k, xi_l).
struct SymbolGrid {
    int dim = 0;
    Eigen::MatrixXcd values;

    bool isReal(double tol = 0.0) const;
    double maxAbs() const;
};

SymbolGrid sample_symbol(int dim, const std::function<std::complex<double>(double, double)>& f);

// Largest singular value by power iteration on A*A. Deterministic: the
// start vector comes from a fixed-seed generator. relTol is the relative
// stagnation threshold on successive estimates.
double sigma_max(const Eigen::MatrixXcd& a, double relTol = 1e-10, int maxIter = 20000);
double operator_norm(const TorusOperator& op);

// Unitary discrete Fourier transform, F(m, n) = exp(-2 pi i m n / N) / sqrt(N).
Eigen::MatrixXcd dft_matrix(int dim);

// Binary container: 8-byte magic "OSLBOP1\n", uint64 dim, float64 h, then
// dim*dim row-major (re, im) float64 pairs, all little-endian.
void save_operator(const TorusOperator& op, const std::string& path);
TorusOperator load_operator(const std::string& path);

// CSV with columns row,col,re,im; intended for small dimensions.
void save_operator_csv(const TorusOperator& op, const std::string& path);

} // namespace oslab::quant
