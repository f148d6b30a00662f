#include "oslab/torus_op.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <vector>

namespace oslab::quant {

namespace {

// the container is specified little-endian and written with raw stores
static_assert(std::endian::native == std::endian::little);

constexpr char kMagic[8] = {'O', 'S', 'L', 'B', 'O', 'P', '1', '\n'};

void check_dim(int dim) {
    if (dim < 1) throw BadDimensionError("operator dimension must be positive");
}

} // namespace

TorusOperator make_operator(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw BadDimensionError("operator matrix must be square and nonempty");
    }
    TorusOperator op;
    op.dim = static_cast<int>(m.rows());
    op.m = std::move(m);
    return op;
}

TorusOperator identity_operator(int dim) {
    check_dim(dim);
    return make_operator(Eigen::MatrixXcd::Identity(dim, dim));
}

bool SymbolGrid::isReal(double tol) const {
    for (int k = 0; k < values.rows(); ++k) {
        for (int l = 0; l < values.cols(); ++l) {
            if (std::abs(values(k, l).imag()) > tol) return false;
        }
    }
    return true;
}

double SymbolGrid::maxAbs() const {
    return values.cwiseAbs().maxCoeff();
}

SymbolGrid sample_symbol(int dim, const std::function<std::complex<double>(double, double)>& f) {
    check_dim(dim);
    SymbolGrid grid;
    grid.dim = dim;
    grid.values.resize(dim, dim);
    for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) {
            grid.values(k, l) = f(static_cast<double>(k) / dim, static_cast<double>(l) / dim);
        }
    }
    return grid;
}

double sigma_max(const Eigen::MatrixXcd& a, double relTol, int maxIter) {
    if (a.rows() < 1 || a.cols() < 1) throw BadDimensionError("empty matrix has no norm");
    std::mt19937_64 rng(0x05eed5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(a.cols());
    for (int i = 0; i < v.size(); ++i) v[i] = std::complex<double>(gauss(rng), gauss(rng));
    double vnorm = v.norm();
    if (vnorm == 0.0) v.setOnes();
    v /= v.norm();

    // Rayleigh quotients of A*A under power iteration increase monotonically,
    // so stagnation of successive estimates is a sound stopping rule.
    double sigma = 0.0;
    int stagnant = 0;
    for (int it = 0; it < maxIter; ++it) {
        Eigen::VectorXcd w = a * v;
        const double estimate = w.norm();
        if (estimate == 0.0) return 0.0;
        v = a.adjoint() * w;
        const double back = v.norm();
        if (back == 0.0) return estimate;
        v /= back;
        if (std::abs(estimate - sigma) <= relTol * std::max(estimate, 1e-300)) {
            if (++stagnant >= 3) return estimate;
        } else {
            stagnant = 0;
        }
        sigma = estimate;
    }
    return sigma;
}

double operator_norm(const TorusOperator& op) {
    return sigma_max(op.m);
}

Eigen::MatrixXcd dft_matrix(int dim) {
    check_dim(dim);
    Eigen::MatrixXcd f(dim, dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            // reduce the phase modulo N before taking cos/sin to keep full
            // precision at large indices
            const long long mn = static_cast<long long>(m) * n % dim;
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(mn) / dim;
            f(m, n) = scale * std::complex<double>(std::cos(angle), std::sin(angle));
        }
    }
    return f;
}

void save_operator(const TorusOperator& op, const std::string& path) {
    check_dim(op.dim);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t dim = static_cast<std::uint64_t>(op.dim);
    const double h = op.h();
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    std::vector<double> row(static_cast<size_t>(op.dim) * 2);
    for (int r = 0; r < op.dim; ++r) {
        for (int c = 0; c < op.dim; ++c) {
            row[static_cast<size_t>(2 * c)] = op.m(r, c).real();
            row[static_cast<size_t>(2 * c + 1)] = op.m(r, c).imag();
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out.good()) throw IoError("failed writing operator file: " + path);
}

TorusOperator load_operator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open operator file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError("not an operator container: " + path);
    }
    std::uint64_t dim = 0;
    double h = 0.0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!in.good() || dim < 1 || dim > (1u << 20)) {
        throw IoError("corrupt operator header in " + path);
    }
    TorusOperator op;
    op.dim = static_cast<int>(dim);
    op.m.resize(op.dim, op.dim);
    std::vector<double> row(static_cast<size_t>(op.dim) * 2);
    for (int r = 0; r < op.dim; ++r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in.good()) throw IoError("truncated operator file: " + path);
        for (int c = 0; c < op.dim; ++c) {
            op.m(r, c) = {row[static_cast<size_t>(2 * c)], row[static_cast<size_t>(2 * c + 1)]};
        }
    }
    return op;
}

void save_operator_csv(const TorusOperator& op, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "row,col,re,im\n";
    char buf[96];
    for (int r = 0; r < op.dim; ++r) {
        for (int c = 0; c < op.dim; ++c) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", r, c, op.m(r, c).real(),
                          op.m(r, c).imag());
            out << buf;
        }
    }
    if (!out.good()) throw IoError("failed writing csv: " + path);
}

} // namespace oslab::quant
