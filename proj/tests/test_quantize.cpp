#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <oslab/errors.hpp>
#include <oslab/quantize.hpp>
#include <oslab/torus_op.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace oslab;
using quant::SymbolGrid;
using quant::TorusOperator;
using Cd = std::complex<double>;

namespace {

// least-squares slope of y against x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<Cd> sorted_eigs(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<Cd> v(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(v.begin(), v.end(), [](Cd a, Cd b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return v;
}

} // namespace

TEST_CASE("constant symbols quantize to multiples of the identity") {
    for (int n : {9, 32, 81}) {
        const auto a = quant::sample_symbol(n, [](double, double) { return Cd(0.7, 0.0); });
        const auto op = quant::quantize_weyl(a);
        CHECK((op.m - 0.7 * Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(op.h() == doctest::Approx(1.0 / (2.0 * M_PI * n)));
    }
}

TEST_CASE("real symbols give Hermitian operators") {
    const int n = 64;
    const auto a = quant::sample_symbol(n, [](double x, double xi) {
        return Cd(std::sin(2 * M_PI * x) * std::sin(2 * M_PI * xi) + 0.3 * std::cos(2 * M_PI * x),
                  0.0);
    });
    const auto op = quant::quantize_weyl(a);
    CHECK((op.m - op.m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("quantization is linear in the symbol") {
    const int n = 27;
    const auto a = quant::sample_symbol(
        n, [](double x, double xi) { return Cd(std::sin(2 * M_PI * x), std::cos(2 * M_PI * xi)); });
    const auto b = quant::sample_symbol(
        n, [](double x, double xi) { return Cd(std::cos(4 * M_PI * (x + xi)), 0.0); });
    SymbolGrid combo;
    combo.dim = n;
    combo.values = Cd(2.0, -1.0) * a.values + 0.5 * b.values;
    const auto lhs = quant::quantize_weyl(combo);
    const Eigen::MatrixXcd rhs =
        Cd(2.0, -1.0) * quant::quantize_weyl(a).m + 0.5 * quant::quantize_weyl(b).m;
    CHECK((lhs.m - rhs).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("position-only symbols are diagonal, momentum-only symbols circulant") {
    const int n = 24;
    const auto ax =
        quant::sample_symbol(n, [](double x, double) { return Cd(std::sin(2 * M_PI * x), 0.0); });
    const auto opx = quant::quantize_weyl(ax);
    Eigen::MatrixXcd offdiag = opx.m;
    offdiag.diagonal().setZero();
    CHECK(offdiag.cwiseAbs().maxCoeff() <= 1e-14);

    const auto axi =
        quant::sample_symbol(n, [](double, double xi) { return Cd(std::cos(2 * M_PI * xi), 0.0); });
    const auto opxi = quant::quantize_weyl(axi);
    for (int r = 1; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            CHECK(std::abs(opxi.m(r, c) - opxi.m(r - 1, (c + n - 1) % n)) <= 1e-13);
        }
    }
}

TEST_CASE("operator norms exceed the sup norm only by a vanishing margin") {
    // || Op(a) || <= max |a| + C h^(1/2); fit the decay of the excess
    std::vector<double> logH, logExcess;
    for (int n : {32, 64, 128, 256, 512}) {
        const auto a = quant::sample_symbol(n, [](double x, double xi) {
            return Cd(std::sin(2 * M_PI * x) * std::sin(2 * M_PI * xi), 0.0);
        });
        const auto op = quant::quantize_weyl(a);
        const double excess = quant::sigma_max(op.m) - a.maxAbs();
        REQUIRE(excess > 0.0);
        logH.push_back(std::log(1.0 / (2.0 * M_PI * n)));
        logExcess.push_back(std::log(excess));
    }
    CHECK(slope(logH, logExcess) >= 0.4);
}

TEST_CASE("closed baker map is unitary with unimodular determinant") {
    for (int n : {27, 81}) {
        const auto b = quant::baker_closed(n);
        CHECK((b.m.adjoint() * b.m - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <=
              1e-12);
        CHECK(std::abs(std::abs(b.m.determinant()) - 1.0) <= 1e-10);
    }
    CHECK_THROWS_AS(quant::baker_closed(28), BadDimensionError);
}

TEST_CASE("open baker map is a unitary cut by a projection") {
    const int n = 81;
    const auto m = quant::baker_open(n);
    CHECK(quant::sigma_max(m.m) <= 1.0 + 1e-12);

    const Eigen::MatrixXcd p = m.m.adjoint() * m.m;
    CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);

    const auto eigs = sorted_eigs(m.m);
    CHECK(std::abs(eigs.front()) < 1.0);
    CHECK(std::abs(eigs.front()) == doctest::Approx(0.907676).epsilon(1e-3));

    CHECK_THROWS_AS(quant::baker_open(100), BadDimensionError);
}

TEST_CASE("classical baker branches map the stated bands") {
    // band 0
    auto [x0, xi0] = quant::baker_classical(0.5, 0.2);
    CHECK(x0 == doctest::Approx(0.5 / 3.0));
    CHECK(xi0 == doctest::Approx(0.6));
    // band 2
    auto [x2, xi2] = quant::baker_classical(0.3, 0.8);
    CHECK(x2 == doctest::Approx((0.3 + 2.0) / 3.0));
    CHECK(xi2 == doctest::Approx(0.4).epsilon(1e-12));
    // the open variant censors the middle band
    CHECK_FALSE(quant::baker_classical_open(0.5, 0.5).has_value());
    CHECK(quant::baker_classical_open(0.5, 0.2).has_value());
    // area preservation of each branch: the Jacobian is (1/3) * 3 = 1
}

TEST_CASE("dilation model: classical fixed point and quantum escape") {
    auto [x, xi] = quant::dilation_classical(0.5, 0.2);
    CHECK(x == doctest::Approx(0.25));
    CHECK(xi == doctest::Approx(0.4));
    // the only trapped point of (x, xi) -> (x/2, 2 xi) is the origin
    auto [fx, fxi] = quant::dilation_classical(0.0, 0.0);
    CHECK(fx == 0.0);
    CHECK(fxi == 0.0);

    const int n = 64;
    const auto m = quant::dilation_model(n);
    std::vector<double> ns, logNorms;
    Eigen::MatrixXcd pw = m.m;
    for (int k = 1; k <= 10; ++k) {
        const double nk = quant::sigma_max(pw);
        REQUIRE(nk > 0.0);
        ns.push_back(static_cast<double>(k));
        logNorms.push_back(std::log(nk));
        pw = pw * m.m;
    }
    // geometric decay of || M^n ||
    CHECK(slope(ns, logNorms) < -0.1);
    CHECK(std::exp(logNorms.back()) < 0.05 * std::exp(logNorms.front()));

    CHECK_THROWS_AS(quant::dilation_model(4), BadDimensionError);
}

TEST_CASE("damping factors act as advertised") {
    const int n = 27;
    const auto m = quant::baker_open(n);
    const auto tau = quant::sample_symbol(n, [](double, double) { return Cd(1.5, 0.0); });

    // z = 0 leaves the operator untouched
    const auto same = quant::apply_damping(m, Cd(0.0, 0.0), tau);
    CHECK((same.m - m.m).cwiseAbs().maxCoeff() == 0.0);

    // real z with constant return time is a pure phase
    const auto phase = quant::apply_damping(m, Cd(0.37, 0.0), tau);
    CHECK(std::abs(quant::sigma_max(phase.m) - quant::sigma_max(m.m)) <= 1e-12);

    // z = -i gamma h scales the norm by exp(gamma tau0)
    const double gamma = 0.8;
    const double h = m.h();
    const auto grown = quant::apply_damping(m, Cd(0.0, -gamma * h), tau);
    CHECK(quant::sigma_max(grown.m) ==
          doctest::Approx(std::exp(gamma * 1.5) * quant::sigma_max(m.m)).epsilon(1e-10));
}

TEST_CASE("escape weight vanishes near the trapped set and grows along escapes") {
    const int n = 81;
    const auto w = quant::baker_escape_weight(n);
    CHECK(w.c0 > 0.0);
    // zero on the Cantor set itself
    CHECK(w.closedForm(0.4, 0.0) == 0.0);
    CHECK(w.closedForm(0.4, 1.0 / 3.0) == 0.0);
    // positive well inside the escaping band
    CHECK(w.closedForm(0.4, 0.5) > 0.0);

    const auto check = quant::check_escape_weight(w);
    CHECK(check.samples > 0);
    CHECK(check.monotoneViolations == 0);
    CHECK(check.growthViolations == 0);
    CHECK(check.minIncrement >= 1.0);
}

TEST_CASE("escape-function conjugation is a similarity") {
    const int n = 81;
    const auto m = quant::baker_open(n);
    const auto w = quant::baker_escape_weight(n);

    // trivial weight: nothing happens
    quant::EscapeWeight zero = w;
    zero.g0.values.setZero();
    zero.c0 = 0.0;
    zero.closedForm = nullptr;
    const auto same = quant::conjugate_escape(m, zero);
    CHECK((same.conjugated.m - m.m).cwiseAbs().maxCoeff() <= 1e-12);

    const auto res = quant::conjugate_escape(m, w);
    CHECK(res.normD >= 1.0);
    CHECK(res.normDinv >= 1.0);
    CHECK(res.normD <= 1.05 * res.bound);

    const auto before = sorted_eigs(m.m);
    const auto after = sorted_eigs(res.conjugated.m);
    double worst = 0.0;
    for (size_t i = 0; i < before.size(); ++i) {
        worst = std::max(worst, std::abs(before[i] - after[i]));
    }
    CHECK(worst <= 1e-8);

    // powers of the conjugated map decay at least as fast eventually
    int n0 = -1;
    Eigen::MatrixXcd pw = m.m, pwg = res.conjugated.m;
    for (int k = 1; k <= 25; ++k) {
        if (quant::sigma_max(pwg) <= quant::sigma_max(pw)) {
            n0 = k;
            break;
        }
        pw = pw * m.m;
        pwg = pwg * res.conjugated.m;
    }
    CHECK(n0 >= 1);
    MESSAGE("conjugated power norms fall below the bare ones at n0 = ", n0);
}

TEST_CASE("egorov defect vanishes for trivial data and decays like h") {
    const int n = 27;
    const auto a = quant::sample_symbol(n, [](double x, double xi) {
        return Cd(std::sin(2 * M_PI * x) + std::cos(2 * M_PI * xi), 0.0);
    });
    TorusOperator id;
    id.dim = n;
    id.m = Eigen::MatrixXcd::Identity(n, n);
    CHECK(quant::egorov_defect(id, a, a) <= 1e-13);

    const auto ones = quant::sample_symbol(n, [](double, double) { return Cd(1.0, 0.0); });
    CHECK(quant::egorov_defect(quant::baker_closed(n), ones, ones) <= 1e-12);

    // smooth bump supported inside one branch of the baker map; the
    // pullback under F stays smooth so the defect is O(h)
    auto bump = [](double x, double xi) {
        const double dx = x - 1.0 / 6.0, dxi = xi - 1.0 / 6.0;
        return Cd(std::exp(-(dx * dx + dxi * dxi) / (2.0 * 0.03 * 0.03)), 0.0);
    };
    std::vector<double> logH, logDefect;
    for (int dim : {27, 81, 243, 729}) {
        const auto sym = quant::sample_symbol(dim, bump);
        const auto pulled = quant::sample_symbol(dim, [&](double x, double xi) {
            auto [fx, fxi] = quant::baker_classical(x, xi);
            return bump(fx, fxi);
        });
        const double defect = quant::egorov_defect(quant::baker_closed(dim), sym, pulled);
        REQUIRE(defect > 0.0);
        logH.push_back(std::log(1.0 / dim));
        logDefect.push_back(std::log(defect));
    }
    CHECK(slope(logH, logDefect) >= 0.8);

    // singular U is refused
    TorusOperator sing;
    sing.dim = 4;
    sing.m = Eigen::MatrixXcd::Zero(4, 4);
    const auto a4 = quant::sample_symbol(4, [](double x, double) { return Cd(x, 0.0); });
    CHECK_THROWS_AS(quant::egorov_defect(sing, a4, a4), SingularError);
}

TEST_CASE("operators survive the binary container round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "oslab_quant_test";
    fs::create_directories(dir);
    const auto path = (dir / "op.oslb").string();

    const auto m = quant::baker_open(27);
    quant::save_operator(m, path);
    const auto back = quant::load_operator(path);
    CHECK(back.dim == m.dim);
    CHECK((back.m - m.m).cwiseAbs().maxCoeff() == 0.0);

    // wrong magic is rejected
    {
        std::ofstream bad(dir / "bad.oslb", std::ios::binary);
        bad << "NOTANOP1" << std::string(64, '\0');
    }
    CHECK_THROWS_AS(quant::load_operator((dir / "bad.oslb").string()), IoError);
    CHECK_THROWS_AS(quant::load_operator((dir / "missing.oslb").string()), IoError);
    fs::remove_all(dir);
}
