#include "oslab/runner.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oslab/billiard.hpp"
#include "oslab/contour.hpp"
#include "oslab/csv.hpp"
#include "oslab/geometry.hpp"
#include "oslab/quantize.hpp"
#include "oslab/scans.hpp"
#include "oslab/svg.hpp"
#include "oslab/threadpool.hpp"
#include "oslab/wave.hpp"

namespace oslab::run {

namespace fs = std::filesystem;
using io::format_double;

namespace {

constexpr const char* kToolVersion = "oslab 0.1.0";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::set<std::string> kKinds = {
    "geometry-check", "orbit",    "trapped-set",    "quantize", "gap-scan",
    "resolvent-scan", "spectrum", "wave",           "contour-test"};

std::string note(const char* fmt, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void track(RunManifest& man, const fs::path& dir, const std::string& name) {
    man.outputs.push_back({name, digest_file((dir / name).string())});
}

geometry::ObstacleConfig obstacles_from_config(const Config& cfg) {
    if (cfg.has("obstacles", "file"))
        return geometry::load_obstacles(cfg.get_string("obstacles", "file"));
    if (cfg.has("obstacles", "discs")) {
        geometry::ObstacleConfig out;
        std::stringstream ss(cfg.get_string("obstacles", "discs"));
        std::string triple;
        while (std::getline(ss, triple, ';')) {
            std::stringstream ts(triple);
            double cx, cy, r;
            char c1, c2;
            if (!(ts >> cx >> c1 >> cy >> c2 >> r) || c1 != ',' || c2 != ',')
                throw ConfigError(cfg.source_name() + ": [obstacles] discs: bad triple '" +
                                  triple + "' (want cx,cy,r)");
            out.obstacles.push_back({{cx, cy}, r});
        }
        if (out.obstacles.empty())
            throw ConfigError(cfg.source_name() + ": [obstacles] discs is empty");
        return out;
    }
    throw ConfigError(cfg.source_name() +
                      ": missing [obstacles] section with a 'file' or 'discs' key");
}

svg::Series circle_series(const Eigen::Vector2d& c, double r, const std::string& color) {
    svg::Series s;
    s.color = color;
    s.line = true;
    for (int i = 0; i <= 64; ++i) {
        const double th = kTwoPi * i / 64.0;
        s.points.push_back({c.x() + r * std::cos(th), c.y() + r * std::sin(th)});
    }
    return s;
}

void plot_obstacles(svg::Plot& plot, const geometry::ObstacleConfig& obs) {
    for (int j = 0; j < obs.count(); ++j)
        plot.series.push_back(circle_series(obs.disc(j).center, obs.disc(j).radius, "#444444"));
}

std::vector<std::vector<int>> words_from_config(const Config& cfg) {
    std::string raw;
    if (cfg.has("orbit", "words"))
        raw = cfg.get_string("orbit", "words");
    else if (cfg.has("orbit", "word"))
        raw = cfg.get_string("orbit", "word");
    else
        throw ConfigError(cfg.source_name() + ": missing [orbit] words");
    std::vector<std::vector<int>> out;
    std::stringstream ss(raw);
    std::string one;
    while (std::getline(ss, one, ';')) {
        std::vector<int> word;
        std::stringstream ws(one);
        std::string tok;
        while (std::getline(ws, tok, ',')) {
            if (tok.find_first_not_of(" \t") == std::string::npos) continue;
            word.push_back(std::stoi(tok));
        }
        if (!word.empty()) out.push_back(word);
    }
    if (out.empty()) throw ConfigError(cfg.source_name() + ": [orbit] words is empty");
    return out;
}

std::string word_label(const std::vector<int>& word) {
    std::string s;
    for (size_t i = 0; i < word.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(word[i]);
    }
    return s;
}

void run_geometry_check(const Config& cfg, const fs::path& dir, bool plot, RunManifest& man) {
    const auto obs = obstacles_from_config(cfg);
    const double dm = geometry::disjoint_margin(obs);
    const double nm = dm > 0.0 ? geometry::no_eclipse_margin(obs)
                               : -std::numeric_limits<double>::infinity();
    {
        io::CsvWriter csv((dir / "geometry_report.csv").string(), {"quantity", "value"});
        csv.row({"obstacle_count", std::to_string(obs.count())});
        csv.row({"disjoint_margin", format_double(dm)});
        csv.row({"disjoint_ok", dm > 0.0 ? "1" : "0"});
        csv.row({"no_eclipse_margin", format_double(nm)});
        csv.row({"no_eclipse_ok", nm > 0.0 ? "1" : "0"});
        csv.close();
    }
    track(man, dir, "geometry_report.csv");
    man.notes.push_back(note("disjoint_margin=%.12g", dm));
    man.notes.push_back(note("no_eclipse_margin=%.12g", nm));
    if (plot) {
        svg::Plot p;
        p.title = "obstacle configuration";
        p.xLabel = "x";
        p.yLabel = "y";
        plot_obstacles(p, obs);
        svg::write_plot(p, (dir / "obstacles.svg").string());
        track(man, dir, "obstacles.svg");
    }
}

void run_orbit(const Config& cfg, const fs::path& dir, bool plot, RunManifest& man) {
    const auto obs = obstacles_from_config(cfg);
    const auto words = words_from_config(cfg);
    std::vector<billiard::PeriodicOrbit> orbits;
    {
        io::CsvWriter csv((dir / "orbit.csv").string(), {"word", "length", "mu", "lambda"});
        io::CsvWriter pts((dir / "orbit_points.csv").string(),
                          {"word", "leg", "obstacle", "s", "eta", "x", "y"});
        for (const auto& word : words) {
            const auto orbit = billiard::find_periodic_orbit(obs, word);
            const double lambda = billiard::lyapunov_exponent(obs, word);
            const double mu = std::exp(lambda * static_cast<double>(word.size()));
            csv.row({word_label(word), format_double(orbit.length), format_double(mu),
                     format_double(lambda)});
            for (size_t k = 0; k < orbit.points.size(); ++k) {
                pts.row({word_label(word), std::to_string(k),
                         std::to_string(orbit.points[k].obstacle),
                         format_double(orbit.points[k].s), format_double(orbit.points[k].eta),
                         format_double(orbit.vertices[k].x()),
                         format_double(orbit.vertices[k].y())});
            }
            orbits.push_back(orbit);
            man.notes.push_back(word_label(word) + ": " + note("length=%.12g", orbit.length));
        }
        csv.close();
        pts.close();
    }
    track(man, dir, "orbit.csv");
    track(man, dir, "orbit_points.csv");
    if (plot) {
        svg::Plot p;
        p.title = "periodic orbits";
        p.xLabel = "x";
        p.yLabel = "y";
        plot_obstacles(p, obs);
        for (const auto& orbit : orbits) {
            svg::Series s;
            s.label = word_label(orbit.word);
            s.color = "";
            s.line = true;
            for (const auto& v : orbit.vertices) s.points.push_back({v.x(), v.y()});
            s.points.push_back({orbit.vertices.front().x(), orbit.vertices.front().y()});
            p.series.push_back(std::move(s));
        }
        svg::write_plot(p, (dir / "orbit.svg").string());
        track(man, dir, "orbit.svg");
    }
}

void run_trapped_set(const Config& cfg, const fs::path& dir, bool plot, int workers,
                     RunManifest& man) {
    const auto obs = obstacles_from_config(cfg);
    const int depth = static_cast<int>(cfg.get_int("cover", "depth", 6));
    const int samples = static_cast<int>(cfg.get_int("cover", "samples", 8));
    if (depth < 0 || depth > 16)
        throw ConfigError(cfg.source_name() + ": [cover] depth out of range [0, 16]");
    const auto cover = billiard::trapped_set_cover(obs, depth, samples, workers);
    {
        io::CsvWriter csv((dir / "cover.csv").string(), {"depth", "box_count", "area"});
        for (const auto& lvl : cover.levels)
            csv.row({std::to_string(lvl.depth), std::to_string(lvl.boxCount),
                     format_double(lvl.totalArea)});
        csv.close();
    }
    track(man, dir, "cover.csv");
    man.notes.push_back(note("dimension_estimate=%.6g", cover.dimensionEstimate));
    man.notes.push_back(note("final_area=%.6g", cover.totalArea));
    if (plot) {
        svg::Plot p;
        p.title = "trapped set cover, depth " + std::to_string(cover.depth);
        p.xLabel = "arclength (unrolled)";
        p.yLabel = "eta";
        std::vector<double> offset(static_cast<size_t>(obs.count()) + 1, 0.0);
        for (int j = 0; j < obs.count(); ++j)
            offset[static_cast<size_t>(j) + 1] =
                offset[static_cast<size_t>(j)] + billiard::perimeter(obs, j);
        for (const auto& b : cover.boxes) {
            const double off = offset[static_cast<size_t>(b.obstacle)];
            p.rects.push_back({off + b.s0, b.eta0, off + b.s1, b.eta1});
        }
        svg::write_plot(p, (dir / "cover.svg").string());
        track(man, dir, "cover.svg");
    }
}

quant::SymbolGrid named_symbol(const std::string& name, int dim) {
    using std::cos;
    using std::sin;
    auto sample = [&](auto f) {
        return quant::sample_symbol(dim, [&](double x, double xi) {
            return std::complex<double>(f(x, xi), 0.0);
        });
    };
    if (name == "one") return sample([](double, double) { return 1.0; });
    if (name == "cos-x") return sample([](double x, double) { return cos(kTwoPi * x); });
    if (name == "cos-xi") return sample([](double, double xi) { return cos(kTwoPi * xi); });
    if (name == "cos-sum")
        return sample([](double x, double xi) { return cos(kTwoPi * x) + sin(kTwoPi * xi); });
    if (name == "bump-xi")
        return sample([](double, double xi) {
            const double u = (xi - 0.4) / 0.2;
            return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
        });
    throw ConfigError("unknown symbol '" + name +
                      "' (known: one, cos-x, cos-xi, cos-sum, bump-xi)");
}

void run_quantize(const Config& cfg, const fs::path& dir, RunManifest& man) {
    const int dim = static_cast<int>(cfg.get_int("quantize", "dim"));
    const bool haveFamily = cfg.has("quantize", "family");
    const bool haveSymbol = cfg.has("quantize", "symbol");
    if (haveFamily == haveSymbol)
        throw ConfigError(cfg.source_name() +
                          ": [quantize] needs exactly one of 'family' or 'symbol'");

    quant::TorusOperator op;
    double symbolMax = std::numeric_limits<double>::quiet_NaN();
    std::string what;
    if (haveFamily) {
        what = cfg.get_string("quantize", "family");
        const double cutoff = cfg.get_double("quantize", "cutoff", 0.15);
        op = scans::named_family(what, cutoff)(dim);
    } else {
        what = cfg.get_string("quantize", "symbol");
        const auto grid = named_symbol(what, dim);
        symbolMax = grid.maxAbs();
        op = quant::quantize_weyl(grid);
    }

    quant::save_operator(op, (dir / "operator.bin").string());
    track(man, dir, "operator.bin");
    const bool wantCsv = cfg.get_bool("quantize", "write_csv", dim <= 64);
    if (wantCsv) {
        quant::save_operator_csv(op, (dir / "operator.csv").string());
        track(man, dir, "operator.csv");
    }

    const double norm = quant::operator_norm(op);
    {
        io::CsvWriter csv((dir / "quantize_report.csv").string(), {"quantity", "value"});
        csv.row({"dim", std::to_string(dim)});
        csv.row({"h", format_double(op.h())});
        csv.row({"operator_norm", format_double(norm)});
        if (haveSymbol) {
            csv.row({"symbol_max", format_double(symbolMax)});
            csv.row({"norm_excess", format_double(norm - symbolMax)});
        }
        if (what == "baker-closed") {
            const double defect =
                (op.m.adjoint() * op.m - Eigen::MatrixXcd::Identity(dim, dim)).norm();
            csv.row({"unitary_defect", format_double(defect)});
        }
        if (what == "baker-open") {
            const Eigen::MatrixXcd p = op.m.adjoint() * op.m;
            csv.row({"projection_defect", format_double((p * p - p).norm())});
        }
        csv.close();
    }
    track(man, dir, "quantize_report.csv");
    man.notes.push_back(what + ": " + note("operator_norm=%.12g", norm));
}

void run_gap_scan(const Config& cfg, const fs::path& dir, bool plot, int workers,
                  RunManifest& man) {
    const std::string family = cfg.get_string("scan", "family", "baker-open");
    const double delta = cfg.get_double("scan", "delta", 1.0);
    const double cutoff = cfg.get_double("scan", "cutoff", 0.15);
    std::vector<int> dims;
    for (long long n : cfg.get_int_list("scan", "dims")) dims.push_back(static_cast<int>(n));

    const auto report =
        scans::power_norm_scan(scans::named_family(family, cutoff), delta, dims, workers);
    {
        io::CsvWriter csv((dir / "gap_report.csv").string(),
                          {"N", "h", "N_of_h", "power_norm", "amp_sup"});
        for (const auto& e : report.entries)
            csv.row({std::to_string(e.dim), format_double(e.h), std::to_string(e.iterations),
                     format_double(e.powerNorm), format_double(e.ampSup)});
        csv.close();
    }
    track(man, dir, "gap_report.csv");
    man.notes.push_back(note("fitted_gamma=%.6g", report.fittedGamma));
    if (plot) {
        svg::Plot p;
        p.title = family + " power norms";
        p.xLabel = "h";
        p.yLabel = "norm";
        p.logX = p.logY = true;
        svg::Series s;
        s.label = "||M^N(h)||";
        s.line = true;
        for (const auto& e : report.entries) s.points.push_back({e.h, e.powerNorm});
        p.series.push_back(std::move(s));
        svg::write_plot(p, (dir / "gap_scan.svg").string());
        track(man, dir, "gap_scan.svg");
    }
}

void run_resolvent_scan(const Config& cfg, const fs::path& dir, bool plot, int workers,
                        RunManifest& man) {
    const std::string family = cfg.get_string("scan", "family", "baker-open");
    const double delta = cfg.get_double("scan", "delta", 1.0);
    const double gamma = cfg.get_double("scan", "gamma");
    const double tau0 = cfg.get_double("scan", "tau0", 1.0);
    const double h0 = cfg.get_double("scan", "h0", 1.0);
    const bool zUnits = cfg.get_bool("scan", "z_units_hlogh", true);
    const double cutoff = cfg.get_double("scan", "cutoff", 0.15);
    std::vector<int> dims;
    for (long long n : cfg.get_int_list("scan", "dims")) dims.push_back(static_cast<int>(n));
    const auto zs = cfg.get_complex_list("scan", "zs");

    const auto report = scans::resolvent_norm_scan(scans::named_family(family, cutoff), delta,
                                                   gamma, dims, zs, tau0, h0, zUnits, workers);
    {
        io::CsvWriter csv((dir / "resolvent_report.csv").string(),
                          {"N", "h", "re_z", "im_z", "norm", "bound", "hypothesis_ok"});
        for (const auto& e : report.entries)
            csv.row({std::to_string(e.dim), format_double(e.h), format_double(e.z.real()),
                     format_double(e.z.imag()), format_double(e.norm), format_double(e.bound),
                     e.hypothesisOk ? "1" : "0"});
        csv.close();
    }
    track(man, dir, "resolvent_report.csv");
    man.notes.push_back("violations=" + std::to_string(report.violations));
    if (plot) {
        svg::Plot p;
        p.title = family + " resolvent norms";
        p.xLabel = "h";
        p.yLabel = "norm";
        p.logX = p.logY = true;
        svg::Series sn, sb;
        sn.label = "||(I-M_z)^-1||";
        sn.line = false;
        sb.label = "bound";
        sb.line = false;
        sb.color = "#d62728";
        for (const auto& e : report.entries) {
            sn.points.push_back({e.h, e.norm});
            sb.points.push_back({e.h, e.bound});
        }
        p.series.push_back(std::move(sn));
        p.series.push_back(std::move(sb));
        svg::write_plot(p, (dir / "resolvent_scan.svg").string());
        track(man, dir, "resolvent_scan.svg");
    }
}

void run_spectrum(const Config& cfg, const fs::path& dir, bool plot, RunManifest& man) {
    const std::string family = cfg.get_string("scan", "family", "baker-open");
    const int dim = static_cast<int>(cfg.get_int("scan", "dim"));
    const double cutoff = cfg.get_double("scan", "cutoff", 0.15);
    const auto op = scans::named_family(family, cutoff)(dim);
    const auto eigs = scans::spectrum(op);
    {
        io::CsvWriter csv((dir / "spectrum.csv").string(), {"re", "im"});
        for (const auto& z : eigs)
            csv.row({format_double(z.real()), format_double(z.imag())});
        csv.close();
    }
    track(man, dir, "spectrum.csv");
    man.notes.push_back(note("spectral_radius=%.12g", std::abs(eigs.front())));
    if (plot) {
        svg::Plot p;
        p.title = family + " spectrum, N = " + std::to_string(dim);
        p.xLabel = "Re";
        p.yLabel = "Im";
        p.series.push_back(circle_series({0.0, 0.0}, 1.0, "#bbbbbb"));
        svg::Series s;
        s.line = false;
        for (const auto& z : eigs) s.points.push_back({z.real(), z.imag()});
        p.series.push_back(std::move(s));
        svg::write_plot(p, (dir / "spectrum.svg").string());
        track(man, dir, "spectrum.svg");
    }
}

void run_wave(const Config& cfg, const fs::path& dir, bool plot, RunManifest& man) {
    const double extent = cfg.get_double("wave", "extent", 12.0);
    const int nx = static_cast<int>(cfg.get_int("wave", "nx", 256));
    const double tEnd = cfg.get_double("wave", "t_end", 30.0);
    const double radius = cfg.get_double("wave", "radius", 2.0);
    const double dtFactor = cfg.get_double("wave", "dt_factor", 0.9);
    const int absorberCells = static_cast<int>(cfg.get_int("wave", "absorber_cells", 48));
    const double sampleEvery = cfg.get_double("wave", "sample_every", 0.5);
    const double fitStart = cfg.get_double("wave", "fit_start", -1.0);
    const double px = cfg.get_double("wave", "pulse_x", 0.0);
    const double py = cfg.get_double("wave", "pulse_y", 0.0);
    const double psigma = cfg.get_double("wave", "pulse_sigma", 0.5);
    const double pamp = cfg.get_double("wave", "pulse_amplitude", 1.0);
    const bool onVelocity = cfg.get_bool("wave", "on_velocity", true);

    geometry::ObstacleConfig obs;
    const bool haveObs = cfg.has("obstacles", "file") || cfg.has("obstacles", "discs");
    if (haveObs) obs = obstacles_from_config(cfg);

    const auto grid =
        wave::make_grid(haveObs ? &obs : nullptr, extent, nx, dtFactor, absorberCells);
    const auto init = wave::gaussian_pulse(grid, px, py, psigma, pamp, onVelocity);
    const auto trace = wave::fdtd_run(grid, init, tEnd, radius, sampleEvery, fitStart);
    {
        io::CsvWriter csv((dir / "energy_trace.csv").string(), {"t", "E_R", "E_total"});
        for (const auto& s : trace.samples)
            csv.row({format_double(s.t), format_double(s.local), format_double(s.total)});
        csv.close();
    }
    track(man, dir, "energy_trace.csv");
    man.notes.push_back(note("nx=%g", static_cast<double>(grid.nx)));
    man.notes.push_back(note("dx=%.12g", grid.dx));
    man.notes.push_back(note("dt=%.12g", grid.dt));
    man.notes.push_back(note("fitted_slope=%.6g", trace.fittedSlope));
    man.notes.push_back(note("amplitude_slope=%.6g", 0.5 * trace.fittedSlope));
    man.notes.push_back(std::string("causal_window_ok=") + (trace.causalWindowOk ? "1" : "0"));
    if (plot) {
        svg::Plot p;
        p.title = "local energy decay";
        p.xLabel = "t";
        p.yLabel = "E_R";
        p.logX = p.logY = true;
        svg::Series s;
        s.label = "E_R(t)";
        s.line = true;
        for (const auto& e : trace.samples) s.points.push_back({e.t, e.local});
        p.series.push_back(std::move(s));
        svg::write_plot(p, (dir / "energy_trace.svg").string());
        track(man, dir, "energy_trace.svg");
    }
}

Eigen::MatrixXcd random_dissipative(std::uint64_t seed, int dim, double margin) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd a(dim, dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = scale * std::complex<double>(gauss(rng), gauss(rng));
    const double defect = contour::dissipativity_defect(a);
    a.diagonal().array() -= std::complex<double>(defect + margin, 0.0);
    return a;
}

void run_contour_test(const Config& cfg, const fs::path& dir, bool plot, RunManifest& man,
                      std::uint64_t seed) {
    const int dim = static_cast<int>(cfg.get_int("contour", "dim", 8));
    const int k = static_cast<int>(cfg.get_int("contour", "k", 3));
    const double margin = cfg.get_double("contour", "margin", 0.05);
    std::vector<double> ts = {0.0, 0.5, 1.0, 2.0};
    if (cfg.has("contour", "ts")) ts = cfg.get_double_list("contour", "ts");
    contour::ContourOptions opts;
    opts.tolerance = cfg.get_double("contour", "tolerance", 1e-9);

    const Eigen::MatrixXcd a = random_dissipative(seed, dim, margin);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(dim);
    u(0) = 1.0;

    // direct reference: exp(tA) (I - A)^{-k} u via diagonalization
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success)
        throw NumericError("eigendecomposition of the test generator failed");
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> vlu(v);
    Eigen::MatrixXcd shifted = -a;
    shifted.diagonal().array() += 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> slu(shifted);
    Eigen::VectorXcd powu = u;
    for (int i = 0; i < k; ++i) powu = slu.solve(powu);

    double maxDiff = 0.0;
    {
        io::CsvWriter csv((dir / "contour_check.csv").string(),
                          {"t", "value_norm", "difference"});
        for (double t : ts) {
            const Eigen::VectorXcd got = contour::semigroup_contour(a, k, t, u, opts);
            const Eigen::VectorXcd ref =
                v * (t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                vlu.solve(powu);
            const double diff = (got - ref).norm();
            maxDiff = std::max(maxDiff, diff);
            csv.row({format_double(t), format_double(got.norm()), format_double(diff)});
        }
        csv.close();
    }
    track(man, dir, "contour_check.csv");
    man.notes.push_back(note("max_difference=%.6g", maxDiff));

    if (cfg.has("contour", "depth")) {
        const double depth = cfg.get_double("contour", "depth");
        const double tDef = ts.empty() ? 1.0 : ts.back();
        const auto check = contour::deformed_contour_check(a, k, tDef, u, depth, 0.0, opts);
        man.notes.push_back(note("deformed_difference=%.6g", check.difference));
    }
    if (plot) {
        svg::Plot p;
        p.title = "semigroup through the contour";
        p.xLabel = "t";
        p.yLabel = "norm";
        p.logY = true;
        svg::Series s;
        s.label = "||exp(tA)(I-A)^-k u||";
        s.line = true;
        for (double t : ts) {
            const Eigen::VectorXcd ref =
                v * (t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                vlu.solve(powu);
            s.points.push_back({t, ref.norm()});
        }
        p.series.push_back(std::move(s));
        svg::write_plot(p, (dir / "contour_check.svg").string());
        track(man, dir, "contour_check.svg");
    }
}

std::string resolve_out_dir(const Config& cfg, const RunOptions& opts, const std::string& kind) {
    if (!opts.outDirOverride.empty()) return opts.outDirOverride;
    if (const char* env = std::getenv("OSLAB_OUT"); env && *env) return env;
    const std::string fromCfg = cfg.out_dir();
    if (!fromCfg.empty()) return fromCfg;
    return "runs/" + kind;
}

} // namespace

RunManifest run_experiment(const Config& cfg, const RunOptions& opts) {
    std::string kind = opts.kind;
    if (cfg.has("experiment", "kind")) {
        const std::string fromCfg = cfg.kind();
        if (kind.empty())
            kind = fromCfg;
        else if (kind != fromCfg)
            throw ConfigError("requested kind '" + kind + "' but " + cfg.source_name() +
                              " declares kind '" + fromCfg + "'");
    }
    if (kind.empty())
        throw ConfigError(cfg.source_name() + ": no experiment kind given (CLI or [experiment])");
    if (!kKinds.count(kind)) throw ConfigError("unknown experiment kind '" + kind + "'");

    const int workers = opts.serial ? 1 : resolve_workers(opts.workers);

    const fs::path dir = resolve_out_dir(cfg, opts, kind);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    RunManifest man;
    man.kind = kind;
    man.configDigest = digest_hex(cfg.canonical());
    man.toolVersion = kToolVersion;
    man.startedAt = current_utc_timestamp();
    man.workers = workers;
    man.seed = cfg.seed();

    if (kind == "geometry-check")
        run_geometry_check(cfg, dir, opts.plot, man);
    else if (kind == "orbit")
        run_orbit(cfg, dir, opts.plot, man);
    else if (kind == "trapped-set")
        run_trapped_set(cfg, dir, opts.plot, workers, man);
    else if (kind == "quantize")
        run_quantize(cfg, dir, man);
    else if (kind == "gap-scan")
        run_gap_scan(cfg, dir, opts.plot, workers, man);
    else if (kind == "resolvent-scan")
        run_resolvent_scan(cfg, dir, opts.plot, workers, man);
    else if (kind == "spectrum")
        run_spectrum(cfg, dir, opts.plot, man);
    else if (kind == "wave")
        run_wave(cfg, dir, opts.plot, man);
    else
        run_contour_test(cfg, dir, opts.plot, man, cfg.seed());

    man.finishedAt = current_utc_timestamp();
    write_manifest(man, dir.string());
    return man;
}

int run_cli(const RunOptions& opts) {
    try {
        const Config cfg = Config::load(opts.configPath);
        run_experiment(cfg, opts);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace oslab::run
