#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <oslab/errors.hpp>
#include <oslab/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace oslab;
using geometry::DiscObstacle;
using geometry::ObstacleConfig;

namespace {

ObstacleConfig discs(std::initializer_list<std::array<double, 3>> rows) {
    ObstacleConfig c;
    for (const auto& r : rows) c.obstacles.push_back({Eigen::Vector2d(r[0], r[1]), r[2]});
    return c;
}

ObstacleConfig equilateral(double side, double r = 1.0) {
    const double h = side * std::sqrt(3.0) / 2.0;
    return discs({{0.0, 0.0, r}, {side, 0.0, r}, {side / 2.0, h, r}});
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// Brute-force eclipse detector: sample chords between boundary points of
// two discs and ask whether any of them cuts into a third one. Never uses
// the stadium profile the checker is built on.
bool no_eclipse_oracle(const ObstacleConfig& cfg, int samplesPerCircle) {
    const int J = cfg.count();
    const double twoPi = 2.0 * M_PI;
    for (int j = 0; j < J; ++j) {
        for (int k = j + 1; k < J; ++k) {
            for (int i = 0; i < J; ++i) {
                if (i == j || i == k) continue;
                const auto& oj = cfg.disc(j);
                const auto& ok = cfg.disc(k);
                const auto& oi = cfg.disc(i);
                for (int a = 0; a < samplesPerCircle; ++a) {
                    const double ta = twoPi * a / samplesPerCircle;
                    const Eigen::Vector2d pa =
                        oj.center + oj.radius * Eigen::Vector2d(std::cos(ta), std::sin(ta));
                    for (int b = 0; b < samplesPerCircle; ++b) {
                        const double tb = twoPi * b / samplesPerCircle;
                        const Eigen::Vector2d pb =
                            ok.center + ok.radius * Eigen::Vector2d(std::cos(tb), std::sin(tb));
                        if (point_segment_distance(oi.center, pa, pb) <= oi.radius) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    return true;
}

} // namespace

TEST_CASE("disjointness on trivial pairs") {
    CHECK(geometry::check_disjoint(discs({{0, 0, 1}, {6, 0, 1}})));
    CHECK_FALSE(geometry::check_disjoint(discs({{0, 0, 1}, {1.5, 0, 1}})));
    CHECK(geometry::disjoint_margin(discs({{0, 0, 1}, {6, 0, 1}})) == doctest::Approx(4.0));
}

TEST_CASE("configs need at least two obstacles") {
    CHECK_THROWS_AS(geometry::check_disjoint(discs({{0, 0, 1}})), InvalidConfigError);
    CHECK_THROWS_AS(geometry::check_no_eclipse(discs({{0, 0, 1}})), InvalidConfigError);
}

TEST_CASE("nonpositive radius is rejected") {
    CHECK_THROWS_AS(geometry::check_disjoint(discs({{0, 0, 1}, {6, 0, 0.0}})), InvalidConfigError);
}

TEST_CASE("no-eclipse margin of the side-6 triangle") {
    const auto cfg = equilateral(6.0);
    CHECK(geometry::check_no_eclipse(cfg));
    // distance from a vertex to the opposite side is 3*sqrt(3); subtract
    // the stadium radius 1 and the observer radius 1
    const double expected = 3.0 * std::sqrt(3.0) - 2.0;
    CHECK(geometry::no_eclipse_margin(cfg) == doctest::Approx(expected).epsilon(1e-12));

    const auto& a = cfg.disc(0);
    const auto& b = cfg.disc(1);
    CHECK(geometry::hull_clearance(cfg.disc(2).center, a, b) ==
          doctest::Approx(3.0 * std::sqrt(3.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("a disc close to the line of two others eclipses them") {
    const auto cfg = discs({{0, 0, 1}, {10, 0, 1}, {5, 0.5, 1}});
    CHECK_FALSE(geometry::check_no_eclipse(cfg));
    CHECK(geometry::no_eclipse_margin(cfg) == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("two discs are vacuously eclipse-free") {
    const auto cfg = discs({{0, 0, 1}, {6, 0, 1}});
    CHECK(geometry::check_no_eclipse(cfg));
    CHECK(std::isinf(geometry::no_eclipse_margin(cfg)));
}

TEST_CASE("no-eclipse requires disjointness first") {
    CHECK_THROWS_AS(geometry::check_no_eclipse(discs({{0, 0, 1}, {1.5, 0, 1}, {8, 0, 1}})),
                    InvalidConfigError);
}

TEST_CASE("checker agrees with the chord-sampling oracle") {
    int eclipsed = 0, clear = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto cfg = geometry::random_config(seed, 4, 4.0, 0.6, 1.1);
        const bool fast = geometry::check_no_eclipse(cfg);
        const bool brute = no_eclipse_oracle(cfg, 100);
        CAPTURE(seed);
        CHECK(fast == brute);
        (fast ? clear : eclipsed) += 1;
    }
    // the seed range must exercise both outcomes for the check to mean much
    CHECK(eclipsed > 0);
    CHECK(clear > 0);
}

TEST_CASE("no-eclipse is invariant under rigid motions and scaling") {
    const double c = std::cos(0.7), s = std::sin(0.7);
    for (std::uint64_t seed : {3u, 7u, 11u, 19u}) {
        const auto cfg = geometry::random_config(seed, 4, 4.0, 0.6, 1.1);
        const double margin = geometry::no_eclipse_margin(cfg);

        ObstacleConfig moved = cfg;
        for (auto& o : moved.obstacles) {
            o.center = Eigen::Vector2d(c * o.center.x() - s * o.center.y() + 3.0,
                                       s * o.center.x() + c * o.center.y() - 2.0);
        }
        CHECK(geometry::no_eclipse_margin(moved) == doctest::Approx(margin).epsilon(1e-9));

        ObstacleConfig scaled = cfg;
        for (auto& o : scaled.obstacles) {
            o.center *= 2.3;
            o.radius *= 2.3;
        }
        CHECK(geometry::no_eclipse_margin(scaled) == doctest::Approx(2.3 * margin).epsilon(1e-9));
        CHECK(geometry::check_no_eclipse(scaled) == geometry::check_no_eclipse(cfg));
    }
}

TEST_CASE("obstacle files round-trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "oslab_geom_test";
    fs::create_directories(dir);
    const auto path = (dir / "discs.txt").string();

    const auto cfg = equilateral(6.0);
    geometry::save_obstacles(cfg, path);
    const auto back = geometry::load_obstacles(path);
    REQUIRE(back.count() == 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(back.disc(j).center == cfg.disc(j).center);
        CHECK(back.disc(j).radius == cfg.disc(j).radius);
    }
    fs::remove_all(dir);
}

TEST_CASE("obstacle parser handles comments and rejects bad rows") {
    std::istringstream ok("# triangle\n0 0 1\n6 0 1\n# apex\n3 5.196 1\n");
    CHECK(geometry::parse_obstacles(ok).count() == 3);

    std::istringstream shortRow("0 0 1\n1 2\n");
    CHECK_THROWS_AS(geometry::parse_obstacles(shortRow), InvalidConfigError);

    std::istringstream badRadius("0 0 1\n6 0 -1\n");
    CHECK_THROWS_AS(geometry::parse_obstacles(badRadius), InvalidConfigError);

    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(geometry::parse_obstacles(empty), InvalidConfigError);

    CHECK_THROWS_AS(geometry::load_obstacles("/nonexistent/oslab/discs.txt"), IoError);
}

TEST_CASE("random configs are deterministic in the seed") {
    const auto a = geometry::random_config(42, 5, 4.0, 0.5, 1.2);
    const auto b = geometry::random_config(42, 5, 4.0, 0.5, 1.2);
    REQUIRE(a.count() == b.count());
    for (int j = 0; j < a.count(); ++j) {
        CHECK(a.disc(j).center == b.disc(j).center);
        CHECK(a.disc(j).radius == b.disc(j).radius);
    }
    CHECK(geometry::check_disjoint(a));

    const auto c = geometry::random_no_eclipse_config(42, 3, 4.0, 0.5, 1.0, 0.05);
    CHECK(geometry::no_eclipse_margin(c) >= 0.05);
}
