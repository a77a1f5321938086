#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/grid_io.hpp"
#include "reefmap/ingest.hpp"
#include "reefmap/rugosity.hpp"

using namespace reefmap;

namespace {

// Two-triangle plane z = tan(theta) * x over [x0, x1] x [y0, y1].
TriangleMesh tilted_plane(double theta_deg, double x0, double y0, double x1, double y1) {
    const double t = std::tan(theta_deg * std::numbers::pi / 180.0);
    return TriangleMesh({{x0, y0, t * x0}, {x1, y0, t * x1}, {x1, y1, t * x1}, {x0, y1, t * x0}},
                        {{{0, 1, 2}}, {{0, 2, 3}}});
}

// Random heightfield with jittered vertices, so triangles straddle cells at
// arbitrary positions.
TriangleMesh jittered_heightfield(std::mt19937_64& rng, std::size_t n, double extent) {
    std::uniform_real_distribution<double> jitter(-0.3, 0.3), height(-1.0, 1.0);
    const double step = extent / static_cast<double>(n);
    std::vector<Vec3> v;
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            const bool border_x = i == 0 || i == n;
            const bool border_y = j == 0 || j == n;
            v.push_back({step * (static_cast<double>(i) + (border_x ? 0.0 : jitter(rng))),
                         step * (static_cast<double>(j) + (border_y ? 0.0 : jitter(rng))), height(rng)});
        }
    }
    std::vector<Face> f;
    const auto w = static_cast<std::uint32_t>(n + 1);
    for (std::uint32_t j = 0; j < n; ++j) {
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint32_t a = j * w + i, b = a + 1, c = a + w, d = c + 1;
            f.push_back({a, b, d});
            f.push_back({a, d, c});
        }
    }
    return TriangleMesh(std::move(v), std::move(f));
}

}  // namespace

TEST_CASE("unit right triangle clipped to the unit square") {
    const std::array<Vec3, 3> tri{Vec3{0, 0, 0}, Vec3{2, 0, 0}, Vec3{0, 2, 0}};
    const auto poly = clip_triangle_to_rect(tri, AABB2::checked(0, 0, 1, 1));
    CHECK(polygon_area_3d(poly) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(polygon_projected_area(poly) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("disjoint triangle clips to nothing") {
    const std::array<Vec3, 3> tri{Vec3{5, 5, 0}, Vec3{6, 5, 0}, Vec3{5, 6, 0}};
    CHECK(clip_triangle_to_rect(tri, AABB2::checked(0, 0, 1, 1)).empty());
}

TEST_CASE("clipping keeps vertices in the half-open rect and on the triangle plane") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 2.0), h(-3.0, 3.0);
    const auto rect = AABB2::checked(0, 0, 1, 1);
    for (int k = 0; k < 2000; ++k) {
        const std::array<Vec3, 3> tri{Vec3{u(rng), u(rng), h(rng)}, Vec3{u(rng), u(rng), h(rng)},
                                      Vec3{u(rng), u(rng), h(rng)}};
        const auto poly = clip_triangle_to_rect(tri, rect);
        CHECK(poly.size() <= 7);
        const Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        for (const auto& p : poly) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 1.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 1.0);
            CHECK(std::abs(n.dot(p - tri[0])) <= 1e-9 * std::max(1.0, n.norm()));
        }
    }
}

TEST_CASE("clipped projected area matches a Monte Carlo oracle") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    const auto rect = AABB2::checked(0, 0, 1, 1);
    for (int k = 0; k < 40; ++k) {
        const std::array<Vec3, 3> tri{Vec3{u(rng), u(rng), 0}, Vec3{u(rng), u(rng), 0}, Vec3{u(rng), u(rng), 0}};
        const double exact = polygon_projected_area(clip_triangle_to_rect(tri, rect));
        const double mc = oracle::monte_carlo_overlap(tri, rect, 200000, 1000 + static_cast<std::uint64_t>(k));
        // Binomial standard error of the hit fraction is at most 0.5/sqrt(N).
        CHECK(std::abs(exact - mc) <= 5.0 * 0.5 / std::sqrt(200000.0));
    }
}

TEST_CASE("clipped 3D area equals projected area scaled by the plane slope") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-0.5, 1.5), s(-2.0, 2.0);
    const auto rect = AABB2::checked(0, 0, 1, 1);
    for (int k = 0; k < 500; ++k) {
        const double gx = s(rng), gy = s(rng), c = s(rng);
        auto lift = [&](double x, double y) { return Vec3{x, y, gx * x + gy * y + c}; };
        const std::array<Vec3, 3> tri{lift(u(rng), u(rng)), lift(u(rng), u(rng)), lift(u(rng), u(rng))};
        const auto poly = clip_triangle_to_rect(tri, rect);
        const double factor = std::sqrt(1.0 + gx * gx + gy * gy);
        CHECK(polygon_area_3d(poly) == doctest::Approx(factor * polygon_projected_area(poly)).epsilon(1e-9));
    }
}

TEST_CASE("vertical triangles contribute area but no footprint") {
    const std::array<Vec3, 3> wall{Vec3{0.25, 0.0, 0.0}, Vec3{0.25, 1.0, 0.0}, Vec3{0.25, 0.5, 2.0}};
    const auto poly = clip_triangle_to_rect(wall, AABB2::checked(0, 0, 1, 1));
    CHECK(polygon_area_3d(poly) == doctest::Approx(1.0));
    CHECK(polygon_projected_area(poly) == 0.0);
}

TEST_CASE("flat plane has rugosity 1 in every cell") {
    const auto mesh = tilted_plane(0.0, 0, 0, 12, 12);
    const auto grid = rugosity_grid(mesh, {});
    CHECK(grid.nx() == 24);
    CHECK(grid.valid_count() == 24 * 24);
    for (double v : grid.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tilt law on a small plane") {
    for (double theta : {15.0, 30.0, 45.0, 60.0}) {
        const auto grid = rugosity_grid(tilted_plane(theta, 0, 0, 3, 3), {});
        const double expect = 1.0 / std::cos(theta * std::numbers::pi / 180.0);
        for (double v : grid.values()) CHECK(std::abs(v - expect) <= 1e-9);
    }
}

TEST_CASE("coverage threshold marks partly covered cells invalid") {
    // Plane covers x in [0, 1.2]: cells 0 and 1 are full, cell 2 has 40%.
    const auto mesh = tilted_plane(0.0, 0, 0, 1.2, 0.5);
    RugosityConfig cfg;
    cfg.region = AABB2::checked(0, 0, 1.5, 0.5);
    const auto grid = rugosity_grid(mesh, cfg);
    REQUIRE(grid.nx() == 3);
    CHECK(grid.valid(0, 0));
    CHECK(grid.valid(1, 0));
    CHECK_FALSE(grid.valid(2, 0));
    cfg.min_coverage_fraction = 0.3;
    const auto loose = rugosity_grid(mesh, cfg);
    CHECK(loose.valid(2, 0));
    // Surface area over the full planar cell area, not the covered part.
    CHECK(loose.value(2, 0) == doctest::Approx(0.4));
}

TEST_CASE("cells outside the mesh are invalid") {
    RugosityConfig cfg;
    cfg.region = AABB2::checked(-1, -1, 2, 2);
    const auto grid = rugosity_grid(tilted_plane(0.0, 0, 0, 1, 1), cfg);
    CHECK(grid.valid_count() == 4);
    CHECK_FALSE(rugosity_stats(rugosity_grid(TriangleMesh{}, cfg)).has_value());
}

TEST_CASE("per-cell areas sum to the mesh surface area") {
    std::mt19937_64 rng(34);
    for (int k = 0; k < 10; ++k) {
        const auto mesh = jittered_heightfield(rng, 20, 5.0);
        const auto acc = accumulate_cell_areas(mesh, Grid2D::covering(AABB2::checked(0, 0, 5, 5), 0.35), 2);
        double total = 0.0;
        for (double a : acc.surface_area) total += a;
        CHECK(total == doctest::Approx(mesh_surface_area(mesh)).epsilon(1e-9));
    }
}

TEST_CASE("rugosity grid is bit-identical across thread counts") {
    std::mt19937_64 rng(35);
    const auto mesh = jittered_heightfield(rng, 60, 12.0);
    RugosityConfig cfg;
    cfg.threads = 1;
    const auto ref = rugosity_grid(mesh, cfg);
    for (unsigned t : {2u, 3u, 8u, 0u}) {
        cfg.threads = t;
        const auto other = rugosity_grid(mesh, cfg);
        REQUIRE(other.size() == ref.size());
        CHECK(std::memcmp(other.values().data(), ref.values().data(), ref.size() * sizeof(double)) == 0);
        CHECK(write_grid_csv(other) == write_grid_csv(ref));
    }
}

TEST_CASE("rugosity_stats over valid cells") {
    Grid2D g({0, 0}, 1.0, 3, 1);
    g.set(0, 0, 1.0);
    g.set(2, 0, 3.0);
    const auto s = rugosity_stats(g);
    REQUIRE(s.has_value());
    CHECK(s->count == 2);
    CHECK(s->min == 1.0);
    CHECK(s->max == 3.0);
    CHECK(s->mean == 2.0);
}

TEST_CASE("config validation") {
    RugosityConfig cfg;
    cfg.cell_size = 0.0;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg.cell_size = 0.5;
    cfg.min_coverage_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("grid CSV round-trip") {
    std::mt19937_64 rng(36);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    Grid2D g({-9.0, -13.0}, 0.5, 7, 5);
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            if ((i + j) % 4 != 0) g.set(i, j, u(rng));
        }
    }
    CHECK(parse_grid_csv(write_grid_csv(g)) == g);

    // Without the metadata comment the geometry comes from the centers.
    auto csv = write_grid_csv(g);
    csv.erase(0, csv.find('\n') + 1);
    const auto inferred = parse_grid_csv(csv);
    CHECK(inferred.same_geometry(g));
}

TEST_CASE("grid CSV errors") {
    CHECK_THROWS_AS(parse_grid_csv("x,y\n"), FormatError);
    CHECK_THROWS_AS(parse_grid_csv("i,j,x_center,y_center,value,valid\n0,0,0.25,0.25,1\n"), FormatError);
    CHECK_THROWS_AS(parse_grid_csv("i,j,x_center,y_center,value,valid\n0,0,0.25,0.25,1,1\n"), FormatError);
    CHECK_THROWS_AS(
        parse_grid_csv("i,j,x_center,y_center,value,valid\n0,0,0.25,0.25,1,1\n1,1,0.75,0.75,1,1\n"),
        FormatError);
}
