#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/geom.hpp"
#include "reefmap/parallel.hpp"

using namespace reefmap;

TEST_CASE("triangle_area_3d on simple triangles") {
    CHECK(triangle_area_3d({0, 0, 0}, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(triangle_area_3d({0, 0, 0}, {1, 0, 0}, {2, 0, 0}) == 0.0);
    // 3-4-5 right triangle standing in the xz plane
    CHECK(triangle_area_3d({0, 0, 0}, {3, 0, 0}, {0, 0, 4}) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("triangle_area_3d agrees with Heron on random triangles") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 2000; ++k) {
        const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
        const double ref = oracle::heron(a, b, c);
        CHECK(std::abs(triangle_area_3d(a, b, c) - ref) <= 1e-9 * std::max(1.0, ref));
    }
}

TEST_CASE("triangle_area_3d is invariant under rigid motion") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 500; ++k) {
        const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
        const PoseSE3 pose({u(rng), u(rng), u(rng)},
                           Quaternion::from_axis_angle({u(rng), u(rng), u(rng) + 11.0}, u(rng)));
        const double before = triangle_area_3d(a, b, c);
        const double after = triangle_area_3d(pose.apply(a), pose.apply(b), pose.apply(c));
        CHECK(after == doctest::Approx(before).epsilon(1e-10));
    }
}

TEST_CASE("mesh_surface_area sums faces") {
    const TriangleMesh quad({{0, 0, 0}, {2, 0, 0}, {2, 3, 0}, {0, 3, 0}}, {{{0, 1, 2}}, {{0, 2, 3}}});
    CHECK(mesh_surface_area(quad) == doctest::Approx(6.0));
    CHECK(mesh_surface_area(TriangleMesh{}) == 0.0);
}

TEST_CASE("TriangleMesh validates indices and coordinates") {
    CHECK_THROWS_AS(TriangleMesh({{0, 0, 0}, {1, 0, 0}}, {{{0, 1, 2}}}), IndexError);
    CHECK_THROWS_AS(TriangleMesh({{0, 0, NAN}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}}), PreconditionError);
    // degenerate faces are legal
    CHECK_NOTHROW(TriangleMesh({{0, 0, 0}}, {{{0, 0, 0}}}));
}

TEST_CASE("pose_apply with identity and translations") {
    const Vec3 p{1.5, -2.0, 3.25};
    CHECK(pose_apply(PoseSE3::identity(), p) == p);
    const PoseSE3 shift({1, 2, 3}, Quaternion::identity());
    CHECK(pose_apply(shift, p) == Vec3{2.5, 0.0, 6.25});
}

TEST_CASE("pose_apply rotates 90 degrees about z") {
    const PoseSE3 rot({0, 0, 0}, Quaternion::from_axis_angle({0, 0, 1}, std::numbers::pi / 2));
    const Vec3 r = rot.apply({1, 0, 0});
    CHECK(r.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.y == doctest::Approx(1.0));
    CHECK(r.z == doctest::Approx(0.0));
}

TEST_CASE("PoseSE3 renormalizes near-unit quaternions and rejects others") {
    const PoseSE3 near({0, 0, 0}, {1.0005, 0, 0, 0});
    CHECK(near.rotation().norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(PoseSE3({0, 0, 0}, {0.5, 0, 0, 0}), PoseError);
    CHECK_THROWS_AS(PoseSE3({0, 0, 0}, {1.01, 0, 0, 0}), PoseError);
    CHECK_THROWS_AS(PoseSE3({0, 0, 0}, {0, 0, 0, 0}), PoseError);
}

TEST_CASE("rotation matrices are orthonormal") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int k = 0; k < 200; ++k) {
        Quaternion q{g(rng), g(rng), g(rng), g(rng)};
        const double n = q.norm();
        q = {q.w / n, q.x / n, q.y / n, q.z / n};
        const auto m = q.to_rotation_matrix();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                double d = 0.0;
                for (int t = 0; t < 3; ++t) d += m[3 * r + t] * m[3 * c + t];
                CHECK(d == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("grid_index uses half-open cells") {
    const Grid2D g({0.0, 0.0}, 0.5, 4, 2);
    CHECK(grid_index(g, 0.0, 0.0) == CellIndex{0, 0});
    CHECK(grid_index(g, 0.5, 0.0) == CellIndex{1, 0});
    CHECK(grid_index(g, 0.49999, 0.99) == CellIndex{0, 1});
    CHECK_FALSE(grid_index(g, 2.0, 0.1).has_value());
    CHECK_FALSE(grid_index(g, 0.1, 1.0).has_value());
    CHECK_FALSE(grid_index(g, -1e-12, 0.1).has_value());
    CHECK_FALSE(grid_index(g, NAN, 0.1).has_value());
}

TEST_CASE("grid_index agrees with the edges Grid2D reports") {
    // Edge values at awkward cell sizes must land in the cell to their right.
    const Grid2D g({-9.0, -13.0}, 0.1, 120, 120);
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const auto c = grid_index(g, g.x_edge(i), g.y_edge(0));
        REQUIRE(c.has_value());
        CHECK(c->i == i);
        const auto below = grid_index(g, std::nextafter(g.x_edge(i), -1e9), g.y_edge(0));
        if (i == 0) {
            CHECK_FALSE(below.has_value());
        } else {
            REQUIRE(below.has_value());
            CHECK(below->i == i - 1);
        }
    }
}

TEST_CASE("Grid2D::covering pads only when needed") {
    const auto exact = Grid2D::covering(AABB2::checked(0, 0, 12, 12), 0.5);
    CHECK(exact.nx() == 24);
    CHECK(exact.ny() == 24);
    const auto padded = Grid2D::covering(AABB2::checked(0, 0, 12.1, 1), 0.5);
    CHECK(padded.nx() == 25);
    CHECK(padded.ny() == 2);
    const auto tiny = Grid2D::covering(AABB2::checked(0, 0, 0, 0), 0.5);
    CHECK(tiny.size() == 1);
    CHECK_THROWS_AS(Grid2D::covering(AABB2::checked(0, 0, 1, 1), 0.0), PreconditionError);
}

TEST_CASE("Grid2D storage is row-major with j as row") {
    Grid2D g({0, 0}, 1.0, 3, 2);
    g.set(2, 1, 7.0);
    CHECK(g.values()[5] == 7.0);
    CHECK(g.valid_mask()[5] == 1);
    CHECK(g.valid_count() == 1);
    g.invalidate(2, 1);
    CHECK(g.valid_count() == 0);
}

TEST_CASE("AABB2::checked rejects inverted and non-finite bounds") {
    CHECK_THROWS_AS(AABB2::checked(1, 0, 0, 1), PreconditionError);
    CHECK_THROWS_AS(AABB2::checked(0, 0, INFINITY, 1), PreconditionError);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
    for (unsigned threads : {1u, 2u, 3u, 8u, 0u}) {
        std::vector<int> hits(1001, 0);
        parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
            for (auto k = b; k < e; ++k) ++hits[k];
        });
        CHECK(std::count(hits.begin(), hits.end(), 1) == 1001);
    }
    CHECK_THROWS_AS(parallel_for(10, 4,
                                 [](std::size_t b, std::size_t) {
                                     if (b > 0) throw RangeError("boom");
                                 }),
                    RangeError);
}

TEST_CASE("error kinds are stable strings") {
    CHECK(std::string(FormatError("x").kind()) == "format");
    CHECK(std::string(PoseError("x").kind()) == "pose");
    CHECK(std::string(IndexError("x").kind()) == "index");
    CHECK(std::string(ConfigError("a.b", "bad").kind()) == "config");
    CHECK(ConfigError("a.b", "bad").path() == "a.b");
}
