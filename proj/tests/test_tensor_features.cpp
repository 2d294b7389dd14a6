#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "meshstego/tensor_features.hpp"
#include "oracles.hpp"

using namespace meshstego;

TEST_CASE("face normal and area") {
    const auto fa = face_normal_area({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    CHECK(fa.normal.z == doctest::Approx(1.0));
    CHECK(fa.area == doctest::Approx(0.5));
    CHECK_FALSE(fa.degenerate);

    const auto collinear = face_normal_area({0, 0, 0}, {1, 1, 1}, {2, 2, 2});
    CHECK(collinear.degenerate);
    CHECK(collinear.area == 0.0);
    CHECK(norm(collinear.normal) == 0.0);
}

TEST_CASE("random face normals are unit and orthogonal to the edges") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
        const auto fa = face_normal_area(a, b, c);
        if (fa.degenerate) continue;
        CHECK(std::fabs(norm(fa.normal) - 1.0) <= 1e-12);
        CHECK(std::fabs(dot(fa.normal, b - a)) <= 1e-12 * norm(b - a));
        CHECK(std::fabs(dot(fa.normal, c - a)) <= 1e-12 * norm(c - a));
    }
}

TEST_CASE("flat region gives rank-one vertex tensors") {
    const Mesh g = fixtures::grid(6, 6);
    const auto geom = face_geometry(g);
    const auto field = compute_tensor_field(g, geom, 1);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        CHECK(field.gap23[v] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(field.lam3[v] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(field.gap12[v] > 0.0);
    }
}

TEST_CASE("tetrahedron pattern-2 tensors sum over exactly three neighbors") {
    const Mesh tet = fixtures::tetrahedron();
    const auto geom = face_geometry(tet);
    const auto field = compute_tensor_field(tet, geom, 2);
    for (int f = 0; f < 4; ++f) {
        // Hand evaluation: sum over the three edge-adjacent faces with
        // max-area normalization.
        const auto& adj = edge_adjacent_faces(tet, f);
        REQUIRE(adj.size() == 3);
        double max_area = 0.0;
        for (int g : adj) max_area = std::max(max_area, geom.faces[g].area);
        Sym3 expect = sym3_zero();
        for (int g : adj) sym3_add_outer(expect, geom.faces[g].normal, geom.faces[g].area / max_area);
        for (int k = 0; k < 6; ++k)
            CHECK(field.tensors[f][k] == doctest::Approx(expect[k]).epsilon(1e-15));
    }
}

TEST_CASE("tensors are PSD with sorted eigen-gaps on random meshes") {
    for (unsigned seed = 0; seed < 6; ++seed) {
        const Mesh m = fixtures::curved_mesh(seed);
        const auto geom = face_geometry(m);
        for (int pattern : {1, 2, 3}) {
            const auto field = compute_tensor_field(m, geom, pattern);
            REQUIRE(field.size() == tensor_count(m, pattern));
            for (std::size_t t = 0; t < field.size(); ++t) {
                const auto pairs = oracles::jacobi_eigen(field.tensors[t]);
                CHECK(pairs.values[2] >= -1e-10);
                CHECK(field.gap12[t] >= 0.0);
                CHECK(field.gap23[t] >= 0.0);
                CHECK(field.lam3[t] >= 0.0);
            }
        }
    }
}

TEST_CASE("laplacian smoothing") {
    const Mesh g = fixtures::grid(4, 4);
    // Interior vertices of a uniform grid sit at their neighbor centroid
    // already; one step must not move them.
    const Mesh s = laplacian_smooth(g, 1, 0.5);
    const int center = 2 * 5 + 2;
    CHECK(norm(s.vertices[center] - g.vertices[center]) <= 1e-12);

    // Factor one lands exactly on the centroid.
    const Mesh tri = fixtures::triangle();
    const Mesh st = laplacian_smooth(tri, 1, 1.0);
    const Vec3 centroid = (tri.vertices[1] + tri.vertices[2]) / 2.0;
    CHECK(norm(st.vertices[0] - centroid) <= 1e-12);

    CHECK_THROWS_AS(laplacian_smooth(g, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(laplacian_smooth(g, 1, 0.0), std::invalid_argument);
}

TEST_CASE("smoothing a noisy sphere reduces curvature variance") {
    const Mesh noisy = fixtures::sphere(16, 12, 0.4, 99, 0.05);
    const Mesh smooth = laplacian_smooth(noisy, 3, 0.5);
    auto curvature_variance = [](const Mesh& m) {
        const auto geom = face_geometry(m);
        double mean = 0.0, var = 0.0;
        std::vector<double> k(m.vertex_count());
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            k[v] = gaussian_curvature(m, geom, int(v));
            mean += k[v];
        }
        mean /= double(m.vertex_count());
        for (double x : k) var += (x - mean) * (x - mean);
        return var / double(m.vertex_count());
    };
    CHECK(curvature_variance(smooth) < curvature_variance(noisy));
}

TEST_CASE("residuals") {
    const Mesh m = fixtures::sphere(10, 8);
    const auto geom = face_geometry(m);
    const auto field = compute_tensor_field(m, geom, 1);
    const auto same = residuals(field, field);
    for (double r : same.r1) CHECK(r == doctest::Approx(std::log(kResidualEpsilon)));

    // A unit gap difference sits at log(1 + eps), essentially zero.
    CHECK(log_residual(2.0, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("influence domains") {
    const Mesh tri = fixtures::triangle();
    CHECK(influence_domain(tri, 0, 1) == std::vector<int>{0, 1, 2});
    CHECK(influence_domain(tri, 0, 2).empty()); // pattern-2 tensors exclude the face itself

    const Mesh tet = fixtures::tetrahedron();
    for (int v = 0; v < 4; ++v) {
        CHECK(influence_domain(tet, v, 1).size() == 4);
        CHECK(influence_domain(tet, v, 2).size() == 4);
        CHECK(influence_domain(tet, v, 3).size() == 4);
    }
}

TEST_CASE("perturbing a vertex changes only tensors inside its influence domain") {
    std::mt19937 rng(41);
    for (unsigned seed = 0; seed < 3; ++seed) {
        const Mesh m = fixtures::curved_mesh(seed);
        std::uniform_int_distribution<int> pick(0, int(m.vertex_count()) - 1);
        const auto geom = face_geometry(m);
        for (int round = 0; round < 4; ++round) {
            const int v = pick(rng);
            const int channel = round % 3;
            Mesh moved = m;
            moved.vertices[v][channel] += 1e-4;
            const auto moved_geom = face_geometry(moved);
            for (int pattern : {1, 2, 3}) {
                const auto base = compute_tensor_field(m, geom, pattern);
                const auto after = compute_tensor_field(moved, moved_geom, pattern);
                const auto id = influence_domain(m, v, pattern);
                const std::set<int> inside(id.begin(), id.end());
                for (std::size_t t = 0; t < base.size(); ++t) {
                    if (inside.count(int(t))) continue;
                    // Bitwise equality outside the domain.
                    for (int k = 0; k < 6; ++k)
                        REQUIRE(base.tensors[t][k] == after.tensors[t][k]);
                }
            }
        }
    }
}

TEST_CASE("dihedral angles") {
    const Mesh two = fixtures::two_triangles();
    const auto geom = face_geometry(two);
    const auto da = dihedral_angles(two, geom);
    REQUIRE(da.angles.size() == 1);
    CHECK(da.angles[0] == doctest::Approx(0.0).epsilon(1e-12)); // coplanar

    const Mesh tri = fixtures::triangle();
    CHECK(dihedral_angles(tri, face_geometry(tri)).angles.empty()); // boundary only
}

TEST_CASE("angle defect sums to 4 pi on a closed sphere") {
    const Mesh m = fixtures::sphere(14, 10);
    double total = 0.0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) total += angle_defect(m, int(v));
    CHECK(total == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("planar interior vertex has zero gaussian curvature") {
    const Mesh g = fixtures::grid(6, 6);
    const auto geom = face_geometry(g);
    const int center = 3 * 7 + 3;
    CHECK(std::fabs(gaussian_curvature(g, geom, center)) <= 1e-10);
}

TEST_CASE("vertex normal on a flat grid points along z") {
    const Mesh g = fixtures::grid(4, 4);
    const auto geom = face_geometry(g);
    const Vec3 n = vertex_normal(g, geom, 2 * 5 + 2);
    CHECK(std::fabs(std::fabs(n.z) - 1.0) <= 1e-12);
}
