#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "meshstego/meshstego.hpp"

// Deterministic mesh generators. Coordinates are snapped to six decimal
// places like the dataset files the pipeline targets.
namespace fixtures {

using meshstego::Mesh;
using meshstego::Vec3;

inline double snap6(double v) { return std::round(v * 1e6) / 1e6; }

inline Vec3 snap6(const Vec3& v) { return {snap6(v.x), snap6(v.y), snap6(v.z)}; }

inline Mesh triangle() {
    return meshstego::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
}

inline Mesh two_triangles() {
    return meshstego::make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}},
                                {{{0, 1, 2}}, {{1, 3, 2}}});
}

inline Mesh tetrahedron() {
    return meshstego::make_mesh(
        {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0}, {0.5, 0.3, 0.8}},
        {{{0, 2, 1}}, {{0, 1, 3}}, {{1, 2, 3}}, {{2, 0, 3}}});
}

// Open fan: hub vertex 0 surrounded by n triangles over a partial disc.
inline Mesh fan(int n) {
    std::vector<Vec3> vertices{{0, 0, 0}};
    std::vector<std::array<int, 3>> faces;
    const double span = 1.5 * M_PI; // open: boundary vertices exist
    for (int i = 0; i <= n; ++i) {
        const double a = span * double(i) / double(n);
        vertices.push_back(snap6(Vec3{std::cos(a), std::sin(a), 0.0}));
    }
    for (int i = 1; i <= n; ++i) faces.push_back({0, i, i + 1});
    return meshstego::make_mesh(std::move(vertices), std::move(faces));
}

// Planar grid in the z = height plane, (nx+1) x (ny+1) vertices.
inline Mesh grid(int nx, int ny, double height = 0.25) {
    std::vector<Vec3> vertices;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            vertices.push_back(snap6(Vec3{0.031250 * i, 0.031250 * j, height}));
    std::vector<std::array<int, 3>> faces;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return meshstego::make_mesh(std::move(vertices), std::move(faces));
}

// UV sphere centered in the unit cube; optional radial jitter adds surface
// detail so that cost tables are non-degenerate.
inline Mesh sphere(int nu, int nv, double radius = 0.4, unsigned seed = 0, double jitter = 0.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    auto rad = [&]() { return jitter > 0.0 ? radius * (1.0 + noise(rng)) : radius; };

    std::vector<Vec3> vertices;
    const Vec3 center{0.5, 0.5, 0.5};
    vertices.push_back(snap6(center + Vec3{0, 0, rad()})); // north pole
    for (int j = 1; j < nv; ++j) {
        const double phi = M_PI * double(j) / double(nv);
        for (int i = 0; i < nu; ++i) {
            const double theta = 2.0 * M_PI * double(i) / double(nu);
            const double r = rad();
            vertices.push_back(snap6(center + Vec3{r * std::sin(phi) * std::cos(theta),
                                                   r * std::sin(phi) * std::sin(theta),
                                                   r * std::cos(phi)}));
        }
    }
    vertices.push_back(snap6(center + Vec3{0, 0, -rad()})); // south pole
    const int south = int(vertices.size()) - 1;

    std::vector<std::array<int, 3>> faces;
    auto ring = [&](int j, int i) { return 1 + (j - 1) * nu + (i % nu); };
    for (int i = 0; i < nu; ++i) faces.push_back({0, ring(1, i), ring(1, i + 1)});
    for (int j = 1; j < nv - 1; ++j)
        for (int i = 0; i < nu; ++i) {
            faces.push_back({ring(j, i), ring(j + 1, i), ring(j + 1, i + 1)});
            faces.push_back({ring(j, i), ring(j + 1, i + 1), ring(j, i + 1)});
        }
    for (int i = 0; i < nu; ++i) faces.push_back({south, ring(nv - 1, i + 1), ring(nv - 1, i)});
    return meshstego::make_mesh(std::move(vertices), std::move(faces));
}

inline Mesh torus(int nu, int nv, double major = 0.3, double minor = 0.12, unsigned seed = 0,
                  double jitter = 0.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    std::vector<Vec3> vertices;
    const Vec3 center{0.5, 0.5, 0.5};
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * M_PI * double(i) / double(nu);
        for (int j = 0; j < nv; ++j) {
            const double v = 2.0 * M_PI * double(j) / double(nv);
            const double r = jitter > 0.0 ? minor * (1.0 + noise(rng)) : minor;
            vertices.push_back(snap6(center + Vec3{(major + r * std::cos(v)) * std::cos(u),
                                                   (major + r * std::cos(v)) * std::sin(u),
                                                   r * std::sin(v)}));
        }
    }
    std::vector<std::array<int, 3>> faces;
    auto id = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return meshstego::make_mesh(std::move(vertices), std::move(faces));
}

// Random vertex cloud with arbitrary valid faces; geometry is meaningless but
// parsing and adjacency behavior is exercised.
inline Mesh random_cloud(unsigned seed, int nv = 40, int nf = 60) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, nv - 1);
    std::vector<Vec3> vertices;
    for (int i = 0; i < nv; ++i)
        vertices.push_back(snap6(Vec3{coord(rng), coord(rng), coord(rng)}));
    std::vector<std::array<int, 3>> faces;
    while (int(faces.size()) < nf) {
        int a = pick(rng), b = pick(rng), c = pick(rng);
        if (a == b || b == c || a == c) continue;
        faces.push_back({a, b, c});
    }
    return meshstego::make_mesh(std::move(vertices), std::move(faces));
}

// A pool of curved, six-decimal meshes of varying size for pipeline tests.
inline Mesh curved_mesh(unsigned seed, int size_class = 0) {
    switch (seed % 3) {
        case 0: {
            const int nu = 16 + 4 * size_class;
            const int nv = 12 + 3 * size_class;
            return sphere(nu, nv, 0.4, seed, 0.02);
        }
        case 1: {
            const int nu = 20 + 5 * size_class;
            const int nv = 14 + 3 * size_class;
            return torus(nu, nv, 0.3, 0.12, seed, 0.03);
        }
        default: {
            const int nu = 18 + 4 * size_class;
            const int nv = 13 + 3 * size_class;
            return sphere(nu, nv, 0.35, seed, 0.05);
        }
    }
}

} // namespace fixtures
