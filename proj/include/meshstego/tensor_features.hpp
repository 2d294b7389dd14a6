#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mesh.hpp"
#include "sym3.hpp"
#include "vec3.hpp"

namespace meshstego {

inline constexpr double kResidualEpsilon = 1e-12; // guard inside the log of residuals

struct FaceAttrib {
    Vec3 normal;  // unit, or zero when degenerate
    double area = 0.0;
    bool degenerate = false;
};

inline FaceAttrib face_normal_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = cross(b - a, c - a);
    const double len = norm(n);
    FaceAttrib fa;
    fa.area = 0.5 * len;
    if (len > 0.0) {
        fa.normal = n / len;
    } else {
        fa.degenerate = true;
    }
    return fa;
}

inline FaceAttrib face_normal_area(const Mesh& m, int face) {
    const auto& f = m.faces.at(face);
    return face_normal_area(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]);
}

struct FaceGeometry {
    std::vector<FaceAttrib> faces;
};

inline FaceGeometry face_geometry(const Mesh& m) {
    FaceGeometry g;
    g.faces.reserve(m.faces.size());
    for (std::size_t f = 0; f < m.faces.size(); ++f) g.faces.push_back(face_normal_area(m, int(f)));
    return g;
}

// Normal voting tensor field for one neighborhood pattern. Pattern 1 has one
// tensor per vertex, patterns 2 and 3 one per face. Per tensor the three
// eigen-gap sequences lambda1 - lambda2, lambda2 - lambda3, lambda3 are kept;
// those are the raw material of the residual features.
struct TensorField {
    int pattern = 1;
    std::vector<Sym3> tensors;
    std::vector<double> gap12; // lambda^(1) - lambda^(2)
    std::vector<double> gap23; // lambda^(2) - lambda^(3)
    std::vector<double> lam3;  // lambda^(3)

    std::size_t size() const { return tensors.size(); }
};

namespace detail {

// Weight rule: face area normalized by the largest area in the neighborhood.
template <typename GetAttrib>
inline Sym3 vote_tensor(std::span<const int> neighborhood, GetAttrib&& attrib) {
    double max_area = 0.0;
    for (int f : neighborhood) max_area = std::max(max_area, attrib(f).area);
    Sym3 t = sym3_zero();
    if (max_area <= 0.0) return t;
    for (int f : neighborhood) {
        const FaceAttrib& fa = attrib(f);
        sym3_add_outer(t, fa.normal, fa.area / max_area);
    }
    return t;
}

inline std::span<const int> tensor_neighborhood(const Mesh& m, int pattern, int index) {
    switch (pattern) {
        case 1: return m.vertex_faces[index];
        case 2: return m.face_edge_adj[index];
        default: return m.face_vertex_adj[index];
    }
}

inline void eigen_gaps(const Sym3& t, double& g12, double& g23, double& l3) {
    auto e = sym3_eigenvalues(t);
    // Voting tensors are PSD by construction; clamp solver noise.
    for (double& v : e) v = std::max(v, 0.0);
    g12 = e[0] - e[1];
    g23 = e[1] - e[2];
    l3 = e[2];
}

} // namespace detail

inline std::size_t tensor_count(const Mesh& m, int pattern) {
    return pattern == 1 ? m.vertex_count() : m.face_count();
}

inline TensorField compute_tensor_field(const Mesh& m, const FaceGeometry& geom, int pattern) {
    if (pattern < 1 || pattern > 3) throw std::out_of_range("pattern must be 1, 2, or 3");
    TensorField field;
    field.pattern = pattern;
    const std::size_t n = tensor_count(m, pattern);
    field.tensors.resize(n);
    field.gap12.resize(n);
    field.gap23.resize(n);
    field.lam3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        field.tensors[i] = detail::vote_tensor(
            detail::tensor_neighborhood(m, pattern, int(i)),
            [&](int f) -> const FaceAttrib& { return geom.faces[f]; });
        detail::eigen_gaps(field.tensors[i], field.gap12[i], field.gap23[i], field.lam3[i]);
    }
    return field;
}

// Uniform (umbrella) Laplacian smoothing: each vertex moves toward the mean
// of its edge-connected neighbors by `factor`, `iterations` times. Vertices
// without neighbors stay put. Topology is untouched.
inline Mesh laplacian_smooth(const Mesh& m, int iterations, double factor) {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("factor must be in (0, 1]");
    std::vector<Vec3> pos = m.vertices;
    std::vector<Vec3> next(pos.size());
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t v = 0; v < pos.size(); ++v) {
            const auto& nb = m.vertex_neighbors[v];
            if (nb.empty()) {
                next[v] = pos[v];
                continue;
            }
            Vec3 mean{0, 0, 0};
            for (int u : nb) mean += pos[u];
            mean = mean / double(nb.size());
            next[v] = pos[v] + (mean - pos[v]) * factor;
        }
        pos.swap(next);
    }
    Mesh out;
    out.vertices = std::move(pos);
    out.faces = m.faces;
    detail::build_adjacency(out);
    return out;
}

struct ResidualField {
    std::vector<double> r1, r2, r3; // per eigen-gap sequence
};

inline double log_residual(double value, double smoothed) {
    return std::log(std::fabs(value - smoothed) + kResidualEpsilon);
}

inline ResidualField residuals(const TensorField& field, const TensorField& smoothed) {
    if (field.size() != smoothed.size() || field.pattern != smoothed.pattern)
        throw std::invalid_argument("residuals need matching tensor fields");
    ResidualField r;
    const std::size_t n = field.size();
    r.r1.resize(n);
    r.r2.resize(n);
    r.r3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.r1[i] = log_residual(field.gap12[i], smoothed.gap12[i]);
        r.r2[i] = log_residual(field.gap23[i], smoothed.gap23[i]);
        r.r3[i] = log_residual(field.lam3[i], smoothed.lam3[i]);
    }
    return r;
}

// Indices of tensors whose eigenvalues can change when `vertex` moves:
//   pattern 1 -> vertices of the 1-ring faces,
//   pattern 2 -> union of edge-adjacency neighborhoods over the 1-ring faces,
//   pattern 3 -> same with vertex adjacency.
inline std::vector<int> influence_domain(const Mesh& m, int vertex, int pattern) {
    if (vertex < 0 || vertex >= int(m.vertices.size()))
        throw std::out_of_range("vertex index out of range");
    std::vector<int> out;
    const auto& ring = m.vertex_faces[vertex];
    if (pattern == 1) {
        for (int f : ring)
            for (int c = 0; c < 3; ++c) out.push_back(m.faces[f][c]);
    } else if (pattern == 2 || pattern == 3) {
        for (int f : ring) {
            const auto& adj = pattern == 2 ? m.face_edge_adj[f] : m.face_vertex_adj[f];
            out.insert(out.end(), adj.begin(), adj.end());
        }
    } else {
        throw std::out_of_range("pattern must be 1, 2, or 3");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Dihedral angle per interior edge: the angle between the two face normals,
// in [0, pi], 0 for coplanar faces. Boundary and non-manifold edges, and
// edges touching a degenerate face, are skipped.
struct DihedralAngles {
    std::vector<std::pair<int, int>> edges; // face pair per angle
    std::vector<double> angles;
};

inline double angle_between_normals(const Vec3& n1, const Vec3& n2) {
    return std::acos(std::clamp(dot(n1, n2), -1.0, 1.0));
}

inline DihedralAngles dihedral_angles(const Mesh& m, const FaceGeometry& geom) {
    DihedralAngles out;
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
        for (int g : m.face_edge_adj[f]) {
            if (g <= int(f)) continue; // each unordered face pair once
            if (geom.faces[f].degenerate || geom.faces[g].degenerate) continue;
            out.edges.emplace_back(int(f), g);
            out.angles.push_back(angle_between_normals(geom.faces[f].normal, geom.faces[g].normal));
        }
    }
    return out;
}

// Area-weighted average of incident face normals.
inline Vec3 vertex_normal(const Mesh& m, const FaceGeometry& geom, int vertex) {
    Vec3 n{0, 0, 0};
    for (int f : one_ring_faces(m, vertex)) n += geom.faces[f].normal * geom.faces[f].area;
    return normalized(n);
}

// Angle defect 2*pi - sum of incident corner angles.
inline double angle_defect(const Mesh& m, int vertex) {
    double sum = 0.0;
    for (int f : one_ring_faces(m, vertex)) {
        const auto& fc = m.faces[f];
        int corner = fc[0] == vertex ? 0 : (fc[1] == vertex ? 1 : 2);
        const Vec3& p = m.vertices[vertex];
        const Vec3 e1 = m.vertices[fc[(corner + 1) % 3]] - p;
        const Vec3 e2 = m.vertices[fc[(corner + 2) % 3]] - p;
        const double l1 = norm(e1), l2 = norm(e2);
        if (l1 == 0.0 || l2 == 0.0) continue;
        sum += std::acos(std::clamp(dot(e1, e2) / (l1 * l2), -1.0, 1.0));
    }
    return 2.0 * M_PI - sum;
}

// Discrete Gaussian curvature: angle defect over one third of the incident
// face area. Vertices with no incident area get 0.
inline double gaussian_curvature(const Mesh& m, const FaceGeometry& geom, int vertex) {
    double area = 0.0;
    for (int f : one_ring_faces(m, vertex)) area += geom.faces[f].area;
    if (area <= 0.0) return 0.0;
    return angle_defect(m, vertex) / (area / 3.0);
}

} // namespace meshstego
