#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "parallel.hpp"
#include "tensor_features.hpp"

namespace meshstego {

inline constexpr int kSmoothIterations = 1;
inline constexpr double kSmoothFactor = 0.2;

enum class CostProfile { IfpdCS, IfpdS1, IfpdS2, IfpdS3, Vnd, Gcd, Dihedral };

inline const char* profile_name(CostProfile p) {
    switch (p) {
        case CostProfile::IfpdCS: return "ifpd-cs";
        case CostProfile::IfpdS1: return "ifpd-s1";
        case CostProfile::IfpdS2: return "ifpd-s2";
        case CostProfile::IfpdS3: return "ifpd-s3";
        case CostProfile::Vnd: return "vnd";
        case CostProfile::Gcd: return "gcd";
        case CostProfile::Dihedral: return "dihedral";
    }
    return "?";
}

inline std::optional<CostProfile> profile_from_name(const std::string& s) {
    for (CostProfile p : {CostProfile::IfpdCS, CostProfile::IfpdS1, CostProfile::IfpdS2,
                          CostProfile::IfpdS3, CostProfile::Vnd, CostProfile::Gcd,
                          CostProfile::Dihedral})
        if (s == profile_name(p)) return p;
    return std::nullopt;
}

inline std::vector<int> profile_patterns(CostProfile p) {
    switch (p) {
        case CostProfile::IfpdCS: return {1, 2, 3};
        case CostProfile::IfpdS1: return {1};
        case CostProfile::IfpdS2: return {2};
        case CostProfile::IfpdS3: return {3};
        default: return {};
    }
}

struct NormalizationRecord {
    int pattern = 0;
    double min = 0.0, max = 0.0;
};

// Per (vertex, channel, change) cost table over the unpadded change set.
struct CostTable {
    std::vector<std::int64_t> steps; // change set I as integer steps
    int k_star = 6;
    double mu = 1.0;
    CostProfile profile = CostProfile::IfpdCS;
    std::size_t vertices = 0;
    std::vector<double> costs; // [vertex][channel][step]
    std::vector<NormalizationRecord> normalization;

    std::size_t index(std::size_t v, int channel, std::size_t t) const {
        return (v * 3 + channel) * steps.size() + t;
    }
    double at(std::size_t v, int channel, std::size_t t) const {
        return costs[index(v, channel, t)];
    }
    std::span<const double> row(std::size_t v, int channel) const {
        return {costs.data() + index(v, channel, 0), steps.size()};
    }
};

// Min-max normalization over the whole cost set; a constant set maps to zero.
inline NormalizationRecord normalize_costs(std::span<double> costs) {
    NormalizationRecord rec;
    if (costs.empty()) return rec;
    rec.min = rec.max = costs[0];
    for (double c : costs) {
        rec.min = std::min(rec.min, c);
        rec.max = std::max(rec.max, c);
    }
    const double range = rec.max - rec.min;
    if (range <= 0.0) {
        for (double& c : costs) c = 0.0;
    } else {
        for (double& c : costs) c = (c - rec.min) / range;
    }
    return rec;
}

// Everything about the cover mesh the cost computations reuse: face geometry,
// voting tensor fields and their residuals against the smoothed mesh, and the
// per-vertex influence domains. The smoothed eigen-sets are computed once;
// per-change costs assume they do not move (the shared-smoothing assumption).
class CoverFeatureCache {
public:
    CoverFeatureCache(const Mesh& mesh, std::vector<int> patterns, bool with_dihedrals = false)
        : mesh_(mesh), patterns_(std::move(patterns)) {
        geom_ = face_geometry(mesh);
        smoothed_ = laplacian_smooth(mesh, kSmoothIterations, kSmoothFactor);
        smoothed_geom_ = face_geometry(smoothed_);
        for (int k : patterns_) {
            fields_[k - 1] = compute_tensor_field(mesh, geom_, k);
            smoothed_fields_[k - 1] = compute_tensor_field(smoothed_, smoothed_geom_, k);
            resid_[k - 1] = residuals(*fields_[k - 1], *smoothed_fields_[k - 1]);
            auto& ids = domains_[k - 1];
            ids.resize(mesh.vertex_count());
            for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
                ids[v] = influence_domain(mesh, int(v), k);
        }
        if (with_dihedrals) {
            dihedrals_ = dihedral_angles(mesh, geom_);
            angle_of_faces_.assign(mesh.face_count(), {});
            for (std::size_t a = 0; a < dihedrals_->edges.size(); ++a) {
                angle_of_faces_[dihedrals_->edges[a].first].push_back(int(a));
                angle_of_faces_[dihedrals_->edges[a].second].push_back(int(a));
            }
            vertex_angles_.resize(mesh.vertex_count());
            for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
                auto& out = vertex_angles_[v];
                for (int f : mesh.vertex_faces[v])
                    out.insert(out.end(), angle_of_faces_[f].begin(), angle_of_faces_[f].end());
                std::sort(out.begin(), out.end());
                out.erase(std::unique(out.begin(), out.end()), out.end());
            }
        }
    }

    const Mesh& mesh() const { return mesh_; }
    const std::vector<int>& patterns() const { return patterns_; }
    const FaceGeometry& geometry() const { return geom_; }
    const Mesh& smoothed_mesh() const { return smoothed_; }
    const FaceGeometry& smoothed_geometry() const { return smoothed_geom_; }
    const TensorField& field(int pattern) const { return *fields_[pattern - 1]; }
    const TensorField& smoothed_field(int pattern) const { return *smoothed_fields_[pattern - 1]; }
    const ResidualField& residual(int pattern) const { return resid_[pattern - 1]; }
    const std::vector<int>& domain(int pattern, int vertex) const {
        return domains_[pattern - 1][vertex];
    }
    const DihedralAngles& dihedrals() const { return *dihedrals_; }
    const std::vector<int>& vertex_dihedrals(int vertex) const { return vertex_angles_[vertex]; }

private:
    const Mesh& mesh_;
    std::vector<int> patterns_;
    FaceGeometry geom_;
    Mesh smoothed_;
    FaceGeometry smoothed_geom_;
    std::array<std::optional<TensorField>, 3> fields_;
    std::array<std::optional<TensorField>, 3> smoothed_fields_;
    std::array<ResidualField, 3> resid_;
    std::array<std::vector<std::vector<int>>, 3> domains_;
    std::optional<DihedralAngles> dihedrals_;
    std::vector<std::vector<int>> angle_of_faces_;
    std::vector<std::vector<int>> vertex_angles_;
};

namespace detail {

inline double step_delta(std::int64_t step, int k_star) {
    return double(step) * std::pow(10.0, -k_star);
}

// Thread-local scratch: recomputed attributes of the 1-ring faces of the
// vertex being moved, with an epoch-stamped lookup over all faces.
struct MoveScratch {
    std::vector<int> mark;
    std::vector<int> slot;
    std::vector<FaceAttrib> attribs;
    int epoch = 0;

    void init(std::size_t face_count) {
        if (mark.size() != face_count) {
            mark.assign(face_count, -1);
            slot.assign(face_count, 0);
        }
    }

    // Recomputes attributes of the faces around `vertex` with coordinate
    // `channel` moved by `delta`.
    void prepare(const Mesh& m, int vertex, int channel, double delta) {
        ++epoch;
        attribs.clear();
        Vec3 moved = m.vertices[vertex];
        moved[channel] += delta;
        for (int f : m.vertex_faces[vertex]) {
            const auto& fc = m.faces[f];
            Vec3 p[3];
            for (int c = 0; c < 3; ++c)
                p[c] = fc[c] == vertex ? moved : m.vertices[fc[c]];
            mark[f] = epoch;
            slot[f] = int(attribs.size());
            attribs.push_back(face_normal_area(p[0], p[1], p[2]));
        }
    }

    const FaceAttrib& lookup(const FaceGeometry& cover, int f) const {
        return mark[f] == epoch ? attribs[slot[f]] : cover.faces[f];
    }
};

// L1 residual change restricted to the influence domain, accumulated per
// eigen sequence then combined, matching the full-field accumulation order.
inline double ifpd_pattern_cost(const CoverFeatureCache& cache, const MoveScratch& scratch,
                                int vertex, int pattern) {
    const Mesh& m = cache.mesh();
    const TensorField& sm = cache.smoothed_field(pattern);
    const ResidualField& cover_r = cache.residual(pattern);
    double acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    for (int t : cache.domain(pattern, vertex)) {
        const Sym3 tensor =
            vote_tensor(tensor_neighborhood(m, pattern, t),
                        [&](int f) -> const FaceAttrib& { return scratch.lookup(cache.geometry(), f); });
        double g12, g23, l3;
        eigen_gaps(tensor, g12, g23, l3);
        acc1 += std::fabs(cover_r.r1[t] - log_residual(g12, sm.gap12[t]));
        acc2 += std::fabs(cover_r.r2[t] - log_residual(g23, sm.gap23[t]));
        acc3 += std::fabs(cover_r.r3[t] - log_residual(l3, sm.lam3[t]));
    }
    return acc1 + acc2 + acc3;
}

inline double dihedral_profile_entry(const CoverFeatureCache& cache, const MoveScratch& scratch,
                                     int vertex) {
    const DihedralAngles& da = cache.dihedrals();
    double acc = 0.0;
    for (int a : cache.vertex_dihedrals(vertex)) {
        const auto [f, g] = da.edges[a];
        const Vec3& n1 = scratch.lookup(cache.geometry(), f).normal;
        const Vec3& n2 = scratch.lookup(cache.geometry(), g).normal;
        acc += std::fabs(angle_between_normals(n1, n2) - da.angles[a]);
    }
    return acc;
}

} // namespace detail

// Raw (unnormalized) IFPD cost tables, one per requested pattern, computed
// with influence-domain recomputation only. Cost rows are independent across
// vertices; rows are split over threads with fixed per-row accumulation
// order, so results do not depend on the thread count.
inline std::array<std::vector<double>, 3> ifpd_raw_tables(const CoverFeatureCache& cache,
                                                          std::span<const std::int64_t> steps,
                                                          int k_star, int threads) {
    const Mesh& m = cache.mesh();
    const std::size_t nv = m.vertex_count();
    const std::size_t ns = steps.size();
    std::array<std::vector<double>, 3> tables;
    for (int k : cache.patterns()) tables[k - 1].assign(nv * 3 * ns, 0.0);

    const int workers = std::max(1, threads);
    std::vector<detail::MoveScratch> scratch(workers);
    for (auto& s : scratch) s.init(m.face_count());

    parallel_for(nv, workers, [&](std::size_t v, int w) {
        detail::MoveScratch& ms = scratch[w];
        for (int j = 0; j < 3; ++j) {
            for (std::size_t t = 0; t < ns; ++t) {
                if (steps[t] == 0) continue; // zero change, zero cost
                ms.prepare(m, int(v), j, detail::step_delta(steps[t], k_star));
                for (int k : cache.patterns())
                    tables[k - 1][(v * 3 + j) * ns + t] =
                        detail::ifpd_pattern_cost(cache, ms, int(v), k);
            }
        }
    });
    return tables;
}

// Full IFPD cost table: per-pattern raw tables, min-max normalized over all
// (vertex, channel, change) entries per pattern, summed and scaled by mu.
inline CostTable ifpd_cost_table(const CoverFeatureCache& cache,
                                 std::span<const std::int64_t> steps, int k_star, double mu,
                                 int threads, CostProfile profile = CostProfile::IfpdCS) {
    CostTable table;
    table.steps.assign(steps.begin(), steps.end());
    table.k_star = k_star;
    table.mu = mu;
    table.profile = profile;
    table.vertices = cache.mesh().vertex_count();
    table.costs.assign(table.vertices * 3 * steps.size(), 0.0);

    auto raw = ifpd_raw_tables(cache, steps, k_star, threads);
    for (int k : cache.patterns()) {
        NormalizationRecord rec = normalize_costs(raw[k - 1]);
        rec.pattern = k;
        table.normalization.push_back(rec);
        for (std::size_t idx = 0; idx < table.costs.size(); ++idx)
            table.costs[idx] += raw[k - 1][idx];
    }
    for (double& c : table.costs) c *= mu;
    return table;
}

inline CostTable ifpd_cost_table(const Mesh& m, std::span<const std::int64_t> steps, int k_star,
                                 double mu, int threads, CostProfile profile = CostProfile::IfpdCS) {
    std::vector<int> patterns = profile_patterns(profile);
    if (patterns.empty()) throw std::invalid_argument("profile has no tensor patterns");
    CoverFeatureCache cache(m, patterns);
    return ifpd_cost_table(cache, steps, k_star, mu, threads, profile);
}

// Slow reference: rebuilds the complete tensor field of the modified mesh per
// query and takes the L1 residual difference over all elements. The cover
// side is cached at construction; the smoothed eigen-sets are shared with the
// modified mesh exactly as in the accelerated path.
class OfpdReference {
public:
    OfpdReference(const Mesh& mesh, std::vector<int> patterns)
        : cache_(mesh, std::move(patterns)), positions_(mesh.vertices) {}

    double cost(int vertex, int channel, std::int64_t step, int k_star, int pattern) {
        if (step == 0) return 0.0;
        const Mesh& m = cache_.mesh();
        const double saved = positions_[vertex][channel];
        positions_[vertex][channel] = saved + detail::step_delta(step, k_star);
        FaceGeometry geom;
        geom.faces.reserve(m.face_count());
        for (std::size_t f = 0; f < m.face_count(); ++f) {
            const auto& fc = m.faces[f];
            geom.faces.push_back(
                face_normal_area(positions_[fc[0]], positions_[fc[1]], positions_[fc[2]]));
        }
        const TensorField field = compute_tensor_field(m, geom, pattern);
        const ResidualField r = residuals(field, cache_.smoothed_field(pattern));
        positions_[vertex][channel] = saved;

        const ResidualField& cover_r = cache_.residual(pattern);
        double acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
        for (std::size_t t = 0; t < field.size(); ++t) acc1 += std::fabs(cover_r.r1[t] - r.r1[t]);
        for (std::size_t t = 0; t < field.size(); ++t) acc2 += std::fabs(cover_r.r2[t] - r.r2[t]);
        for (std::size_t t = 0; t < field.size(); ++t) acc3 += std::fabs(cover_r.r3[t] - r.r3[t]);
        return acc1 + acc2 + acc3;
    }

    const CoverFeatureCache& cache() const { return cache_; }

private:
    CoverFeatureCache cache_;
    std::vector<Vec3> positions_;
};

// Self-contained single-entry reference; recomputes cover, smoothed, and
// modified fields from scratch on every call.
inline double ofpd_cost(const Mesh& m, int vertex, int channel, std::int64_t step, int k_star,
                        int pattern) {
    OfpdReference ref(m, {pattern});
    return ref.cost(vertex, channel, step, k_star, pattern);
}

// Variant without the shared-smoothing assumption: the modified mesh is
// re-smoothed and its own smoothed eigen-sets are used. Quantifies the error
// the assumption introduces; not part of the embedding pipeline.
inline double ofpd_cost_strict(const Mesh& m, int vertex, int channel, std::int64_t step,
                               int k_star, int pattern) {
    Mesh modified = m; // same topology, adjacency caches stay valid
    modified.vertices[vertex][channel] += detail::step_delta(step, k_star);
    modified.decimals.clear();

    const auto field_resid = [&](const Mesh& mesh) {
        FaceGeometry g = face_geometry(mesh);
        Mesh sm = laplacian_smooth(mesh, kSmoothIterations, kSmoothFactor);
        FaceGeometry smg = face_geometry(sm);
        TensorField f = compute_tensor_field(mesh, g, pattern);
        TensorField sf = compute_tensor_field(sm, smg, pattern);
        return residuals(f, sf);
    };
    const ResidualField rc = field_resid(m);
    const ResidualField rm = field_resid(modified);
    double acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    for (std::size_t t = 0; t < rc.r1.size(); ++t) acc1 += std::fabs(rc.r1[t] - rm.r1[t]);
    for (std::size_t t = 0; t < rc.r2.size(); ++t) acc2 += std::fabs(rc.r2[t] - rm.r2[t]);
    for (std::size_t t = 0; t < rc.r3.size(); ++t) acc3 += std::fabs(rc.r3[t] - rm.r3[t]);
    return acc1 + acc2 + acc3;
}

// Per-vertex flat comparison profiles.
inline double vnd_cost(const CoverFeatureCache& cache, int vertex, double sigma) {
    const Vec3 n = vertex_normal(cache.mesh(), cache.geometry(), vertex);
    const Vec3 ns = vertex_normal(cache.smoothed_mesh(), cache.smoothed_geometry(), vertex);
    return 1.0 / (std::log(norm(n - ns) + 1.0) + sigma);
}

inline double gcd_cost(const CoverFeatureCache& cache, int vertex, double sigma, double beta) {
    // |K|^beta keeps the cost positive at saddle vertices.
    const double k = std::fabs(gaussian_curvature(cache.mesh(), cache.geometry(), vertex));
    return 1.0 / (std::pow(k, beta) + sigma);
}

// Flat table: the same per-vertex cost for every nonzero change.
inline CostTable flat_profile_table(const Mesh& m, std::span<const double> per_vertex,
                                    std::span<const std::int64_t> steps, int k_star,
                                    CostProfile profile) {
    CostTable table;
    table.steps.assign(steps.begin(), steps.end());
    table.k_star = k_star;
    table.profile = profile;
    table.vertices = m.vertex_count();
    table.costs.assign(table.vertices * 3 * steps.size(), 0.0);
    for (std::size_t v = 0; v < table.vertices; ++v)
        for (int j = 0; j < 3; ++j)
            for (std::size_t t = 0; t < steps.size(); ++t)
                if (steps[t] != 0) table.costs[table.index(v, j, t)] = per_vertex[v];
    return table;
}

inline CostTable vnd_cost_table(const Mesh& m, std::span<const std::int64_t> steps, int k_star,
                                double sigma) {
    CoverFeatureCache cache(m, {});
    std::vector<double> c(m.vertex_count());
    for (std::size_t v = 0; v < c.size(); ++v) c[v] = vnd_cost(cache, int(v), sigma);
    return flat_profile_table(m, c, steps, k_star, CostProfile::Vnd);
}

inline CostTable gcd_cost_table(const Mesh& m, std::span<const std::int64_t> steps, int k_star,
                                double sigma, double beta) {
    CoverFeatureCache cache(m, {});
    std::vector<double> c(m.vertex_count());
    for (std::size_t v = 0; v < c.size(); ++v) c[v] = gcd_cost(cache, int(v), sigma, beta);
    return flat_profile_table(m, c, steps, k_star, CostProfile::Gcd);
}

// Diagnostic profile: raw L1 change of the dihedral angles touched by the
// move. Planar-interior in-plane moves cost exactly zero here, which is the
// reason this profile is not used for embedding.
inline CostTable dihedral_cost_table(const Mesh& m, std::span<const std::int64_t> steps,
                                     int k_star, int threads) {
    CoverFeatureCache cache(m, {}, true);
    CostTable table;
    table.steps.assign(steps.begin(), steps.end());
    table.k_star = k_star;
    table.profile = CostProfile::Dihedral;
    table.vertices = m.vertex_count();
    table.costs.assign(table.vertices * 3 * steps.size(), 0.0);

    const int workers = std::max(1, threads);
    std::vector<detail::MoveScratch> scratch(workers);
    for (auto& s : scratch) s.init(m.face_count());
    parallel_for(table.vertices, workers, [&](std::size_t v, int w) {
        detail::MoveScratch& ms = scratch[w];
        for (int j = 0; j < 3; ++j)
            for (std::size_t t = 0; t < steps.size(); ++t) {
                if (steps[t] == 0) continue;
                ms.prepare(m, int(v), j, detail::step_delta(steps[t], k_star));
                table.costs[table.index(v, j, t)] =
                    detail::dihedral_profile_entry(cache, ms, int(v));
            }
    });
    return table;
}

inline CostTable build_cost_table(const Mesh& m, CostProfile profile,
                                  std::span<const std::int64_t> steps, int k_star, double mu,
                                  int threads, double sigma = 1e-4, double beta = 1.0) {
    switch (profile) {
        case CostProfile::Vnd: return vnd_cost_table(m, steps, k_star, sigma);
        case CostProfile::Gcd: return gcd_cost_table(m, steps, k_star, sigma, beta);
        case CostProfile::Dihedral: return dihedral_cost_table(m, steps, k_star, threads);
        default: return ifpd_cost_table(m, steps, k_star, mu, threads, profile);
    }
}

} // namespace meshstego
