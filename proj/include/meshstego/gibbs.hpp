#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "distortion.hpp"

namespace meshstego {

class CapacityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PayloadPlan {
    double alpha = 0.0;                      // total bits per vertex
    std::array<double, 3> per_channel{};     // alpha_x, alpha_y, alpha_z
};

// Uniform split; the sum constraint holds exactly.
inline PayloadPlan split_payload(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("payload must be positive");
    PayloadPlan plan;
    plan.alpha = alpha;
    const double third = alpha / 3.0;
    plan.per_channel = {third, third, alpha - 2.0 * third};
    return plan;
}

// Shannon entropy in nats with 0 ln 0 = 0.
inline double entropy_nats(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

struct ChangeDistribution {
    std::size_t vertices = 0;
    std::size_t change_count = 0;
    std::vector<double> probs; // [vertex][change]
    double lambda = 0.0;
    double achieved_entropy = 0.0; // nats, summed over the channel
    // Set when the entropy target is below what any lambda can reach (for
    // example every row has tied minimal costs); the returned distribution
    // then carries more capacity than requested.
    bool saturated = false;

    std::span<const double> row(std::size_t v) const {
        return {probs.data() + v * change_count, change_count};
    }
};

namespace detail {

// Gibbs weights per row with the row minimum subtracted before
// exponentiation, so large lambda cannot underflow every weight.
inline void gibbs_row(std::span<const double> costs, double lambda, std::span<double> out) {
    double lo = costs[0];
    for (double c : costs) lo = std::min(lo, c);
    double z = 0.0;
    for (std::size_t t = 0; t < costs.size(); ++t) {
        out[t] = std::exp(-lambda * (costs[t] - lo));
        z += out[t];
    }
    for (std::size_t t = 0; t < costs.size(); ++t) out[t] /= z;
}

inline double channel_entropy(const CostTable& table, int channel, double lambda) {
    double h = 0.0;
    std::vector<double> row(table.steps.size());
    for (std::size_t v = 0; v < table.vertices; ++v) {
        gibbs_row(table.row(v, channel), lambda, row);
        h += entropy_nats(row);
    }
    return h;
}

} // namespace detail

// Finds lambda with channel entropy equal to `target_nats` by bracketing and
// bisection; entropy is non-increasing in lambda, ln|I| per vertex at
// lambda = 0 and concentrated on the cheapest changes as lambda grows.
inline ChangeDistribution solve_lambda(const CostTable& table, int channel, double target_nats,
                                       double rel_tol = 1e-6, int max_iterations = 200) {
    const std::size_t nv = table.vertices;
    const std::size_t nc = table.steps.size();
    if (nc < 2) throw std::invalid_argument("change set needs at least two entries");
    const double h_max = double(nv) * std::log(double(nc));
    if (!(target_nats > 0.0)) throw CapacityError("entropy target must be positive");
    if (target_nats > h_max * (1.0 + 1e-12))
        throw CapacityError("entropy target " + std::to_string(target_nats) +
                            " nats exceeds channel capacity " + std::to_string(h_max) + " nats");

    const double tol = rel_tol * target_nats;
    double lambda = 0.0;
    bool saturated = false;

    double h0 = detail::channel_entropy(table, channel, 0.0);
    if (h0 <= target_nats + tol) {
        lambda = 0.0; // target at (or within tolerance of) the uniform bound
    } else {
        double lo = 0.0, hi = 1.0;
        double h_hi = detail::channel_entropy(table, channel, hi);
        int doublings = 0;
        while (h_hi > target_nats && doublings < 200) {
            lo = hi;
            hi *= 2.0;
            h_hi = detail::channel_entropy(table, channel, hi);
            ++doublings;
        }
        if (h_hi > target_nats) {
            // Entropy floor above the target: tied-minimum rows keep their
            // mass spread no matter how large lambda becomes.
            saturated = true;
            lambda = std::fabs(h_hi - h0) < 1e-12 * std::max(1.0, h0) ? 0.0 : hi;
        } else {
            for (int it = 0; it < max_iterations; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double h_mid = detail::channel_entropy(table, channel, mid);
                if (std::fabs(h_mid - target_nats) <= tol) {
                    lo = hi = mid;
                    break;
                }
                if (h_mid > target_nats)
                    lo = mid;
                else
                    hi = mid;
            }
            lambda = 0.5 * (lo + hi);
        }
    }

    ChangeDistribution dist;
    dist.vertices = nv;
    dist.change_count = nc;
    dist.probs.resize(nv * nc);
    dist.lambda = lambda;
    dist.saturated = saturated;
    std::vector<double> row(nc);
    for (std::size_t v = 0; v < nv; ++v) {
        detail::gibbs_row(table.row(v, channel), lambda, row);
        for (std::size_t t = 0; t < nc; ++t) dist.probs[v * nc + t] = row[t];
        dist.achieved_entropy += entropy_nats(row);
    }
    return dist;
}

// The objective of the discretized sender problem for one channel.
inline double expected_distortion(const CostTable& table, int channel,
                                  const ChangeDistribution& dist) {
    if (dist.vertices != table.vertices || dist.change_count != table.steps.size())
        throw std::invalid_argument("distribution shape does not match cost table");
    double d = 0.0;
    for (std::size_t v = 0; v < table.vertices; ++v) {
        auto costs = table.row(v, channel);
        auto probs = dist.row(v);
        for (std::size_t t = 0; t < costs.size(); ++t) d += costs[t] * probs[t];
    }
    return d;
}

} // namespace meshstego
