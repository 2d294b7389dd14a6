#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gibbs.hpp"
#include "quantize.hpp"
#include "stc.hpp"

namespace meshstego {

class ParamsError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal Q with |I| <= 2^Q.
inline int determine_q(std::size_t set_size) {
    if (set_size < 2) throw std::invalid_argument("change set needs at least 2 entries");
    int q = 1;
    while ((std::size_t(1) << q) < set_size) ++q;
    return q;
}

// Change set padded to 2^Q entries. The original entries keep their order;
// filler steps extend past the maximum so that every entry has a distinct
// residue mod 2^Q, which makes the layered bit decomposition invertible.
// Filler entries carry probability zero downstream.
struct ChangeSet {
    std::vector<std::int64_t> steps;
    std::vector<std::uint8_t> padded;
    int q = 0;
    std::size_t original_count = 0;

    std::size_t size() const { return steps.size(); }
};

inline ChangeSet pad_changeset(std::span<const std::int64_t> steps) {
    ChangeSet cs;
    cs.q = determine_q(steps.size());
    cs.original_count = steps.size();
    cs.steps.assign(steps.begin(), steps.end());
    cs.padded.assign(steps.size(), 0);

    const std::uint64_t modulus = std::uint64_t(1) << cs.q;
    std::vector<std::uint8_t> used(modulus, 0);
    bool has_zero = false;
    std::int64_t max_step = steps[0];
    for (std::int64_t s : steps) {
        const std::uint64_t res = (std::uint64_t)s & (modulus - 1);
        if (used[res])
            throw std::invalid_argument("change steps collide modulo 2^Q; set not layerable");
        used[res] = 1;
        has_zero = has_zero || s == 0;
        max_step = std::max(max_step, s);
    }
    if (!has_zero) throw std::invalid_argument("change set must contain 0");

    std::int64_t candidate = max_step;
    while (cs.steps.size() < modulus) {
        ++candidate;
        const std::uint64_t res = (std::uint64_t)candidate & (modulus - 1);
        if (used[res]) continue;
        used[res] = 1;
        cs.steps.push_back(candidate);
        cs.padded.push_back(1);
    }
    return cs;
}

namespace detail {

inline double binary_entropy_nats(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t layer_seed(std::uint64_t base, int channel, int layer) {
    return splitmix64(base ^ splitmix64(std::uint64_t(channel) * 16 + std::uint64_t(layer)));
}

} // namespace detail

// Expected conditional entropy of each stego bit layer, before any embedding:
// layer l of vertex i contributes sum over bit histories of
// P(history) * H(b(l) | history). By the chain rule the per-vertex layer sum
// equals the entropy of the padded change distribution.
inline std::vector<double> layer_entropy_budgets(const ChangeSet& cs,
                                                 std::span<const std::int64_t> integers,
                                                 std::span<const double> padded_probs,
                                                 std::vector<double>* per_vertex_total = nullptr) {
    const int q = cs.q;
    const std::size_t width = cs.size();
    const std::size_t nv = integers.size();
    std::vector<double> budgets(q, 0.0);
    if (per_vertex_total) per_vertex_total->assign(nv, 0.0);

    std::vector<double> prob_by_bits(width);
    for (std::size_t v = 0; v < nv; ++v) {
        // Index probabilities by the low Q bits of the stego integer; the
        // distinct-residue property makes this a bijection.
        for (std::size_t t = 0; t < width; ++t) {
            const std::uint64_t bits =
                (std::uint64_t)(integers[v] + cs.steps[t]) & (width - 1);
            prob_by_bits[bits] = padded_probs[v * width + t];
        }
        for (int l = 1; l <= q; ++l) {
            const std::size_t stride = std::size_t(1) << (l - 1);
            double layer_h = 0.0;
            for (std::size_t p = 0; p < stride; ++p) {
                double mass = 0.0, mass0 = 0.0;
                for (std::size_t b = p; b < width; b += stride) {
                    mass += prob_by_bits[b];
                    if (((b >> (l - 1)) & 1) == 0) mass0 += prob_by_bits[b];
                }
                if (mass > 0.0) layer_h += mass * detail::binary_entropy_nats(mass0 / mass);
            }
            budgets[l - 1] += layer_h;
            if (per_vertex_total) (*per_vertex_total)[v] += layer_h;
        }
    }
    return budgets;
}

// State of the layer-by-layer bit modification probability calculation for
// one channel: the surviving probability subset per vertex and the running
// history mass (row 1 of the storage array), with rows 2..Q+1 caching each
// layer's conditional probability of a zero bit.
class BmpChannelState {
public:
    BmpChannelState(const ChangeSet& cs, std::span<const std::int64_t> integers,
                    std::span<const double> padded_probs)
        : cs_(cs),
          integers_(integers.begin(), integers.end()),
          probs_(padded_probs.begin(), padded_probs.end()) {
        if (cs_.size() > 32)
            throw std::invalid_argument("padded change sets above 32 entries are unsupported");
        const std::size_t nv = integers_.size();
        survive_.assign(nv, std::uint32_t((std::uint64_t(1) << cs_.size()) - 1));
        a_.assign(std::size_t(cs_.q + 1) * nv, 0.0);
        for (std::size_t v = 0; v < nv; ++v) a_[v] = 1.0; // row 1 starts at one
        committed_ = 0;
    }

    int q() const { return cs_.q; }
    std::size_t vertex_count() const { return integers_.size(); }

    int stego_bit(std::size_t vertex, std::size_t entry, int layer) const {
        return bit_of(integers_[vertex] + cs_.steps[entry], layer);
    }

    // P(b(l) = 0 | realized history) per vertex. When the surviving subset
    // has zero mass (the trellis was forced into a padded branch) the
    // conditional degrades to the uniform distribution over the survivors.
    std::vector<double> layer_probabilities(int layer) const {
        check_layer(layer);
        const std::size_t nv = vertex_count();
        std::vector<double> p0(nv);
        for (std::size_t v = 0; v < nv; ++v) {
            double mass = 0.0, mass0 = 0.0;
            int count = 0, count0 = 0;
            for_survivors(v, [&](std::size_t t) {
                const double p = probs_[v * cs_.size() + t];
                mass += p;
                ++count;
                if (stego_bit(v, t, layer) == 0) {
                    mass0 += p;
                    ++count0;
                }
            });
            p0[v] = mass > 0.0 ? std::clamp(mass0 / mass, 0.0, 1.0)
                               : double(count0) / double(count);
        }
        return p0;
    }

    // Fixes layer `layer` to the realized stego bits: keeps the matching
    // partition of each surviving subset and folds the realized conditional
    // into the running history mass.
    void commit_layer(int layer, std::span<const std::uint8_t> stego_bits) {
        check_layer(layer);
        const std::size_t nv = vertex_count();
        if (stego_bits.size() != nv) throw std::invalid_argument("stego bit count mismatch");
        std::vector<double> p0 = layer_probabilities(layer);
        for (std::size_t v = 0; v < nv; ++v) {
            std::uint32_t keep = 0;
            for_survivors(v, [&](std::size_t t) {
                if (stego_bit(v, t, layer) == (stego_bits[v] & 1)) keep |= std::uint32_t(1) << t;
            });
            survive_[v] = keep;
            a_[std::size_t(layer) * nv + v] = p0[v]; // row layer+1: layer's conditional
            a_[v] *= stego_bits[v] ? 1.0 - p0[v] : p0[v];
        }
        ++committed_;
    }

    // Survivor bitmask over padded change entries.
    std::uint32_t survivors(std::size_t vertex) const { return survive_[vertex]; }

    template <typename Fn>
    void for_survivors(std::size_t vertex, Fn&& fn) const {
        std::uint32_t mask = survive_[vertex];
        while (mask) {
            const int t = __builtin_ctz(mask);
            fn(std::size_t(t));
            mask &= mask - 1;
        }
    }

    // Storage array A of shape (Q+1) x |V|: row 1 is the running history
    // probability, row l > 1 the conditional P(b(l-1) = 0 | history).
    std::span<const double> a_row(int row) const {
        if (row < 1 || row > cs_.q + 1) throw std::out_of_range("A row out of range");
        return {a_.data() + std::size_t(row - 1) * vertex_count(), vertex_count()};
    }

    // After all Q layers each vertex has exactly one survivor.
    std::vector<std::int64_t> realized_steps() const {
        if (committed_ != cs_.q) throw std::logic_error("not all layers committed");
        std::vector<std::int64_t> out(vertex_count());
        for (std::size_t v = 0; v < vertex_count(); ++v) {
            const std::uint32_t mask = survive_[v];
            if (mask == 0 || (mask & (mask - 1)) != 0)
                throw std::logic_error("survivor set is not a singleton");
            out[v] = cs_.steps[__builtin_ctz(mask)];
        }
        return out;
    }

    const ChangeSet& change_set() const { return cs_; }

private:
    void check_layer(int layer) const {
        if (layer != committed_ + 1)
            throw std::logic_error("layers must be processed in order starting at 1");
        if (layer < 1 || layer > cs_.q) throw std::out_of_range("layer out of range");
    }

    ChangeSet cs_;
    std::vector<std::int64_t> integers_;
    std::vector<double> probs_;
    std::vector<std::uint32_t> survive_;
    std::vector<double> a_;
    int committed_ = 0;
};

// Shared sender/receiver configuration, sufficient for extraction.
struct StegoParams {
    int version = 1;
    int k_star = 6;
    int h_star = 0;
    std::vector<std::int64_t> changes; // unpadded I
    int q = 0;
    double alpha = 0.0;
    std::array<double, 3> alpha_split{};
    int stc_h = 12;
    std::uint64_t stc_seed = 1;
    std::array<std::vector<std::uint32_t>, 3> msg_lens; // [channel][layer]
    std::array<int, 3> channel_order{0, 1, 2};
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double_exact(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParamsError("malformed number '" + std::string(s) + "' in parameter file");
    return v;
}

inline long long parse_ll_exact(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParamsError("malformed integer '" + std::string(s) + "' in parameter file");
    return v;
}

inline unsigned long long parse_ull_exact(std::string_view s) {
    unsigned long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParamsError("malformed integer '" + std::string(s) + "' in parameter file");
    return v;
}

inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

} // namespace detail

inline std::string serialize_params(const StegoParams& p) {
    std::string out;
    out += "version = " + std::to_string(p.version) + "\n";
    out += "k_star = " + std::to_string(p.k_star) + "\n";
    out += "h_star = " + std::to_string(p.h_star) + "\n";
    out += "changes = ";
    for (std::size_t i = 0; i < p.changes.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(p.changes[i]);
    }
    out += "\n";
    out += "q = " + std::to_string(p.q) + "\n";
    out += "alpha = " + detail::format_double(p.alpha) + "\n";
    out += "alpha_split = " + detail::format_double(p.alpha_split[0]) + "," +
           detail::format_double(p.alpha_split[1]) + "," +
           detail::format_double(p.alpha_split[2]) + "\n";
    out += "stc_h = " + std::to_string(p.stc_h) + "\n";
    out += "stc_seed = " + std::to_string(p.stc_seed) + "\n";
    out += "msg_lens = ";
    static const char* names = "xyz";
    for (int j = 0; j < 3; ++j) {
        if (j) out += ";";
        out += names[j];
        out += ":";
        for (std::size_t l = 0; l < p.msg_lens[j].size(); ++l) {
            if (l) out += ",";
            out += std::to_string(p.msg_lens[j][l]);
        }
    }
    out += "\n";
    out += "channel_order = x,y,z\n";
    return out;
}

inline StegoParams parse_params(std::string_view text) {
    StegoParams p;
    std::array<bool, 11> seen{};
    const char* keys[11] = {"version", "k_star",   "h_star",   "changes",
                            "q",       "alpha",    "alpha_split", "stc_h",
                            "stc_seed", "msg_lens", "channel_order"};

    for (std::string_view line : detail::split_view(text, '\n')) {
        if (line.empty()) continue;
        const std::size_t eq = line.find(" = ");
        if (eq == std::string_view::npos)
            throw ParamsError("malformed parameter line '" + std::string(line) + "'");
        const std::string_view key = line.substr(0, eq);
        const std::string_view value = line.substr(eq + 3);
        int ki = -1;
        for (int i = 0; i < 11; ++i)
            if (key == keys[i]) ki = i;
        if (ki < 0) throw ParamsError("unknown parameter key '" + std::string(key) + "'");
        if (seen[ki]) throw ParamsError("duplicate parameter key '" + std::string(key) + "'");
        seen[ki] = true;

        switch (ki) {
            case 0: p.version = int(detail::parse_ll_exact(value)); break;
            case 1: p.k_star = int(detail::parse_ll_exact(value)); break;
            case 2: p.h_star = int(detail::parse_ll_exact(value)); break;
            case 3: {
                p.changes.clear();
                for (auto tok : detail::split_view(value, ','))
                    p.changes.push_back(detail::parse_ll_exact(tok));
                break;
            }
            case 4: p.q = int(detail::parse_ll_exact(value)); break;
            case 5: p.alpha = detail::parse_double_exact(value); break;
            case 6: {
                auto parts = detail::split_view(value, ',');
                if (parts.size() != 3) throw ParamsError("alpha_split needs three values");
                for (int c = 0; c < 3; ++c)
                    p.alpha_split[c] = detail::parse_double_exact(parts[c]);
                break;
            }
            case 7: p.stc_h = int(detail::parse_ll_exact(value)); break;
            case 8: p.stc_seed = detail::parse_ull_exact(value); break;
            case 9: {
                auto channels = detail::split_view(value, ';');
                if (channels.size() != 3) throw ParamsError("msg_lens needs three channels");
                static const char* names = "xyz";
                for (int j = 0; j < 3; ++j) {
                    if (channels[j].size() < 2 || channels[j][0] != names[j] ||
                        channels[j][1] != ':')
                        throw ParamsError("msg_lens channel prefix mismatch");
                    p.msg_lens[j].clear();
                    const std::string_view list = channels[j].substr(2);
                    if (!list.empty())
                        for (auto tok : detail::split_view(list, ','))
                            p.msg_lens[j].push_back(std::uint32_t(detail::parse_ull_exact(tok)));
                }
                break;
            }
            case 10:
                if (value != "x,y,z")
                    throw ParamsError("unsupported channel order '" + std::string(value) + "'");
                break;
        }
    }
    for (int i = 0; i < 11; ++i)
        if (!seen[i]) throw ParamsError(std::string("missing parameter key '") + keys[i] + "'");
    if (p.version != 1) throw ParamsError("unsupported parameter version");
    return p;
}

inline constexpr double kMessageSafetyFactor = 0.95;
inline constexpr double kFlipProbFloor = 1e-9;

struct EmbedConfig {
    double alpha = 0.0;
    std::vector<std::int64_t> changes;
    int k_star = 6;
    int stc_h = 12;
    std::uint64_t stc_seed = 1;
    double safety = kMessageSafetyFactor;
};

struct ChannelReport {
    double lambda = 0.0;
    double achieved_entropy = 0.0; // nats
    double expected_distortion = 0.0;
    std::vector<double> layer_budget_nats;
    std::vector<std::uint32_t> msg_lens;
    std::vector<std::int64_t> realized_steps;
};

struct EmbedResult {
    Mesh stego;
    StegoParams params;
    std::array<ChannelReport, 3> channels;
    std::size_t embedded_bits = 0;
    std::size_t capacity_bits = 0;
    std::size_t padded_realizations = 0; // nonzero only if the coder was forced wet
};

struct CapacityReport {
    int q = 0;
    std::array<double, 3> channel_entropy_nats{};
    std::array<std::vector<double>, 3> layer_budget_nats;
    std::array<std::vector<std::uint32_t>, 3> layer_budget_bits;
    std::size_t total_bits = 0;
    double max_alpha = 0.0; // 3 * log2 |I|
    double net_alpha = 0.0; // total_bits / |V|
};

namespace detail {

struct ChannelPlanData {
    QuantizedChannel quant;
    ChangeDistribution dist;
    std::vector<double> padded_probs;
    std::vector<double> budgets_nats;
    std::vector<std::uint32_t> budget_bits;
};

inline std::vector<double> pad_probs(const ChangeSet& cs, const ChangeDistribution& dist) {
    const std::size_t nv = dist.vertices;
    std::vector<double> out(nv * cs.size(), 0.0);
    for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t t = 0; t < cs.original_count; ++t)
            out[v * cs.size() + t] = dist.probs[v * cs.original_count + t];
    return out;
}

inline ChannelPlanData plan_channel(const Mesh& cover, const CostTable& table,
                                    const ChangeSet& cs, int channel, double alpha_j, int k_star,
                                    double safety) {
    ChannelPlanData data;
    data.quant = integer_map(cover, channel, k_star);
    const double target = alpha_j * double(cover.vertex_count()) * std::log(2.0);
    data.dist = solve_lambda(table, channel, target);
    data.padded_probs = pad_probs(cs, data.dist);
    data.budgets_nats = layer_entropy_budgets(cs, data.quant.integers, data.padded_probs);
    data.budget_bits.resize(cs.q);
    for (int l = 0; l < cs.q; ++l)
        data.budget_bits[l] =
            std::uint32_t(std::floor(safety * data.budgets_nats[l] / std::log(2.0)));
    return data;
}

} // namespace detail

// The full embedding pipeline for one mesh: per channel, integer-map the
// coordinates, solve the sender problem on the cost table, then walk the
// bitplanes LSB-up, each time computing the BMP conditionals and running one
// binary STC pass. Layers that carry no message bits fall back to the
// cheapest surviving change so an empty message leaves the mesh untouched.
inline EmbedResult embed(const Mesh& cover, std::span<const std::uint8_t> message_bits,
                         const EmbedConfig& cfg, const CostTable& table) {
    if (table.vertices != cover.vertex_count())
        throw std::invalid_argument("cost table does not match mesh");
    if (table.steps != cfg.changes)
        throw std::invalid_argument("cost table change set does not match configuration");
    const ChangeSet cs = pad_changeset(cfg.changes);
    const PayloadPlan plan = split_payload(cfg.alpha);
    const std::size_t nv = cover.vertex_count();

    EmbedResult result;
    std::array<detail::ChannelPlanData, 3> plans;
    std::size_t capacity = 0;
    for (int j = 0; j < 3; ++j) {
        plans[j] = detail::plan_channel(cover, table, cs, j, plan.per_channel[j], cfg.k_star,
                                        cfg.safety);
        for (auto b : plans[j].budget_bits) capacity += b;
    }
    result.capacity_bits = capacity;
    if (message_bits.size() > capacity)
        throw CapacityError("message of " + std::to_string(message_bits.size()) +
                            " bits exceeds capacity " + std::to_string(capacity) +
                            " bits; achievable payload is " +
                            std::to_string(double(capacity) / double(nv)) + " bpv");

    // Shared mask width over every channel and reachable stego value.
    int h_star = cs.q;
    for (int j = 0; j < 3; ++j)
        h_star = std::max(h_star, choose_bit_width(plans[j].quant.integers, cs.steps, cs.q));

    StegoParams params;
    params.k_star = cfg.k_star;
    params.h_star = h_star;
    params.changes = cfg.changes;
    params.q = cs.q;
    params.alpha = cfg.alpha;
    params.alpha_split = plan.per_channel;
    params.stc_h = cfg.stc_h;
    params.stc_seed = cfg.stc_seed;

    std::size_t cursor = 0; // position in the message bit stream
    std::vector<Vec3> stego_positions = cover.vertices;
    const double scale = std::pow(10.0, -cfg.k_star);

    for (int j = 0; j < 3; ++j) {
        detail::ChannelPlanData& cp = plans[j];
        cp.quant.bit_width = h_star;
        BmpChannelState state(cs, cp.quant.integers, cp.padded_probs);
        ChannelReport& report = result.channels[j];
        report.lambda = cp.dist.lambda;
        report.achieved_entropy = cp.dist.achieved_entropy;
        report.expected_distortion = expected_distortion(table, j, cp.dist);
        report.layer_budget_nats = cp.budgets_nats;

        for (int l = 1; l <= cs.q; ++l) {
            const std::uint32_t chunk_len = std::uint32_t(
                std::min<std::size_t>(cp.budget_bits[l - 1], message_bits.size() - cursor));
            std::vector<std::uint8_t> stego_bits(nv);

            if (chunk_len > 0) {
                const std::vector<double> p0 = state.layer_probabilities(l);
                std::vector<std::uint8_t> likely(nv);
                std::vector<double> flip_cost(nv);
                for (std::size_t v = 0; v < nv; ++v) {
                    likely[v] = p0[v] >= 0.5 ? 0 : 1;
                    const double pf =
                        std::clamp(std::min(p0[v], 1.0 - p0[v]), kFlipProbFloor, 0.5);
                    flip_cost[v] = std::log((1.0 - pf) / pf);
                }
                const Submatrix sub = build_submatrix(
                    cfg.stc_h, nv, chunk_len, detail::layer_seed(cfg.stc_seed, j, l));
                auto enc = stc_encode(likely, flip_cost,
                                      message_bits.subspan(cursor, chunk_len), sub);
                stego_bits = std::move(enc.stego);
                cursor += chunk_len;
            } else {
                // No message bits here: take the cheapest surviving change
                // (padding counts as unusable) so that an untouched channel
                // realizes zero change.
                for (std::size_t v = 0; v < nv; ++v) {
                    double best_cost = std::numeric_limits<double>::infinity();
                    std::int64_t best_abs = 0;
                    std::size_t best_t = 0;
                    bool found = false;
                    state.for_survivors(v, [&](std::size_t t) {
                        const double c = cs.padded[t]
                                             ? std::numeric_limits<double>::infinity()
                                             : table.at(v, j, t);
                        const std::int64_t a = std::abs(cs.steps[t]);
                        if (!found || c < best_cost || (c == best_cost && a < best_abs) ||
                            (c == best_cost && a == best_abs && cs.steps[t] < cs.steps[best_t])) {
                            best_cost = c;
                            best_abs = a;
                            best_t = t;
                            found = true;
                        }
                    });
                    stego_bits[v] = std::uint8_t(state.stego_bit(v, best_t, l));
                }
            }
            state.commit_layer(l, stego_bits);
            report.msg_lens.push_back(chunk_len);
        }

        report.realized_steps = state.realized_steps();
        for (std::size_t v = 0; v < nv; ++v) {
            const std::int64_t step = report.realized_steps[v];
            stego_positions[v][j] = double(cp.quant.integers[v] + step) * scale;
            bool in_original = false;
            for (std::size_t t = 0; t < cs.original_count; ++t)
                if (cs.steps[t] == step) in_original = true;
            if (!in_original) ++result.padded_realizations;
        }
        params.msg_lens[j] = report.msg_lens;
    }

    result.embedded_bits = cursor;
    if (cursor != message_bits.size())
        throw std::logic_error("message bits left over after filling all layers");

    result.stego.vertices = std::move(stego_positions);
    result.stego.faces = cover.faces;
    detail::build_adjacency(result.stego);
    result.params = params;
    return result;
}

// Message retrieval: the syndrome product per (channel, layer) on the stego
// bitplanes, concatenated in the shared order. Works on any mesh; a mesh that
// was never embedded just yields the syndrome of its own bits.
inline std::vector<std::uint8_t> extract(const Mesh& stego, const StegoParams& params) {
    const std::size_t nv = stego.vertex_count();
    std::vector<std::uint8_t> message;
    for (int j = 0; j < 3; ++j) {
        if (int(params.msg_lens[j].size()) > params.q)
            throw ParamsError("msg_lens has more layers than q");
        const QuantizedChannel q = integer_map(stego, j, params.k_star);
        for (std::size_t l = 1; l <= params.msg_lens[j].size(); ++l) {
            const std::uint32_t m_len = params.msg_lens[j][l - 1];
            if (m_len == 0) continue;
            if (std::size_t(m_len) > nv)
                throw ParamsError("bitplane shorter than message length; mesh mismatch");
            std::vector<std::uint8_t> bits(nv);
            for (std::size_t v = 0; v < nv; ++v) bits[v] = std::uint8_t(bit_of(q.integers[v], int(l)));
            const Submatrix sub = build_submatrix(params.stc_h, nv, m_len,
                                                  detail::layer_seed(params.stc_seed, j, int(l)));
            auto chunk = stc_decode(bits, sub, m_len);
            message.insert(message.end(), chunk.begin(), chunk.end());
        }
    }
    return message;
}

// Capacity report for a cost table and payload, without embedding anything.
inline CapacityReport plan_capacity(const Mesh& cover, const CostTable& table, double alpha,
                                    const EmbedConfig& cfg) {
    const ChangeSet cs = pad_changeset(cfg.changes);
    const PayloadPlan plan = split_payload(alpha);
    CapacityReport rep;
    rep.q = cs.q;
    rep.max_alpha = 3.0 * std::log2(double(cfg.changes.size()));
    for (int j = 0; j < 3; ++j) {
        auto cp = detail::plan_channel(cover, table, cs, j, plan.per_channel[j], cfg.k_star,
                                       cfg.safety);
        rep.channel_entropy_nats[j] = cp.dist.achieved_entropy;
        rep.layer_budget_nats[j] = cp.budgets_nats;
        rep.layer_budget_bits[j] = cp.budget_bits;
        for (auto b : cp.budget_bits) rep.total_bits += b;
    }
    rep.net_alpha = double(rep.total_bits) / double(cover.vertex_count());
    return rep;
}

// MSB-first bit packing.
inline std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

inline std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] & 1) bytes[i / 8] |= std::uint8_t(1) << (7 - i % 8);
    return bytes;
}

} // namespace meshstego
