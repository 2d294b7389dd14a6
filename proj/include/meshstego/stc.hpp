#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshstego {

class StcError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Submatrix H-hat of the syndrome-trellis code. The full parity-check matrix
// is H-hat tiled along the diagonal, one row down and `width` columns right
// per message bit, truncated at the right and bottom edges.
struct Submatrix {
    int height = 12;                    // constraint length h, 6..15
    int width = 1;                      // w
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> columns; // column bitmasks, bit r = row r
};

namespace detail {

inline Submatrix make_submatrix(int h, int w, std::uint64_t seed) {
    if (h < 6 || h > 15) throw StcError("submatrix height must be in [6, 15]");
    if (w < 1) throw StcError("submatrix width must be at least 1");
    Submatrix sub;
    sub.height = h;
    sub.width = w;
    sub.seed = seed;
    sub.columns.resize(w);
    std::mt19937_64 rng(seed);
    const std::uint32_t first = 1u;
    const std::uint32_t last = 1u << (h - 1);
    for (int t = 0; t < w; ++t) {
        std::uint32_t bits = std::uint32_t(rng()) & ((1u << h) - 1);
        // First and last rows all ones: nonzero edge rows keep the trellis
        // connected and give good codes in practice.
        sub.columns[t] = bits | first | last;
    }
    return sub;
}

} // namespace detail

// Builds the submatrix for message length m_len embedded into n cover bits:
// w = floor(n / m_len), which places m_len/n inside (1/(w+1), 1/w].
inline Submatrix build_submatrix(int h, std::size_t n, std::size_t m_len, std::uint64_t seed) {
    if (m_len == 0 || m_len > n) throw StcError("message length must be in [1, n]");
    return detail::make_submatrix(h, int(n / m_len), seed);
}

// Rate-based variant; rate = m_len / n in (0, 1).
inline Submatrix build_submatrix(int h, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate < 1.0)) throw StcError("rate must be inside (0, 1)");
    return detail::make_submatrix(h, int(std::floor(1.0 / rate)), seed);
}

struct StcEncodeResult {
    std::vector<std::uint8_t> stego;
    double cost = 0.0; // total cost of flipped positions
};

// Minimal-cost embedding: finds stego with H * stego = message over GF(2)
// minimizing the total flip cost, by Viterbi search over the 2^h trellis
// states. Exact within the trellis (all syndrome-satisfying words reachable
// through it are considered).
inline StcEncodeResult stc_encode(std::span<const std::uint8_t> cover,
                                  std::span<const double> costs,
                                  std::span<const std::uint8_t> message, const Submatrix& sub) {
    const std::size_t n = cover.size();
    const std::size_t m = message.size();
    if (costs.size() != n) throw StcError("cost array length mismatch");
    if (m == 0) {
        StcEncodeResult r;
        r.stego.assign(cover.begin(), cover.end());
        return r;
    }
    const std::size_t w = std::size_t(sub.width);
    if (m * w > n)
        throw StcError("cover too short: need at least " + std::to_string(m * w) + " bits");
    for (double c : costs)
        if (!(c >= 0.0) || !std::isfinite(c)) throw StcError("flip costs must be finite and >= 0");

    const int h = sub.height;
    const std::size_t states = std::size_t(1) << h;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> wght(states, inf), next(states);
    wght[0] = 0.0;

    // One choice bit per (column, state), bit-packed.
    const std::size_t words_per_col = states / 64;
    std::vector<std::uint64_t> path(m * w * words_per_col, 0);

    std::size_t col_index = 0;
    for (std::size_t b = 0; b < m; ++b) {
        const std::uint32_t trunc =
            (m - b) < std::size_t(h) ? ((1u << (m - b)) - 1) : ((1u << h) - 1);
        for (std::size_t t = 0; t < w; ++t, ++col_index) {
            const std::uint32_t col = sub.columns[t] & trunc;
            const std::size_t j = col_index;
            const double cost0 = cover[j] == 0 ? 0.0 : costs[j];
            const double cost1 = cover[j] == 1 ? 0.0 : costs[j];
            std::uint64_t* pbits = path.data() + j * words_per_col;
            for (std::size_t s = 0; s < states; ++s) {
                const double w0 = wght[s] + cost0;
                const double w1 = wght[s ^ col] + cost1;
                if (w1 < w0) {
                    next[s] = w1;
                    pbits[s >> 6] |= std::uint64_t(1) << (s & 63);
                } else {
                    next[s] = w0;
                }
            }
            wght.swap(next);
        }
        // Fix message bit b (row b is complete) and slide the window.
        const std::size_t mbit = message[b] & 1;
        for (std::size_t s = 0; s < states / 2; ++s) next[s] = wght[(s << 1) | mbit];
        for (std::size_t s = states / 2; s < states; ++s) next[s] = inf;
        wght.swap(next);
    }

    if (!std::isfinite(wght[0]))
        throw StcError("no stego word satisfies the requested syndrome");

    StcEncodeResult result;
    result.cost = wght[0];
    result.stego.assign(cover.begin(), cover.end()); // positions past m*w keep cover bits

    // Backtrack from the unique surviving end state.
    std::size_t s = 0;
    for (std::size_t b = m; b-- > 0;) {
        s = (s << 1) | (message[b] & 1);
        const std::uint32_t trunc =
            (m - b) < std::size_t(h) ? ((1u << (m - b)) - 1) : ((1u << h) - 1);
        for (std::size_t t = w; t-- > 0;) {
            const std::size_t j = b * w + t;
            const std::uint64_t* pbits = path.data() + j * words_per_col;
            const int y = int((pbits[s >> 6] >> (s & 63)) & 1);
            result.stego[j] = std::uint8_t(y);
            if (y) s ^= (sub.columns[t] & trunc);
        }
    }
    return result;
}

// Syndrome extraction: message bit b is the GF(2) inner product of row b of
// the tiled parity-check matrix with the stego bits.
inline std::vector<std::uint8_t> stc_decode(std::span<const std::uint8_t> stego,
                                            const Submatrix& sub, std::size_t m_len) {
    const std::size_t n = stego.size();
    const std::size_t w = std::size_t(sub.width);
    if (m_len * w > n) throw StcError("stego too short for declared message length");
    std::vector<std::uint8_t> message(m_len, 0);
    for (std::size_t b = 0; b < m_len; ++b) {
        unsigned acc = 0;
        const std::size_t first_block = b + 1 >= std::size_t(sub.height) ? b + 1 - sub.height : 0;
        for (std::size_t bp = first_block; bp <= b; ++bp) {
            const int row = int(b - bp);
            for (std::size_t t = 0; t < w; ++t)
                if ((sub.columns[t] >> row) & 1u) acc ^= stego[bp * w + t];
        }
        message[b] = std::uint8_t(acc & 1);
    }
    return message;
}

} // namespace meshstego
