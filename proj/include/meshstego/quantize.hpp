#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace meshstego {

class QuantizeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One coordinate channel mapped to signed integers at scale 10^k_star.
struct QuantizedChannel {
    std::vector<std::int64_t> integers;
    int k_star = 0;
    int bit_width = 0; // h*, 0 until chosen
    int channel = 0;   // 0 = x, 1 = y, 2 = z
};

struct Bitplane {
    int level = 0; // 1 = least significant
    std::vector<std::uint8_t> bits;
};

namespace detail {

inline std::int64_t pow10_i64(int k) {
    std::int64_t p = 1;
    for (int i = 0; i < k; ++i) {
        if (p > INT64_MAX / 10) throw QuantizeError("10^" + std::to_string(k) + " overflows");
        p *= 10;
    }
    return p;
}

inline std::int64_t quantize_value(double v, const Decimal& dec, int k) {
    if (dec.valid) {
        // Exact: value = mantissa * 10^exponent10, so v * 10^k = mantissa * 10^(exponent10 + k).
        int shift = dec.exponent10 + k;
        if (shift < 0)
            throw QuantizeError("coordinate has more than " + std::to_string(k) +
                                " fractional digits; k* too small");
        std::int64_t result = dec.mantissa;
        for (int i = 0; i < shift; ++i) {
            if (std::abs(result) > INT64_MAX / 10)
                throw QuantizeError("integer mapping overflows 64-bit range; k* too large");
            result *= 10;
        }
        return result;
    }
    long double scaled = (long double)v;
    for (int i = 0; i < k; ++i) scaled *= 10.0L;
    if (scaled > (long double)INT64_MAX / 2 || scaled < (long double)INT64_MIN / 2)
        throw QuantizeError("integer mapping overflows 64-bit range; k* too large");
    return std::llroundl(scaled);
}

// Fractional decimal digits of a double without source text: smallest k <= 12
// whose rounding reproduces the value.
inline int fraction_digits_of_double(double v) {
    for (int k = 0; k <= 12; ++k) {
        long double scaled = (long double)v;
        for (int i = 0; i < k; ++i) scaled *= 10.0L;
        long double r = std::llroundl(scaled);
        if (std::fabs(scaled - r) < 1e-9L * std::max<long double>(1.0L, std::fabs(scaled)))
            return k;
    }
    return 12;
}

} // namespace detail

inline int detect_k_star(const Mesh& m) {
    int k = 0;
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            if (i < m.decimals.size() && m.decimals[i][c].valid)
                k = std::max(k, m.decimals[i][c].fraction_digits());
            else
                k = std::max(k, detail::fraction_digits_of_double(m.vertices[i][c]));
        }
    }
    return k;
}

inline QuantizedChannel integer_map(const Mesh& m, int channel, int k_star) {
    if (channel < 0 || channel > 2) throw std::out_of_range("channel must be 0, 1, or 2");
    if (k_star < 0) throw QuantizeError("k* must be nonnegative");
    QuantizedChannel q;
    q.k_star = k_star;
    q.channel = channel;
    q.integers.reserve(m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const Decimal dec = i < m.decimals.size() ? m.decimals[i][channel] : Decimal{};
        q.integers.push_back(detail::quantize_value(m.vertices[i][channel], dec, k_star));
    }
    return q;
}

// Minimal bit width h* covering every cover integer and every value reachable
// by adding a change step. For nonnegative data this is the usual
// max <= 2^h - 1 rule; signed data uses the range span so that the
// two's-complement mask stays injective over all reachable values.
inline int choose_bit_width(std::span<const std::int64_t> integers,
                            std::span<const std::int64_t> steps, int min_bits = 1) {
    std::int64_t lo = 0, hi = 0;
    if (!integers.empty()) {
        lo = hi = integers[0];
        for (std::int64_t v : integers) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    std::int64_t dlo = 0, dhi = 0;
    for (std::int64_t d : steps) {
        dlo = std::min(dlo, d);
        dhi = std::max(dhi, d);
    }
    lo += dlo;
    hi += dhi;
    const unsigned __int128 need =
        lo >= 0 ? (unsigned __int128)hi : (unsigned __int128)((__int128)hi - (__int128)lo);
    int h = std::max(min_bits, 1);
    while (h < 63 && need > (((unsigned __int128)1 << h) - 1)) ++h;
    return h;
}

// Two's-complement truncation to bit_width bits.
inline std::uint64_t mask_value(std::int64_t v, int bit_width) {
    const std::uint64_t mask =
        bit_width >= 64 ? ~0ull : ((std::uint64_t(1) << bit_width) - 1);
    return (std::uint64_t)v & mask;
}

inline std::vector<std::uint64_t> masked_bits(const QuantizedChannel& q) {
    if (q.bit_width <= 0) throw QuantizeError("bit width not chosen");
    std::vector<std::uint64_t> out;
    out.reserve(q.integers.size());
    for (std::int64_t v : q.integers) out.push_back(mask_value(v, q.bit_width));
    return out;
}

// Bit `level` (1 = LSB) of the two's-complement value; valid for any level
// up to the mask width since low bits are unaffected by truncation.
inline int bit_of(std::int64_t v, int level) {
    return int(((std::uint64_t)v >> (level - 1)) & 1u);
}

inline Bitplane get_bitplane(const QuantizedChannel& q, int level) {
    if (level < 1 || level > q.bit_width)
        throw std::out_of_range("bitplane level " + std::to_string(level) + " outside [1, " +
                                std::to_string(q.bit_width) + "]");
    Bitplane b;
    b.level = level;
    b.bits.reserve(q.integers.size());
    for (std::int64_t v : q.integers) b.bits.push_back(std::uint8_t(bit_of(v, level)));
    return b;
}

// High part of each integer above the mask: v - (v mod 2^bit_width).
inline std::vector<std::int64_t> high_bits(const QuantizedChannel& q) {
    std::vector<std::int64_t> out;
    out.reserve(q.integers.size());
    for (std::int64_t v : q.integers)
        out.push_back(v - (std::int64_t)mask_value(v, q.bit_width));
    return out;
}

// Inverse of bitplane splitting: planes 1..h* plus the high parts.
inline std::vector<std::int64_t> assemble(std::span<const Bitplane> planes,
                                          std::span<const std::int64_t> high) {
    if (planes.empty()) throw QuantizeError("no bitplanes to assemble");
    const std::size_t n = planes[0].bits.size();
    std::vector<std::int64_t> out(high.begin(), high.end());
    if (out.size() != n) throw QuantizeError("high-bit length mismatch");
    for (const auto& p : planes) {
        if (p.bits.size() != n) throw QuantizeError("bitplane length mismatch");
        for (std::size_t i = 0; i < n; ++i)
            out[i] += (std::int64_t)((std::uint64_t)(p.bits[i] & 1) << (p.level - 1));
    }
    return out;
}

// DM: coordinates (v + step) / 10^k for per-vertex integer steps.
inline std::vector<double> decimal_map(const QuantizedChannel& q,
                                       std::span<const std::int64_t> steps) {
    if (steps.size() != q.integers.size()) throw QuantizeError("change list length mismatch");
    if (q.bit_width > 0) {
        // The mask width agreed in the parameters must cover cover and stego
        // values alike; a wider change set than planned is a caller error.
        std::int64_t lo = q.integers.empty() ? 0 : q.integers[0];
        std::int64_t hi = lo;
        for (std::size_t i = 0; i < q.integers.size(); ++i) {
            lo = std::min({lo, q.integers[i], q.integers[i] + steps[i]});
            hi = std::max({hi, q.integers[i], q.integers[i] + steps[i]});
        }
        const unsigned __int128 need =
            lo >= 0 ? (unsigned __int128)hi : (unsigned __int128)((__int128)hi - (__int128)lo);
        if (q.bit_width < 63 && need > (((unsigned __int128)1 << q.bit_width) - 1))
            throw QuantizeError("stego values need more than h* = " +
                                std::to_string(q.bit_width) + " bits; change set too wide");
    }
    const double scale = std::pow(10.0, -q.k_star);
    std::vector<double> out;
    out.reserve(q.integers.size());
    for (std::size_t i = 0; i < q.integers.size(); ++i)
        out.push_back(double(q.integers[i] + steps[i]) * scale);
    return out;
}

} // namespace meshstego
