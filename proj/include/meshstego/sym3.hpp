#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "vec3.hpp"

namespace meshstego {

// Symmetric 3x3 matrix, packed as (a00, a01, a02, a11, a12, a22).
using Sym3 = std::array<double, 6>;

inline Sym3 sym3_zero() { return {0, 0, 0, 0, 0, 0}; }

// Accumulates w * n * n^T.
inline void sym3_add_outer(Sym3& m, const Vec3& n, double w) {
    m[0] += w * n.x * n.x;
    m[1] += w * n.x * n.y;
    m[2] += w * n.x * n.z;
    m[3] += w * n.y * n.y;
    m[4] += w * n.y * n.z;
    m[5] += w * n.z * n.z;
}

inline Vec3 sym3_apply(const Sym3& m, const Vec3& v) {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[1] * v.x + m[3] * v.y + m[4] * v.z,
            m[2] * v.x + m[4] * v.y + m[5] * v.z};
}

inline double sym3_frobenius(const Sym3& m) {
    return std::sqrt(m[0] * m[0] + m[3] * m[3] + m[5] * m[5] +
                     2.0 * (m[1] * m[1] + m[2] * m[2] + m[4] * m[4]));
}

// Eigenvalues of a symmetric 3x3 matrix in descending order, via the
// trigonometric solution of the characteristic polynomial. Stable for the
// values themselves even when roots are near-coincident.
inline std::array<double, 3> sym3_eigenvalues(const Sym3& m) {
    const double a00 = m[0], a01 = m[1], a02 = m[2];
    const double a11 = m[3], a12 = m[4], a22 = m[5];

    const double off = a01 * a01 + a02 * a02 + a12 * a12;
    if (off == 0.0) {
        std::array<double, 3> e{a00, a11, a22};
        std::sort(e.begin(), e.end(), std::greater<double>());
        return e;
    }

    const double q = (a00 + a11 + a22) / 3.0;
    const double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
    const double p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off;
    const double p = std::sqrt(p2 / 6.0);
    if (p == 0.0) return {q, q, q};

    // r = det(B) / 2 with B = (A - q I) / p
    const double det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) +
                       a02 * (a01 * a12 - b11 * a02);
    double r = det / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);

    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0943951023931953; // 2*pi/3
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + two_pi_3);
    const double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};
}

} // namespace meshstego
