#pragma once

#include "opplab/scalar.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace opplab {

using Vec3 = std::array<Real, 3>;
using Mat3 = std::array<std::array<Real, 3>, 3>;
using IVec3 = std::array<std::int64_t, 3>;
using SVec3 = std::array<Scalar, 3>;
using SMat3 = std::array<std::array<Scalar, 3>, 3>;

inline Real sup_norm(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}
inline std::int64_t sup_norm(const IVec3& v) {
    return std::max({std::llabs(v[0]), std::llabs(v[1]), std::llabs(v[2])});
}
inline Real euclid_norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

template <class V>
V cross(const V& a, const V& b) {
    return V{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
template <class V>
auto dot(const V& a, const V& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 to_real(const IVec3& m) {
    return {static_cast<Real>(m[0]), static_cast<Real>(m[1]), static_cast<Real>(m[2])};
}

inline Mat3 identity3() { return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Real s = 0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    return c;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2], a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2]};
}

inline Vec3 operator*(const Mat3& a, const IVec3& m) { return a * to_real(m); }

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(Real s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

inline Mat3 transpose(const Mat3& a) {
    Mat3 t{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
    return t;
}

inline Real det(const Mat3& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

template <class M>
M adjugate(const M& a) {
    M c = a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
            c[j][i] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
        }
    return c;
}

inline Mat3 inverse(const Mat3& a) {
    Mat3 c = adjugate(a);
    Real d = det(a);
    for (auto& row : c)
        for (auto& x : row) x /= d;
    return c;
}

// g* = transpose-inverse
inline Mat3 star(const Mat3& g) { return transpose(inverse(g)); }

inline Vec3 column(const Mat3& a, int j) { return {a[0][j], a[1][j], a[2][j]}; }

inline std::int64_t gcd3(const IVec3& m) {
    return std::gcd(std::gcd(std::llabs(m[0]), std::llabs(m[1])), std::llabs(m[2]));
}

// Sign-canonical representative: first nonzero entry positive.
inline IVec3 canonical_sign(IVec3 m) {
    for (int i = 0; i < 3; ++i)
        if (m[i] != 0) {
            if (m[i] < 0) m = {-m[0], -m[1], -m[2]};
            break;
        }
    return m;
}

}  // namespace opplab
