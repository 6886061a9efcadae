#pragma once

#include "opplab/samplers.hpp"

#include <algorithm>
#include <random>

namespace testing_support {

using namespace opplab;

inline SVec3 to_svec(const IVec3& m) {
    return {Scalar(static_cast<long>(m[0])), Scalar(static_cast<long>(m[1])), Scalar(static_cast<long>(m[2]))};
}

inline Real row_sum_norm(const Mat3& a) {
    Real m = 0;
    for (const auto& row : a) m = std::max(m, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
    return m;
}

// All sign classes of nonzero B m with |B m| <= R, by scanning the full coefficient box.
inline std::vector<IVec3> brute_force_vectors(const Mat3& b, Real R) {
    auto box = static_cast<std::int64_t>(std::ceil(row_sum_norm(inverse(b)) * R));
    std::vector<IVec3> out;
    for (std::int64_t i = -box; i <= box; ++i)
        for (std::int64_t j = -box; j <= box; ++j)
            for (std::int64_t k = -box; k <= box; ++k) {
                IVec3 m{i, j, k};
                if (m == IVec3{0, 0, 0} || canonical_sign(m) != m) continue;
                if (sup_norm(b * m) <= R) out.push_back(m);
            }
    std::sort(out.begin(), out.end());
    return out;
}

// Random element a_t u_r k_theta of H.
inline Mat3 random_h(std::mt19937_64& rng, Real tmax = 2) {
    std::uniform_real_distribution<double> t(-tmax, tmax), r(-1, 1), th(0, 6.283185307179586);
    Mat3 a{{{std::exp(Real(t(rng))), 0, 0}, {0, 1, 0}, {0, 0, 0}}};
    a[2][2] = 1 / a[0][0];
    Real x = r(rng), ang = th(rng);
    Mat3 u{{{1, x, x * x / 2}, {0, 1, x}, {0, 0, 1}}};
    Real cc = std::cos(ang), ss = std::sin(ang), h = ss / std::sqrt(2.0L);
    Mat3 k{{{(1 + cc) / 2, -h, (1 - cc) / 2}, {h, cc, -h}, {(1 - cc) / 2, h, (1 + cc) / 2}}};
    return a * u * k;
}

}  // namespace testing_support

