#pragma once

#include "opplab/lattice.hpp"

#include <random>

namespace opplab {

inline IVec3 random_ivec(std::mt19937_64& rng, int bound) {
    std::uniform_int_distribution<int> u(-bound, bound);
    return {u(rng), u(rng), u(rng)};
}

// Random element of SL(3,Z) as a product of elementary shears.
inline std::array<IVec3, 3> random_sl3z(std::mt19937_64& rng, int steps = 4) {
    std::array<IVec3, 3> g{IVec3{1, 0, 0}, IVec3{0, 1, 0}, IVec3{0, 0, 1}};
    std::uniform_int_distribution<int> idx(0, 2), c(-1, 1);
    for (int s = 0; s < steps; ++s) {
        int i = idx(rng), j = idx(rng);
        if (i == j) continue;
        int k = c(rng);
        for (int col = 0; col < 3; ++col) g[i][col] += k * g[j][col];
    }
    return g;
}

inline Scalar sqrt2_unit(int sign) {
    // 1 + sqrt2 or sqrt2 - 1; their product is 1
    return sign > 0 ? Scalar(mpq_class(1), mpq_class(1), 2) : Scalar(mpq_class(-1), mpq_class(1), 2);
}

// Form gamma^T diag(d) gamma with unit |det|.
inline QForm random_unit_form(std::mt19937_64& rng, bool positive_det) {
    std::uniform_int_distribution<int> pick(0, 1);
    Scalar a = pick(rng) ? sqrt2_unit(1) : Scalar(1);
    Scalar b = a.is_rational() ? Scalar(1) : sqrt2_unit(-1);
    Scalar c = positive_det ? Scalar(-1) : Scalar(-1);
    if (positive_det) b = -b;  // signature (1,2), det +1
    QForm d = QForm::diagonal(a, b, c);
    return transform(d, smat_from_int(random_sl3z(rng)));
}

// Random unimodular basis: Gaussian matrix rescaled to det 1, optionally skewed by a diagonal flow.
inline Mat3 random_unimodular(std::mt19937_64& rng, Real skew = 0) {
    std::normal_distribution<double> n(0, 1);
    std::uniform_real_distribution<double> u(-skew, skew);
    Mat3 g{};
    Real d = 0;
    while (std::abs(d) < 0.05L) {
        for (auto& row : g)
            for (auto& x : row) x = n(rng);
        d = det(g);
    }
    Real s = std::cbrt(std::abs(d));
    for (auto& row : g)
        for (auto& x : row) x /= s;
    if (d < 0) g[0] = -g[0];
    if (skew > 0) {
        Real t = u(rng);
        Mat3 a{{{std::exp(t), 0, 0}, {0, 1, 0}, {0, 0, std::exp(-t)}}};
        g = a * g;
    }
    return g;
}

// Delta_Q for a random unit form of signature (2,1), carrying exact Q_0 values.
inline Lattice3 random_form_lattice(std::mt19937_64& rng) { return lattice_from_form(random_unit_form(rng, false)); }

}  // namespace opplab
