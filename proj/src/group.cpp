#include "opplab/group.hpp"

#include <cmath>

namespace opplab {

Mat3 a_mat(Real t) { return Mat3{{{std::exp(t), 0, 0}, {0, 1, 0}, {0, 0, std::exp(-t)}}}; }

Mat3 u_mat(Real r) { return Mat3{{{1, r, r * r / 2}, {0, 1, r}, {0, 0, 1}}}; }

Mat3 J_mat() { return Mat3{{{0, 0, 1}, {0, -1, 0}, {1, 0, 0}}}; }

Vec3 J(const Vec3& v) { return {v[2], -v[1], v[0]}; }

Mat3 k_mat(Real theta) {
    const Real c = std::cos(theta), s = std::sin(theta), h = s / std::sqrt(2.0L);
    return Mat3{{{(1 + c) / 2, -h, (1 - c) / 2}, {h, c, -h}, {(1 - c) / 2, h, (1 + c) / 2}}};
}

SMat3 a_exact(const mpq_class& et) {
    if (sgn(et) <= 0) throw DomainError("e^t must be positive");
    SMat3 m = smat_identity();
    m[0][0] = Scalar(et);
    m[2][2] = Scalar(mpq_class(1 / et));
    return m;
}

SMat3 u_exact(const mpq_class& r) {
    SMat3 m = smat_identity();
    m[0][1] = m[1][2] = Scalar(r);
    m[0][2] = Scalar(mpq_class(r * r / 2));
    return m;
}

bool in_H(const Mat3& g, Real tol) {
    const Mat3 a0{{{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}}};
    Mat3 p = transpose(g) * a0 * g;
    Real scale = 0;
    for (auto& row : g)
        for (Real x : row) scale = std::max(scale, std::abs(x));
    scale = std::max<Real>(1, scale * scale);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(p[i][j] - a0[i][j]) > tol * scale) return false;
    return true;
}

Mat3 FlowPoint::matrix() const {
    Mat3 m = a_mat(t) * u_mat(r);
    if (theta) m = m * k_mat(*theta);
    return m;
}

}  // namespace opplab
