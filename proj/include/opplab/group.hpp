#pragma once

#include "opplab/forms.hpp"

#include <optional>

namespace opplab {

Mat3 a_mat(Real t);
Mat3 u_mat(Real r);
// J v = (v3, -v2, v1)
Mat3 J_mat();
Vec3 J(const Vec3& v);
// Rotation by theta in the coordinates y1 = (v1 - v3)/sqrt2, y2 = v2, fixing y3 = (v1 + v3)/sqrt2.
// Q_0 = y1^2 + y2^2 - y3^2, so k_theta lies in H; theta ranges over [0, 2 pi).
Mat3 k_mat(Real theta);

// Exact a_t (with e^t = et) and u_r for rational parameters.
SMat3 a_exact(const mpq_class& et);
SMat3 u_exact(const mpq_class& r);

// g^T A_0 g = A_0 up to tol relative to |g|^2
bool in_H(const Mat3& g, Real tol = 1e-9L);

struct FlowPoint {
    Real t = 0, r = 0;
    std::optional<Real> theta;
    // a_t u_r, times k_theta on the right when theta is set
    Mat3 matrix() const;
};

}  // namespace opplab
