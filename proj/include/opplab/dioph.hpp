#pragma once

#include "opplab/heights.hpp"

#include <array>
#include <random>
#include <vector>

namespace opplab {

struct IntegralFormResult {
    QForm form;               // Q', integral
    Scalar det_gamma;         // det [m1 m2 m3]
    Real rho = 0;             // signed cube root of det Q / det Q'
    Real dist = 0;            // |Q - rho Q'|, coefficient sup norm
    Real norm = 0;            // |Q'|
    bool within_bound = false;  // |Q'| <= 10^6 R^14
};

// Integral approximant from five near-isotropic integral vectors, following the constructive
// proof: gamma = [m1 m2 m3], a = adj(gamma) m4, b = adj(gamma) m5, Q1' = c1 v2v3 + c2 v1v3 + c3 v1v2
// with c the cross product, Q' = Q1' o adj(gamma). Throws DomainError when a precondition fails.
IntegralFormResult construct_integral_form(const QForm& q, const std::array<IVec3, 5>& m, Real R, Real eps);

struct Quintuple {
    QForm q;
    std::array<IVec3, 5> m;
    Real R = 0, eps = 0;
};

// Five isotropic vectors of Q_0 o gamma (gamma in SL(3,Z)), no three coplanar, |m_i| < R <= max_R,
// with the form perturbed so that max |Q(m_i)| is at most about eps_target; |det Q| = 1.
Quintuple perturbed_quintuple(std::mt19937_64& rng, Real eps_target, int max_R = 50);

// Frozen constant C in dist <= C eps R^10: ten times the worst ratio (9.6e-12) seen on 1000
// perturbed_quintuple instances, seed 2718, eps_target = 10^U(-9,-6).
constexpr Real kIntegralFormConstant = 1e-10L;

struct DiophTypeResult {
    Real c_min = kInf;
    QForm argmin;
    Real rho = 0;
    Real dist = kInf;
    long long visited = 0;  // leaves reaching the exact determinant test
};

// min over integral Q' with 0 < |Q'| <= cap and det Q' != 0 of |Q - rho Q'| |Q'|^M. Branch and
// bound on the scale rho; throws ResourceError past max_leaves.
DiophTypeResult estimate_dioph_type(const QForm& q, Real M, int cap, long long max_leaves = 400'000'000);

struct ShellReport {
    std::vector<IVec3> vectors;     // integer coordinates in Delta_Q
    std::vector<IVec3> line_cover;  // primitive directions
    std::vector<IVec3> plane_cover; // primitive normals
    bool pass = true;               // <= 12 lines and <= 6 planes
};

// Quasi-null vectors of Delta_Q with R <= |v| < R^2, covered greedily by lines and planes.
ShellReport quasi_null_shell(const QForm& q, const HeightParams& p, Real R);

}  // namespace opplab
