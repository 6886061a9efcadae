#pragma once

#include "opplab/group.hpp"
#include "opplab/lattice.hpp"

#include <optional>

namespace opplab {

struct HeightParams {
    Real delta = 0.01L;
    Real eta = 0.5L;
    Real M = 2;
    Real D = 1024;
    // throws DomainError outside delta in (0, 0.01], eta in (0, 1], M > 1, D > 0
    void validate() const;
};

struct VectorProfile {
    Real rho = 0, kappa0 = 0, kappa = 1;
};

// Q_0(w) computed exactly from the binary coordinates of w.
Q0Value q0_exact(const Vec3& w);

VectorProfile profile(const Vec3& w);
// With Q_0(w) already known (e.g. from an exact lattice source).
VectorProfile profile(const Vec3& w, const Q0Value& q);

// log kappa(w); -inf on the cone inside the gate, 0 where kappa = 1.
Real log_kappa(const Vec3& w, const Q0Value& q);
// log kappa*(w) = log kappa(J w)
Real log_kappa_star(const Vec3& w, const Q0Value& q);

// phi_delta(w) = kappa^{-2 delta} |w|^{-1-delta}; starred evaluates at J w. +inf where kappa = 0.
Real phi_delta(const Vec3& w, Real delta, bool starred = false);
Real phi_delta(const Vec3& w, const Q0Value& q, Real delta, bool starred = false);

bool is_quasi_null(const Vec3& v, const HeightParams& p);
bool is_quasi_null(const Q0Value& q, Real norm, const HeightParams& p);

// Smallest k >= 1 such that k v is not quasi-null, for v with Q_0(v) = q and |v| = norm.
// +inf when q = 0.
Real first_regular_multiple(const Q0Value& q, Real norm, const HeightParams& p);

enum class AlphaHatVariant { Isotropic, EtaM, Prime };

// sup |h v|^{-1} over v in Delta outside the cone (isotropic) or outside H_{eta,M} (eta_M)
Real alpha_hat_side(const Lattice3& lat, const Mat3& h, const HeightParams& p, bool isotropic_only);
// max of the primal side on (g, Delta) and the dual side on (g*, Delta*); Prime also takes alpha(g Delta)^0.9
Real alpha_hat(const Mat3& g, const Lattice3& lat, const HeightParams& p, AlphaHatVariant variant);

// One side of alpha-tilde: sup of phi-hat over lattice vectors whose h-image lies in the closed
// unit ball, 1 when there is none. starred uses phi* (the dual side).
Real alpha_tilde_side(const Lattice3& lat, const Mat3& h, const HeightParams& p, bool starred);
Real alpha_tilde(const Mat3& g, const Lattice3& lat, const HeightParams& p);

// log of epsilon_{s,eta,M}; the branch is chosen by alpha_hat_etaM <= 10^4 e^{4s}.
Real log_epsilon_threshold(Real alpha_hat_etaM, const HeightParams& p, Real s);
Real log_epsilon_threshold(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s);
inline Real epsilon_threshold(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s) {
    return std::exp(log_epsilon_threshold(g, lat, p, s));
}

struct XiWitness {
    IVec3 m{};        // integer coordinates in the lattice basis
    Vec3 image{};     // h v
    Real log_kappa = 0;
};

// A lattice vector v with 1 <= |h v| <= 3 e^s and log kappa(h v) < log_eps, skipping quasi-null v
// when exclude_quasi_null. Rigorous up to the float error model of the slice search.
std::optional<XiWitness> xi_search(const Lattice3& lat, const Mat3& h, Real s, Real log_eps,
                                   bool exclude_quasi_null, const HeightParams& p);

struct ExceptionalReport {
    bool member = false;
    int side = 0;  // 1 or 2 when member
    std::optional<XiWitness> witness;
    Real alpha_hat = 0;
    Real log_epsilon = 0;
};

ExceptionalReport in_exceptional_set(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s);

// h Delta meets Xi_1(s, eps)
bool in_K_set(const Lattice3& lat, const Mat3& h, Real s, Real eps);

}  // namespace opplab
