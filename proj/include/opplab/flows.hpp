#pragma once

#include "opplab/heights.hpp"
#include "opplab/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace opplab {

// a_t u_r w, or a_t* u_r* w = J a_t u_r J w when starred. theta is ignored here.
Vec3 apply_flow(const FlowPoint& fp, const Vec3& w, bool starred = false);

struct VerifyResult {
    Real lhs = 0, rhs = 0, error_bound = 0;
    bool pass = false;
    bool vacuous = false;  // rhs = +inf
    std::string skipped_reason;  // non-empty when the statement's hypothesis excluded the input
    std::optional<XiWitness> witness;
    long long nodes = 0;
};

enum class LinearKind { NormLambda, Expansion, Phi, PhiStar };

struct LinearCheck {
    LinearKind kind = LinearKind::Phi;
    Real lambda = 1;  // NormLambda only
};

// Orbit integral over r in [-1, 1] of the chosen function of a_t u_r w against its bound.
// Expansion and Phi take delta from p. Throws DomainError outside the statement's hypotheses.
VerifyResult verify_linear_contraction(const Vec3& w, Real t, const HeightParams& p, LinearCheck which,
                                       Real rel_tol = 1e-7L);

// r-values where r -> a_t u_r w has a kink, jump or spike: rho, the gate edges rho +- 2e^{-t} and
// the roots rho +- sqrt(kappa_0).
std::vector<Real> flow_breakpoints(const Vec3& w, Real t);

enum class HeightKind { Alpha, AlphaHatEtaM, AlphaHatPrime, AlphaTilde };
enum class OrbitKind { Unipotent, Compact };

struct MomentOptions {
    Real rel_tol = 1e-4L;
    // initial panels per unit of e^t along the orbit; peaks are never narrower than about e^{-t}
    Real panel_density = 0.25L;
    int max_panels = 200000;
    // lattice vectors up to this norm (at most hint_count of them) seed the breakpoints
    Real hint_radius = 64;
    int hint_count = 400;
    long long max_nodes = 40'000'000;
};

// Value of the height at the group element h.
Real height_value(HeightKind kind, const Mat3& h, const Lattice3& lat, const HeightParams& p);

// Integral of height(a_t u_r g; Delta)^exponent over r in [-1, 1] (Unipotent), or of
// height(a_t k_theta g; Delta)^exponent against the normalised measure of K (Compact).
QuadratureResult orbit_moment(const Lattice3& lat, const Mat3& g, Real t, Real exponent, const HeightParams& p,
                              HeightKind height, OrbitKind over, const MomentOptions& opt = {});

inline QuadratureResult moment(const Lattice3& lat, Real t, Real exponent, const HeightParams& p,
                               HeightKind height, OrbitKind over, const MomentOptions& opt = {}) {
    return orbit_moment(lat, identity3(), t, exponent, p, height, over, opt);
}

// Monte-Carlo counterpart of orbit_moment, used as an oracle.
MonteCarloResult moment_monte_carlo(const Lattice3& lat, const Mat3& g, Real t, Real exponent,
                                    const HeightParams& p, HeightKind height, OrbitKind over, long long samples,
                                    std::uint64_t seed);

enum class SubharmonicKind { AlphaLambda, AlphaSuperharmonic, AlphaHatExpansion, AlphaHatPrime, AlphaTilde };

struct SubharmonicCheck {
    SubharmonicKind kind = SubharmonicKind::AlphaLambda;
    Real lambda = 0.9L;  // AlphaLambda only
};

// Orbit integral of the height along a_s u_r g against the cited bound. AlphaTilde is skipped,
// with the witness, when (g, Delta) lies in the exceptional set.
VerifyResult verify_subharmonic(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s,
                                SubharmonicCheck which, const MomentOptions& opt = {});

struct Fraction {
    Real fraction = 0;  // Lebesgue measure of the set inside [-1, 1]
    Real lo = 0, hi = 0;
    long long samples = 0, hits = 0;
};

// Monte-Carlo measure of {r in [-1, 1] : predicate(r)} with a 95% Wilson interval.
Fraction sojourn_fraction(const std::function<bool(Real)>& predicate, long long samples, std::uint64_t seed);
// a_t u_r Delta in K(s, eps)
std::function<bool(Real)> k_set_predicate(const Lattice3& lat, Real t, Real s, Real eps);

struct AnchorReport {
    std::vector<Real> anchors;      // at most two rho-values
    std::vector<IVec3> members;     // lattice coordinates of the enumerated Omega_0 vectors
    std::vector<Real> member_rho;
    bool covered = true;            // every member is within 5 e^{-s} of an anchor
};

// Omega_0(Delta, L, s) inside the sup-norm ball of the given radius, for the plane L = {B m : n.m = 0}.
AnchorReport anchor_points(const Lattice3& lat, const IVec3& normal, Real s, Real radius = 200);
// Same for a plane given by an ambient normal; throws DomainError unless the plane is Delta-rational.
AnchorReport anchor_points(const Lattice3& lat, const Vec3& ambient_normal, Real s, Real radius = 200);

struct WalkSchedule {
    std::vector<Real> s;
    Real B = 0, delta = 0, T = 0, t = 0;
    int k = 0;
    Real tau = 0;
};

WalkSchedule walk_schedule(Real B, Real delta, Real T, Real t);
// throws DomainError naming the first violated invariant, tolerance relative to t
void check_walk_schedule(const WalkSchedule& w, Real tol = 1e-9L);

struct TestFunction {
    std::string name;
    SupportedFunction f;
    Real integral = 0;  // integral of f over R^3
};

// Indicator of {a < Q_0(v) < b, 1/2 <= |v| <= 1, v_1 > 0, v_1/2 <= |v_2| <= v_1}.
TestFunction w_region(Real a, Real b);
// Indicator of B(outer) \ B(inner) in the sup norm.
TestFunction shell_indicator(Real inner, Real outer);
TestFunction zero_function();

struct EquidistRow {
    Real t = 0;
    Real value = 0;      // K-average of the transform
    Real limit = 0;
    Real deviation = 0;  // |value - limit|
};

struct EquidistOptions {
    long long theta_samples = 1 << 17;
    SiegelVariant variant = SiegelVariant::IsotropicExcluded;
    Real eta = 0.5L, M = 2;
};

// K-averages of the Siegel transform of f along a_t k over Delta_Q, weighted by nu(theta), theta in
// [0, 2 pi) with normalised measure; midpoint rule on a uniform theta grid.
std::vector<EquidistRow> equidistribution_experiment(const TestFunction& f, const QForm& q,
                                                     const std::vector<Real>& t_grid,
                                                     const std::function<Real(Real)>& nu,
                                                     const EquidistOptions& opt = {});

}  // namespace opplab
