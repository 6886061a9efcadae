#pragma once

#include "opplab/lattice.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace opplab {

struct LineCensus {
    std::vector<IVec3> lines;  // primitive, sign-canonical, one per line
    bool unbounded = false;    // rational form: every search radius finds more
    std::string diagnostic;
};

// Primitive m with Q(m) = 0 exactly and |m| <= search_R. For an irrational form more than four
// classes means the input is secretly rational; that aborts with std::logic_error.
LineCensus isotropic_lines(const QForm& q, int search_R);

struct DegeneratePlane {
    IVec3 normal;
    std::array<IVec3, 2> basis;  // integral basis of the plane lattice
    Scalar q1, q2, q12;          // Q(n1), Q(n2), Q(n1, n2)
    bool rational_ratio = false; // sqrt(Q(n2)/Q(n1)) rational, or one of them zero
};

struct PlaneCensus {
    std::vector<DegeneratePlane> planes;
    bool unbounded = false;
    std::string diagnostic;
};

// Planes on which Q is the square of a linear form: normals isotropic for the dual form.
PlaneCensus degenerate_planes(const QForm& q, int search_R);

struct LineCount {
    IVec3 m;
    std::int64_t points = 0;
};

struct PlaneCount {
    IVec3 normal;
    std::int64_t points = 0;  // points counted against this plane, line points removed
};

struct CountReport {
    Real a = 0, b = 0, T = 0;
    std::int64_t raw = 0;       // N_Q
    std::int64_t modified = 0;  // N~_Q
    std::int64_t excluded_line_points = 0;
    std::int64_t excluded_plane_points = 0;
    std::vector<LineCount> per_line;
    std::vector<PlaneCount> per_plane;
    Real c_q = 0, i_q = 0;
    Real predicted = 0;  // (C_Q (b - a) + I_Q) T, when c_q was supplied
    bool census_complete = true;  // false for rational forms: nothing is excluded then
};

struct CountOptions {
    int census_R = 100;
    long long max_slices = 1'000'000'000;
    Real c_q = 0;   // copied into the report
    Real i_q = 0;
};

// Integer v != 0 with |v| <= T (sup norm) and a < Q(v) < b, exactly, by solving for the v3-range
// on every (v1, v2) slice. Points on rational isotropic lines or degenerate planes are counted
// separately; a point on both goes to the line.
CountReport count_points(const QForm& q, Real a, Real b, Real T, const CountOptions& opt = {});
// One slice pass for several radii.
std::vector<CountReport> count_points(const QForm& q, Real a, Real b, const std::vector<Real>& Ts,
                                      const CountOptions& opt = {});

// Points of the plane lattice with |v| <= T and a < Q(v) < b, not on any rational isotropic line.
std::int64_t count_plane_points(const DegeneratePlane& p, Real a, Real b, Real T,
                                const std::vector<IVec3>& lines);

struct IQTerm {
    IVec3 normal;
    Real coefficient = 0;  // both signs of the normal
    bool empirical = false;
};

struct IQResult {
    Real value = 0;
    Real line_term = 0;  // L_Q 1_{(a,b)}(0)
    Real L_Q = 0;
    std::vector<IQTerm> planes;
};

// L_Q 1_{(a,b)}(0) plus the linear coefficient of every degenerate plane. Irrational-ratio planes
// use the closed form; rational-ratio planes are counted at T_probe / 4, T_probe / 2, T_probe and
// fitted. Throws DomainError for rational forms.
IQResult compute_IQ(const QForm& q, Real a, Real b, Real T_probe, int census_R = 100);

enum class CQMethod { Surface, VolumeSlope };

struct CQResult {
    Real value = 0;
    Real error = 0;
    CQMethod method = CQMethod::Surface;
};

struct CQOptions {
    Real rel_tol = 1e-10;
    Real T1 = 64, T2 = 128;
    Real a = -1, b = 1;    // band used by the volume slope
    int grid = 1000;       // jittered grid side per replicate
    int replicates = 8;
    std::uint64_t seed = 1;
};

// Integral of d sigma / |grad Q| over {Q = 0} in the unit sup-norm ball. Needs signature (2,1)
// and |det Q| = 1.
CQResult compute_CQ(const QForm& q, CQMethod method, const CQOptions& opt = {});

struct ConvergenceRow {
    Real T = 0;
    Real raw_over_T = 0, modified_over_T = 0;
    Real prediction = 0;  // C_Q (b - a) + I_Q
    Real deviation = 0;   // |N~/T - C_Q (b - a)| / (C_Q (b - a))
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool trend_ok = true;  // deviation non-increasing over the last half of the grid
};

ConvergenceTable convergence_study(const QForm& q, Real a, Real b, const std::vector<Real>& T_grid, Real c_q,
                                   Real i_q);

}  // namespace opplab
