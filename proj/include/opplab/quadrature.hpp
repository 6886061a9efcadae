#pragma once

#include "opplab/lattice.hpp"

#include <functional>
#include <vector>

namespace opplab {

struct QuadratureResult {
    Real value = 0;
    Real error_bound = 0;
    long long node_count = 0;
    std::vector<Real> singularity_nodes;
    // the integrand is +inf on a set of positive measure
    bool infinite = false;
};

struct QuadratureError : ResourceError {
    QuadratureError(const std::string& what, QuadratureResult partial)
        : ResourceError(what), partial(std::move(partial)) {}
    QuadratureResult partial;
};

struct QuadratureOptions {
    Real rel_tol = 0;
    long long max_nodes = 4'000'000;
    // [a, b] is first cut into this many equal panels, then at the declared singularities
    int initial_panels = 1;
    // recompute every final leaf on its two halves and widen the bound by the difference
    bool certify = true;
};

using Integrand = std::function<Real(Real)>;

// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b], refining the leaf with the largest
// error estimate until the total is below max(tol, rel_tol |value|). The integrand is never
// evaluated at a declared singularity. Throws QuadratureError when the node budget runs out.
QuadratureResult orbit_integral(const Integrand& f, Real a, Real b, const std::vector<Real>& singularities,
                                Real tol, const QuadratureOptions& opt = {});

struct MonteCarloResult {
    Real value = 0;
    Real std_error = 0;
    long long samples = 0;
};

// Plain Monte Carlo estimate of the integral over [a, b]; deterministic given the seed.
MonteCarloResult monte_carlo_integral(const Integrand& f, Real a, Real b, long long samples, std::uint64_t seed);

}  // namespace opplab
