#pragma once

#include "opplab/linalg.hpp"

#include <utility>
#include <vector>

namespace opplab {

// Compensated (Neumaier) accumulator.
class NeumaierSum {
public:
    void add(Real x) {
        Real t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    Real value() const { return sum_ + comp_; }

private:
    Real sum_ = 0, comp_ = 0;
};

// q(x) = a x^2 + b x + c whose float evaluation errs by at most ea x^2 + eb |x| + ec.
struct BandQuadratic {
    Real a = 0, b = 0, c = 0;
    Real ea = 0, eb = 0, ec = 0;
    Real operator()(Real x) const { return (a * x + b) * x + c; }
    Real error(Real x) const { return (ea * std::abs(x) + eb) * std::abs(x) + ec; }
};

// Integral ranges inside [lo, hi] covering every real x with |q(x)| < tau. Ranges are padded
// by the error model, so the result is a superset; callers confirm candidates exactly.
std::vector<std::pair<Real, Real>> quadratic_band(const BandQuadratic& q, Real tau, Real lo, Real hi);
// same, reusing the caller's buffer
void quadratic_band(const BandQuadratic& q, Real tau, Real lo, Real hi, std::vector<std::pair<Real, Real>>& out);

// Worker count from OPPLAB_THREADS (default: hardware concurrency, at least 1).
int worker_threads();

// Real roots of a x^2 + b x + c = 0 in increasing order (stable formula; linear when a == 0).
std::vector<Real> real_roots(Real a, Real b, Real c);
// same, written to out; returns the number of roots
int real_roots(Real a, Real b, Real c, Real (&out)[2]);

}  // namespace opplab
