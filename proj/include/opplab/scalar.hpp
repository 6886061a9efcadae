#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace opplab {

using Real = long double;

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Element p + q*sqrt(d) of Q(sqrt d), d square-free and >= 1.
// d == 1 means the irrational part is folded into the rational part.
class Scalar {
public:
    Scalar() = default;
    Scalar(long v) : p_(v) {}
    Scalar(int v) : p_(v) {}
    explicit Scalar(const mpq_class& p) : p_(p) {}
    Scalar(const mpq_class& p, const mpq_class& q, long d);

    static Scalar from_double(double x);

    const mpq_class& rat() const { return p_; }
    const mpq_class& irr() const { return q_; }
    long radicand() const { return d_; }

    bool is_zero() const { return sgn(p_) == 0 && sgn(q_) == 0; }
    bool is_rational() const { return sgn(q_) == 0; }
    int sign() const;

    Real to_real() const;
    // log|x|, finite for nonzero x even when |x| underflows a double
    Real log_abs() const;

    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    Scalar& operator*=(const Scalar& o);
    Scalar& operator/=(const Scalar& o);
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
    friend bool operator==(const Scalar& a, const Scalar& b) { return (a - b).is_zero(); }
    friend bool operator<(const Scalar& a, const Scalar& b) { return (a - b).sign() < 0; }

    Scalar conj() const;
    std::string str() const;

private:
    void unify(const Scalar& o);
    mpq_class p_{0};
    mpq_class q_{0};
    long d_ = 1;
};

bool is_square_free(long d);
Real mpq_log_abs(const mpq_class& x);
Real mpq_to_real(const mpq_class& x);
// exact value of a finite long double
mpq_class real_to_mpq(Real x);

}  // namespace opplab
