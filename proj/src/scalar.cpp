#include "opplab/scalar.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace opplab {

namespace {

// Top 64 bits of |z| as an exact long double times 2^shift.
Real mpz_to_real(const mpz_class& z) {
    if (sgn(z) == 0) return 0;
    size_t bits = mpz_sizeinbase(z.get_mpz_t(), 2);
    long shift = bits > 64 ? static_cast<long>(bits - 64) : 0;
    mpz_class a = abs(z);
    if (shift > 0) mpz_tdiv_q_2exp(a.get_mpz_t(), a.get_mpz_t(), shift);
    std::uint64_t top = 0;
    size_t count = 0;
    mpz_export(&top, &count, -1, sizeof(top), 0, 0, a.get_mpz_t());
    Real r = std::ldexp(static_cast<Real>(top), static_cast<int>(shift));
    return sgn(z) < 0 ? -r : r;
}

Real mpz_log_abs(const mpz_class& z) {
    size_t bits = mpz_sizeinbase(z.get_mpz_t(), 2);
    long shift = bits > 64 ? static_cast<long>(bits - 64) : 0;
    mpz_class a = abs(z);
    if (shift > 0) mpz_tdiv_q_2exp(a.get_mpz_t(), a.get_mpz_t(), shift);
    std::uint64_t top = 0;
    size_t count = 0;
    mpz_export(&top, &count, -1, sizeof(top), 0, 0, a.get_mpz_t());
    return std::log(static_cast<Real>(top)) + shift * std::log(2.0L);
}

Real log_sum(Real a, Real b) {
    Real hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

bool is_square_free(long d) {
    if (d < 1) return false;
    for (long p = 2; p * p <= d; ++p)
        if (d % (p * p) == 0) return false;
    return true;
}

mpq_class real_to_mpq(Real x) {
    if (!std::isfinite(x)) throw DomainError("non-finite value");
    if (x == 0) return 0;
    int e = 0;
    Real f = std::frexp(std::abs(x), &e);
    auto mant = static_cast<unsigned long long>(std::ldexp(f, 64));
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, 1, sizeof mant, 0, 0, &mant);
    mpq_class q(z);
    if (e - 64 >= 0)
        q.get_num() <<= (e - 64);
    else
        q.get_den() <<= (64 - e);
    q.canonicalize();
    return x < 0 ? mpq_class(-q) : q;
}

Real mpq_to_real(const mpq_class& x) {
    if (sgn(x) == 0) return 0;
    Real ln = mpz_log_abs(x.get_num()) - mpz_log_abs(x.get_den());
    if (std::abs(ln) < 11000) {
        Real r = mpz_to_real(x.get_num()) / mpz_to_real(x.get_den());
        if (std::isfinite(r) && r != 0) return r;
    }
    Real r = std::exp(ln);
    return sgn(x) < 0 ? -r : r;
}

Real mpq_log_abs(const mpq_class& x) {
    if (sgn(x) == 0) return -std::numeric_limits<Real>::infinity();
    return mpz_log_abs(x.get_num()) - mpz_log_abs(x.get_den());
}

Scalar::Scalar(const mpq_class& p, const mpq_class& q, long d) : p_(p), q_(q), d_(d) {
    if (!is_square_free(d)) throw DomainError("radicand must be a square-free integer >= 1");
    if (d_ == 1) {
        p_ += q_;
        q_ = 0;
    }
}

Scalar Scalar::from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite scalar");
    return Scalar(mpq_class(x));
}

void Scalar::unify(const Scalar& o) {
    if (d_ == o.d_ || o.d_ == 1) return;
    if (d_ == 1 || sgn(q_) == 0) {
        d_ = o.d_;
        return;
    }
    if (sgn(o.q_) == 0) return;
    throw DomainError("mixed radicands " + std::to_string(d_) + " and " + std::to_string(o.d_));
}

int Scalar::sign() const {
    int sp = sgn(p_), sq = sgn(q_);
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    mpq_class lhs = p_ * p_, rhs = q_ * q_ * d_;
    return lhs > rhs ? sp : sq;
}

Real Scalar::to_real() const {
    int sp = sgn(p_), sq = sgn(q_);
    Real rd = std::sqrt(static_cast<Real>(d_));
    if (sq == 0) return mpq_to_real(p_);
    if (sp == 0 || sp == sq) return mpq_to_real(p_) + mpq_to_real(q_) * rd;
    mpq_class norm = p_ * p_ - q_ * q_ * d_;
    return mpq_to_real(norm) / (mpq_to_real(p_) - mpq_to_real(q_) * rd);
}

Real Scalar::log_abs() const {
    int sp = sgn(p_), sq = sgn(q_);
    if (sq == 0) return mpq_log_abs(p_);
    Real lq = mpq_log_abs(q_) + 0.5L * std::log(static_cast<Real>(d_));
    if (sp == 0) return lq;
    Real lsum = log_sum(mpq_log_abs(p_), lq);
    if (sp == sq) return lsum;
    mpq_class norm = p_ * p_ - q_ * q_ * d_;
    return mpq_log_abs(norm) - lsum;
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    r.p_ = -r.p_;
    r.q_ = -r.q_;
    return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
    unify(o);
    p_ += o.p_;
    q_ += o.q_;
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
    unify(o);
    p_ -= o.p_;
    q_ -= o.q_;
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
    unify(o);
    mpq_class p = p_ * o.p_ + q_ * o.q_ * d_;
    mpq_class q = p_ * o.q_ + q_ * o.p_;
    p_ = p;
    q_ = q;
    return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
    if (o.is_zero()) throw DomainError("division by zero");
    unify(o);
    mpq_class norm = o.p_ * o.p_ - o.q_ * o.q_ * d_;
    Scalar c = o.conj();
    *this *= c;
    p_ /= norm;
    q_ /= norm;
    return *this;
}

Scalar Scalar::conj() const {
    Scalar r = *this;
    r.q_ = -r.q_;
    return r;
}

std::string Scalar::str() const {
    std::ostringstream os;
    os << p_.get_str();
    if (sgn(q_) != 0) os << (sgn(q_) > 0 ? "+" : "-") << mpq_class(abs(q_)).get_str() << "*sqrt(" << d_ << ")";
    return os.str();
}

}  // namespace opplab
