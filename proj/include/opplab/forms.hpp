#pragma once

#include "opplab/linalg.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>

namespace opplab {

// Q(v) = c11 v1^2 + c22 v2^2 + c33 v3^2 + c12 v1v2 + c13 v1v3 + c23 v2v3
class QForm {
public:
    enum Coef { C11 = 0, C22, C33, C12, C13, C23 };

    QForm() = default;
    explicit QForm(std::array<Scalar, 6> c, bool inexact = false);

    static QForm standard();  // Q_0 = v2^2 - 2 v1 v3
    static QForm diagonal(const Scalar& a, const Scalar& b, const Scalar& c);
    static QForm from_matrix(const SMat3& a, bool inexact = false);

    const std::array<Scalar, 6>& coeffs() const { return c_; }
    const Scalar& coeff(Coef k) const { return c_[k]; }
    long radicand() const { return d_; }
    bool inexact() const { return inexact_; }

    SMat3 matrix() const;
    Mat3 real_matrix() const;
    Scalar det() const;

    Scalar operator()(const SVec3& v) const;
    Scalar operator()(const IVec3& m) const;
    Real eval_real(const Vec3& v) const;
    Scalar polar(const SVec3& v, const SVec3& w) const;

    QForm scaled(const Scalar& s) const;
    QForm operator+(const QForm& o) const;
    bool operator==(const QForm& o) const;

    bool is_integral() const;
    bool is_rational_multiple() const;
    std::string str() const;

private:
    std::array<Scalar, 6> c_;
    long d_ = 1;
    bool inexact_ = false;
};

QForm dual(const QForm& q);
// Q^g(v) = Q(g v)
QForm transform(const QForm& q, const SMat3& g);
std::pair<QForm, Scalar> normalize_det(const QForm& q);
std::pair<int, int> signature(const QForm& q);
Real form_distance(const QForm& a, const QForm& b);

SMat3 smat_mul(const SMat3& a, const SMat3& b);
SMat3 smat_transpose(const SMat3& a);
SMat3 smat_inverse(const SMat3& a);
Scalar smat_det(const SMat3& a);
SMat3 smat_identity();
SMat3 smat_from_int(const std::array<IVec3, 3>& rows);
Mat3 smat_to_real(const SMat3& a);

// Exact evaluation of a form on integer vectors through a common-denominator
// integer representation; falls back to mpq when intermediates overflow.
class FastForm {
public:
    struct Value {
        bool zero = true;
        int sign = 0;
        Real value = 0;
        Real log_abs = 0;
    };
    explicit FastForm(const QForm& q);
    Value operator()(const IVec3& m) const;
    // exact sign of Q(m) - c for rational c
    int compare(const IVec3& m, const mpq_class& c) const;
    const QForm& form() const { return q_; }

private:
    QForm q_;
    bool fast_ = false;
    std::int64_t den_ = 1;
    std::array<std::int64_t, 6> p_{}, r_{};
    long d_ = 1;
    Real sqrt_d_ = 1;
};

QForm form_from_json(const nlohmann::json& j);
nlohmann::json form_to_json(const QForm& q);

}  // namespace opplab
