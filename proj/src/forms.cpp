#include "opplab/forms.hpp"

#include <sstream>

namespace opplab {

namespace {

long common_radicand(const std::array<Scalar, 6>& c) {
    long d = 1;
    for (const auto& s : c) {
        if (s.is_rational()) continue;
        if (d != 1 && s.radicand() != d) throw DomainError("mixed radicands in one form");
        d = s.radicand();
    }
    return d;
}

const Scalar kHalf(mpq_class(1, 2));

}  // namespace

QForm::QForm(std::array<Scalar, 6> c, bool inexact) : c_(std::move(c)), d_(common_radicand(c_)), inexact_(inexact) {}

QForm QForm::standard() { return QForm({Scalar(0), Scalar(1), Scalar(0), Scalar(0), Scalar(-2), Scalar(0)}); }

QForm QForm::diagonal(const Scalar& a, const Scalar& b, const Scalar& c) {
    return QForm({a, b, c, Scalar(0), Scalar(0), Scalar(0)});
}

QForm QForm::from_matrix(const SMat3& a, bool inexact) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (!(a[i][j] == a[j][i])) throw DomainError("form matrix must be symmetric");
    Scalar two(2);
    return QForm({a[0][0], a[1][1], a[2][2], two * a[0][1], two * a[0][2], two * a[1][2]}, inexact);
}

SMat3 QForm::matrix() const {
    SMat3 a;
    a[0][0] = c_[C11];
    a[1][1] = c_[C22];
    a[2][2] = c_[C33];
    a[0][1] = a[1][0] = c_[C12] * kHalf;
    a[0][2] = a[2][0] = c_[C13] * kHalf;
    a[1][2] = a[2][1] = c_[C23] * kHalf;
    return a;
}

Mat3 QForm::real_matrix() const { return smat_to_real(matrix()); }

Scalar QForm::det() const { return smat_det(matrix()); }

Scalar QForm::operator()(const SVec3& v) const {
    return c_[C11] * v[0] * v[0] + c_[C22] * v[1] * v[1] + c_[C33] * v[2] * v[2] + c_[C12] * v[0] * v[1] +
           c_[C13] * v[0] * v[2] + c_[C23] * v[1] * v[2];
}

Scalar QForm::operator()(const IVec3& m) const {
    return (*this)(SVec3{Scalar(static_cast<long>(m[0])), Scalar(static_cast<long>(m[1])),
                         Scalar(static_cast<long>(m[2]))});
}

Real QForm::eval_real(const Vec3& v) const {
    Real c[6];
    for (int i = 0; i < 6; ++i) c[i] = c_[i].to_real();
    return c[0] * v[0] * v[0] + c[1] * v[1] * v[1] + c[2] * v[2] * v[2] + c[3] * v[0] * v[1] + c[4] * v[0] * v[2] +
           c[5] * v[1] * v[2];
}

Scalar QForm::polar(const SVec3& v, const SVec3& w) const {
    SVec3 s{v[0] + w[0], v[1] + w[1], v[2] + w[2]};
    return ((*this)(s) - (*this)(v) - (*this)(w)) * kHalf;
}

QForm QForm::scaled(const Scalar& s) const {
    auto c = c_;
    for (auto& x : c) x *= s;
    return QForm(c, inexact_);
}

QForm QForm::operator+(const QForm& o) const {
    auto c = c_;
    for (int i = 0; i < 6; ++i) c[i] += o.c_[i];
    return QForm(c, inexact_ || o.inexact_);
}

bool QForm::operator==(const QForm& o) const {
    for (int i = 0; i < 6; ++i)
        if (!(c_[i] == o.c_[i])) return false;
    return true;
}

bool QForm::is_integral() const {
    for (const auto& s : c_)
        if (!s.is_rational() || s.rat().get_den() != 1) return false;
    return true;
}

bool QForm::is_rational_multiple() const {
    // Q = P + sqrt(d) R with P, R rational; some multiple is rational iff P, R are dependent.
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            if (c_[i].rat() * c_[j].irr() != c_[j].rat() * c_[i].irr()) return false;
    return true;
}

std::string QForm::str() const {
    static const char* names[6] = {"v1^2", "v2^2", "v3^2", "v1v2", "v1v3", "v2v3"};
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < 6; ++i) {
        if (c_[i].is_zero()) continue;
        if (!first) os << " + ";
        os << "(" << c_[i].str() << ")" << names[i];
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

SMat3 smat_mul(const SMat3& a, const SMat3& b) {
    SMat3 c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Scalar s(0);
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    return c;
}

SMat3 smat_transpose(const SMat3& a) {
    SMat3 t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
    return t;
}

Scalar smat_det(const SMat3& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

SMat3 smat_inverse(const SMat3& a) {
    Scalar d = smat_det(a);
    if (d.is_zero()) throw DomainError("singular matrix");
    SMat3 c = adjugate(a);
    for (auto& row : c)
        for (auto& x : row) x /= d;
    return c;
}

SMat3 smat_identity() {
    SMat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = Scalar(i == j ? 1 : 0);
    return a;
}

SMat3 smat_from_int(const std::array<IVec3, 3>& rows) {
    SMat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = Scalar(static_cast<long>(rows[i][j]));
    return a;
}

Mat3 smat_to_real(const SMat3& a) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = a[i][j].to_real();
    return r;
}

QForm dual(const QForm& q) {
    SMat3 a = q.matrix();
    if (smat_det(a).is_zero()) throw DomainError("degenerate form has no dual");
    return QForm::from_matrix(smat_inverse(a), q.inexact());
}

QForm transform(const QForm& q, const SMat3& g) {
    return QForm::from_matrix(smat_mul(smat_transpose(g), smat_mul(q.matrix(), g)), q.inexact());
}

std::pair<QForm, Scalar> normalize_det(const QForm& q) {
    Scalar d = q.det();
    if (d.is_zero()) throw DomainError("degenerate form");
    if (d.is_rational()) {
        mpq_class ad = abs(d.rat());
        mpz_class num = ad.get_num(), den = ad.get_den(), rn, rd;
        bool exact_n = mpz_root(rn.get_mpz_t(), num.get_mpz_t(), 3) != 0;
        bool exact_d = mpz_root(rd.get_mpz_t(), den.get_mpz_t(), 3) != 0;
        if (exact_n && exact_d) {
            Scalar lam(mpq_class(rd, rn));
            return {q.scaled(lam), lam};
        }
    }
    Real lam = std::cbrt(1.0L / std::abs(d.to_real()));
    std::array<Scalar, 6> c;
    for (int i = 0; i < 6; ++i)
        c[i] = Scalar::from_double(static_cast<double>(lam * q.coeffs()[i].to_real()));
    return {QForm(c, true), Scalar::from_double(static_cast<double>(lam))};
}

std::pair<int, int> signature(const QForm& q) {
    SMat3 a = q.matrix();
    Scalar det = smat_det(a);
    if (det.is_zero()) throw DomainError("degenerate form has no signature");
    Scalar tr = a[0][0] + a[1][1] + a[2][2];
    Scalar c2 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2] -
                a[1][2] * a[2][1];
    // det(xI - A) = x^3 - tr x^2 + c2 x - det; all roots real, so Descartes counts are exact.
    auto changes = [](std::array<int, 4> s) {
        int n = 0, last = 0;
        for (int x : s) {
            if (x == 0) continue;
            if (last != 0 && x != last) ++n;
            last = x;
        }
        return n;
    };
    int p = changes({1, -tr.sign(), c2.sign(), -det.sign()});
    int n = changes({-1, -tr.sign(), -c2.sign(), -det.sign()});
    return {p, n};
}

Real form_distance(const QForm& a, const QForm& b) {
    Real m = 0;
    for (int i = 0; i < 6; ++i) m = std::max(m, std::abs((a.coeffs()[i] - b.coeffs()[i]).to_real()));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

using i128 = __int128;

bool mul_ok(i128 a, i128 b, i128& out) { return !__builtin_mul_overflow(a, b, &out); }
bool add_ok(i128 a, i128 b, i128& out) { return !__builtin_add_overflow(a, b, &out); }

bool poly(const std::array<std::int64_t, 6>& c, const IVec3& m, i128& out) {
    const i128 x = m[0], y = m[1], z = m[2];
    const i128 mono[6] = {x * x, y * y, z * z, x * y, x * z, y * z};
    i128 s = 0;
    for (int i = 0; i < 6; ++i) {
        if (c[i] == 0) continue;
        i128 t;
        if (!mul_ok(c[i], mono[i], t) || !add_ok(s, t, s)) return false;
    }
    out = s;
    return true;
}

Real i128_to_real(i128 x) { return static_cast<Real>(x); }

// sign of x + y sqrt(d), or 2 on overflow
int surd_sign(i128 x, i128 y, long d) {
    int sx = (x > 0) - (x < 0), sy = (y > 0) - (y < 0);
    if (sy == 0 || sx == sy) return sx != 0 ? sx : sy;
    if (sx == 0) return sy;
    i128 x2, y2, y2d, norm;
    if (!(mul_ok(x, x, x2) && mul_ok(y, y, y2) && mul_ok(y2, d, y2d) && add_ok(x2, -y2d, norm))) return 2;
    return norm > 0 ? sx : norm < 0 ? sy : 0;
}

}  // namespace

FastForm::FastForm(const QForm& q) : q_(q), d_(q.radicand()), sqrt_d_(std::sqrt(static_cast<Real>(q.radicand()))) {
    mpz_class den = 1;
    for (const auto& s : q.coeffs()) {
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), s.rat().get_den_mpz_t());
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), s.irr().get_den_mpz_t());
    }
    const mpz_class limit = mpz_class(1) << 40;
    if (den > limit) return;
    for (int i = 0; i < 6; ++i) {
        mpq_class p = q.coeffs()[i].rat() * den, r = q.coeffs()[i].irr() * den;
        if (abs(p.get_num()) > limit || abs(r.get_num()) > limit) return;
        p_[i] = p.get_num().get_si();
        r_[i] = r.get_num().get_si();
    }
    den_ = den.get_si();
    fast_ = true;
}

FastForm::Value FastForm::operator()(const IVec3& m) const {
    Value out;
    i128 x = 0, y = 0;
    bool ok = fast_ && sup_norm(m) < (std::int64_t(1) << 40) && poly(p_, m, x) && poly(r_, m, y);
    if (ok) {
        int sx = (x > 0) - (x < 0), sy = (y > 0) - (y < 0);
        if (sx == 0 && sy == 0) return out;
        out.zero = false;
        Real ax = i128_to_real(x < 0 ? -x : x), ay = i128_to_real(y < 0 ? -y : y) * sqrt_d_;
        Real lden = std::log(static_cast<Real>(den_));
        if (sy == 0 || sx == 0 || sx == sy) {
            out.sign = sx != 0 ? sx : sy;
            out.value = out.sign * (ax + ay) / den_;
            out.log_abs = std::log(ax + ay) - lden;
            return out;
        }
        i128 x2, y2, y2d, norm;
        if (mul_ok(x, x, x2) && mul_ok(y, y, y2) && mul_ok(y2, d_, y2d) && add_ok(x2, -y2d, norm)) {
            int sn = (norm > 0) - (norm < 0);
            out.sign = sn > 0 ? sx : sy;
            Real an = i128_to_real(norm < 0 ? -norm : norm);
            out.value = out.sign * an / ((ax + ay) * den_);
            out.log_abs = std::log(an) - std::log(ax + ay) - lden;
            return out;
        }
    }
    Scalar s = q_(m);
    if (s.is_zero()) return out;
    out.zero = false;
    out.sign = s.sign();
    out.value = s.to_real();
    out.log_abs = s.log_abs();
    return out;
}

int FastForm::compare(const IVec3& m, const mpq_class& c) const {
    const mpz_class &cn = c.get_num(), &cd = c.get_den();
    i128 x, y, a, b;
    if (fast_ && sup_norm(m) < (std::int64_t(1) << 40) && cn.fits_slong_p() && cd.fits_slong_p() && poly(p_, m, x) &&
        poly(r_, m, y) && mul_ok(x, cd.get_si(), x) && mul_ok(cn.get_si(), den_, a) && add_ok(x, -a, a) &&
        mul_ok(y, cd.get_si(), b)) {
        int s = surd_sign(a, b, d_);
        if (s != 2) return s;
    }
    return (q_(m) - Scalar(c)).sign();
}

// ---------------------------------------------------------------------------

namespace {

mpq_class json_rational(const nlohmann::json& num, const nlohmann::json& den) {
    auto to_z = [](const nlohmann::json& x) {
        if (x.is_string()) return mpz_class(x.get<std::string>());
        return mpz_class(std::to_string(x.get<long long>()));
    };
    mpz_class d = to_z(den);
    if (d == 0) throw DomainError("zero denominator in form literal");
    mpq_class r(to_z(num), d);
    r.canonicalize();
    return r;
}

}  // namespace

QForm form_from_json(const nlohmann::json& j) {
    long d = j.value("radicand", 1L);
    if (!is_square_free(d)) throw DomainError("radicand must be square-free");
    static const char* keys[6] = {"c11", "c22", "c33", "c12", "c13", "c23"};
    std::array<Scalar, 6> c;
    const auto& cj = j.at("coeffs");
    for (int i = 0; i < 6; ++i) {
        if (!cj.contains(keys[i])) continue;
        const auto& a = cj.at(keys[i]);
        if (!a.is_array() || (a.size() != 2 && a.size() != 4))
            throw DomainError(std::string("coefficient ") + keys[i] + " must be [p,q] or [p,q,p',q']");
        mpq_class p = json_rational(a[0], a[1]);
        mpq_class q = a.size() == 4 ? json_rational(a[2], a[3]) : mpq_class(0);
        c[i] = Scalar(p, q, d);
    }
    return QForm(c);
}

nlohmann::json form_to_json(const QForm& q) {
    static const char* keys[6] = {"c11", "c22", "c33", "c12", "c13", "c23"};
    nlohmann::json j;
    j["radicand"] = q.radicand();
    nlohmann::json c = nlohmann::json::object();
    for (int i = 0; i < 6; ++i) {
        const Scalar& s = q.coeffs()[i];
        c[keys[i]] = {s.rat().get_num().get_str(), s.rat().get_den().get_str(), s.irr().get_num().get_str(),
                      s.irr().get_den().get_str()};
    }
    j["coeffs"] = c;
    if (q.inexact()) j["inexact"] = true;
    return j;
}

}  // namespace opplab
