#include "opplab/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace opplab {

namespace {

class FormSource : public ExactSource {
public:
    explicit FormSource(const QForm& q) : q_(q), f_(q) {}
    Q0Value q0(const IVec3& m) const override { return f_(m); }
    std::shared_ptr<const ExactSource> dual() const override { return std::make_shared<FormSource>(opplab::dual(q_)); }

private:
    QForm q_;
    FastForm f_;
};

class BasisSource : public ExactSource {
public:
    explicit BasisSource(const SMat3& b) : b_(b) {}
    Q0Value q0(const IVec3& m) const override {
        SVec3 v;
        for (int i = 0; i < 3; ++i) {
            Scalar s(0);
            for (int j = 0; j < 3; ++j) s += b_[i][j] * Scalar(static_cast<long>(m[j]));
            v[i] = s;
        }
        Scalar q = v[1] * v[1] - Scalar(2) * v[0] * v[2];
        Q0Value out;
        if (q.is_zero()) return out;
        out.zero = false;
        out.sign = q.sign();
        out.value = q.to_real();
        out.log_abs = q.log_abs();
        return out;
    }
    std::shared_ptr<const ExactSource> dual() const override {
        return std::make_shared<BasisSource>(smat_transpose(smat_inverse(b_)));
    }

private:
    SMat3 b_;
};

std::atomic<long long> g_cap{400'000'000LL};

}  // namespace

std::shared_ptr<const ExactSource> form_source(const QForm& q) { return std::make_shared<FormSource>(q); }
std::shared_ptr<const ExactSource> basis_source(const SMat3& b) { return std::make_shared<BasisSource>(b); }

void set_enumeration_cap(long long cap) { g_cap = cap; }
long long enumeration_cap() { return g_cap; }

// ---------------------------------------------------------------------------

Lattice3::Lattice3(const Mat3& basis, std::string provenance) : b_(basis), bd_(star(basis)), prov_(std::move(provenance)) {
    Real d = det(basis);
    if (!(std::abs(std::abs(d) - 1) < 1e-9L)) throw DomainError("lattice basis must have |det| = 1");
}

Lattice3 Lattice3::integer() {
    Lattice3 l = exact(smat_identity(), "Z^3");
    return l;
}

Lattice3 Lattice3::exact(const SMat3& basis, std::string provenance) {
    Scalar d = smat_det(basis);
    if (!(d == Scalar(1) || d == Scalar(-1))) throw DomainError("exact lattice basis must have |det| = 1");
    Lattice3 l(smat_to_real(basis), std::move(provenance));
    l.src_ = basis_source(basis);
    l.dsrc_ = basis_source(smat_transpose(smat_inverse(basis)));
    l.exact_ = basis;
    return l;
}

Lattice3 Lattice3::dual() const {
    Lattice3 l = *this;
    std::swap(l.b_, l.bd_);
    std::swap(l.src_, l.dsrc_);
    if (exact_) l.exact_ = smat_transpose(smat_inverse(*exact_));
    l.prov_ = "dual of " + prov_;
    return l;
}

Lattice3 Lattice3::transformed(const Mat3& h, bool preserves_q0) const {
    Lattice3 l = *this;
    l.b_ = h * b_;
    l.bd_ = star(h) * bd_;
    if (!preserves_q0) l.src_ = l.dsrc_ = nullptr;
    l.exact_.reset();
    return l;
}

Lattice3 Lattice3::with_source(std::shared_ptr<const ExactSource> src, std::shared_ptr<const ExactSource> dual_src,
                               std::string provenance) const {
    Lattice3 l = *this;
    l.src_ = std::move(src);
    l.dsrc_ = std::move(dual_src);
    l.prov_ = std::move(provenance);
    return l;
}

Q0Value Lattice3::q0(const IVec3& m) const {
    if (src_) return src_->q0(m);
    Vec3 v = b_ * m;
    Real q = v[1] * v[1] - 2 * v[0] * v[2];
    Q0Value out;
    if (q == 0) return out;
    out.zero = false;
    out.sign = q > 0 ? 1 : -1;
    out.value = q;
    out.log_abs = std::log(std::abs(q));
    return out;
}

// ---------------------------------------------------------------------------

Mat3 form_congruence(const QForm& q) {
    // Pick a unimodular C whose second column c has Q(c) > 0.
    std::vector<IVec3> cands = {{0, 1, 0}, {1, 0, 0}, {0, 0, 1}};
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) {
                IVec3 v{a, b, c};
                if (gcd3(v) == 1 && canonical_sign(v) == v && std::count(v.begin(), v.end(), 0) < 2) cands.push_back(v);
            }
    SMat3 A = q.matrix();
    for (const IVec3& c : cands) {
        if (q(c).sign() <= 0) continue;
        std::array<IVec3, 3> rows;
        if (c[1] != 0) {
            rows = {IVec3{1, c[0], 0}, IVec3{0, c[1], 0}, IVec3{0, c[2], 1}};
        } else if (c[0] != 0) {
            rows = {IVec3{0, c[0], 0}, IVec3{1, 0, 0}, IVec3{0, c[2], 1}};
        } else {
            rows = {IVec3{1, 0, 0}, IVec3{0, 0, 1}, IVec3{0, c[2], 0}};
        }
        SMat3 C = smat_from_int(rows);
        SMat3 Ap = smat_mul(smat_transpose(C), smat_mul(A, C));
        const Scalar& a22 = Ap[1][1];
        Scalar p = Ap[0][0] - Ap[0][1] * Ap[0][1] / a22;
        Scalar qq = Ap[0][2] - Ap[0][1] * Ap[1][2] / a22;
        Scalar r = Ap[2][2] - Ap[1][2] * Ap[1][2] / a22;
        Real s22 = std::sqrt(a22.to_real());
        Mat3 gp{};
        for (int j = 0; j < 3; ++j) gp[1][j] = Ap[1][j].to_real() / s22;
        if (p.is_zero()) {
            if (qq.is_zero()) throw DomainError("degenerate form");
            gp[2] = {0, 0, 1};
            gp[0] = {-qq.to_real(), 0, -r.to_real() / 2};
        } else {
            Real pr = p.to_real(), qr = qq.to_real(), rr = r.to_real();
            Real disc = (qq * qq - p * r).to_real();
            if (!(disc > 0)) throw DomainError("form is not of signature (2,1)");
            Real s = -(qr + (qr >= 0 ? 1 : -1) * std::sqrt(disc));
            Real x1 = s / pr, x2 = rr / s;
            gp[2] = {1, 0, -x2};
            gp[0] = {-pr / 2, 0, pr / 2 * x1};
        }
        Mat3 g = gp * smat_to_real(smat_inverse(C));
        if (det(g) < 0)
            for (auto& row : g)
                for (auto& x : row) x = -x;
        if (std::abs(det(g) - 1) > 1e-9L) throw DomainError("form does not have |det| = 1");
        return g;
    }
    throw DomainError("form is not of signature (2,1)");
}

Lattice3 lattice_from_form(const QForm& q) {
    if (signature(q) != std::pair<int, int>(2, 1)) throw DomainError("lattice_from_form needs signature (2,1)");
    Scalar d = q.det();
    bool unit = q.inexact() ? std::abs(std::abs(d.to_real()) - 1) < 1e-12L : (d == Scalar(1) || d == Scalar(-1));
    if (!unit) throw DomainError("lattice_from_form needs |det| = 1");
    Lattice3 l(form_congruence(q), "Delta_Q");
    return l.with_source(form_source(q), form_source(dual(q)), "Delta_Q for " + q.str());
}

// ---------------------------------------------------------------------------

namespace {

void gram_schmidt(Reduced& r) {
    Vec3 bs[3];
    for (int i = 0; i < 3; ++i) {
        Vec3 bi = column(r.b, i);
        bs[i] = bi;
        for (int j = 0; j < i; ++j) {
            r.mu[i][j] = dot(bi, bs[j]) / r.bstar2[j];
            bs[i] = bs[i] - r.mu[i][j] * bs[j];
        }
        r.bstar2[i] = dot(bs[i], bs[i]);
    }
}

void set_column(Mat3& b, int j, const Vec3& v) {
    for (int i = 0; i < 3; ++i) b[i][j] = v[i];
}

}  // namespace

Reduced lll_reduce(const Mat3& basis) {
    Reduced r{};
    r.b = basis;
    r.u = {IVec3{1, 0, 0}, IVec3{0, 1, 0}, IVec3{0, 0, 1}};
    gram_schmidt(r);
    const Real delta = 0.99L;
    int k = 1, iter = 0;
    while (k < 3) {
        if (++iter > 100000) throw ResourceError("LLL did not converge");
        for (int j = k - 1; j >= 0; --j) {
            Real q = std::nearbyint(r.mu[k][j]);
            if (q == 0) continue;
            auto qi = static_cast<std::int64_t>(q);
            for (int i = 0; i < 3; ++i) r.u[k][i] -= qi * r.u[j][i];
            set_column(r.b, k, basis * r.u[k]);
            gram_schmidt(r);
        }
        if (r.bstar2[k] >= (delta - r.mu[k][k - 1] * r.mu[k][k - 1]) * r.bstar2[k - 1]) {
            ++k;
        } else {
            std::swap(r.u[k], r.u[k - 1]);
            Vec3 a = column(r.b, k), b = column(r.b, k - 1);
            set_column(r.b, k, b);
            set_column(r.b, k - 1, a);
            gram_schmidt(r);
            k = std::max(k - 1, 1);
        }
    }
    return r;
}

namespace {

// Integer range of x with |y_i + x b_i| <= R for all i (slightly widened).
bool layer_range(const Vec3& y, const Vec3& b, Real R, Real& lo, Real& hi) {
    lo = -kInf;
    hi = kInf;
    for (int i = 0; i < 3; ++i) {
        if (b[i] == 0) {
            if (std::abs(y[i]) > R * (1 + 1e-15L)) return false;
            continue;
        }
        Real a1 = (-R - y[i]) / b[i], a2 = (R - y[i]) / b[i];
        if (a1 > a2) std::swap(a1, a2);
        lo = std::max(lo, a1);
        hi = std::min(hi, a2);
    }
    Real slack = 1e-12L * (1 + std::max(std::abs(lo), std::abs(hi)));
    lo = std::ceil(lo - slack);
    hi = std::floor(hi + slack);
    return lo <= hi;
}

// Minimizer of max_i |y_i + x b_i| over real x.
Real layer_center(const Vec3& y, const Vec3& b) {
    Real best_x = 0, best = kInf;
    auto consider = [&](Real x) {
        if (!std::isfinite(x)) return;
        Real v = sup_norm(y + x * b);
        if (v < best) {
            best = v;
            best_x = x;
        }
    };
    for (int i = 0; i < 3; ++i) {
        if (b[i] != 0) consider(-y[i] / b[i]);
        for (int j = i + 1; j < 3; ++j) {
            if (b[i] != b[j]) consider((y[j] - y[i]) / (b[i] - b[j]));
            if (b[i] != -b[j]) consider(-(y[i] + y[j]) / (b[i] + b[j]));
        }
    }
    return best_x;
}

template <class Layer>
void for_each_layer(const Reduced& r, Real R, Layer&& layer) {
    const Real rho2 = 3 * R * R * (1 + 1e-12L);
    const Real m3max = std::floor(std::sqrt(rho2 / r.bstar2[2]));
    if (m3max > 1e12L) throw ResourceError("enumeration radius too large");
    for (std::int64_t m3 = 0; m3 <= static_cast<std::int64_t>(m3max); ++m3) {
        Real rem = rho2 - Real(m3) * m3 * r.bstar2[2];
        if (rem < 0) continue;
        Real c2 = -r.mu[2][1] * m3, w2 = std::sqrt(rem / r.bstar2[1]);
        auto lo2 = static_cast<std::int64_t>(std::ceil(c2 - w2)), hi2 = static_cast<std::int64_t>(std::floor(c2 + w2));
        if (m3 == 0) lo2 = std::max<std::int64_t>(lo2, 0);
        for (std::int64_t m2 = lo2; m2 <= hi2; ++m2)
            if (!layer(m2, m3)) return;
    }
}

}  // namespace

void for_each_vector(const Reduced& r, Real R, bool primitive_only,
                     const std::function<bool(const LatticeVector&)>& visit) {
    const Vec3 b1 = column(r.b, 0), b2 = column(r.b, 1), b3 = column(r.b, 2);
    long long visited = 0;
    const long long cap = enumeration_cap();
    for_each_layer(r, R, [&](std::int64_t m2, std::int64_t m3) {
        Vec3 y = Real(m2) * b2 + Real(m3) * b3;
        Real lo, hi;
        if (!layer_range(y, b1, R, lo, hi)) return true;
        if (m2 == 0 && m3 == 0) lo = std::max<Real>(lo, 1);
        visited += static_cast<long long>(hi - lo + 1);
        if (visited > cap) throw ResourceError("enumeration exceeds enum.max_box");
        for (auto m1 = static_cast<std::int64_t>(lo); m1 <= static_cast<std::int64_t>(hi); ++m1) {
            IVec3 k{m1, m2, m3};
            if (primitive_only && gcd3(k) != 1) continue;
            LatticeVector w;
            w.v = r.b * k;
            w.norm = sup_norm(w.v);
            if (w.norm > R * (1 + 4e-18L)) continue;
            w.m = r.original(k);
            if (!visit(w)) return false;
        }
        return true;
    });
}

void for_each_slice(const Reduced& r, Real R,
                    const std::function<bool(std::int64_t, std::int64_t, Real, Real)>& visit) {
    const Vec3 b1 = column(r.b, 0), b2 = column(r.b, 1), b3 = column(r.b, 2);
    for_each_layer(r, R, [&](std::int64_t m2, std::int64_t m3) {
        Vec3 y = Real(m2) * b2 + Real(m3) * b3;
        Real lo, hi;
        if (!layer_range(y, b1, R, lo, hi)) return true;
        if (m2 == 0 && m3 == 0) lo = std::max<Real>(lo, 1);
        if (lo > hi) return true;
        return visit(m2, m3, lo, hi);
    });
}

std::vector<LatticeVector> enumerate_vectors(const Mat3& basis, Real R, bool primitive_only) {
    if (!(R > 0)) throw DomainError("enumeration radius must be positive");
    std::vector<LatticeVector> out;
    for_each_vector(lll_reduce(basis), R, primitive_only, [&](const LatticeVector& w) {
        out.push_back(w);
        return true;
    });
    return out;
}

std::vector<LatticeVector> enumerate_vectors(const Lattice3& lat, Real R, bool primitive_only) {
    return enumerate_vectors(lat.basis(), R, primitive_only);
}

CostResult minimize_primitive(const Reduced& r, const std::function<Real(const LatticeVector&)>& cost) {
    CostResult best;
    Real maxb = 0;
    for (int j = 0; j < 3; ++j) {
        IVec3 k{0, 0, 0};
        k[j] = 1;
        LatticeVector w;
        w.v = column(r.b, j);
        w.norm = sup_norm(w.v);
        w.m = r.u[j];
        maxb = std::max(maxb, w.norm);
        Real c = cost(w);
        if (c < best.value) best = {c, w};
    }
    const Vec3 b1 = column(r.b, 0), b2 = column(r.b, 1), b3 = column(r.b, 2);
    Real R = std::isfinite(best.value) ? best.value : 2 * maxb;
    long long visited = 0;
    const long long cap = enumeration_cap();
    for (int round = 0; round < 200; ++round) {
        for_each_layer(r, R, [&](std::int64_t m2, std::int64_t m3) {
            Vec3 y = Real(m2) * b2 + Real(m3) * b3;
            Real bound = std::min(R, best.value);
            Real lo, hi;
            if (!layer_range(y, b1, bound, lo, hi)) return true;
            if (m2 == 0 && m3 == 0) {
                lo = hi = 1;  // only the primitive vector on the b1 line
            }
            Real xc = layer_center(y, b1);
            Real up = std::clamp(std::ceil(xc), lo, hi), down = std::clamp(std::floor(xc), lo, hi);
            if (down == up) down = up - 1;
            for (int dir = 0; dir < 2; ++dir) {
                for (Real x = dir == 0 ? up : down; x >= lo && x <= hi; x += dir == 0 ? 1 : -1) {
                    if (++visited > cap) throw ResourceError("enumeration exceeds enum.max_box");
                    IVec3 k{static_cast<std::int64_t>(x), m2, m3};
                    LatticeVector w;
                    w.v = r.b * k;
                    w.norm = sup_norm(w.v);
                    if (w.norm > best.value) break;
                    if (gcd3(k) != 1) continue;
                    w.m = r.original(k);
                    Real cv = cost(w);
                    if (cv < best.value) best = {cv, w};
                    if (cv == w.norm) break;
                }
            }
            return true;
        });
        if (std::isfinite(best.value) && best.value <= R) return best;
        R *= 2;
    }
    throw ResourceError("no admissible lattice vector found");
}

Real shortest_norm(const Mat3& basis) {
    return minimize_primitive(lll_reduce(basis), [](const LatticeVector& w) { return w.norm; }).value;
}

Real alpha1(const Mat3& basis) { return 1 / shortest_norm(basis); }

Real alpha(const Lattice3& lat) { return std::max(alpha1(lat.basis()), alpha1(lat.dual_basis())); }

// ---------------------------------------------------------------------------

std::array<IVec3, 2> plane_basis(const IVec3& n) {
    if (n == IVec3{0, 0, 0}) throw DomainError("zero normal");
    std::array<IVec3, 3> cols{IVec3{1, 0, 0}, IVec3{0, 1, 0}, IVec3{0, 0, 1}};
    IVec3 row = n;
    while (true) {
        int piv = -1;
        for (int i = 0; i < 3; ++i)
            if (row[i] != 0 && (piv < 0 || std::llabs(row[i]) < std::llabs(row[piv]))) piv = i;
        bool done = true;
        for (int j = 0; j < 3; ++j) {
            if (j == piv || row[j] == 0) continue;
            done = false;
            std::int64_t q = row[j] / row[piv];
            row[j] -= q * row[piv];
            for (int i = 0; i < 3; ++i) cols[j][i] -= q * cols[piv][i];
        }
        if (done) {
            std::array<IVec3, 2> out;
            int t = 0;
            for (int j = 0; j < 3; ++j)
                if (j != piv) out[t++] = cols[j];
            auto n2 = [](const IVec3& a) { return a[0] * a[0] + a[1] * a[1] + a[2] * a[2]; };
            while (true) {
                if (n2(out[1]) < n2(out[0])) std::swap(out[0], out[1]);
                std::int64_t d = dot(out[0], out[1]), l = n2(out[0]);
                if (2 * std::llabs(d) <= l) break;
                auto q = static_cast<std::int64_t>(std::llround(static_cast<long double>(d) / l));
                for (int i = 0; i < 3; ++i) out[1][i] -= q * out[0][i];
            }
            out[0] = canonical_sign(out[0]);
            out[1] = canonical_sign(out[1]);
            return out;
        }
    }
}

Real rational_subspace_covolume(const Lattice3& lat, const RationalSubspace& sub) {
    if (gcd3(sub.vec) != 1) throw DomainError("subspace vector must be primitive");
    if (sub.dim == 1) return euclid_norm(lat.vector(sub.vec));
    if (sub.dim != 2) throw DomainError("subspace dimension must be 1 or 2");
    auto nb = plane_basis(sub.vec);
    return euclid_norm(cross(lat.vector(nb[0]), lat.vector(nb[1])));
}

bool quasi_null_test(const Q0Value& q, Real norm, Real eta, Real M) {
    if (q.zero) return true;
    return q.log_abs < std::log(eta) - 50 * M * std::log(norm);
}

std::vector<IVec3> exceptional_plane_normals(const Lattice3& lat, const SiegelOptions& opt) {
    std::vector<IVec3> out;
    if (opt.variant == SiegelVariant::Full) return out;
    Lattice3 d = lat.dual();
    for (const auto& w : enumerate_vectors(d.basis(), opt.plane_search_radius, true)) {
        Q0Value q = d.q0(w.m);
        bool bad = opt.variant == SiegelVariant::IsotropicExcluded ? q.zero : quasi_null_test(q, w.norm, opt.eta, opt.M);
        if (bad) out.push_back(w.m);
    }
    return out;
}

bool excluded_from_Y(const Lattice3& lat, const IVec3& m, const SiegelOptions& opt, const std::vector<IVec3>& normals) {
    if (opt.variant == SiegelVariant::Full) return false;
    Q0Value q = lat.q0(m);
    if (opt.variant == SiegelVariant::IsotropicExcluded ? q.zero
                                                          : quasi_null_test(q, sup_norm(lat.vector(m)), opt.eta, opt.M))
        return true;
    for (const auto& n : normals)
        if (dot(n, m) == 0) return true;
    return false;
}

Real siegel_transform(const SupportedFunction& f, const Lattice3& lat, const Mat3& g, const SiegelOptions& opt) {
    if (!f.f || !(f.outer > 0)) throw DomainError("function needs declared support bounds");
    auto normals = exceptional_plane_normals(lat, opt);
    Real sum = 0;
    for_each_vector(lll_reduce(g * lat.basis()), f.outer, false, [&](const LatticeVector& w) {
        if (w.norm < f.inner) return true;
        if (excluded_from_Y(lat, w.m, opt, normals)) return true;
        sum += f.f(w.v) + f.f(-w.v);
        return true;
    });
    return sum;
}

}  // namespace opplab
