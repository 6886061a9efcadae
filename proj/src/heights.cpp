#include "opplab/heights.hpp"

#include "opplab/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace opplab {

void HeightParams::validate() const {
    if (!(delta > 0 && delta <= 0.01L)) throw DomainError("delta must lie in (0, 0.01]");
    if (!(eta > 0 && eta <= 1)) throw DomainError("eta must lie in (0, 1]");
    if (!(M > 1)) throw DomainError("M must exceed 1");
    if (!(D > 0)) throw DomainError("D must be positive");
}

Q0Value q0_exact(const Vec3& w) {
    mpq_class a = real_to_mpq(w[0]), b = real_to_mpq(w[1]), c = real_to_mpq(w[2]);
    mpq_class q = b * b - 2 * a * c;
    Q0Value out;
    if (sgn(q) == 0) return out;
    out.zero = false;
    out.sign = sgn(q);
    out.value = mpq_to_real(q);
    out.log_abs = mpq_log_abs(q);
    return out;
}

namespace {

void require_nonzero(const Vec3& w) {
    if (w[0] == 0 && w[1] == 0 && w[2] == 0) throw DomainError("zero vector");
}

// log kappa for a vector whose "third" coordinate is z and rho = -y / z
Real log_kappa_impl(Real y, Real z, const Q0Value& q) {
    if (z == 0) return 0;
    if (!(std::abs(y) < 2 * std::abs(z))) return 0;
    if (q.zero) return -kInf;
    Real lk = q.log_abs - 2 * std::log(std::abs(z));
    return lk < 0 ? lk : 0;
}

Q0Value scaled(Q0Value q, Real k) {
    if (!q.zero) {
        q.value *= k * k;
        q.log_abs += 2 * std::log(k);
    }
    return q;
}

}  // namespace

VectorProfile profile(const Vec3& w) { return profile(w, q0_exact(w)); }

VectorProfile profile(const Vec3& w, const Q0Value& q) {
    require_nonzero(w);
    VectorProfile p;
    if (w[1] == 0 && w[2] == 0) {
        p.rho = p.kappa0 = kInf;
        p.kappa = 1;
        return p;
    }
    if (w[2] == 0) {
        p.rho = w[1] > 0 ? -kInf : kInf;
        p.kappa0 = q.zero ? 0 : q.sign * kInf;
        p.kappa = 1;
        return p;
    }
    p.rho = -w[1] / w[2];
    p.kappa0 = q.zero ? 0 : q.sign * std::exp(q.log_abs - 2 * std::log(std::abs(w[2])));
    p.kappa = std::exp(log_kappa_impl(w[1], w[2], q));
    return p;
}

Real log_kappa(const Vec3& w, const Q0Value& q) {
    require_nonzero(w);
    return log_kappa_impl(w[1], w[2], q);
}

Real log_kappa_star(const Vec3& w, const Q0Value& q) {
    require_nonzero(w);
    // J w = (w3, -w2, w1)
    return log_kappa_impl(-w[1], w[0], q);
}

Real phi_delta(const Vec3& w, Real delta, bool starred) { return phi_delta(w, q0_exact(w), delta, starred); }

Real phi_delta(const Vec3& w, const Q0Value& q, Real delta, bool starred) {
    Real lk = starred ? log_kappa_star(w, q) : log_kappa(w, q);
    if (lk == -kInf) return kInf;
    return std::exp(-2 * delta * lk - (1 + delta) * std::log(sup_norm(w)));
}

bool is_quasi_null(const Vec3& v, const HeightParams& p) {
    require_nonzero(v);
    return quasi_null_test(q0_exact(v), sup_norm(v), p.eta, p.M);
}

bool is_quasi_null(const Q0Value& q, Real norm, const HeightParams& p) {
    return quasi_null_test(q, norm, p.eta, p.M);
}

Real first_regular_multiple(const Q0Value& q, Real norm, const HeightParams& p) {
    if (q.zero) return kInf;
    if (!quasi_null_test(q, norm, p.eta, p.M)) return 1;
    // |Q_0(kv)| >= eta |kv|^{-50M}  <=>  (2 + 50M) log k >= log eta - 50M log|v| - log|Q_0(v)|
    Real L = (std::log(p.eta) - 50 * p.M * std::log(norm) - q.log_abs) / (2 + 50 * p.M);
    Real k = std::max<Real>(1, std::ceil(std::exp(L)));
    if (!std::isfinite(k)) return kInf;
    while (k > 1 && !quasi_null_test(scaled(q, k - 1), (k - 1) * norm, p.eta, p.M)) k -= 1;
    while (quasi_null_test(scaled(q, k), k * norm, p.eta, p.M)) k += 1;
    return k;
}

Real alpha_hat_side(const Lattice3& lat, const Mat3& h, const HeightParams& p, bool isotropic_only) {
    Reduced r = lll_reduce(h * lat.basis());
    auto cost = [&](const LatticeVector& w) -> Real {
        Q0Value q = lat.q0(w.m);
        if (q.zero) return kInf;
        if (isotropic_only) return w.norm;
        Real k = first_regular_multiple(q, sup_norm(lat.vector(w.m)), p);
        return k * w.norm;
    };
    return 1 / minimize_primitive(r, cost).value;
}

Real alpha_hat(const Mat3& g, const Lattice3& lat, const HeightParams& p, AlphaHatVariant variant) {
    if (!in_H(g)) throw DomainError("group element does not preserve Q_0");
    bool iso = variant == AlphaHatVariant::Isotropic;
    Real a = std::max(alpha_hat_side(lat, g, p, iso), alpha_hat_side(lat.dual(), star(g), p, iso));
    if (variant == AlphaHatVariant::Prime) a = std::max(a, std::pow(alpha(lat.transformed(g, true)), 0.9L));
    return a;
}

Real alpha_tilde_side(const Lattice3& lat, const Mat3& h, const HeightParams& p, bool starred) {
    Reduced r = lll_reduce(h * lat.basis());
    Real best = -kInf;
    const Real qn_exp = -(1 - 3 * p.delta);
    for_each_vector(r, 1, true, [&](const LatticeVector& w) {
        Q0Value q = lat.q0(w.m);
        Real kmax = std::floor(1 / w.norm * (1 + 4e-18L));
        Real k = first_regular_multiple(q, sup_norm(lat.vector(w.m)), p);
        // quasi-null multiples decrease along k, so k = 1 dominates them
        if (k > 1) best = std::max(best, std::pow(w.norm, qn_exp));
        if (k <= kmax) {
            Real lk = starred ? log_kappa_star(w.v, q) : log_kappa(w.v, q);
            Real val = lk == -kInf ? kInf : std::exp(-2 * p.delta * lk - (1 + p.delta) * std::log(k * w.norm));
            best = std::max(best, val);
        }
        return true;
    });
    return best == -kInf ? 1 : best;
}

Real alpha_tilde(const Mat3& g, const Lattice3& lat, const HeightParams& p) {
    if (!in_H(g)) throw DomainError("group element does not preserve Q_0");
    return std::max(alpha_tilde_side(lat, g, p, false), alpha_tilde_side(lat.dual(), star(g), p, true));
}

Real log_epsilon_threshold(Real ahat, const HeightParams& p, Real s) {
    if (ahat <= 1e4L * std::exp(4 * s)) return std::log(p.eta) - 60 * p.M * (std::log(3.0L) + s);
    return std::log(p.eta) - 100 * p.D * p.M * p.M * std::log(ahat);
}

Real log_epsilon_threshold(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s) {
    if (s < 1) throw DomainError("s must be at least 1");
    return log_epsilon_threshold(alpha_hat(g, lat, p, AlphaHatVariant::EtaM), p, s);
}

std::optional<XiWitness> xi_search(const Lattice3& lat, const Mat3& h, Real s, Real log_eps,
                                   bool exclude_quasi_null, const HeightParams& p) {
    const Real R = 3 * std::exp(s);
    Reduced r = lll_reduce(h * lat.basis());
    // Gram matrix of Q_0 in reduced coordinates, taken from the untransformed basis (h preserves Q_0)
    Mat3 bu{}, babs{};
    for (int j = 0; j < 3; ++j) {
        Vec3 c = lat.vector(r.u[j]);
        for (int i = 0; i < 3; ++i) {
            bu[i][j] = c[i];
            babs[i][j] = std::abs(c[i]);
        }
    }
    const Mat3 a0{{{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}}}, a0abs{{{0, 0, 1}, {0, 1, 0}, {1, 0, 0}}};
    const Mat3 G = transpose(bu) * a0 * bu, Gabs = transpose(babs) * a0abs * babs;
    const Real rel = 64 * std::numeric_limits<Real>::epsilon();
    const Real tau = std::exp(log_eps) * R * R;
    const Vec3 b1 = column(r.b, 0), b2 = column(r.b, 1), b3 = column(r.b, 2);
    std::optional<XiWitness> found;
    std::vector<std::pair<Real, Real>> band;
    long long visited = 0;
    const long long cap = enumeration_cap();
    for_each_slice(r, R, [&](std::int64_t m2, std::int64_t m3, Real lo, Real hi) {
        const Real x2 = m2, x3 = m3, a2 = std::abs(x2), a3 = std::abs(x3);
        BandQuadratic q;
        q.a = G[0][0];
        q.b = 2 * (G[0][1] * x2 + G[0][2] * x3);
        q.c = G[1][1] * x2 * x2 + 2 * G[1][2] * x2 * x3 + G[2][2] * x3 * x3;
        q.ea = rel * Gabs[0][0];
        q.eb = rel * 2 * (Gabs[0][1] * a2 + Gabs[0][2] * a3);
        q.ec = rel * (Gabs[1][1] * a2 * a2 + 2 * Gabs[1][2] * a2 * a3 + Gabs[2][2] * a3 * a3);
        const Vec3 y = x2 * b2 + x3 * b3;
        if (y[2] == 0 && b1[2] == 0) return true;  // kappa = 1 on the whole slice
        quadratic_band(q, tau, lo, hi, band);
        for (auto [p0, p1] : band) {
            for (Real x = p0; x <= p1; x += 1) {
                if (++visited > cap) throw ResourceError("xi search exceeds enum.max_box");
                if (std::abs(x) > 9e18L) throw ResourceError("lattice coordinates exceed 64 bits");
                Vec3 w = y + x * b1;
                Real n = sup_norm(w);
                if (n < 1 || n > R || w[2] == 0) continue;
                if (!(std::abs(w[1]) < 2 * std::abs(w[2]))) continue;
                // float screen: |Q_0| must be able to fall below eps w3^2
                if (std::abs(q(x)) > q.error(x) + std::exp(log_eps) * w[2] * w[2] * (1 + 1e-6L)) continue;
                IVec3 k{static_cast<std::int64_t>(x), m2, m3};
                IVec3 m = r.original(k);
                Q0Value qv = lat.q0(m);
                Real lk = log_kappa_impl(w[1], w[2], qv);
                if (!(lk < log_eps)) continue;
                if (exclude_quasi_null && quasi_null_test(qv, sup_norm(lat.vector(m)), p.eta, p.M)) continue;
                found = XiWitness{m, w, lk};
                return false;
            }
        }
        return true;
    });
    return found;
}

ExceptionalReport in_exceptional_set(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s) {
    if (s < 1) throw DomainError("s must be at least 1");
    if (!in_H(g)) throw DomainError("group element does not preserve Q_0");
    ExceptionalReport rep;
    rep.alpha_hat = alpha_hat(g, lat, p, AlphaHatVariant::EtaM);
    rep.log_epsilon = log_epsilon_threshold(rep.alpha_hat, p, s);
    if (auto w = xi_search(lat, g, s, rep.log_epsilon, true, p)) {
        rep.member = true;
        rep.side = 1;
        rep.witness = w;
        return rep;
    }
    // kappa_2(g* v) = kappa(J g* v), and J preserves Q_0 and the norm
    if (auto w = xi_search(lat.dual(), J_mat() * star(g), s, rep.log_epsilon, true, p)) {
        w->image = J(w->image);
        rep.member = true;
        rep.side = 2;
        rep.witness = w;
    }
    return rep;
}

bool in_K_set(const Lattice3& lat, const Mat3& h, Real s, Real eps) {
    return xi_search(lat, h, s, std::log(eps), false, HeightParams{}).has_value();
}

}  // namespace opplab
