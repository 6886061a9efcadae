#include "opplab/dioph.hpp"

#include "opplab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace opplab {

namespace {

using i128 = __int128;

i128 det3(const IVec3& a, const IVec3& b, const IVec3& c) {
    return static_cast<i128>(a[0]) * (static_cast<i128>(b[1]) * c[2] - static_cast<i128>(b[2]) * c[1]) -
           static_cast<i128>(a[1]) * (static_cast<i128>(b[0]) * c[2] - static_cast<i128>(b[2]) * c[0]) +
           static_cast<i128>(a[2]) * (static_cast<i128>(b[0]) * c[1] - static_cast<i128>(b[1]) * c[0]);
}

// exact cube root of a positive rational, when there is one
std::optional<mpq_class> rational_cbrt(const mpq_class& x) {
    mpz_class n = x.get_num(), d = x.get_den(), rn, rd;
    bool neg = n < 0;
    if (neg) n = -n;
    if (mpz_root(rn.get_mpz_t(), n.get_mpz_t(), 3) == 0 || mpz_root(rd.get_mpz_t(), d.get_mpz_t(), 3) == 0)
        return std::nullopt;
    mpq_class r(neg ? mpz_class(-rn) : rn, rd);
    r.canonicalize();
    return r;
}

}  // namespace

IntegralFormResult construct_integral_form(const QForm& q, const std::array<IVec3, 5>& m, Real R, Real eps) {
    if (!(R > 0)) throw DomainError("R must be positive");
    if (!(eps >= 0)) throw DomainError("eps must be non-negative");
    for (const auto& v : m) {
        if (v == IVec3{0, 0, 0}) throw DomainError("vectors must be nonzero");
        if (!(static_cast<Real>(sup_norm(v)) < R)) throw DomainError("vector norm must be below R");
        Scalar qv = q(v);
        bool small = eps == 0 ? qv.is_zero() : std::abs(qv.to_real()) <= eps;
        if (!small) throw DomainError("|Q(m_i)| exceeds eps");
    }
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            for (int k = j + 1; k < 5; ++k)
                if (det3(m[i], m[j], m[k]) == 0) throw DomainError("three of the vectors lie on a plane");
    // gamma has columns m1, m2, m3; adj(gamma)[i][j] is the (j, i) cofactor
    mpz_class g[3][3], adj[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[i][j] = static_cast<long>(m[j][i]);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj[i][j] = g[r0][c0] * g[r1][c1] - g[r0][c1] * g[r1][c0];
        }
    mpz_class detg = g[0][0] * adj[0][0] + g[0][1] * adj[1][0] + g[0][2] * adj[2][0];
    if (detg == 0) throw DomainError("det gamma = 0");
    mpz_class a[3], b[3];
    for (int i = 0; i < 3; ++i) {
        a[i] = adj[i][0] * static_cast<long>(m[3][0]) + adj[i][1] * static_cast<long>(m[3][1]) +
               adj[i][2] * static_cast<long>(m[3][2]);
        b[i] = adj[i][0] * static_cast<long>(m[4][0]) + adj[i][1] * static_cast<long>(m[4][1]) +
               adj[i][2] * static_cast<long>(m[4][2]);
    }
    // c pairs with (Q(m2,m3), Q(m3,m1), Q(m1,m2))
    mpz_class c1 = a[0] * b[0] * (a[1] * b[2] - a[2] * b[1]);
    mpz_class c2 = a[1] * b[1] * (a[2] * b[0] - a[0] * b[2]);
    mpz_class c3 = a[2] * b[2] * (a[0] * b[1] - a[1] * b[0]);
    if (c1 == 0 && c2 == 0 && c3 == 0) throw DomainError("a and b are parallel");
    QForm q1({0, 0, 0, Scalar(mpq_class(c3)), Scalar(mpq_class(c2)), Scalar(mpq_class(c1))});
    SMat3 A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A[i][j] = Scalar(mpq_class(adj[i][j]));
    IntegralFormResult res;
    res.form = transform(q1, A);
    res.det_gamma = Scalar(mpq_class(detg));
    Scalar dq = q.det(), dp = res.form.det();
    if (dp.is_zero()) throw DomainError("constructed form is degenerate");
    Scalar ratio = dq / dp;
    res.norm = 0;
    for (const auto& c : res.form.coeffs()) res.norm = std::max(res.norm, std::abs(c.to_real()));
    std::optional<mpq_class> exact_rho;
    if (ratio.is_rational()) exact_rho = rational_cbrt(ratio.rat());
    if (exact_rho) {
        res.rho = mpq_to_real(*exact_rho);
        res.dist = form_distance(q, res.form.scaled(Scalar(*exact_rho)));
    } else {
        res.rho = std::cbrt(ratio.to_real());
        for (int i = 0; i < 6; ++i)
            res.dist = std::max(res.dist, std::abs(q.coeffs()[i].to_real() - res.rho * res.form.coeffs()[i].to_real()));
    }
    res.within_bound = res.norm <= 1e6L * std::pow(R, 14);
    return res;
}

Quintuple perturbed_quintuple(std::mt19937_64& rng, Real eps_target, int max_R) {
    if (!(eps_target > 0) || max_R < 4) throw DomainError("need eps_target > 0 and max_R >= 4");
    std::uniform_int_distribution<int> pq(-3, 3), kind(0, 1), idx(0, 2), step(-1, 1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (;;) {
        // gamma: product of elementary shears
        std::array<IVec3, 3> rows{IVec3{1, 0, 0}, IVec3{0, 1, 0}, IVec3{0, 0, 1}};
        for (int s = 0; s < 6; ++s) {
            int i = idx(rng), j = idx(rng), k = step(rng);
            if (i != j)
                for (int col = 0; col < 3; ++col) rows[i][col] += k * rows[j][col];
        }
        SMat3 g = smat_from_int(rows), gi = smat_inverse(g);
        Quintuple out;
        bool ok = true;
        std::int64_t top = 0;
        for (auto& v : out.m) {
            std::int64_t p = pq(rng), q = pq(rng);
            IVec3 n = kind(rng) ? IVec3{p * p, 2 * p * q, 2 * q * q} : IVec3{2 * p * p, 2 * p * q, q * q};
            for (int i = 0; i < 3; ++i) {
                mpq_class s = 0;
                for (int j = 0; j < 3; ++j) s += gi[i][j].rat() * static_cast<long>(n[j]);
                v[i] = s.get_num().get_si();
            }
            if (v == IVec3{0, 0, 0}) ok = false;
            top = std::max(top, sup_norm(v));
        }
        for (int i = 0; i < 5 && ok; ++i)
            for (int j = i + 1; j < 5 && ok; ++j)
                for (int k = j + 1; k < 5 && ok; ++k)
                    if (det3(out.m[i], out.m[j], out.m[k]) == 0) ok = false;
        if (!ok || top + 1 > max_R) continue;
        out.R = static_cast<Real>(top + 1);
        QForm base = transform(QForm::standard(), g);
        const Real e = eps_target / (6 * out.R * out.R);
        std::array<Scalar, 6> c = base.coeffs();
        for (auto& x : c) x = x + Scalar::from_double(static_cast<double>(e * u(rng)));
        out.q = normalize_det(QForm(c)).first;
        for (const auto& v : out.m) out.eps = std::max(out.eps, std::abs(out.q(v).to_real()));
        return out;
    }
}

namespace {

struct TypeSearch {
    Real c[6];
    int ord[6];
    Real M;
    int cap;
    Real detq;
    long long max_leaves;
    long long nodes = 0;
    DiophTypeResult best;
    std::array<std::int64_t, 6> n{};
    std::array<std::int64_t, 6> best_n{};

    Real tau(std::int64_t nmax) const {
        Real s = std::pow(static_cast<Real>(std::max<std::int64_t>(nmax, 1)), M);
        return best.c_min / s * (1 + 1e-12L);
    }

    void leaf() {
        std::int64_t nmax = 0;
        for (auto x : n) nmax = std::max<std::int64_t>(nmax, x < 0 ? -x : x);
        if (nmax == 0) return;
        if (++best.visited > max_leaves) throw ResourceError("Diophantine type search exceeds its budget");
        const i128 c11 = n[0], c22 = n[1], c33 = n[2], c12 = n[3], c13 = n[4], c23 = n[5];
        i128 det4 = 4 * c11 * c22 * c33 + c12 * c13 * c23 - c11 * c23 * c23 - c22 * c13 * c13 - c33 * c12 * c12;
        if (det4 == 0) return;
        Real rho = std::cbrt(4 * detq / static_cast<Real>(det4));
        // rho Q' = (-rho)(-Q'): keep the representative with rho > 0
        if (!(rho > 0)) return;
        Real d = 0;
        for (int i = 0; i < 6; ++i) d = std::max(d, std::abs(c[i] - rho * static_cast<Real>(n[i])));
        Real v = d * std::pow(static_cast<Real>(nmax), M);
        if (v < best.c_min || (v == best.c_min && n < best_n)) {
            best.c_min = v;
            best.rho = rho;
            best.dist = d;
            best_n = n;
        }
    }

    // ranges of rho > 0 with |c_i - rho n_i| < t for the fixed coefficients
    bool interval(int level, Real t, Real& lo, Real& hi) const {
        lo = 0;
        hi = kInf;
        for (int k = 0; k < level; ++k) {
            int i = ord[k];
            if (n[i] == 0) {
                if (!(std::abs(c[i]) < t)) return false;
                continue;
            }
            Real x = (c[i] - t) / n[i], y = (c[i] + t) / n[i];
            if (x > y) std::swap(x, y);
            lo = std::max(lo, x);
            hi = std::min(hi, y);
        }
        return lo < hi;
    }

    void search(int level, std::int64_t nmax) {
        if (level == 6) {
            leaf();
            return;
        }
        if (++nodes > 50 * max_leaves) throw ResourceError("Diophantine type search exceeds its budget");
        const int i = ord[level];
        std::int64_t from = -cap, to = cap;
        if (std::isfinite(best.c_min)) {
            Real t = tau(nmax), lo, hi;
            if (!interval(level, t, lo, hi)) return;
            if (lo > 0) {
                Real e[4] = {(c[i] - t) / lo, (c[i] + t) / lo, 0, 0};
                Real mn = std::min(e[0], e[1]), mx = std::max(e[0], e[1]);
                if (std::isfinite(hi)) {
                    e[2] = (c[i] - t) / hi;
                    e[3] = (c[i] + t) / hi;
                    mn = std::min({mn, e[2], e[3]});
                    mx = std::max({mx, e[2], e[3]});
                } else {
                    mn = std::min<Real>(mn, 0);
                    mx = std::max<Real>(mx, 0);
                }
                from = std::max<std::int64_t>(from, static_cast<std::int64_t>(std::floor(std::max<Real>(mn, -cap - 1))));
                to = std::min<std::int64_t>(to, static_cast<std::int64_t>(std::ceil(std::min<Real>(mx, cap + 1))));
            }
        }
        for (std::int64_t v = from; v <= to; ++v) {
            n[i] = v;
            std::int64_t nm = std::max<std::int64_t>(nmax, v < 0 ? -v : v);
            if (std::isfinite(best.c_min)) {
                Real lo, hi;
                if (!interval(level + 1, tau(nm), lo, hi)) continue;
            }
            search(level + 1, nm);
        }
        n[i] = 0;
    }
};

}  // namespace

DiophTypeResult estimate_dioph_type(const QForm& q, Real M, int cap, long long max_leaves) {
    if (cap < 1) throw DomainError("cap must be at least 1");
    if (!(M >= 0)) throw DomainError("M must be non-negative");
    Real detq = q.det().to_real();
    if (std::abs(std::abs(detq) - 1) > 1e-9L) throw DomainError("estimate_dioph_type needs |det Q| = 1");
    TypeSearch s;
    s.M = M;
    s.cap = cap;
    s.detq = detq;
    s.max_leaves = max_leaves;
    for (int i = 0; i < 6; ++i) s.c[i] = q.coeffs()[i].to_real();
    std::iota(s.ord, s.ord + 6, 0);
    std::stable_sort(s.ord, s.ord + 6, [&](int x, int y) { return std::abs(s.c[x]) > std::abs(s.c[y]); });
    // warm start: rounded multiples of Q
    const Real top = std::abs(s.c[s.ord[0]]);
    for (int k = 1; k <= cap; ++k) {
        Real mu = k / top;
        bool ok = true;
        for (int i = 0; i < 6; ++i) {
            Real x = std::round(mu * s.c[i]);
            if (std::abs(x) > cap) ok = false;
            s.n[i] = static_cast<std::int64_t>(x);
        }
        if (ok) s.leaf();
    }
    s.n.fill(0);
    s.search(0, 0);
    if (std::isfinite(s.best.c_min)) {
        std::array<Scalar, 6> co;
        for (int i = 0; i < 6; ++i) co[i] = Scalar(static_cast<long>(s.best_n[i]));
        s.best.argmin = QForm(co);
    }
    return s.best;
}

ShellReport quasi_null_shell(const QForm& q, const HeightParams& p, Real R) {
    if (!(R > 10)) throw DomainError("R must exceed 10");
    if (!(p.eta > 0) || !(p.M > 0)) throw DomainError("eta and M must be positive");
    Lattice3 lat = lattice_from_form(q);
    const Real outer = R * R;
    Reduced r = lll_reduce(lat.basis());
    Mat3 bu{}, babs{};
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            bu[i][j] = r.b[i][j];
            babs[i][j] = std::abs(r.b[i][j]);
        }
    const Mat3 a0{{{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}}}, a0abs{{{0, 0, 1}, {0, 1, 0}, {1, 0, 0}}};
    const Mat3 G = transpose(bu) * a0 * bu, Gabs = transpose(babs) * a0abs * babs;
    const Real rel = 64 * std::numeric_limits<Real>::epsilon();
    // the threshold eta |v|^{-50M} is largest at |v| = R
    const Real tau = std::exp(std::log(p.eta) - 50 * p.M * std::log(R));
    const Vec3 b1 = column(r.b, 0), b2 = column(r.b, 1), b3 = column(r.b, 2);
    ShellReport rep;
    std::vector<std::pair<Real, Real>> band;
    long long visited = 0;
    const long long cap = enumeration_cap();
    for_each_slice(r, outer, [&](std::int64_t m2, std::int64_t m3, Real lo, Real hi) {
        const Real x2 = m2, x3 = m3, a2 = std::abs(x2), a3 = std::abs(x3);
        BandQuadratic bq;
        bq.a = G[0][0];
        bq.b = 2 * (G[0][1] * x2 + G[0][2] * x3);
        bq.c = G[1][1] * x2 * x2 + 2 * G[1][2] * x2 * x3 + G[2][2] * x3 * x3;
        bq.ea = rel * Gabs[0][0];
        bq.eb = rel * 2 * (Gabs[0][1] * a2 + Gabs[0][2] * a3);
        bq.ec = rel * (Gabs[1][1] * a2 * a2 + 2 * Gabs[1][2] * a2 * a3 + Gabs[2][2] * a3 * a3);
        const Vec3 y = x2 * b2 + x3 * b3;
        quadratic_band(bq, tau, lo, hi, band);
        for (auto [p0, p1] : band)
            for (Real x = p0; x <= p1; x += 1) {
                if (++visited > cap) throw ResourceError("quasi-null shell exceeds enum.max_box");
                Vec3 w = y + x * b1;
                Real nw = sup_norm(w);
                if (nw < R || !(nw < outer)) continue;
                IVec3 m = r.original({static_cast<std::int64_t>(x), m2, m3});
                if (m == IVec3{0, 0, 0}) continue;
                if (!quasi_null_test(lat.q0(m), sup_norm(lat.vector(m)), p.eta, p.M)) continue;
                rep.vectors.push_back(canonical_sign(m));
            }
        return true;
    });
    std::sort(rep.vectors.begin(), rep.vectors.end());
    rep.vectors.erase(std::unique(rep.vectors.begin(), rep.vectors.end()), rep.vectors.end());
    // lines: primitive directions
    for (auto m : rep.vectors) {
        std::int64_t g = gcd3(m);
        for (auto& x : m) x /= g;
        rep.line_cover.push_back(canonical_sign(m));
    }
    std::sort(rep.line_cover.begin(), rep.line_cover.end());
    rep.line_cover.erase(std::unique(rep.line_cover.begin(), rep.line_cover.end()), rep.line_cover.end());
    // planes: greedily take the plane through two remaining directions holding the most of them
    std::vector<IVec3> left = rep.line_cover;
    auto on = [](const IVec3& n, const IVec3& d) {
        return static_cast<i128>(n[0]) * d[0] + static_cast<i128>(n[1]) * d[1] + static_cast<i128>(n[2]) * d[2] == 0;
    };
    auto primitive = [](IVec3 n) {
        std::int64_t g = gcd3(n);
        for (auto& x : n) x /= g;
        return canonical_sign(n);
    };
    while (!left.empty()) {
        IVec3 bestn{};
        std::size_t best_count = 0;
        for (std::size_t i = 0; i < left.size(); ++i)
            for (std::size_t j = i + 1; j < left.size(); ++j) {
                IVec3 n = primitive(cross(left[i], left[j]));
                std::size_t cnt = std::count_if(left.begin(), left.end(), [&](const IVec3& d) { return on(n, d); });
                if (cnt > best_count || (cnt == best_count && n < bestn)) {
                    best_count = cnt;
                    bestn = n;
                }
            }
        if (best_count == 0) {
            // a lone direction: any plane through it
            const IVec3& d = left.front();
            IVec3 e{0, 0, 0};
            int k = std::abs(d[0]) <= std::abs(d[1]) && std::abs(d[0]) <= std::abs(d[2]) ? 0
                    : (std::abs(d[1]) <= std::abs(d[2]) ? 1 : 2);
            e[k] = 1;
            bestn = primitive(cross(d, e));
        }
        rep.plane_cover.push_back(bestn);
        left.erase(std::remove_if(left.begin(), left.end(), [&](const IVec3& d) { return on(bestn, d); }), left.end());
    }
    rep.pass = rep.line_cover.size() <= 12 && rep.plane_cover.size() <= 6;
    return rep;
}

}  // namespace opplab
