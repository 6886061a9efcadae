#include "opplab/count.hpp"

#include "opplab/numeric.hpp"
#include "opplab/quadrature.hpp"

#include <algorithm>
#include <cfloat>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace opplab {

namespace {

constexpr Real kErr = 64 * LDBL_EPSILON;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct Interval {
    std::int64_t lo = 1, hi = 0;
    bool empty() const { return lo > hi; }
    std::int64_t clipped(std::int64_t n) const {
        std::int64_t l = std::max(lo, -n), h = std::min(hi, n);
        return h >= l ? h - l + 1 : 0;
    }
};

// First n in [lo, hi] with pred(n), for pred false...false true...true; hi + 1 if none.
template <class P>
std::int64_t first_true(std::int64_t lo, std::int64_t hi, std::int64_t guess, const P& pred) {
    if (lo > hi || !pred(hi)) return hi + 1;
    if (pred(lo)) return lo;
    std::int64_t l = lo, h = hi;
    guess = std::clamp(guess, lo, hi);
    if (guess > l && guess < h) {
        if (pred(guess)) {
            h = guess;
            for (std::int64_t step = 1; guess - step > l; step *= 2) {
                if (!pred(guess - step)) {
                    l = guess - step;
                    break;
                }
                h = guess - step;
            }
        } else {
            l = guess;
            for (std::int64_t step = 1; guess + step < h; step *= 2) {
                if (pred(guess + step)) {
                    h = guess + step;
                    break;
                }
                l = guess + step;
            }
        }
    }
    while (h - l > 1) {
        std::int64_t mid = l + (h - l) / 2;
        (pred(mid) ? h : l) = mid;
    }
    return h;
}

// {n in [lo, hi] : a < A n^2 + B n + C < b} for integers n. Float decisions carry an error bound
// from the absolute coefficients aA, aB, aC; exact(n, which) settles the rest, returning the sign
// of f(n) - a (which = 0) or f(n) - b (which = 1).
template <class Exact>
struct SliceSolver {
    Real A, B, C, aA, aB, aC, a, b;
    bool linear;
    const Exact& exact;

    int cmp(std::int64_t n, int which) const {
        const Real x = static_cast<Real>(n), c = which ? b : a;
        const Real d = (A * x + B) * x + C - c;
        const Real err = kErr * ((aA * std::abs(x) + aB) * std::abs(x) + aC + std::abs(c)) + LDBL_MIN;
        if (d > err) return 1;
        if (d < -err) return -1;
        return exact(n, which);
    }

    std::int64_t guess(Real c, std::int64_t p, std::int64_t q) const {
        Real r[2];
        int k = real_roots(linear ? 0 : A, B, C - c, r);
        for (int i = 0; i < k; ++i)
            if (r[i] >= p - 1 && r[i] <= q + 1) return static_cast<std::int64_t>(std::ceil(r[i]));
        return p;
    }

    Interval piece(std::int64_t p, std::int64_t q, bool increasing) const {
        if (p > q) return {};
        auto above_a = [&](std::int64_t n) { return cmp(n, 0) > 0; };
        auto below_b = [&](std::int64_t n) { return cmp(n, 1) < 0; };
        Interval out;
        if (increasing) {
            out.lo = first_true(p, q, guess(a, p, q), above_a);
            out.hi = first_true(p, q, guess(b, p, q), [&](std::int64_t n) { return !below_b(n); }) - 1;
        } else {
            out.lo = first_true(p, q, guess(b, p, q), below_b);
            out.hi = first_true(p, q, guess(a, p, q), [&](std::int64_t n) { return !above_a(n); }) - 1;
        }
        return out;
    }

    // at most two intervals, one per monotone piece
    int solve(std::int64_t lo, std::int64_t hi, Interval (&out)[2]) const {
        if (lo > hi) return 0;
        int k = 0;
        auto push = [&](const Interval& iv) {
            if (!iv.empty()) out[k++] = iv;
        };
        if (linear) {
            push(piece(lo, hi, B >= 0));
            return k;
        }
        // f(n + 1) < f(n) exactly when n + 1/2 < vertex (A > 0); split after the last such n
        Real v = -B / (2 * A);
        Real split = std::clamp(std::ceil(v + 0.5L) - 1, static_cast<Real>(lo - 1), static_cast<Real>(hi));
        auto s = static_cast<std::int64_t>(split);
        push(piece(lo, s, A < 0));
        push(piece(s + 1, hi, A > 0));
        return k;
    }
};

struct RealCoeffs {
    Real c[6], ac[6];
    explicit RealCoeffs(const QForm& q) {
        for (int i = 0; i < 6; ++i) {
            c[i] = q.coeffs()[i].to_real();
            ac[i] = std::abs(c[i]);
        }
    }
};

bool zero_inside(Real a, Real b) { return a < 0 && 0 < b; }

std::vector<std::int64_t> raw_counts(const QForm& q, Real a, Real b, const std::vector<std::int64_t>& Ns,
                                     long long max_slices) {
    const std::int64_t nmax = *std::max_element(Ns.begin(), Ns.end());
    const Real slices = (2 * static_cast<Real>(nmax) + 1) * (nmax + 1);
    if (slices > max_slices) throw ResourceError("count_points: slice budget exceeded");
    const RealCoeffs rc(q);
    const FastForm ff(q);
    const mpq_class aq = real_to_mpq(a), bq = real_to_mpq(b);
    const bool linear = q.coeff(QForm::C33).is_zero();
    const int nthreads = std::max(1, std::min<int>(worker_threads(), static_cast<int>(nmax + 1)));
    std::vector<std::vector<std::int64_t>> part(nthreads, std::vector<std::int64_t>(Ns.size(), 0));

    auto work = [&](int tid) {
        auto& acc = part[tid];
        for (std::int64_t v1 = tid; v1 <= nmax; v1 += nthreads) {
            // Q(-v) = Q(v): slices with v1 > 0, or v1 = 0 and v2 >= 0, stand for their mirror images
            for (std::int64_t v2 = v1 == 0 ? 0 : -nmax; v2 <= nmax; ++v2) {
                const Real x = v1, y = v2;
                auto exact = [&](std::int64_t n, int which) { return ff.compare({v1, v2, n}, which ? bq : aq); };
                SliceSolver<decltype(exact)> s{rc.c[2],
                                               rc.c[4] * x + rc.c[5] * y,
                                               (rc.c[0] * x + rc.c[3] * y) * x + rc.c[1] * y * y,
                                               rc.ac[2],
                                               rc.ac[4] * std::abs(x) + rc.ac[5] * std::abs(y),
                                               (rc.ac[0] * std::abs(x) + rc.ac[3] * std::abs(y)) * std::abs(x) +
                                                   rc.ac[1] * y * y,
                                               a,
                                               b,
                                               linear,
                                               exact};
                Interval iv[2];
                int k = s.solve(-nmax, nmax, iv);
                const bool origin = v1 == 0 && v2 == 0;
                const std::int64_t weight = origin ? 1 : 2;
                const std::int64_t m = std::max(v1, std::abs(v2));
                for (std::size_t t = 0; t < Ns.size(); ++t) {
                    if (m > Ns[t]) continue;
                    std::int64_t c = 0;
                    for (int i = 0; i < k; ++i) c += iv[i].clipped(Ns[t]);
                    if (origin && zero_inside(a, b)) --c;
                    acc[t] += weight * c;
                }
            }
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    std::vector<std::int64_t> out(Ns.size(), 0);
    for (const auto& p : part)
        for (std::size_t t = 0; t < Ns.size(); ++t) out[t] += p[t];
    return out;
}

LineCensus line_census(const QForm& q, int R, const char* what) {
    if (q.inexact()) throw DomainError(std::string(what) + " needs exact coefficients");
    if (R < 1) throw DomainError(std::string(what) + ": search radius must be positive");
    const FastForm ff(q);
    const RealCoeffs rc(q);
    std::set<IVec3> found;
    auto consider = [&](const IVec3& m) {
        if (m == IVec3{0, 0, 0} || gcd3(m) != 1) return;
        if (ff(m).zero) found.insert(canonical_sign(m));
    };
    for (std::int64_t m1 = 0; m1 <= R; ++m1)
        for (std::int64_t m2 = m1 == 0 ? 0 : -R; m2 <= R; ++m2) {
            const Real x = m1, y = m2;
            const Real A = rc.c[2], B = rc.c[4] * x + rc.c[5] * y, C = (rc.c[0] * x + rc.c[3] * y) * x + rc.c[1] * y * y;
            if (q.coeff(QForm::C33).is_zero() && ff({m1, m2, 0}).zero && ff({m1, m2, 1}).zero) {
                for (std::int64_t n = -R; n <= R; ++n) consider({m1, m2, n});
                continue;
            }
            Real r[2], cand[3];
            int k = real_roots(A, B, C, r);
            std::copy(r, r + k, cand);
            if (A != 0) cand[k++] = -B / (2 * A);
            for (int i = 0; i < k; ++i) {
                if (!(std::abs(cand[i]) <= R + 1)) continue;
                auto c = static_cast<std::int64_t>(std::floor(cand[i]));
                for (std::int64_t n = c - 1; n <= c + 2; ++n)
                    if (std::llabs(n) <= R) consider({m1, m2, n});
            }
        }
    LineCensus out;
    out.lines.assign(found.begin(), found.end());
    std::sort(out.lines.begin(), out.lines.end(), [](const IVec3& x, const IVec3& y) {
        return std::make_pair(sup_norm(x), x) < std::make_pair(sup_norm(y), y);
    });
    if (q.is_rational_multiple()) {
        out.unbounded = true;
        out.diagnostic = "rational form: census unbounded";
    } else if (out.lines.size() > 4) {
        throw std::logic_error(std::string(what) + ": " + std::to_string(out.lines.size()) +
                               " isotropic classes for an irrational form; rationality suspected");
    }
    return out;
}

// Q restricted to the plane, in the variables (k1, 0, k2)
QForm restricted(const DegeneratePlane& p) {
    return QForm({p.q1, Scalar(0), p.q2, Scalar(0), p.q12 * Scalar(2), Scalar(0)});
}

std::int64_t line_points(const IVec3& m, std::int64_t N) { return 2 * (N / sup_norm(m)); }

// k != 0 with |k m| <= N and a < k^2 Q(m) < b, for Q(m) != 0
std::int64_t nonisotropic_line_points(const FastForm& ff, const IVec3& m, const mpq_class& aq, const mpq_class& bq,
                                      Real a, Real b, std::int64_t N) {
    const Real qm = ff(m).value;
    const Real reach = std::max(std::abs(a), std::abs(b));
    std::int64_t c = 0;
    for (std::int64_t k = 1; k <= N / sup_norm(m); ++k) {
        if (static_cast<Real>(k) * k * std::abs(qm) > 2 * reach + 1) break;
        IVec3 v{k * m[0], k * m[1], k * m[2]};
        if (ff.compare(v, aq) > 0 && ff.compare(v, bq) < 0) c += 2;
    }
    return c;
}

}  // namespace

LineCensus isotropic_lines(const QForm& q, int search_R) { return line_census(q, search_R, "isotropic_lines"); }

PlaneCensus degenerate_planes(const QForm& q, int search_R) {
    if (q.inexact()) throw DomainError("degenerate_planes needs exact coefficients");
    LineCensus normals = line_census(dual(q), search_R, "degenerate_planes");
    PlaneCensus out;
    out.unbounded = normals.unbounded;
    out.diagnostic = normals.diagnostic;
    for (const auto& n : normals.lines) {
        DegeneratePlane p;
        p.normal = n;
        p.basis = plane_basis(n);
        SVec3 s1, s2;
        for (int i = 0; i < 3; ++i) {
            s1[i] = Scalar(static_cast<long>(p.basis[0][i]));
            s2[i] = Scalar(static_cast<long>(p.basis[1][i]));
        }
        p.q1 = q(s1);
        p.q2 = q(s2);
        p.q12 = q.polar(s1, s2);
        if (!(p.q1 * p.q2 - p.q12 * p.q12).is_zero())
            throw std::logic_error("degenerate plane with nonzero Gram determinant: " + q.str());
        if (p.q1.sign() * p.q2.sign() < 0) throw std::logic_error("degenerate plane with an indefinite restriction");
        p.rational_ratio = p.q1.is_zero() || p.q2.is_zero() || (p.q12 / p.q1).is_rational();
        out.planes.push_back(p);
    }
    return out;
}

std::int64_t count_plane_points(const DegeneratePlane& p, Real a, Real b, Real T,
                                const std::vector<IVec3>& lines) {
    if (!(a < b)) throw DomainError("count_plane_points needs a < b");
    if (!(T > 0)) throw DomainError("count_plane_points needs T > 0");
    const auto N = static_cast<std::int64_t>(std::floor(T));
    const IVec3 &n1 = p.basis[0], &n2 = p.basis[1];
    int bi = 0, bj = 1;
    std::int64_t best = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            std::int64_t d = n1[i] * n2[j] - n1[j] * n2[i];
            if (std::llabs(d) > best) best = std::llabs(d), bi = i, bj = j;
        }
    // k2 = (n1_i v_j - n1_j v_i) / det on the chosen pair of coordinates
    const auto K = static_cast<std::int64_t>((std::llabs(n1[bi]) + std::llabs(n1[bj])) * N / best);
    const QForm r = restricted(p);
    const FastForm ff(r);
    const mpq_class aq = real_to_mpq(a), bq = real_to_mpq(b);
    const Real q1 = p.q1.to_real(), q2 = p.q2.to_real(), q12 = p.q12.to_real();
    std::int64_t count = 0;
    for (std::int64_t k2 = -K; k2 <= K; ++k2) {
        std::int64_t lo = -N - 1, hi = N + 1;  // any k1 beyond N leaves the box as n1 != 0
        bool ok = true;
        for (int i = 0; i < 3 && ok; ++i) {
            const std::int64_t off = k2 * n2[i];
            if (n1[i] == 0) {
                ok = std::llabs(off) <= N;
            } else if (n1[i] > 0) {
                lo = std::max(lo, ceil_div(-N - off, n1[i]));
                hi = std::min(hi, floor_div(N - off, n1[i]));
            } else {
                lo = std::max(lo, ceil_div(N - off, n1[i]));
                hi = std::min(hi, floor_div(-N - off, n1[i]));
            }
        }
        if (!ok || lo > hi) continue;
        const Real y = static_cast<Real>(k2);
        auto exact = [&](std::int64_t n, int which) { return ff.compare({n, 0, k2}, which ? bq : aq); };
        SliceSolver<decltype(exact)> s{q1,           2 * q12 * y,      q2 * y * y, std::abs(q1), 2 * std::abs(q12 * y),
                                       std::abs(q2) * y * y, a, b, p.q1.is_zero(), exact};
        Interval iv[2];
        int k = s.solve(lo, hi, iv);
        for (int i = 0; i < k; ++i) count += iv[i].hi - iv[i].lo + 1;
        if (k2 == 0 && zero_inside(a, b))
            for (int i = 0; i < k; ++i)
                if (iv[i].lo <= 0 && 0 <= iv[i].hi) --count;
    }
    if (zero_inside(a, b))
        for (const auto& m : lines)
            if (dot(m, p.normal) == 0) count -= line_points(m, N);
    return count;
}

std::vector<CountReport> count_points(const QForm& q, Real a, Real b, const std::vector<Real>& Ts,
                                      const CountOptions& opt) {
    if (!(a < b)) throw DomainError("count_points needs a < b");
    if (Ts.empty()) return {};
    std::vector<std::int64_t> Ns;
    for (Real T : Ts) {
        if (!(T > 0)) throw DomainError("count_points needs T > 0");
        Ns.push_back(static_cast<std::int64_t>(std::floor(T)));
    }
    std::vector<std::int64_t> raw =
        *std::max_element(Ns.begin(), Ns.end()) == 0 ? std::vector<std::int64_t>(Ns.size(), 0)
                                                     : raw_counts(q, a, b, Ns, opt.max_slices);

    std::vector<IVec3> lines;
    std::vector<DegeneratePlane> planes;
    const bool census = !q.inexact() && !q.is_rational_multiple();
    if (census) {
        lines = isotropic_lines(q, opt.census_R).lines;
        planes = degenerate_planes(q, opt.census_R).planes;
    }
    const FastForm ff(q);
    const mpq_class aq = real_to_mpq(a), bq = real_to_mpq(b);

    std::vector<CountReport> out;
    for (std::size_t t = 0; t < Ts.size(); ++t) {
        CountReport r;
        r.a = a;
        r.b = b;
        r.T = Ts[t];
        r.raw = raw[t];
        r.census_complete = census;
        const std::int64_t N = Ns[t];
        for (const auto& m : lines) {
            LineCount lc{m, zero_inside(a, b) ? line_points(m, N) : 0};
            r.excluded_line_points += lc.points;
            r.per_line.push_back(lc);
        }
        std::set<IVec3> iso(lines.begin(), lines.end());
        for (std::size_t j = 0; j < planes.size(); ++j) {
            PlaneCount pc{planes[j].normal, N == 0 ? 0 : count_plane_points(planes[j], a, b, Ts[t], lines)};
            // points on the intersection with an earlier plane already belong to that plane
            for (std::size_t i = 0; i < j; ++i) {
                IVec3 l = cross(planes[i].normal, planes[j].normal);
                std::int64_t g = gcd3(l);
                l = canonical_sign({l[0] / g, l[1] / g, l[2] / g});
                if (iso.count(l)) continue;
                bool repeated = false;  // the same line met through a still earlier plane
                for (std::size_t h = 0; h < i && !repeated; ++h) repeated = dot(planes[h].normal, l) == 0;
                if (!repeated) pc.points -= nonisotropic_line_points(ff, l, aq, bq, a, b, N);
            }
            r.excluded_plane_points += pc.points;
            r.per_plane.push_back(pc);
        }
        r.modified = r.raw - r.excluded_line_points - r.excluded_plane_points;
        r.c_q = opt.c_q;
        r.i_q = opt.i_q;
        r.predicted = (opt.c_q * (b - a) + opt.i_q) * Ts[t];
        out.push_back(std::move(r));
    }
    return out;
}

CountReport count_points(const QForm& q, Real a, Real b, Real T, const CountOptions& opt) {
    return count_points(q, a, b, std::vector<Real>{T}, opt).front();
}

IQResult compute_IQ(const QForm& q, Real a, Real b, Real T_probe, int census_R) {
    if (!(a < b)) throw DomainError("compute_IQ needs a < b");
    if (q.is_rational_multiple()) throw DomainError("compute_IQ: rational form, census unbounded");
    if (!(T_probe >= 4)) throw DomainError("compute_IQ needs T_probe >= 4");
    IQResult out;
    const auto lines = isotropic_lines(q, census_R).lines;
    for (const auto& m : lines) out.L_Q += 2 / static_cast<Real>(sup_norm(m));
    out.line_term = zero_inside(a, b) ? out.L_Q : 0;
    out.value = out.line_term;
    for (const auto& p : degenerate_planes(q, census_R).planes) {
        IQTerm term;
        term.normal = p.normal;
        if (!p.rational_ratio) {
            // Q = s (sqrt|Q1| k1 + sigma sqrt|Q2| k2)^2 on the plane
            const int s = p.q1.sign(), sigma = p.q12.sign() * s;
            const Real r1 = std::sqrt(std::abs(p.q1.to_real())), r2 = std::sqrt(std::abs(p.q2.to_real()));
            Vec3 dir = r1 * to_real(p.basis[1]) - (sigma * r2) * to_real(p.basis[0]);
            const Real hi = s > 0 ? b : -a, lo = s > 0 ? a : -b;
            const Real width = std::sqrt(std::max<Real>(hi, 0)) - std::sqrt(std::max<Real>(lo, 0));
            term.coefficient = 2 * 2 * width / sup_norm(dir);
        } else {
            term.empirical = true;
            const Real Ts[3] = {T_probe / 4, T_probe / 2, T_probe};
            Real c[3], tm = 0, cm = 0;
            for (int i = 0; i < 3; ++i) {
                c[i] = static_cast<Real>(count_plane_points(p, a, b, Ts[i], lines));
                tm += Ts[i] / 3;
                cm += c[i] / 3;
            }
            Real num = 0, den = 0;
            for (int i = 0; i < 3; ++i) {
                num += (Ts[i] - tm) * (c[i] - cm);
                den += (Ts[i] - tm) * (Ts[i] - tm);
            }
            term.coefficient = num / den;
        }
        out.value += term.coefficient;
        out.planes.push_back(term);
    }
    return out;
}

namespace {

void require_cq_form(const QForm& q) {
    if (signature(q) != std::pair<int, int>(2, 1)) throw DomainError("compute_CQ needs signature (2,1)");
    const Real d = std::abs(q.det().to_real());
    if (std::abs(d - 1) > 1e-12L) throw DomainError("compute_CQ needs |det Q| = 1");
}

CQResult cq_surface(const QForm& q, const CQOptions& opt) {
    // cone of Q = g^{-1} (cone of Q_0), Q_0 cone = {s p(theta)}; the s-integral is done in closed form
    const Mat3 gi = inverse(form_congruence(q));
    const Mat3 A = q.real_matrix();
    auto f = [&](Real th) {
        const Real c = std::cos(th), s = std::sin(th);
        const Vec3 p{c * c, s * c, s * s / 2}, dp{-2 * s * c, c * c - s * s, s * c};
        const Vec3 v = gi * p, dv = gi * dp;
        return euclid_norm(cross(v, dv)) / (sup_norm(v) * euclid_norm(A * v));
    };
    QuadratureOptions qo;
    qo.rel_tol = opt.rel_tol;
    qo.initial_panels = 16;
    const Real h = std::numbers::pi_v<Real> / 2;
    auto r = orbit_integral(f, -h, h, {}, 0, qo);
    return {r.value, r.error_bound, CQMethod::Surface};
}

// measure of {x in [lo, hi] : a < A x^2 + B x + C < b}
Real band_length(Real A, Real B, Real C, Real a, Real b, Real lo, Real hi) {
    Real pts[6];
    int k = 0;
    pts[k++] = lo;
    for (Real c : {a, b}) {
        Real r[2];
        int n = real_roots(A, B, C - c, r);
        for (int i = 0; i < n; ++i)
            if (r[i] > lo && r[i] < hi) pts[k++] = r[i];
    }
    pts[k++] = hi;
    std::sort(pts, pts + k);
    Real len = 0;
    for (int i = 0; i + 1 < k; ++i) {
        const Real x = (pts[i] + pts[i + 1]) / 2, f = (A * x + B) * x + C;
        if (a < f && f < b) len += pts[i + 1] - pts[i];
    }
    return len;
}

CQResult cq_volume_slope(const QForm& q, const CQOptions& opt) {
    if (!(opt.T2 > opt.T1 && opt.T1 > 0) || opt.grid < 1 || opt.replicates < 2 || !(opt.a < opt.b))
        throw DomainError("compute_CQ: bad volume-slope options");
    const RealCoeffs rc(q);
    const Real a = opt.a, b = opt.b;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<Real> u(0, 1);
    std::vector<Real> est;
    const Real cell = 2.0L / opt.grid;
    for (int rep = 0; rep < opt.replicates; ++rep) {
        NeumaierSum s1, s2;
        for (int i = 0; i < opt.grid; ++i)
            for (int j = 0; j < opt.grid; ++j) {
                // one jittered point per cell, shared by both radii
                const Real x = -1 + (i + u(rng)) * cell, y = -1 + (j + u(rng)) * cell;
                for (int w = 0; w < 2; ++w) {
                    const Real T = w ? opt.T2 : opt.T1, v1 = T * x, v2 = T * y;
                    const Real B = rc.c[4] * v1 + rc.c[5] * v2;
                    const Real C = (rc.c[0] * v1 + rc.c[3] * v2) * v1 + rc.c[1] * v2 * v2;
                    (w ? s2 : s1).add(band_length(rc.c[2], B, C, a, b, -T, T));
                }
            }
        const Real n = static_cast<Real>(opt.grid) * opt.grid;
        // Vol(T) = (2T)^2 mean length; slope Vol / ((b - a) T)
        const Real c1 = 4 * opt.T1 * s1.value() / n / (b - a), c2 = 4 * opt.T2 * s2.value() / n / (b - a);
        // first-order Richardson in 1/T
        est.push_back((opt.T2 * c2 - opt.T1 * c1) / (opt.T2 - opt.T1));
    }
    Real mean = 0, var = 0;
    for (Real e : est) mean += e / est.size();
    for (Real e : est) var += (e - mean) * (e - mean) / (est.size() - 1);
    return {mean, std::sqrt(var / est.size()), CQMethod::VolumeSlope};
}

}  // namespace

CQResult compute_CQ(const QForm& q, CQMethod method, const CQOptions& opt) {
    require_cq_form(q);
    return method == CQMethod::Surface ? cq_surface(q, opt) : cq_volume_slope(q, opt);
}

ConvergenceTable convergence_study(const QForm& q, Real a, Real b, const std::vector<Real>& T_grid, Real c_q,
                                   Real i_q) {
    ConvergenceTable out;
    if (T_grid.empty()) return out;
    if (q.is_rational_multiple()) throw DomainError("convergence_study needs an irrational form");
    CountOptions co;
    co.c_q = c_q;
    co.i_q = i_q;
    const Real main = c_q * (b - a);
    for (const auto& r : count_points(q, a, b, T_grid, co)) {
        ConvergenceRow row;
        row.T = r.T;
        row.raw_over_T = r.raw / r.T;
        row.modified_over_T = r.modified / r.T;
        row.prediction = main + i_q;
        row.deviation = std::abs(row.modified_over_T - main) / main;
        out.rows.push_back(row);
    }
    for (std::size_t i = out.rows.size() / 2 + 1; i < out.rows.size(); ++i)
        if (out.rows[i].deviation > out.rows[i - 1].deviation) out.trend_ok = false;
    return out;
}

}  // namespace opplab
