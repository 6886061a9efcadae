#include "opplab/flows.hpp"

#include "opplab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace opplab {

namespace {

constexpr Real kTwoPi = 2 * std::numbers::pi_v<Real>;

Vec3 flow_closed_form(Real t, Real r, const Vec3& w) {
    return {std::exp(t) * (w[0] + r * w[1] + r * r * w[2] / 2), w[1] + r * w[2], std::exp(-t) * w[2]};
}

Real finite_or_inf(Real x) { return std::isnan(x) ? kInf : x; }

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

std::vector<Real> clip_sorted(std::vector<Real> pts, Real lo, Real hi) {
    std::vector<Real> out;
    for (Real x : pts)
        if (std::isfinite(x) && x > lo && x < hi) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// The shortest primitive vectors of the lattice spanned by the columns of basis, at most count of
// them and none longer than radius.
std::vector<LatticeVector> short_vectors(const Mat3& basis, Real radius, int count) {
    std::vector<LatticeVector> out;
    for (Real R = 2; R <= 2 * radius; R *= 2) {
        out = enumerate_vectors(basis, std::min(R, radius), true);
        if (static_cast<int>(out.size()) >= count || R >= radius) break;
    }
    std::sort(out.begin(), out.end(), [](const LatticeVector& x, const LatticeVector& y) { return x.norm < y.norm; });
    if (static_cast<int>(out.size()) > count) out.resize(count);
    return out;
}

// theta where k_theta w has vanishing second coordinate or vanishing first coordinate
void compact_hints(const Vec3& w, std::vector<Real>& out) {
    const Real s2 = std::sqrt(2.0L);
    Real y1 = (w[0] - w[2]) / s2, y2 = w[1], y3 = (w[0] + w[2]) / s2;
    Real R = std::hypot(y1, y2);
    if (R == 0) return;
    Real phi0 = std::atan2(y2, y1);
    auto add = [&](Real psi) {
        Real th = std::fmod(psi - phi0, kTwoPi);
        if (th < 0) th += kTwoPi;
        out.push_back(th);
    };
    add(0);
    add(std::numbers::pi_v<Real>);
    if (std::abs(y3) <= R) {
        Real c = std::acos(-y3 / R);
        add(c);
        add(-c);
    }
}

}  // namespace

Vec3 apply_flow(const FlowPoint& fp, const Vec3& w, bool starred) {
    if (!starred) return flow_closed_form(fp.t, fp.r, w);
    return J(flow_closed_form(fp.t, fp.r, J(w)));
}

std::vector<Real> flow_breakpoints(const Vec3& w, Real t) {
    std::vector<Real> out;
    if (w[2] == 0) {
        if (w[1] != 0) out.push_back(-w[0] / w[1]);
        return out;
    }
    Real rho = -w[1] / w[2];
    Real g = 2 * std::exp(-t);
    out.insert(out.end(), {rho, rho - g, rho + g});
    Q0Value q = q0_exact(w);
    if (q.zero) return out;
    if (q.sign > 0) {
        Real root = std::exp(q.log_abs / 2) / std::abs(w[2]);
        out.push_back(rho - root);
        out.push_back(rho + root);
    }
    return out;
}

VerifyResult verify_linear_contraction(const Vec3& w, Real t, const HeightParams& p, LinearCheck which, Real rel_tol) {
    require(!(w[0] == 0 && w[1] == 0 && w[2] == 0), "w must be nonzero");
    const Real delta = p.delta;
    const Real nw = sup_norm(w);
    const Q0Value q = q0_exact(w);
    const bool starred = which.kind == LinearKind::PhiStar;
    Integrand f;
    VerifyResult out;
    switch (which.kind) {
        case LinearKind::NormLambda: {
            const Real lam = which.lambda;
            require(lam >= 0.5L && lam <= 1, "lambda must lie in [1/2, 1]");
            require(t > 0, "t must be positive");
            f = [=](Real r) { return std::pow(sup_norm(flow_closed_form(t, r, w)), -lam); };
            out.rhs = 100 * std::exp(-(1 - lam) * t / 3) * std::pow(nw, -lam);
            break;
        }
        case LinearKind::Expansion:
            require(delta > 0 && delta < 0.5L, "delta must lie in (0, 1/2)");
            require(t > 0, "t must be positive");
            f = [=](Real r) { return std::pow(sup_norm(flow_closed_form(t, r, w)), -1 - delta); };
            out.rhs = 40 / delta * std::exp(delta * t) * std::pow(nw, -1 - delta);
            break;
        case LinearKind::Phi:
        case LinearKind::PhiStar:
            require(delta > 0 && delta <= 0.01L, "delta must lie in (0, 0.01]");
            require(t >= 1, "t must be at least 1");
            f = [=](Real r) {
                Vec3 img = apply_flow(FlowPoint{t, r, std::nullopt}, w, starred);
                return phi_delta(img, q, delta, starred);
            };
            out.rhs = 80 / delta * std::exp(-delta * t) * phi_delta(w, q, delta, starred);
            break;
    }
    out.vacuous = std::isinf(out.rhs);
    auto cuts = clip_sorted(flow_breakpoints(starred ? J(w) : w, t), -1, 1);
    Real tol = std::isfinite(out.rhs) ? out.rhs * rel_tol * 1e-3L : 1e-300L;
    QuadratureOptions qo;
    qo.rel_tol = rel_tol;
    auto res = orbit_integral(f, -1, 1, cuts, tol, qo);
    out.lhs = finite_or_inf(res.value);
    out.error_bound = res.error_bound;
    out.nodes = res.node_count;
    out.pass = out.vacuous || out.lhs <= out.rhs + out.error_bound;
    return out;
}

Real height_value(HeightKind kind, const Mat3& h, const Lattice3& lat, const HeightParams& p) {
    switch (kind) {
        case HeightKind::Alpha:
            return std::max(alpha1(h * lat.basis()), alpha1(star(h) * lat.dual_basis()));
        case HeightKind::AlphaHatEtaM:
            return alpha_hat(h, lat, p, AlphaHatVariant::EtaM);
        case HeightKind::AlphaHatPrime:
            return alpha_hat(h, lat, p, AlphaHatVariant::Prime);
        case HeightKind::AlphaTilde:
            return alpha_tilde(h, lat, p);
    }
    return 0;
}

namespace {

struct OrbitSetup {
    Real lo = 0, hi = 0, weight = 1;
    std::function<Mat3(Real)> point;
    std::vector<Real> hints;
    int panels = 1;
};

OrbitSetup orbit_setup(const Lattice3& lat, const Mat3& g, Real t, OrbitKind over, const MomentOptions& opt) {
    OrbitSetup s;
    const Mat3 at = a_mat(t);
    if (over == OrbitKind::Unipotent) {
        s.lo = -1;
        s.hi = 1;
        s.point = [at, g](Real r) { return at * u_mat(r) * g; };
    } else {
        s.lo = 0;
        s.hi = kTwoPi;
        s.weight = 1 / kTwoPi;
        s.point = [at, g](Real th) { return at * k_mat(th) * g; };
    }
    Real want = std::ceil(opt.panel_density * std::exp(t) * (s.hi - s.lo));
    s.panels = static_cast<int>(std::clamp<Real>(want, 1, opt.max_panels));
    if (opt.hint_count > 0) {
        std::vector<Real> pts;
        const Mat3 gb = g * lat.basis(), gd = star(g) * lat.dual_basis();
        for (int side = 0; side < 2; ++side) {
            for (const auto& w : short_vectors(side == 0 ? gb : gd, opt.hint_radius, opt.hint_count)) {
                // the dual side moves by (a_t u_r)^* = J a_t u_r J, and K commutes with J
                Vec3 v = side == 0 || over == OrbitKind::Compact ? w.v : J(w.v);
                if (over == OrbitKind::Unipotent) {
                    auto b = flow_breakpoints(v, t);
                    pts.insert(pts.end(), b.begin(), b.end());
                } else {
                    compact_hints(v, pts);
                }
            }
        }
        s.hints = clip_sorted(pts, s.lo, s.hi);
    }
    return s;
}

}  // namespace

QuadratureResult orbit_moment(const Lattice3& lat, const Mat3& g, Real t, Real exponent, const HeightParams& p,
                              HeightKind height, OrbitKind over, const MomentOptions& opt) {
    require(t >= 0, "t must be non-negative");
    OrbitSetup s = orbit_setup(lat, g, t, over, opt);
    auto f = [&](Real x) { return s.weight * std::pow(height_value(height, s.point(x), lat, p), exponent); };
    QuadratureOptions qo;
    qo.rel_tol = opt.rel_tol;
    qo.initial_panels = s.panels;
    qo.max_nodes = opt.max_nodes;
    return orbit_integral(f, s.lo, s.hi, s.hints, 1e-300L, qo);
}

MonteCarloResult moment_monte_carlo(const Lattice3& lat, const Mat3& g, Real t, Real exponent, const HeightParams& p,
                                    HeightKind height, OrbitKind over, long long samples, std::uint64_t seed) {
    MomentOptions opt;
    opt.hint_count = 0;
    OrbitSetup s = orbit_setup(lat, g, t, over, opt);
    auto f = [&](Real x) { return s.weight * std::pow(height_value(height, s.point(x), lat, p), exponent); };
    return monte_carlo_integral(f, s.lo, s.hi, samples, seed);
}

VerifyResult verify_subharmonic(const Mat3& g, const Lattice3& lat, const HeightParams& p, Real s,
                                SubharmonicCheck which, const MomentOptions& opt) {
    VerifyResult out;
    const Real d = p.delta;
    HeightKind kind = HeightKind::Alpha;
    Real exponent = 1;
    auto alpha_g = [&] { return height_value(HeightKind::Alpha, g, lat, p); };
    switch (which.kind) {
        case SubharmonicKind::AlphaLambda: {
            const Real lam = which.lambda;
            require(lam >= 0.5L && lam < 1, "lambda must lie in [1/2, 1)");
            require(s > 0, "s must be positive");
            exponent = lam;
            out.rhs = 100 * std::exp(-(1 - lam) * s / 3) * std::pow(alpha_g(), lam) + std::exp(4 * s);
            break;
        }
        case SubharmonicKind::AlphaSuperharmonic:
            require(d > 0 && d < 0.5L, "delta must lie in (0, 1/2)");
            require(s > 0, "s must be positive");
            exponent = 1 + d;
            out.rhs = 400 / d * std::exp(d * s) * std::pow(alpha_g(), 1 + d) + std::exp(4 * s);
            break;
        case SubharmonicKind::AlphaHatExpansion:
        case SubharmonicKind::AlphaHatPrime: {
            require(p.eta > 0 && p.eta < 1, "eta must lie in (0, 1)");
            require(p.M > 1, "M must exceed 1");
            require(d > 0 && d < 0.01L, "delta must lie in (0, 0.01)");
            require(in_H(g), "g must lie in H");
            bool prime = which.kind == SubharmonicKind::AlphaHatPrime;
            require(prime ? s > 10 : s > 0, prime ? "s must exceed 10" : "s must be positive");
            kind = prime ? HeightKind::AlphaHatPrime : HeightKind::AlphaHatEtaM;
            exponent = 1 + d;
            Real ah = height_value(kind, g, lat, p);
            if (prime)
                out.rhs = 400 / d * std::exp(d * s) * std::pow(ah, 1 + d) + std::exp(6 * s);
            else
                out.rhs = 80 / d * std::exp(d * s) * std::pow(ah, 1 + d) + 80 / d * std::pow(alpha_g(), 0.9L) +
                          std::exp(6 * s) / 2;
            break;
        }
        case SubharmonicKind::AlphaTilde: {
            require(s >= 1, "s must be at least 1");
            require(p.eta > 0 && p.eta <= 1, "eta must lie in (0, 1]");
            require(p.M > 1, "M must exceed 1");
            require(d > 0 && d <= 1 / (400 * p.D * p.M * (p.M + 7)), "delta must lie in (0, 1/(400 D M (M+7))]");
            require(in_H(g), "g must lie in H");
            auto ex = in_exceptional_set(g, lat, p, s);
            if (ex.member) {
                out.skipped_reason = "(g, Delta) lies in the exceptional set (side " + std::to_string(ex.side) + ")";
                out.witness = ex.witness;
                out.pass = true;
                return out;
            }
            kind = HeightKind::AlphaTilde;
            out.rhs = std::pow(d, -10) * std::pow(p.eta, -4 * d) * std::exp(-d * s) * height_value(kind, g, lat, p) +
                      std::exp(9 * s);
            break;
        }
    }
    auto res = orbit_moment(lat, g, s, exponent, p, kind, OrbitKind::Unipotent, opt);
    out.lhs = finite_or_inf(res.value);
    out.error_bound = res.error_bound;
    out.nodes = res.node_count;
    out.vacuous = std::isinf(out.rhs);
    out.pass = out.vacuous || out.lhs <= out.rhs + out.error_bound;
    return out;
}

Fraction sojourn_fraction(const std::function<bool(Real)>& predicate, long long samples, std::uint64_t seed) {
    require(samples >= 100, "need at least 100 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Fraction f;
    f.samples = samples;
    for (long long i = 0; i < samples; ++i)
        if (predicate(static_cast<Real>(u(rng)))) ++f.hits;
    const Real n = static_cast<Real>(samples), ph = f.hits / n, z = 1.959963984540054L;
    const Real denom = 1 + z * z / n;
    const Real centre = (ph + z * z / (2 * n)) / denom;
    const Real half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom;
    f.fraction = 2 * ph;
    f.lo = 2 * std::max<Real>(0, centre - half);
    f.hi = 2 * std::min<Real>(1, centre + half);
    return f;
}

std::function<bool(Real)> k_set_predicate(const Lattice3& lat, Real t, Real s, Real eps) {
    return [lat, t, s, eps](Real r) { return in_K_set(lat, a_mat(t) * u_mat(r), s, eps); };
}

AnchorReport anchor_points(const Lattice3& lat, const IVec3& normal, Real s, Real radius) {
    require(s >= 1, "s must be at least 1");
    require(radius > 0, "radius must be positive");
    auto pb = plane_basis(normal);
    // Lagrange-reduce the plane lattice in the ambient sup metric's Euclidean surrogate
    std::array<IVec3, 2> c = pb;
    auto amb = [&](const IVec3& m) { return lat.vector(m); };
    auto n2 = [&](const IVec3& m) { Vec3 v = amb(m); return dot(v, v); };
    for (int it = 0; it < 200; ++it) {
        if (n2(c[1]) < n2(c[0])) std::swap(c[0], c[1]);
        Vec3 a = amb(c[0]), b = amb(c[1]);
        Real mu = std::round(dot(a, b) / dot(a, a));
        if (mu == 0) break;
        auto k = static_cast<std::int64_t>(mu);
        for (int i = 0; i < 3; ++i) c[1][i] -= k * c[0][i];
    }
    Vec3 a = amb(c[0]), b = amb(c[1]);
    // Gram-Schmidt: |k2| |b*| <= |v|_2 <= sqrt3 radius
    Real aa = dot(a, a), mu = dot(a, b) / aa;
    Vec3 bs = b - mu * a;
    Real bsn = euclid_norm(bs), an = std::sqrt(aa);
    const Real R2 = std::sqrt(3.0L) * radius;
    auto k2max = static_cast<std::int64_t>(std::floor(R2 / bsn));
    AnchorReport rep;
    const Real cut = -3 * s;
    for (std::int64_t k2 = 0; k2 <= k2max; ++k2) {
        Real centre = -k2 * mu, span = std::sqrt(std::max<Real>(0, R2 * R2 - k2 * k2 * bsn * bsn)) / an;
        auto lo = static_cast<std::int64_t>(std::ceil(centre - span)), hi = static_cast<std::int64_t>(std::floor(centre + span));
        if (k2 == 0) lo = std::max<std::int64_t>(lo, 1);
        for (std::int64_t k1 = lo; k1 <= hi; ++k1) {
            IVec3 m{k1 * c[0][0] + k2 * c[1][0], k1 * c[0][1] + k2 * c[1][1], k1 * c[0][2] + k2 * c[1][2]};
            Vec3 v = lat.vector(m);
            if (sup_norm(v) > radius || v[2] == 0) continue;
            Q0Value q = lat.q0(m);
            if (!q.zero && !(q.log_abs - 2 * std::log(std::abs(v[2])) < cut)) continue;
            rep.members.push_back(m);
            rep.member_rho.push_back(-v[1] / v[2]);
        }
    }
    if (rep.members.empty()) return rep;
    auto [mn, mx] = std::minmax_element(rep.member_rho.begin(), rep.member_rho.end());
    const Real gap = 5 * std::exp(-s);
    if (*mx - *mn > gap)
        rep.anchors = {*mn, *mx};
    else
        rep.anchors = {*mn};
    for (Real r : rep.member_rho) {
        Real d = kInf;
        for (Real x : rep.anchors) d = std::min(d, std::abs(r - x));
        if (d > gap) rep.covered = false;
    }
    return rep;
}

AnchorReport anchor_points(const Lattice3& lat, const Vec3& ambient_normal, Real s, Real radius) {
    // the plane {x : N.x = 0} is rational iff B^T N is proportional to an integer vector
    Vec3 c = transpose(lat.basis()) * ambient_normal;
    int piv = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(c[i]) > std::abs(c[piv])) piv = i;
    require(c[piv] != 0, "zero normal");
    IVec3 n{0, 0, 0};
    std::int64_t den = 1;
    std::array<std::pair<std::int64_t, std::int64_t>, 3> frac{};
    for (int i = 0; i < 3; ++i) {
        // continued-fraction approximation of c_i / c_piv with denominator below 10^6
        Real x = c[i] / c[piv];
        std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
        Real y = x;
        for (int it = 0; it < 64; ++it) {
            Real fl = std::floor(y);
            auto a = static_cast<std::int64_t>(fl);
            std::int64_t h2 = a * h1 + h0, k2 = a * k1 + k0;
            if (k2 > 1000000) break;
            h0 = h1, h1 = h2, k0 = k1, k1 = k2;
            if (std::abs(static_cast<Real>(h1) / k1 - x) < 1e-12L) break;
            y = 1 / (y - fl);
            if (!std::isfinite(y)) break;
        }
        if (std::abs(static_cast<Real>(h1) / k1 - x) > 1e-15L) throw DomainError("plane is not lattice-rational");
        frac[i] = {h1, k1};
        den = std::lcm(den, k1);
    }
    for (int i = 0; i < 3; ++i) n[i] = frac[i].first * (den / frac[i].second);
    std::int64_t g = gcd3(n);
    for (auto& x : n) x /= g;
    return anchor_points(lat, n, s, radius);
}

WalkSchedule walk_schedule(Real B, Real delta, Real T, Real t) {
    require(B > 1, "B must exceed 1");
    require(delta > 0 && delta < 1 / (1 + B), "delta must lie in (0, 1/(1+B))");
    require(T > 0, "T must be positive");
    const Real c = 1 / delta + B + 1;
    auto b = [&](int k) { return c * std::pow(1 + delta, k) - 1 / delta; };
    require(t >= b(0) * T, "t is below the schedule threshold (1+B) T");
    Real x = t / T;
    auto k = static_cast<long long>(std::floor(std::log((x + 1 / delta) / c) / std::log1p(delta)));
    k = std::max<long long>(k, 0);
    while (k > 0 && b(static_cast<int>(k)) > x) --k;
    while (b(static_cast<int>(k + 1)) <= x) ++k;
    if (k > 10'000'000) throw ResourceError("schedule too long");
    WalkSchedule w;
    w.B = B, w.delta = delta, w.T = T, w.t = t;
    w.k = static_cast<int>(k);
    w.tau = t / b(w.k);
    const int N = w.k + 2;
    w.s.resize(N);
    w.s[0] = B * std::pow(1 + delta, w.k) * w.tau;
    for (int i = 2; i <= N; ++i) w.s[i - 1] = std::pow(1 + delta, N - i) * w.tau;
    return w;
}

void check_walk_schedule(const WalkSchedule& w, Real tol) {
    const auto N = w.s.size();
    if (N < 2) throw DomainError("schedule has fewer than two steps");
    NeumaierSum sum;
    for (Real x : w.s) sum.add(x);
    if (std::abs(sum.value() - w.t) > tol * w.t) throw DomainError("sum of steps differs from t");
    if (std::abs(w.s[0] - w.B * w.s[1]) > tol * w.s[0]) throw DomainError("s_1 != B s_2");
    for (std::size_t i = 1; i + 1 < N; ++i)
        if (std::abs(w.s[i] - (1 + w.delta) * w.s[i + 1]) > tol * w.s[i])
            throw DomainError("s_i != (1+delta) s_{i+1}");
    Real last = w.s[N - 1];
    if (last < w.T * (1 - tol) || last > 2 * w.T * (1 + tol)) throw DomainError("s_N outside [T, 2T]");
}

TestFunction w_region(Real a, Real b) {
    require(a < b, "need a < b");
    TestFunction f;
    f.name = "W(" + std::to_string(static_cast<double>(a)) + "," + std::to_string(static_cast<double>(b)) + ")";
    f.f.inner = 0.5L;
    f.f.outer = 1;
    f.f.f = [a, b](const Vec3& v) -> Real {
        Real q = v[1] * v[1] - 2 * v[0] * v[2];
        Real n = sup_norm(v);
        bool in = q > a && q < b && n >= 0.5L && n <= 1 && v[0] > 0 && v[0] / 2 <= std::abs(v[1]) &&
                  std::abs(v[1]) <= v[0];
        return in ? 1 : 0;
    };
    // volume: by v2 -> -v2 symmetry, twice the integral over v1 in (0, 1], v2 in [v1/2, v1] of the
    // admissible v3-length
    auto length = [a, b](Real v1, Real v2) {
        Real lo = std::max<Real>(-1, (v2 * v2 - b) / (2 * v1)), hi = std::min<Real>(1, (v2 * v2 - a) / (2 * v1));
        if (hi <= lo) return Real(0);
        Real L = hi - lo;
        if (v1 < 0.5L && v2 < 0.5L) L -= std::max<Real>(0, std::min<Real>(hi, 0.5L) - std::max<Real>(lo, -0.5L));
        return L;
    };
    QuadratureOptions qo;
    qo.rel_tol = 1e-11L;
    qo.certify = false;
    auto inner = [&](Real v1) {
        // breakpoints where the v3-interval ends cross +-1 and +-1/2, and at v2 = 1/2
        std::vector<Real> cuts{0.5L};
        for (Real level : {-1.0L, -0.5L, 0.5L, 1.0L})
            for (Real ab : {a, b}) {
                Real sq = ab + 2 * v1 * level;
                if (sq > 0) cuts.push_back(std::sqrt(sq));
            }
        return orbit_integral([&](Real v2) { return length(v1, v2); }, v1 / 2, v1, cuts, 1e-14L, qo).value;
    };
    std::vector<Real> outer_cuts{0.5L};
    for (Real x : {-1.0L, -0.5L, 0.5L, 1.0L})
        for (Real ab : {a, b})
            for (Real r : real_roots(0.25L, -2 * x, -ab)) outer_cuts.push_back(r);  // v2 = v1/2 edge
    for (Real x : {-1.0L, -0.5L, 0.5L, 1.0L})
        for (Real ab : {a, b})
            for (Real r : real_roots(1, -2 * x, -ab)) outer_cuts.push_back(r);  // v2 = v1 edge
    f.integral = 2 * orbit_integral(inner, 0, 1, outer_cuts, 1e-13L, qo).value;
    return f;
}

TestFunction shell_indicator(Real inner, Real outer) {
    require(inner >= 0 && inner < outer, "need 0 <= inner < outer");
    TestFunction f;
    f.name = "shell";
    f.f.inner = inner;
    f.f.outer = outer;
    f.f.f = [inner, outer](const Vec3& v) -> Real {
        Real n = sup_norm(v);
        return n >= inner && n <= outer ? 1 : 0;
    };
    f.integral = 8 * (outer * outer * outer - inner * inner * inner);
    return f;
}

TestFunction zero_function() {
    TestFunction f;
    f.name = "zero";
    f.f.inner = 0;
    f.f.outer = 1;
    f.f.f = [](const Vec3&) -> Real { return 0; };
    f.integral = 0;
    return f;
}

std::vector<EquidistRow> equidistribution_experiment(const TestFunction& f, const QForm& q,
                                                     const std::vector<Real>& t_grid,
                                                     const std::function<Real(Real)>& nu,
                                                     const EquidistOptions& opt) {
    if (!f.f.f || !(f.f.outer > 0)) throw DomainError("unsupported test function");
    require(opt.theta_samples >= 1, "theta_samples must be positive");
    auto sig = signature(q);
    if (!((sig.first == 2 && sig.second == 1) || (sig.first == 1 && sig.second == 2)))
        throw DomainError("form must be indefinite");
    if (q.is_rational_multiple()) throw DomainError("form must be irrational");
    Lattice3 lat = lattice_from_form(q);
    SiegelOptions so;
    so.variant = opt.variant;
    so.eta = opt.eta;
    so.M = opt.M;
    auto normals = exceptional_plane_normals(lat, so);
    const long long N = opt.theta_samples;
    NeumaierSum nu_sum;
    for (long long j = 0; j < N; ++j) nu_sum.add(nu(kTwoPi * (j + 0.5L) / N));
    const Real nu_mean = nu_sum.value() / N;
    std::vector<EquidistRow> rows;
    for (Real t : t_grid) {
        const Mat3 at = a_mat(t);
        NeumaierSum acc;
        for (long long j = 0; j < N; ++j) {
            Real th = kTwoPi * (j + 0.5L) / N;
            Real weight = nu(th);
            if (weight == 0) continue;
            Real sum = 0;
            for_each_vector(lll_reduce(at * k_mat(th) * lat.basis()), f.f.outer, false, [&](const LatticeVector& w) {
                if (w.norm < f.f.inner) return true;
                if (excluded_from_Y(lat, w.m, so, normals)) return true;
                sum += f.f.f(w.v) + f.f.f(-w.v);
                return true;
            });
            acc.add(weight * sum);
        }
        EquidistRow row;
        row.t = t;
        row.value = acc.value() / N;
        row.limit = f.integral * nu_mean;
        row.deviation = std::abs(row.value - row.limit);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace opplab
