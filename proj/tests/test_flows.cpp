#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opplab/flows.hpp"
#include "support.hpp"

#include <numbers>
#include <random>

using namespace opplab;
using namespace testing_support;

static bool close(Real a, Real b, Real rel) { return std::abs(a - b) <= rel * std::max<Real>(1, std::max(std::abs(a), std::abs(b))); }

static Lattice3 test_form_lattice() {
    QForm q({0, 1, 0, 0, -2, Scalar(0, 1, 2)});
    return lattice_from_form(normalize_det(q).first);
}

static Real mat_diff(const Mat3& a, const Mat3& b) {
    Real m = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
    return m;
}

TEST_CASE("apply_flow examples") {
    Vec3 w{0.3L, -1.7L, 2.5L};
    CHECK(apply_flow({0, 0, std::nullopt}, w) == w);
    Vec3 v = apply_flow({1, 0, std::nullopt}, {0, 1, 1});
    CHECK(v[0] == 0);
    CHECK(v[1] == 1);
    CHECK(close(v[2], std::exp(-1.0L), 1e-18L));
    for (Real t : {0.5L, 3.0L})
        for (Real r : {-0.9L, 0.25L}) {
            Vec3 img = apply_flow({t, r, std::nullopt}, {1, 2, 2});
            CHECK(std::abs(img[1] * img[1] - 2 * img[0] * img[2]) < 1e-15L * sup_norm(img) * sup_norm(img));
            // closed form with rho = -1, kappa0 = 0
            CHECK(close(img[0], std::exp(t) * (r + 1) * (r + 1), 1e-17L));
            Vec3 s = apply_flow({t, r, std::nullopt}, w, true);
            Vec3 m = J_mat() * a_mat(t) * u_mat(r) * J_mat() * w;
            for (int i = 0; i < 3; ++i) CHECK(close(s[i], m[i], 1e-17L));
        }
}

TEST_CASE("group laws and J-conjugation") {
    CHECK(mat_diff(a_mat(0.7L) * a_mat(1.1L), a_mat(1.8L)) < 1e-12L);
    CHECK(mat_diff(u_mat(0.3L) * u_mat(-0.8L), u_mat(-0.5L)) < 1e-12L);
    CHECK(mat_diff(J_mat() * a_mat(2) * J_mat(), star(a_mat(2))) < 1e-14L);
    CHECK(mat_diff(J_mat() * u_mat(0.4L) * J_mat(), star(u_mat(0.4L))) < 1e-15L);
    // exact mode
    mpq_class r(3, 7), q(-2, 5);
    CHECK(smat_mul(u_exact(r), u_exact(q)) == u_exact(r + q));
    SMat3 j = smat_from_int({IVec3{0, 0, 1}, IVec3{0, -1, 0}, IVec3{1, 0, 0}});
    CHECK(smat_mul(smat_mul(j, u_exact(r)), j) == smat_transpose(u_exact(-r)));
}

TEST_CASE("orbit_integral basics") {
    auto one = orbit_integral([](Real) { return Real(1); }, -1, 1, {}, 1e-12L);
    CHECK(close(one.value, 2, 1e-14L));
    CHECK(one.error_bound >= 0);
    auto root = orbit_integral([](Real r) { return 1 / std::sqrt(std::abs(r)); }, -1, 1, {0}, 1e-9L);
    CHECK(std::abs(root.value - 4) < 1e-8L);
    CHECK(std::abs(root.value - 4) <= root.error_bound + 1e-12L);
    REQUIRE(root.singularity_nodes.size() == 1);
    CHECK(root.singularity_nodes[0] == 0);
    CHECK_THROWS_AS(orbit_integral([](Real) { return Real(1); }, 1, -1, {}, 1e-9L), DomainError);
    CHECK_THROWS_AS(orbit_integral([](Real) { return Real(1); }, -1, 1, {}, 0), DomainError);
}

TEST_CASE("orbit_integral against Monte Carlo and the closed form") {
    // |a_3 u_r e2| = max(e^3 |r|, 1); the integral is 8 e^{-3}
    auto f = [](Real r) { return 1 / sup_norm(apply_flow({3, r, std::nullopt}, {0, 1, 0})); };
    auto q = orbit_integral(f, -1, 1, flow_breakpoints({0, 1, 0}, 3), 1e-12L);
    CHECK(close(q.value, 8 * std::exp(-3.0L), 1e-10L));
    auto mc = monte_carlo_integral(f, -1, 1, 1'000'000, 42);
    CHECK(std::abs(mc.value - q.value) < 3 * mc.std_error);
}

TEST_CASE("orbit_integral is reproducible and honours its budget") {
    auto f = [](Real r) { return std::pow(std::abs(std::sin(40 * r)) + 1e-3L, -0.5L); };
    auto a = orbit_integral(f, -1, 1, {}, 1e-9L);
    auto b = orbit_integral(f, -1, 1, {}, 1e-9L);
    CHECK(a.value == b.value);
    CHECK(a.node_count == b.node_count);
    QuadratureOptions tiny;
    tiny.max_nodes = 200;
    try {
        orbit_integral(f, -1, 1, {}, 1e-14L, tiny);
        FAIL("expected budget exhaustion");
    } catch (const QuadratureError& e) {
        CHECK(e.partial.value > 0);
        CHECK(e.partial.node_count > 200);
    }
}

TEST_CASE("infinite plateau is reported as +inf") {
    auto f = [](Real r) { return std::abs(r - 0.2L) < 0.01L ? kInf : Real(1); };
    auto q = orbit_integral(f, -1, 1, {0.19L, 0.21L}, 1e-9L);
    CHECK(q.infinite);
    CHECK(std::isinf(q.value));
    // an isolated pole is integrable
    auto p = orbit_integral([](Real r) { return r == 0 ? kInf : Real(1); }, -1, 1, {}, 1e-9L);
    CHECK_FALSE(p.infinite);
    CHECK(close(p.value, 2, 1e-12L));
}

TEST_CASE("verify_linear_contraction examples") {
    HeightParams p;
    p.delta = 0.01L;
    auto r = verify_linear_contraction({0, 1, 2}, 2, p, {LinearKind::Phi, 1});
    CHECK(r.pass);
    CHECK_FALSE(r.vacuous);
    CHECK(r.lhs > 0);
    for (Real t : {0.5L, 3.0L}) {
        auto n = verify_linear_contraction({1, 0, 0}, t, p, {LinearKind::NormLambda, 0.9L});
        CHECK(close(n.lhs, 2 * std::exp(-0.9L * t), 1e-10L));
        CHECK(close(n.rhs, 100 * std::exp(-0.1L * t / 3), 1e-15L));
        CHECK(n.pass);
    }
    auto v = verify_linear_contraction({1, 2, 2}, 2, p, {LinearKind::Phi, 1});
    CHECK(v.vacuous);
    CHECK(v.pass);
    // the orbit of an isotropic w meets the gate on a set of positive measure
    CHECK(std::isinf(v.lhs));
    CHECK(verify_linear_contraction({0, 1, 2}, 2, p, {LinearKind::PhiStar, 1}).pass);
    CHECK(verify_linear_contraction({0.5L, -3, 1}, 4, p, {LinearKind::Expansion, 1}).pass);
    CHECK_THROWS_AS(verify_linear_contraction({0, 1, 2}, 0.5L, p, {LinearKind::Phi, 1}), DomainError);
    CHECK_THROWS_AS(verify_linear_contraction({0, 1, 2}, 2, p, {LinearKind::NormLambda, 0.3L}), DomainError);
    CHECK_THROWS_AS(verify_linear_contraction({0, 0, 0}, 2, p, {LinearKind::Phi, 1}), DomainError);
    p.delta = 0.6L;
    CHECK_THROWS_AS(verify_linear_contraction({0, 1, 2}, 2, p, {LinearKind::Expansion, 1}), DomainError);
}

TEST_CASE("phi contraction battery") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-10, 10);
    std::uniform_int_distribution<int> pick(0, 3), pickd(0, 1), side(0, 1);
    const Real ts[] = {1, 2, 4, 8}, ds[] = {0.002L, 0.01L};
    int failures = 0, vacuous = 0;
    for (int i = 0; i < 1000; ++i) {
        Vec3 w{u(rng), u(rng), u(rng)};
        HeightParams p;
        p.delta = ds[pickd(rng)];
        auto kind = side(rng) ? LinearKind::Phi : LinearKind::PhiStar;
        auto r = verify_linear_contraction(w, ts[pick(rng)], p, {kind, 1});
        if (!r.pass) ++failures;
        if (r.vacuous) ++vacuous;
    }
    CHECK(failures == 0);
    // random real w are almost never isotropic
    CHECK(vacuous == 0);
}

TEST_CASE("moment on Z^3 at t = 0 matches Monte Carlo") {
    Lattice3 z = Lattice3::integer();
    HeightParams p;
    auto q = moment(z, 0, 1, p, HeightKind::Alpha, OrbitKind::Unipotent);
    auto mc = moment_monte_carlo(z, identity3(), 0, 1, p, HeightKind::Alpha, OrbitKind::Unipotent, 20000, 7);
    CHECK(std::abs(q.value - mc.value) < 3 * mc.std_error + q.error_bound);
    auto qk = moment(z, 1, 1, p, HeightKind::Alpha, OrbitKind::Compact);
    auto mck = moment_monte_carlo(z, identity3(), 1, 1, p, HeightKind::Alpha, OrbitKind::Compact, 20000, 8);
    CHECK(std::abs(qk.value - mck.value) < 3 * mck.std_error + qk.error_bound);
}

TEST_CASE("moment lower bounds from Minkowski") {
    // every unimodular lattice has a vector of sup norm at most 1, so alpha >= 1 pointwise
    std::mt19937_64 rng(3);
    HeightParams p;
    for (int i = 0; i < 3; ++i) {
        Lattice3 lat(random_unimodular(rng, 1));
        auto u = moment(lat, 2, 1, p, HeightKind::Alpha, OrbitKind::Unipotent);
        auto k = moment(lat, 2, 1, p, HeightKind::Alpha, OrbitKind::Compact);
        CHECK(u.value >= 2 - u.error_bound);
        CHECK(k.value >= 1 - k.error_bound);
    }
    Lattice3 q = test_form_lattice();
    auto h = moment(q, 1, 1.01L, p, HeightKind::AlphaHatEtaM, OrbitKind::Unipotent);
    CHECK(h.value >= 2 - h.error_bound);
}

TEST_CASE("moment grows on Z^3 as the cone vector e3 predicts") {
    // alpha(a_t u_r Z^3) >= |a_t u_r e3|^{-1}, whose 1.05-moment is at least e^{0.05 t}
    Lattice3 z = Lattice3::integer();
    HeightParams p;
    for (Real t : {4.0L, 8.0L}) {
        auto m = moment(z, t, 1.05L, p, HeightKind::Alpha, OrbitKind::Unipotent);
        CHECK(m.value - m.error_bound >= std::exp(0.05L * t));
    }
}

TEST_CASE("verify_subharmonic examples") {
    Lattice3 z = Lattice3::integer();
    HeightParams p;
    auto a = verify_subharmonic(identity3(), z, p, 2, {SubharmonicKind::AlphaLambda, 0.9L});
    CHECK(a.pass);
    CHECK(a.skipped_reason.empty());
    auto s = verify_subharmonic(identity3(), z, p, 2, {SubharmonicKind::AlphaSuperharmonic, 1});
    CHECK(s.pass);
    p.delta = 1e-7L;
    auto t = verify_subharmonic(identity3(), z, p, 2, {SubharmonicKind::AlphaTilde, 1});
    CHECK(t.skipped_reason.empty());
    CHECK(t.pass);
    CHECK(t.lhs > 0);
    // the delta bound of the statement
    p.delta = 0.01L;
    CHECK_THROWS_AS(verify_subharmonic(identity3(), z, p, 2, {SubharmonicKind::AlphaTilde, 1}), DomainError);
    CHECK_THROWS_AS(verify_subharmonic(identity3(), z, p, 0.5L, {SubharmonicKind::AlphaTilde, 1}), DomainError);
    CHECK_THROWS_AS(verify_subharmonic(identity3(), z, p, 5, {SubharmonicKind::AlphaHatPrime, 1}), DomainError);
    Mat3 shear{{{1, 0.5L, 0}, {0, 1, 0}, {0, 0, 1}}};
    CHECK_THROWS_AS(verify_subharmonic(shear, z, p, 1, {SubharmonicKind::AlphaHatExpansion, 1}), DomainError);
}

TEST_CASE("verify_subharmonic on the test form") {
    Lattice3 q = test_form_lattice();
    HeightParams p;
    p.delta = 0.005L;
    CHECK(verify_subharmonic(identity3(), q, p, 2, {SubharmonicKind::AlphaHatExpansion, 1}).pass);
    CHECK(verify_subharmonic(a_mat(1) * u_mat(0.3L), q, p, 2, {SubharmonicKind::AlphaHatExpansion, 1}).pass);
}

// Basis [v, e1, -e3] with v = ((1-q)/200, 1, 100) and Q_0(v) = q.
static Lattice3 planted(const mpq_class& q) {
    SMat3 b{};
    for (auto& row : b)
        for (auto& x : row) x = Scalar(0);
    b[0][0] = Scalar(mpq_class((1 - q) / 200));
    b[1][0] = Scalar(1);
    b[2][0] = Scalar(100);
    b[0][1] = Scalar(1);
    b[2][2] = Scalar(-1);
    return Lattice3::exact(b, "planted");
}

TEST_CASE("verify_subharmonic skips exceptional pairs with a witness") {
    mpz_class ten150;
    mpz_ui_pow_ui(ten150.get_mpz_t(), 10, 150);
    Lattice3 lat = planted(mpq_class(1, ten150));
    HeightParams p;
    p.eta = 1;
    p.delta = 1e-7L;
    auto r = verify_subharmonic(a_mat(std::log(100.0L)), lat, p, 1, {SubharmonicKind::AlphaTilde, 1});
    CHECK_FALSE(r.skipped_reason.empty());
    REQUIRE(r.witness);
    IVec3 m = canonical_sign(r.witness->m);
    CHECK(m[1] == 0);
    CHECK(m[2] == 0);
}

TEST_CASE("sojourn fractions") {
    auto all = sojourn_fraction([](Real) { return true; }, 1000, 1);
    CHECK(all.fraction == 2);
    CHECK(all.hi == 2);
    CHECK(all.lo > 1.99L);
    auto none = sojourn_fraction([](Real) { return false; }, 1000, 1);
    CHECK(none.fraction == 0);
    CHECK(none.lo == 0);
    CHECK(none.hi < 0.01L);
    auto half = sojourn_fraction([](Real r) { return r > 0; }, 100000, 9);
    CHECK(half.lo < 1);
    CHECK(half.hi > 1);
    CHECK(half.fraction == sojourn_fraction([](Real r) { return r > 0; }, 100000, 9).fraction);
    CHECK_THROWS_AS(sojourn_fraction([](Real) { return true; }, 99, 1), DomainError);
}

TEST_CASE("K-set sojourn shrinks with epsilon") {
    Lattice3 q = test_form_lattice();
    auto big = sojourn_fraction(k_set_predicate(q, 20, 1, 1e-2L), 400, 5);
    auto small = sojourn_fraction(k_set_predicate(q, 20, 1, 1e-6L), 400, 5);
    CHECK(small.hits <= big.hits);
    CHECK(small.fraction < 0.5L);
}

TEST_CASE("anchor points on Z^3") {
    Lattice3 z = Lattice3::integer();
    // v3 = 0 on the whole plane
    auto e = anchor_points(z, IVec3{0, 0, 1}, 4);
    CHECK(e.anchors.empty());
    CHECK(e.members.empty());
    // plane v1 = v2 holds the cone directions (0,0,1) (rho 0) and (2,2,1) (rho -2)
    auto two = anchor_points(z, IVec3{1, -1, 0}, 4);
    REQUIRE(two.anchors.size() == 2);
    CHECK(two.anchors[0] == -2);
    CHECK(two.anchors[1] == 0);
    CHECK(two.covered);
    for (Real r : two.member_rho) CHECK((r == -2 || r == 0));
    // plane v2 = 0: only the e3 direction
    auto one = anchor_points(z, IVec3{0, 1, 0}, 4);
    REQUIRE(one.anchors.size() == 1);
    CHECK(one.anchors[0] == 0);
    CHECK(one.members.size() == 200);
    auto amb = anchor_points(z, Vec3{3, -3, 0}, 4);
    CHECK(amb.anchors == two.anchors);
    CHECK_THROWS_AS(anchor_points(z, Vec3{1, std::sqrt(2.0L), 0}, 4), DomainError);
    CHECK_THROWS_AS(anchor_points(z, IVec3{0, 1, 0}, 0.5L), DomainError);
}

TEST_CASE("anchor points cover every member on random lattices") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 5; ++i) {
        Lattice3 lat = random_form_lattice(rng);
        auto rep = anchor_points(lat, random_ivec(rng, 2) == IVec3{0, 0, 0} ? IVec3{1, 0, 0} : random_ivec(rng, 2), 1, 60);
        CHECK(rep.covered);
        CHECK(rep.anchors.size() <= 2);
    }
}

TEST_CASE("walk schedule") {
    auto w = walk_schedule(3, 0.2L, 1, 4);
    REQUIRE(w.s.size() == 2);
    CHECK(close(w.s[0], 3, 1e-15L));
    CHECK(close(w.s[1], 1, 1e-15L));
    CHECK(w.k == 0);
    CHECK_NOTHROW(check_walk_schedule(w));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> B(1.1, 5), T(0.1, 3), x(0, 1), lt(0, 8);
    for (int i = 0; i < 500; ++i) {
        Real b = B(rng), d = x(rng) / (1 + b), tt = T(rng);
        if (d <= 1e-3L) continue;
        Real t = (1 + b) * tt * std::exp(static_cast<Real>(lt(rng)));
        auto s = walk_schedule(b, d, tt, t);
        CHECK_NOTHROW(check_walk_schedule(s));
        CHECK(s.tau >= tt * (1 - 1e-12L));
        CHECK(s.tau <= 2 * tt * (1 + 1e-12L));
    }
    // the t = T / delta boundary
    auto bd = walk_schedule(2, 0.25L, 1, 4);
    CHECK_NOTHROW(check_walk_schedule(bd));
    CHECK_THROWS_AS(walk_schedule(3, 0.2L, 1, 3.9L), DomainError);
    CHECK_THROWS_AS(walk_schedule(3, 0.3L, 1, 10), DomainError);
    CHECK_THROWS_AS(walk_schedule(1, 0.2L, 1, 10), DomainError);
    WalkSchedule bad = w;
    bad.s[1] = 1.5L;
    CHECK_THROWS_AS(check_walk_schedule(bad), DomainError);
}

TEST_CASE("w_region volume against Monte Carlo") {
    auto f = w_region(-0.3L, 0.4L);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1, 1);
    const int n = 2'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (f.f.f({u(rng), u(rng), u(rng)}) > 0) ++hits;
    Real p = static_cast<Real>(hits) / n, est = 8 * p, se = 8 * std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(est - f.integral) < 4 * se);
    CHECK(f.integral > 0);
}

TEST_CASE("equidistribution examples") {
    QForm q({0, 1, 0, 0, -2, Scalar(0, 1, 2)});
    q = normalize_det(q).first;
    EquidistOptions opt;
    opt.theta_samples = 1 << 10;
    auto one = [](Real) { return Real(1); };
    for (const auto& row : equidistribution_experiment(zero_function(), q, {2, 4}, one, opt)) {
        CHECK(row.value == 0);
        CHECK(row.limit == 0);
    }
    auto shell = shell_indicator(1, 2);
    CHECK(shell.integral == 56);
    auto rows = equidistribution_experiment(shell, q, {3}, one, opt);
    CHECK(rows[0].limit == 56);
    CHECK(rows[0].value > 20);
    CHECK_THROWS_AS(equidistribution_experiment(shell, QForm({0, 1, 0, 0, -2, 0}), {3}, one, opt), DomainError);
}
