#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opplab/count.hpp"
#include "support.hpp"

#include <cstdlib>
#include <numbers>

using namespace opplab;
using namespace testing_support;

static QForm test_form() { return normalize_det(QForm({0, 1, 0, 0, -2, Scalar(0, 1, 2)})).first; }

// (1 + sqrt2) v1^2 + (sqrt2 - 1) v2^2 - v3^2: no rational zero, and neither has its dual
static QForm anisotropic_form() {
    return QForm::diagonal(sqrt2_unit(1), sqrt2_unit(-1), Scalar(-1));
}

// every point of the cube, exact evaluation
static std::int64_t cube_count(const QForm& q, Real a, Real b, Real T) {
    const auto N = static_cast<std::int64_t>(std::floor(T));
    const Scalar sa(real_to_mpq(a)), sb(real_to_mpq(b));
    std::int64_t c = 0;
    for (std::int64_t i = -N; i <= N; ++i)
        for (std::int64_t j = -N; j <= N; ++j)
            for (std::int64_t k = -N; k <= N; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                Scalar v = q(IVec3{i, j, k});
                if (sa < v && v < sb) ++c;
            }
    return c;
}

static std::vector<IVec3> brute_isotropic(const QForm& q, int R) {
    std::vector<IVec3> out;
    for (std::int64_t i = 0; i <= R; ++i)
        for (std::int64_t j = -R; j <= R; ++j)
            for (std::int64_t k = -R; k <= R; ++k) {
                IVec3 m{i, j, k};
                if (m == IVec3{0, 0, 0} || canonical_sign(m) != m || gcd3(m) != 1) continue;
                if (q(m).is_zero()) out.push_back(m);
            }
    std::sort(out.begin(), out.end());
    return out;
}

static void check_partition(const CountReport& r) {
    CHECK(r.raw == r.modified + r.excluded_line_points + r.excluded_plane_points);
    std::int64_t l = 0, p = 0;
    for (const auto& x : r.per_line) l += x.points;
    for (const auto& x : r.per_plane) p += x.points;
    CHECK(l == r.excluded_line_points);
    CHECK(p == r.excluded_plane_points);
}

TEST_CASE("count_points examples") {
    CHECK(count_points(QForm::standard(), -0.5L, 0.5L, 3).raw == cube_count(QForm::standard(), -0.5L, 0.5L, 3));
    for (const QForm& q : {QForm::standard(), test_form(), anisotropic_form()}) {
        CHECK(count_points(q, -1, 1, 0.5L).raw == 0);
        CHECK(count_points(q, -5, 5, 0.5L).modified == 0);
    }
    QForm x = normalize_det(QForm::diagonal(Scalar(1), Scalar(1), Scalar(-2))).first;
    REQUIRE(x.inexact());
    auto r = count_points(x, 1, 2, 2);
    CHECK(r.raw == cube_count(x, 1, 2, 2));
    CHECK_FALSE(r.census_complete);
    check_partition(r);
    CHECK_THROWS_AS(count_points(x, 1, 1, 2), DomainError);
    CHECK_THROWS_AS(count_points(x, 0, 1, -1), DomainError);
    CountOptions tight;
    tight.max_slices = 100;
    CHECK_THROWS_AS(count_points(x, 0, 1, 50, tight), ResourceError);
}

TEST_CASE("count_points matches the cube oracle") {
    QForm t = test_form();
    auto r = count_points(t, -1, 1, 30);
    CHECK(r.raw == cube_count(t, -1, 1, 30));
    check_partition(r);
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> ab(-6, 6), tt(3, 18);
    for (int i = 0; i < 20; ++i) {
        QForm q = random_unit_form(rng, i % 3 == 0);
        if (i % 4 == 1) q = q + QForm({0, 0, 0, Scalar(mpq_class(1, 3)), 0, 0});
        Real a = ab(rng), b = ab(rng);
        if (a > b) std::swap(a, b);
        if (i % 5 == 0) a = std::floor(a), b = std::ceil(b);  // integer thresholds hit exact ties
        Real T = i == 0 ? 30 : tt(rng);
        auto rep = count_points(q, a, b, T);
        CHECK(rep.raw == cube_count(q, a, b, T));
        check_partition(rep);
    }
}

TEST_CASE("several radii in one pass agree with separate runs") {
    QForm t = test_form();
    std::vector<Real> Ts{7, 19.5L, 40, 64};
    auto multi = count_points(t, -1.5L, 2, Ts);
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        auto one = count_points(t, -1.5L, 2, Ts[i]);
        CHECK(multi[i].raw == one.raw);
        CHECK(multi[i].modified == one.modified);
        check_partition(multi[i]);
    }
}

TEST_CASE("counts do not depend on the worker count") {
    QForm t = test_form();
    const char* old = std::getenv("OPPLAB_THREADS");
    std::string saved = old ? old : "";
    setenv("OPPLAB_THREADS", "1", 1);
    auto one = count_points(t, -1, 1, 300);
    setenv("OPPLAB_THREADS", "3", 1);
    auto three = count_points(t, -1, 1, 300);
    if (old)
        setenv("OPPLAB_THREADS", saved.c_str(), 1);
    else
        unsetenv("OPPLAB_THREADS");
    CHECK(one.raw == three.raw);
    CHECK(one.modified == three.modified);
}

TEST_CASE("isotropic line census") {
    CHECK(isotropic_lines(anisotropic_form(), 100).lines.empty());
    CHECK(brute_isotropic(anisotropic_form(), 20).empty());
    QForm t = test_form();
    auto c = isotropic_lines(t, 100);
    REQUIRE(c.lines.size() == 2);
    CHECK(c.lines[0] == IVec3{0, 0, 1});
    CHECK(c.lines[1] == IVec3{1, 0, 0});
    CHECK_FALSE(c.unbounded);
    CHECK(brute_isotropic(t, 20).size() == 2);
    auto small = isotropic_lines(QForm::standard(), 5), big = isotropic_lines(QForm::standard(), 20);
    CHECK(small.unbounded);
    CHECK(small.diagnostic == "rational form: census unbounded");
    CHECK(big.lines.size() > small.lines.size());
    auto sorted = small.lines;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == brute_isotropic(QForm::standard(), 5));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 6; ++i) {
        QForm q = random_unit_form(rng, i % 2 == 0);
        auto found = isotropic_lines(q, 12).lines;
        std::sort(found.begin(), found.end());
        CHECK(found == brute_isotropic(q, 12));
    }
    CHECK_THROWS_AS(isotropic_lines(normalize_det(QForm::diagonal(Scalar(1), Scalar(1), Scalar(-2))).first, 5),
                    DomainError);
}

TEST_CASE("degenerate plane census") {
    CHECK(degenerate_planes(anisotropic_form(), 60).planes.empty());
    CHECK(degenerate_planes(QForm::standard(), 5).unbounded);
    QForm t = test_form();
    auto pc = degenerate_planes(t, 100);
    REQUIRE(pc.planes.size() == 2);
    CHECK(pc.planes[0].normal == IVec3{0, 0, 1});
    CHECK(pc.planes[0].rational_ratio);
    CHECK(pc.planes[1].normal == IVec3{4, 0, 1});
    CHECK_FALSE(pc.planes[1].rational_ratio);

    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> k(-50, 50);
    std::vector<DegeneratePlane> all = pc.planes;
    for (int i = 0; i < 6; ++i)
        for (const auto& p : degenerate_planes(random_unit_form(rng, false), 15).planes) all.push_back(p);
    REQUIRE(all.size() > 2);
    for (const auto& p : all) {
        CHECK(dot(p.normal, p.basis[0]) == 0);
        CHECK(dot(p.normal, p.basis[1]) == 0);
        CHECK(gcd3(cross(p.basis[0], p.basis[1])) == 1);
        CHECK((p.q1 * p.q2 - p.q12 * p.q12).is_zero());
        // Q restricted to the plane is a square of a linear form
        const Real r1 = std::sqrt(std::abs(p.q1.to_real())), r2 = std::sqrt(std::abs(p.q2.to_real()));
        const int s = p.q1.is_zero() ? p.q2.sign() : p.q1.sign(), sigma = p.q12.is_zero() ? 1 : p.q12.sign() * s;
        for (int trial = 0; trial < 100; ++trial) {
            Real k1 = k(rng), k2 = k(rng);
            Real lin = r1 * k1 + sigma * r2 * k2;
            Real val = (p.q1 * Scalar(static_cast<long>(k1 * k1)) + p.q2 * Scalar(static_cast<long>(k2 * k2)) +
                        p.q12 * Scalar(static_cast<long>(2 * k1 * k2)))
                           .to_real();
            CHECK(val == doctest::Approx(s * lin * lin).epsilon(1e-10).scale(1));
        }
    }
}

TEST_CASE("I_Q examples") {
    for (auto [a, b] : {std::pair<Real, Real>{-1, 1}, {0.5L, 3}, {-7, -2}}) {
        auto r = compute_IQ(anisotropic_form(), a, b, 1000);
        CHECK(r.value == 0);
        CHECK(r.planes.empty());
    }
    QForm t = test_form();
    auto r = compute_IQ(t, -1, 1, 1000);
    CHECK(r.L_Q == 4);
    CHECK(r.line_term == 4);
    REQUIRE(r.planes.size() == 2);
    CHECK(r.planes[0].empirical);
    CHECK(r.planes[0].coefficient == 0);  // |v2| < 1 on v3 = 0 leaves only the line e1
    CHECK_FALSE(r.planes[1].empirical);
    CHECK(r.planes[1].coefficient == doctest::Approx(1).epsilon(1e-15));
    CHECK(r.value == doctest::Approx(5).epsilon(1e-15));
    auto off = compute_IQ(t, 0.5L, 2, 1000);
    CHECK(off.line_term == 0);
    CHECK(off.planes[1].coefficient == doctest::Approx(std::sqrt(2.0L) - std::sqrt(0.5L)).epsilon(1e-15));
    // on v3 = 0 the form is v2^2: the lines v2 = +-1 give 2 points per unit of T on each side
    CHECK(compute_IQ(t, 0.5L, 2, 4000).planes[0].coefficient == doctest::Approx(4).epsilon(1e-3));
    CHECK_THROWS_AS(compute_IQ(QForm::standard(), -1, 1, 100), DomainError);
    CHECK_THROWS_AS(compute_IQ(t, 1, -1, 100), DomainError);
}

// points k1 n1 + k2 n2 in the box with sqrt(a+) < |r1 k1 + sigma r2 k2| < sqrt(b+), solved per k2
static std::int64_t strip_count(const DegeneratePlane& p, Real a, Real b, std::int64_t N) {
    const Real r1 = std::sqrt(p.q1.to_real()), r2 = std::sqrt(p.q2.to_real());
    const int sigma = p.q12.sign();
    const Real lo = std::sqrt(std::max<Real>(a, 0)), hi = std::sqrt(std::max<Real>(b, 0));
    std::int64_t c = 0;
    const std::int64_t K = 4 * N;
    for (std::int64_t k2 = -K; k2 <= K; ++k2) {
        Real l = -kInf, h = kInf;
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            Real n1 = p.basis[0][i], off = k2 * p.basis[1][i];
            if (n1 == 0) {
                ok = ok && std::abs(off) <= N;
                continue;
            }
            Real x = (-N - off) / n1, y = (N - off) / n1;
            l = std::max(l, std::min(x, y));
            h = std::min(h, std::max(x, y));
        }
        if (!ok) continue;
        const Real shift = sigma * r2 * k2;
        for (Real sgn : {1.0L, -1.0L}) {
            // sgn (r1 k1 + shift) in (lo, hi)
            Real x = (sgn * lo - shift) / r1, y = (sgn * hi - shift) / r1;
            // box bounds are closed, strip bounds open
            auto first = static_cast<std::int64_t>(std::max(std::ceil(l), std::floor(std::min(x, y)) + 1));
            auto last = static_cast<std::int64_t>(std::min(std::floor(h), std::ceil(std::max(x, y)) - 1));
            if (last >= first) c += last - first + 1;
        }
    }
    return c;
}

TEST_CASE("planted irrational plane: closed form against the strip count") {
    QForm t = test_form();
    auto pc = degenerate_planes(t, 50);
    const DegeneratePlane& p = pc.planes[1];
    REQUIRE_FALSE(p.rational_ratio);
    for (auto [a, b] : {std::pair<Real, Real>{-1, 1}, {0.5L, 3}}) {
        const Real T = 1e4;
        auto iq = compute_IQ(t, a, b, T);
        const Real closed = iq.planes[1].coefficient;
        const auto strip = strip_count(p, a, b, static_cast<std::int64_t>(T));
        CHECK(strip / T == doctest::Approx(closed).epsilon(0.02));
        CHECK(count_plane_points(p, a, b, T, {}) == strip);
    }
}

TEST_CASE("C_Q of the standard form and cross-validation") {
    auto s = compute_CQ(QForm::standard(), CQMethod::Surface);
    CHECK(s.value == doctest::Approx(4 + 2 * std::log(2.0L)).epsilon(1e-10));
    CHECK(s.error < 1e-8);
    for (const QForm& q : {QForm::standard(), test_form()}) {
        auto sf = compute_CQ(q, CQMethod::Surface), vs = compute_CQ(q, CQMethod::VolumeSlope);
        CHECK(vs.value == doctest::Approx(sf.value).epsilon(0.01));
        CHECK(std::abs(vs.value - sf.value) < 4 * vs.error + sf.error);
    }
    CHECK_THROWS_AS(compute_CQ(QForm::diagonal(Scalar(1), Scalar(1), Scalar(1)), CQMethod::Surface), DomainError);
    CHECK_THROWS_AS(compute_CQ(QForm::diagonal(Scalar(1), Scalar(2), Scalar(-1)), CQMethod::Surface), DomainError);
}

TEST_CASE("C_Q invariances") {
    // k: v -> (v3, -v2, v1) preserves Q_0 and the sup norm
    SMat3 k = smat_from_int({IVec3{0, 0, 1}, IVec3{0, -1, 0}, IVec3{1, 0, 0}});
    REQUIRE(transform(QForm::standard(), k) == QForm::standard());
    QForm t = test_form(), tk = transform(t, k);
    REQUIRE_FALSE(tk == t);
    CHECK(compute_CQ(tk, CQMethod::Surface).value == doctest::Approx(compute_CQ(t, CQMethod::Surface).value).epsilon(1e-9));
    CQOptions wide;
    wide.a = -2;
    wide.b = 2;
    auto narrow = compute_CQ(t, CQMethod::VolumeSlope), w = compute_CQ(t, CQMethod::VolumeSlope, wide);
    CHECK(std::abs(narrow.value - w.value) < 4 * std::hypot(narrow.error, w.error));
    auto again = compute_CQ(t, CQMethod::VolumeSlope);
    CHECK(again.value == narrow.value);
}

TEST_CASE("convergence study") {
    QForm t = test_form();
    CHECK(convergence_study(t, -1, 1, {}, 1, 0).rows.empty());
    const Real cq = compute_CQ(t, CQMethod::Surface).value;
    auto iq = compute_IQ(t, -1, 1, 1000).value;
    auto tab = convergence_study(t, -1, 1, {100, 200, 400, 800}, cq, iq);
    REQUIRE(tab.rows.size() == 4);
    for (const auto& row : tab.rows) {
        CHECK(row.prediction == doctest::Approx(2 * cq + iq));
        CHECK(row.raw_over_T > row.modified_over_T);
    }
    CHECK(tab.trend_ok);
    CHECK(tab.rows.back().deviation < tab.rows.front().deviation);
    CHECK_THROWS_AS(convergence_study(QForm::standard(), -1, 1, {100}, 1, 0), DomainError);
    // the rational form carries line points on top of the volume term
    const Real c0 = compute_CQ(QForm::standard(), CQMethod::Surface).value;
    auto r = count_points(QForm::standard(), -1, 1, 400);
    CHECK(r.raw / 400.0L > 1.5L * 2 * c0);
}
