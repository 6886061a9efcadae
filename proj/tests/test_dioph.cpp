#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opplab/dioph.hpp"
#include "support.hpp"

using namespace opplab;
using namespace testing_support;

static const std::array<IVec3, 5> kQ0Quintuple{IVec3{1, 0, 0}, {0, 0, 1}, {1, 2, 2}, {2, 2, 1}, {1, -2, 2}};

static bool proportional(const QForm& a, const QForm& b) {
    // a = lambda b for some nonzero rational lambda
    std::optional<Scalar> lambda;
    for (int i = 0; i < 6; ++i) {
        const Scalar &x = a.coeffs()[i], &y = b.coeffs()[i];
        if (y.is_zero()) {
            if (!x.is_zero()) return false;
            continue;
        }
        Scalar l = x / y;
        if (lambda && !(*lambda == l)) return false;
        lambda = l;
    }
    return lambda && !lambda->is_zero();
}

// exhaustive minimum of |Q - rho Q'| |Q'|^M over integral Q' with |Q'| <= cap
static Real brute_force_type(const QForm& q, Real M, int cap) {
    Real c[6];
    for (int i = 0; i < 6; ++i) c[i] = q.coeffs()[i].to_real();
    const Real dq = q.det().to_real();
    Real best = kInf;
    std::int64_t n[6];
    for (n[0] = -cap; n[0] <= cap; ++n[0])
        for (n[1] = -cap; n[1] <= cap; ++n[1])
            for (n[2] = -cap; n[2] <= cap; ++n[2])
                for (n[3] = -cap; n[3] <= cap; ++n[3])
                    for (n[4] = -cap; n[4] <= cap; ++n[4])
                        for (n[5] = -cap; n[5] <= cap; ++n[5]) {
                            std::int64_t det4 = 4 * n[0] * n[1] * n[2] + n[3] * n[4] * n[5] - n[0] * n[5] * n[5] -
                                                n[1] * n[4] * n[4] - n[2] * n[3] * n[3];
                            if (det4 == 0) continue;
                            Real rho = std::cbrt(4 * dq / det4), d = 0;
                            std::int64_t top = 0;
                            for (int i = 0; i < 6; ++i) {
                                d = std::max(d, std::abs(c[i] - rho * n[i]));
                                top = std::max<std::int64_t>(top, std::abs(n[i]));
                            }
                            best = std::min(best, d * std::pow(static_cast<Real>(top), M));
                        }
    return best;
}

TEST_CASE("integral form from the Q_0 quintuple") {
    for (const auto& v : kQ0Quintuple) REQUIRE(QForm::standard()(v).is_zero());
    auto r = construct_integral_form(QForm::standard(), kQ0Quintuple, 3, 0);
    CHECK(r.form.is_integral());
    CHECK(proportional(r.form, QForm::standard()));
    CHECK(r.dist == 0);
    CHECK(r.within_bound);
    CHECK(r.rho > 0);
    // scaled inputs: same construction, bound in 2R
    std::array<IVec3, 5> twice;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) twice[i][j] = 2 * kQ0Quintuple[i][j];
    auto s = construct_integral_form(QForm::standard(), twice, 6, 0);
    CHECK(s.within_bound);
    CHECK(s.dist == 0);
    CHECK(proportional(s.form, QForm::standard()));
}

TEST_CASE("integral form preconditions") {
    std::array<IVec3, 5> coplanar = kQ0Quintuple;
    coplanar[3] = {1, 0, 1};  // on the plane of (1,0,0) and (0,0,1)
    QForm big({1, 1, 1, 0, 0, 0});
    CHECK_THROWS_AS(construct_integral_form(QForm::standard(), coplanar, 3, 10), DomainError);
    CHECK_THROWS_AS(construct_integral_form(QForm::standard(), kQ0Quintuple, 2, 0), DomainError);
    CHECK_THROWS_AS(construct_integral_form(big, kQ0Quintuple, 3, 0.5L), DomainError);
    std::array<IVec3, 5> zero = kQ0Quintuple;
    zero[0] = {0, 0, 0};
    CHECK_THROWS_AS(construct_integral_form(QForm::standard(), zero, 3, 0), DomainError);
}

TEST_CASE("integral form vanishes exactly on the five vectors") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> le(-9, -6);
    for (int i = 0; i < 50; ++i) {
        auto qq = perturbed_quintuple(rng, std::pow(10.0L, le(rng)));
        auto r = construct_integral_form(qq.q, qq.m, qq.R, qq.eps);
        CHECK(r.form.is_integral());
        for (const auto& v : qq.m) CHECK(r.form(v).is_zero());
        CHECK(r.within_bound);
        CHECK(r.dist <= kIntegralFormConstant * qq.eps * std::pow(qq.R, 10));
    }
}

TEST_CASE("Diophantine type of a rational form is zero") {
    auto r = estimate_dioph_type(QForm::standard(), 2, 2);
    CHECK(r.c_min == 0);
    CHECK(proportional(r.argmin, QForm::standard()));
    CHECK(estimate_dioph_type(QForm::standard(), 2, 1).c_min > 0);
}

TEST_CASE("Diophantine type against exhaustive enumeration") {
    QForm q = normalize_det(QForm({0, 1, 0, 0, -2, Scalar(0, 1, 2)})).first;
    for (int cap : {1, 3}) CHECK(estimate_dioph_type(q, 2, cap).c_min == doctest::Approx(brute_force_type(q, 2, cap)).epsilon(1e-15));
    auto r10 = estimate_dioph_type(q, 2, 10);
    CHECK(r10.c_min > 0);
    CHECK(r10.c_min == doctest::Approx(brute_force_type(q, 2, 10)).epsilon(1e-15));
    std::mt19937_64 rng(8);
    for (int i = 0; i < 6; ++i) {
        QForm f = random_unit_form(rng, i % 2 == 0);
        for (Real M : {0.0L, 1.0L, 3.0L}) {
            auto r = estimate_dioph_type(f, M, 3);
            CHECK(r.c_min == doctest::Approx(brute_force_type(f, M, 3)).epsilon(1e-15));
            if (r.c_min > 0) CHECK(r.argmin.is_integral());
        }
    }
}

TEST_CASE("Diophantine type is monotone in the cap") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 4; ++i) {
        QForm f = random_unit_form(rng, false);
        Real prev = kInf;
        for (int cap : {1, 2, 4, 8, 16}) {
            Real c = estimate_dioph_type(f, 2, cap).c_min;
            CHECK(c <= prev);
            prev = c;
        }
    }
    CHECK_THROWS_AS(estimate_dioph_type(QForm({1, 1, 1, 0, 0, 0}).scaled(Scalar(2)), 2, 3), DomainError);
    CHECK_THROWS_AS(estimate_dioph_type(QForm::standard(), 2, 0), DomainError);
}

TEST_CASE("quasi-null shell of the test form lies on its isotropic lines") {
    QForm q = normalize_det(QForm({0, 1, 0, 0, -2, Scalar(0, 1, 2)})).first;
    REQUIRE(q(IVec3{1, 0, 0}).is_zero());
    REQUIRE(q(IVec3{0, 0, 1}).is_zero());
    HeightParams p;
    p.eta = 0.5L;
    p.M = 2;
    auto rep = quasi_null_shell(q, p, 20);
    CHECK(rep.pass);
    CHECK_FALSE(rep.vectors.empty());
    for (const auto& l : rep.line_cover) CHECK((l == IVec3{1, 0, 0} || l == IVec3{0, 0, 1}));
    CHECK(rep.plane_cover.size() == 1);
    for (const auto& m : rep.vectors) CHECK(q(m).is_zero());
    CHECK_THROWS_AS(quasi_null_shell(q, p, 10), DomainError);
}

TEST_CASE("quasi-null shell with no isotropic vectors is empty") {
    // sqrt2 v1^2 + v2^2 - 3 v3^2: a rational zero needs v1 = 0 and v2^2 = 3 v3^2
    QForm q = normalize_det(QForm::diagonal(Scalar(0, 1, 2), Scalar(1), Scalar(-3))).first;
    HeightParams p;
    p.eta = 0.5L;
    p.M = 2;
    auto rep = quasi_null_shell(q, p, 12);
    CHECK(rep.vectors.empty());
    CHECK(rep.line_cover.empty());
    CHECK(rep.plane_cover.empty());
    CHECK(rep.pass);
}
