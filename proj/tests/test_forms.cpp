#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opplab/forms.hpp"
#include "support.hpp"

#include <random>

using namespace opplab;
using namespace testing_support;

static Scalar rat(long p, long q = 1) { return Scalar(mpq_class(p, q)); }
static Scalar rt2(long p) { return Scalar(mpq_class(0), mpq_class(p), 2); }

TEST_CASE("scalar arithmetic in Q(sqrt 2)") {
    Scalar u = sqrt2_unit(1), v = sqrt2_unit(-1);
    CHECK(u * v == Scalar(1));
    CHECK((u / v) == u * u);
    CHECK(u.sign() == 1);
    CHECK((rat(1) - rt2(1)).sign() == -1);
    CHECK(std::abs((rat(1) - rt2(1)).to_real() - (1 - std::sqrt(2.0L))) < 1e-18L);
    // tiny value from cancellation keeps full relative accuracy
    Scalar x = Scalar(mpq_class(99), mpq_class(-70), 2);  // 99 - 70 sqrt2
    long double expect = 1.0L / (99.0L + 70.0L * std::sqrt(2.0L));
    CHECK(std::abs(x.to_real() / expect - 1) < 1e-17L);
    CHECK(std::abs(x.log_abs() - std::log(expect)) < 1e-15L);
    CHECK_THROWS_AS(Scalar(mpq_class(1), mpq_class(1), 2) + Scalar(mpq_class(1), mpq_class(1), 3), DomainError);
}

TEST_CASE("evaluate examples") {
    QForm q0 = QForm::standard();
    CHECK(q0(IVec3{1, 0, 0}).is_zero());
    CHECK(q0(IVec3{1, 2, 2}).is_zero());
    CHECK(q0(IVec3{0, 1, 2}) == Scalar(1));
}

TEST_CASE("dual examples") {
    QForm q0 = QForm::standard();
    // independent check: A*A = I for the standard form
    SMat3 a = q0.matrix();
    SMat3 aa = smat_mul(a, a);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(aa[i][j] == Scalar(i == j ? 1 : 0));
    CHECK(dual(q0) == q0);
    QForm d = QForm::diagonal(rat(1), rat(1), rat(-1));
    CHECK(dual(d) == d);
    CHECK(dual(QForm::diagonal(rat(2), rat(1), rat(-1))) == QForm::diagonal(rat(1, 2), rat(1), rat(-1)));
    CHECK_THROWS_AS(dual(QForm::diagonal(rat(1), rat(0), rat(0))), DomainError);
}

TEST_CASE("transform examples") {
    QForm q0 = QForm::standard();
    CHECK(transform(q0, smat_identity()) == q0);
    SMat3 at = smat_identity();
    at[0][0] = rat(2);
    at[2][2] = rat(1, 2);
    CHECK(transform(q0, at) == q0);
    // u_r with r = 3/2
    SMat3 u = smat_identity();
    u[0][1] = rat(3, 2);
    u[0][2] = rat(9, 8);
    u[1][2] = rat(3, 2);
    CHECK(transform(q0, u) == q0);
}

TEST_CASE("normalize_det examples") {
    auto [n, lam] = normalize_det(QForm::standard());
    CHECK(n == QForm::standard());
    CHECK(lam == Scalar(1));
    CHECK(QForm::standard().det() == Scalar(-1));
    auto [n2, lam2] = normalize_det(QForm::standard().scaled(rat(2)));
    CHECK(n2 == QForm::standard());
    CHECK(lam2 == rat(1, 2));
    CHECK_THROWS_AS(normalize_det(QForm::diagonal(rat(1), rat(0), rat(0))), DomainError);
    auto [n3, lam3] = normalize_det(QForm::diagonal(rat(2), rat(1), rat(-1)));
    CHECK(n3.inexact());
    CHECK(std::abs(std::abs(n3.det().to_real()) - 1) < 1e-12L);
}

TEST_CASE("signature examples") {
    // char poly of the standard form: x^3 - x^2 - x + 1 = (x-1)^2 (x+1)
    CHECK(signature(QForm::standard()) == std::pair<int, int>(2, 1));
    CHECK(signature(QForm::diagonal(rat(1), rat(1), rat(1))) == std::pair<int, int>(3, 0));
    CHECK(signature(QForm::diagonal(rat(1), rat(1), rat(-1))) == std::pair<int, int>(2, 1));
    CHECK_THROWS_AS(signature(QForm::diagonal(rat(1), rat(0), rat(1))), DomainError);
}

TEST_CASE("form_distance examples") {
    QForm q0 = QForm::standard();
    CHECK(form_distance(q0, q0) == 0);
    CHECK(form_distance(q0, q0.scaled(rat(2))) == doctest::Approx(2));
    QForm p({rat(0), rat(0), rat(0), rat(0), rat(0), rt2(1)});
    CHECK(form_distance(q0, q0 + p) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("polarization identity, exact") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10000; ++trial) {
        QForm q = random_unit_form(rng, trial % 2);
        SVec3 v = to_svec(random_ivec(rng, 9)), w = to_svec(random_ivec(rng, 9));
        SVec3 s{v[0] + w[0], v[1] + w[1], v[2] + w[2]};
        REQUIRE(q(s) == q(v) + Scalar(2) * q.polar(v, w) + q(w));
    }
}

TEST_CASE("right action and dual commutation, exact") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        QForm q = random_unit_form(rng, false);
        SMat3 g = smat_from_int(random_sl3z(rng)), h = smat_from_int(random_sl3z(rng));
        g[0][1] += rt2(1);  // leave SL(3,Z)
        REQUIRE(transform(transform(q, g), h) == transform(q, smat_mul(g, h)));
        SMat3 gs = smat_transpose(smat_inverse(g));
        REQUIRE(dual(transform(q, g)) == transform(dual(q), gs));
        REQUIRE(transform(q, g).det() == q.det() * smat_det(g) * smat_det(g));
    }
}

TEST_CASE("cross-product identity with the dual form") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 2000; ++trial) {
        bool pos = trial % 2;
        QForm q = random_unit_form(rng, pos);
        Scalar sgn(q.det().sign());
        REQUIRE((q.det() == sgn));
        QForm qs = dual(q);
        IVec3 a = random_ivec(rng, 20), b = random_ivec(rng, 20);
        SVec3 v = to_svec(a), w = to_svec(b);
        Scalar lhs = q(v) * q(w) - q.polar(v, w) * q.polar(v, w);
        REQUIRE(lhs == sgn * qs(cross(a, b)));
    }
}

TEST_CASE("json round trip") {
    QForm q = QForm::standard() + QForm({rat(0), rat(0), rat(0), rat(0), rat(0), rt2(1)});
    CHECK(form_from_json(form_to_json(q)) == q);
    auto j = nlohmann::json::parse(R"({"radicand":2,"coeffs":{"c22":[1,1],"c13":[-2,1],"c23":[0,1,1,1]}})");
    CHECK(form_from_json(j) == q);
}

TEST_CASE("fast exact evaluation agrees with mpq") {
    std::mt19937_64 rng(14);
    QForm q = QForm::standard() + QForm({rat(0), rat(0), rat(0), rat(0), rat(0), rt2(1)});
    FastForm f(q);
    for (int trial = 0; trial < 5000; ++trial) {
        IVec3 m = random_ivec(rng, 100000);
        auto v = f(m);
        Scalar s = q(m);
        REQUIRE(v.zero == s.is_zero());
        if (!v.zero) {
            REQUIRE(v.sign == s.sign());
            REQUIRE(std::abs(v.value / s.to_real() - 1) < 1e-15L);
        }
    }
    CHECK(f(IVec3{1, 0, 0}).zero);
    CHECK(f(IVec3{0, 0, 7}).zero);
}
