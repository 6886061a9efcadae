#include "opplab/acceptance.hpp"

#include "opplab/count.hpp"
#include "opplab/dioph.hpp"
#include "opplab/flows.hpp"
#include "opplab/group.hpp"
#include "opplab/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace opplab {

using nlohmann::json;

namespace {

// Q_0 + sqrt2 v2 v3, already of determinant -1
json test_form_json() {
    return json{{"radicand", 2}, {"coeffs", {{"c22", {1, 1}}, {"c13", {-2, 1}}, {"c23", {0, 1, 1, 1}}}}};
}

json standard_form_json() { return json{{"radicand", 1}, {"coeffs", {{"c22", {1, 1}}, {"c13", {-2, 1}}}}}; }

// (1 + sqrt2) v1^2 + (sqrt2 - 1) v2^2 - v3^2
json anisotropic_form_json() {
    return json{{"radicand", 2}, {"coeffs", {{"c11", {1, 1, 1, 1}}, {"c22", {-1, 1, 1, 1}}, {"c33", {-1, 1}}}}};
}

// Q_0, the test form, an anisotropic form and two random forms of determinant -1
json cq_forms() {
    json f = {standard_form_json(), test_form_json(), anisotropic_form_json()};
    std::mt19937_64 rng(55);
    for (int i = 0; i < 2; ++i) f.push_back(form_to_json(random_unit_form(rng, false)));
    return f;
}

const std::map<std::string, json>& defaults() {
    static const std::map<std::string, json> d = [] {
        std::map<std::string, json> m;
        m["contraction"] = {{"id", 1},         {"trials", 1000},     {"seed", 1},
                            {"t", {1, 2, 4, 8}}, {"delta", {0.002, 0.01}}, {"range", 10},
                            {"rel_tol", 1e-7}, {"lambda", {0.5, 1.0}}};
        m["divergence"] = {{"id", 2}, {"t", {4, 8, 12}}, {"lambda", 1.05}, {"v", {0, 0, 1}}, {"rel_tol", 1e-3}};
        m["moment"] = {{"id", 3},        {"form", test_form_json()}, {"t", {1, 2, 4, 8, 12}},
                       {"exponent", 1.01}, {"delta", 0.01},          {"eta", 0.5},
                       {"M", 2},          {"D", 1024},              {"rel_tol", 1e-3},
                       {"max_ratio", 2},  {"z3_exponent", 1.05},    {"shell_R", 20}};
        m["counting"] = {{"id", 4},  {"form", test_form_json()}, {"a", -1}, {"b", 1}, {"T", {500, 1000, 2000, 4000}},
                         {"max_deviation", 0.1}, {"oracle_T", 30}, {"census_R", 100}};
        m["cq"] = {{"id", 5},
                   {"forms", cq_forms()},
                   {"tolerance", 0.01},
                   {"grid", 1000},
                   {"replicates", 8},
                   {"seed", 5}};
        m["duality"] = {{"id", 6}, {"triples", 10000}, {"seed", 6}, {"bound", 50}, {"float_tolerance", 1e-9}};
        m["integral_form"] = {{"id", 7},          {"instances", 100}, {"seed", 7},
                              {"log10_eps", {-9, -6}}, {"max_R", 50},   {"C", static_cast<double>(kIntegralFormConstant)}};
        m["schedule"] = {{"id", 8}, {"instances", 1000}, {"seed", 8}, {"tolerance", 1e-9}};
        m["exceptional"] = {{"id", 9}, {"lattices", 100}, {"seed", 9}, {"s", {1, 3, 5}}, {"eta", 0.5},
                            {"M", 2},  {"D", 1024},       {"planted_log10_q", -150}, {"planted_eta", 1}};
        m["equidistribution"] = {{"id", 10},         {"form", test_form_json()}, {"a", -0.5},
                                 {"b", 0.5},         {"t", {4, 6, 8, 10}},      {"theta_samples", 262144},
                                 {"eta", 0.5},       {"M", 2}};
        return m;
    }();
    return d;
}

// through the shortest decimal form, so that 0.01 becomes 0.01L rather than the nearest double
Real R(const json& j) {
    if (!j.is_number()) throw DomainError("expected a number, got " + j.dump());
    return std::stold(j.dump());
}

std::vector<Real> Rs(const json& j) {
    std::vector<Real> out;
    for (const auto& x : j) out.push_back(R(x));
    return out;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// memo of orbit moments shared by experiments within one battery run
struct Context {
    std::map<std::string, QuadratureResult> moments;

    const QuadratureResult& moment_of(const std::string& tag, const Lattice3& lat, Real t, Real exponent,
                                      const HeightParams& p, HeightKind kind, Real rel_tol) {
        std::ostringstream key;
        key << tag << '|' << static_cast<double>(t) << '|' << static_cast<double>(exponent) << '|'
            << static_cast<int>(kind) << '|' << static_cast<double>(rel_tol) << '|' << static_cast<double>(p.eta)
            << '|' << static_cast<double>(p.M);
        auto it = moments.find(key.str());
        if (it != moments.end()) return it->second;
        MomentOptions mo;
        mo.rel_tol = rel_tol;
        return moments[key.str()] = moment(lat, t, exponent, p, kind, OrbitKind::Unipotent, mo);
    }
};

HeightParams height_params(const json& p) {
    HeightParams h;
    if (p.contains("delta")) h.delta = R(p["delta"]);
    if (p.contains("eta")) h.eta = R(p["eta"]);
    if (p.contains("M")) h.M = R(p["M"]);
    if (p.contains("D")) h.D = R(p["D"]);
    return h;
}

CriterionResult contraction(const json& p, Context&) {
    CriterionResult out;
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    const Real range = R(p["range"]);
    std::uniform_real_distribution<double> u(-range, range), lam(p["lambda"][0].get<double>(), p["lambda"][1].get<double>());
    const auto ts = Rs(p["t"]), ds = Rs(p["delta"]);
    std::uniform_int_distribution<std::size_t> pt(0, ts.size() - 1), pd(0, ds.size() - 1);
    const LinearKind kinds[4] = {LinearKind::Phi, LinearKind::PhiStar, LinearKind::NormLambda, LinearKind::Expansion};
    const char* names[4] = {"phi", "phistar", "norm", "expansion"};
    int fails = 0, vacuous = 0, done = 0, skipped = 0;
    Real worst = 0;
    json per = json::object(), vac = json::array(), bad = json::array();
    auto run = [&](const Vec3& w, Real t, Real d, int k, Real l) {
        HeightParams hp;
        hp.delta = d;
        VerifyResult r;
        try {
            r = verify_linear_contraction(w, t, hp, {kinds[k], l}, R(p["rel_tol"]));
        } catch (const DomainError&) {
            ++skipped;
            return;
        }
        ++done;
        per[names[k]] = per.value(names[k], 0) + 1;
        json row = {{"w", {static_cast<double>(w[0]), static_cast<double>(w[1]), static_cast<double>(w[2])}},
                    {"t", static_cast<double>(t)},
                    {"delta", static_cast<double>(d)},
                    {"kind", names[k]}};
        if (r.vacuous) {
            ++vacuous;
            vac.push_back(row);
        } else if (std::isfinite(r.rhs) && r.rhs > 0) {
            worst = std::max(worst, (r.lhs - r.error_bound) / r.rhs);
        }
        if (!r.pass) {
            ++fails;
            row["lhs"] = static_cast<double>(r.lhs);
            row["rhs"] = static_cast<double>(r.rhs);
            bad.push_back(row);
        }
    };
    const int trials = p["trials"].get<int>();
    for (int i = 0; i < trials; ++i) {
        Vec3 w{u(rng), u(rng), u(rng)};
        Real t = ts[pt(rng)], d = ds[pd(rng)], l = lam(rng);
        run(w, t, d, i % 4, l);
    }
    // points of the cone with |rho| < 2: the phi bounds are infinite there
    for (const Vec3& w : {Vec3{1, 2, 2}, Vec3{2, 2, 1}, Vec3{1, -2, 2}, Vec3{0.5L, 1, 1}})
        for (int k = 0; k < 2; ++k) run(w, 2, 0.01L, k, 1);
    out.pass = fails == 0;
    out.summary = std::to_string(done) + " checks, " + std::to_string(fails) + " failures, " +
                  std::to_string(vacuous) + " vacuous (logged), " + std::to_string(skipped) +
                  " outside hypotheses, max (lhs - err)/rhs = " + fmt("%.3g", worst);
    out.data = {{"checks", done}, {"skipped", skipped}, {"failures", bad}, {"vacuous", vac}, {"per_kind", per}, {"max_ratio", static_cast<double>(worst)}};
    return out;
}

CriterionResult divergence(const json& p, Context& ctx) {
    CriterionResult out;
    const Real lambda = R(p["lambda"]);
    Vec3 v{R(p["v"][0]), R(p["v"][1]), R(p["v"][2])};
    Lattice3 z = Lattice3::integer();
    HeightParams hp;
    out.pass = true;
    json rows = json::array();
    std::string s;
    for (Real t : Rs(p["t"])) {
        const auto& m = ctx.moment_of("Z3", z, t, lambda, hp, HeightKind::Alpha, R(p["rel_tol"]));
        const Real bound = std::exp((lambda - 1) * t) * std::pow(sup_norm(v), -lambda);
        const bool ok = m.value + m.error_bound >= bound;
        out.pass = out.pass && ok;
        rows.push_back({{"t", static_cast<double>(t)},
                        {"moment", static_cast<double>(m.value)},
                        {"error", static_cast<double>(m.error_bound)},
                        {"bound", static_cast<double>(bound)},
                        {"pass", ok}});
        s += (s.empty() ? "" : ", ") + fmt("t=%g: ", static_cast<double>(t)) + fmt("%.4g", m.value) +
             fmt(" >= %.4g", bound);
    }
    out.summary = s;
    out.data = {{"rows", rows}};
    return out;
}

CriterionResult moment_bound(const json& p, Context& ctx) {
    CriterionResult out;
    const QForm q = form_from_json(p["form"]);
    const HeightParams hp = height_params(p);
    hp.validate();
    const Lattice3 lat = lattice_from_form(q), z = Lattice3::integer();
    const Real rel = R(p["rel_tol"]);
    const auto shell = quasi_null_shell(q, hp, R(p["shell_R"]));
    json rows = json::array();
    Real lo = kInf, hi = 0;
    std::vector<Real> zv;
    const auto ts = Rs(p["t"]);
    for (Real t : ts) {
        const auto& a = ctx.moment_of(q.str(), lat, t, R(p["exponent"]), hp, HeightKind::AlphaHatEtaM, rel);
        const auto& b = ctx.moment_of("Z3", z, t, R(p["z3_exponent"]), HeightParams{}, HeightKind::Alpha, rel);
        lo = std::min(lo, a.value);
        hi = std::max(hi, a.value);
        zv.push_back(b.value);
        rows.push_back({{"t", static_cast<double>(t)},
                        {"alpha_hat_moment", static_cast<double>(a.value)},
                        {"alpha_hat_error", static_cast<double>(a.error_bound)},
                        {"z3_alpha_moment", static_cast<double>(b.value)},
                        {"z3_error", static_cast<double>(b.error_bound)}});
    }
    const Real ratio = hi / lo, growth = zv.back() / zv.front();
    const Real need = std::exp((R(p["z3_exponent"]) - 1) * (ts.back() - ts.front())) / 2;
    out.pass = shell.pass && ratio < R(p["max_ratio"]) && growth > need;
    out.summary = "alpha-hat moment max/min = " + fmt("%.3f", ratio) + fmt(" (< %g)", p["max_ratio"].get<double>()) +
                  ", Z^3 growth = " + fmt("%.3f", growth) + fmt(" (> %.3f)", need) + ", shell " +
                  (shell.pass ? "ok" : "FAILED") + fmt(" at R=%g", p["shell_R"].get<double>());
    out.data = {{"rows", rows},
                {"ratio", static_cast<double>(ratio)},
                {"z3_growth", static_cast<double>(growth)},
                {"shell", {{"vectors", shell.vectors.size()}, {"lines", shell.line_cover.size()},
                           {"planes", shell.plane_cover.size()}, {"pass", shell.pass}}}};
    return out;
}

std::int64_t cube_oracle(const QForm& q, Real a, Real b, Real T) {
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

CriterionResult counting(const json& p, Context&) {
    CriterionResult out;
    const QForm q = form_from_json(p["form"]);
    const Real a = R(p["a"]), b = R(p["b"]);
    const Real cq = compute_CQ(q, CQMethod::Surface).value;
    const Real iq = compute_IQ(q, a, b, 1000, p["census_R"].get<int>()).value;
    auto tab = convergence_study(q, a, b, Rs(p["T"]), cq, iq);
    bool monotone = true;
    json rows = json::array();
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        const auto& r = tab.rows[i];
        if (i > 0 && r.deviation > tab.rows[i - 1].deviation) monotone = false;
        rows.push_back({{"T", static_cast<double>(r.T)},
                        {"N_over_T", static_cast<double>(r.raw_over_T)},
                        {"modified_over_T", static_cast<double>(r.modified_over_T)},
                        {"prediction", static_cast<double>(r.prediction)},
                        {"deviation", static_cast<double>(r.deviation)}});
    }
    const Real last = tab.rows.back().deviation;
    const Real To = R(p["oracle_T"]);
    const auto fast = count_points(q, a, b, To).raw;
    const auto slow = cube_oracle(q, a, b, To);
    out.pass = last < R(p["max_deviation"]) && monotone && fast == slow;
    out.summary = "deviation at T=" + fmt("%g", tab.rows.back().T) + ": " + fmt("%.4f", last) +
                  (monotone ? ", non-increasing" : ", NOT monotone") + "; cube oracle at T=" + fmt("%g", To) + ": " +
                  std::to_string(fast) + (fast == slow ? " == " : " != ") + std::to_string(slow);
    out.data = {{"C_Q", static_cast<double>(cq)}, {"I_Q", static_cast<double>(iq)}, {"rows", rows},
                {"oracle", {{"slices", fast}, {"cube", slow}}}};
    return out;
}

CriterionResult cq_cross(const json& p, Context&) {
    CriterionResult out;
    out.pass = true;
    CQOptions o;
    o.grid = p["grid"].get<int>();
    o.replicates = p["replicates"].get<int>();
    o.seed = p["seed"].get<std::uint64_t>();
    json rows = json::array();
    Real worst = 0;
    for (const auto& fj : p["forms"]) {
        const QForm q = form_from_json(fj);
        auto s = compute_CQ(q, CQMethod::Surface, o), v = compute_CQ(q, CQMethod::VolumeSlope, o);
        const Real rel = std::abs(v.value - s.value) / s.value;
        worst = std::max(worst, rel);
        const bool ok = rel < R(p["tolerance"]);
        out.pass = out.pass && ok;
        rows.push_back({{"form", q.str()},
                        {"surface", static_cast<double>(s.value)},
                        {"surface_error", static_cast<double>(s.error)},
                        {"volume_slope", static_cast<double>(v.value)},
                        {"volume_error", static_cast<double>(v.error)},
                        {"relative_difference", static_cast<double>(rel)},
                        {"pass", ok}});
    }
    out.summary = std::to_string(rows.size()) + " forms, worst relative difference " + fmt("%.4f", worst) +
                  fmt(" (< %g)", p["tolerance"].get<double>());
    out.data = {{"rows", rows}};
    return out;
}

CriterionResult duality(const json& p, Context&) {
    CriterionResult out;
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    const int n = p["triples"].get<int>(), bound = p["bound"].get<int>();
    int exact_fail = 0, literal_ok = 0, literal_total = 0;
    Real worst = 0;
    for (int i = 0; i < n; ++i) {
        const bool pos = i % 2 == 0;
        const QForm q = random_unit_form(rng, pos);
        const QForm qs = dual(q);
        const IVec3 a = random_ivec(rng, bound), b = random_ivec(rng, bound);
        SVec3 v, w;
        for (int k = 0; k < 3; ++k) v[k] = Scalar(static_cast<long>(a[k])), w[k] = Scalar(static_cast<long>(b[k]));
        const Scalar pq = q.polar(v, w);
        const Scalar lhs = q(v) * q(w) - pq * pq, star = qs(cross(a, b));
        // with the dual taken as the inverse matrix the identity carries the sign of det Q
        if (!(lhs == Scalar(q.det().sign()) * star)) ++exact_fail;
        if (pos) {
            ++literal_total;
            if (lhs == star) ++literal_ok;
        }
        // float mode: real matrices, inverse computed numerically
        const Mat3 A = q.real_matrix(), Ai = inverse(A);
        const Vec3 x = to_real(a), y = to_real(b), c = cross(x, y);
        const Real qv = dot(x, A * x), qw = dot(y, A * y), bvw = dot(x, A * y);
        const Real fl = qv * qw - bvw * bvw, fr = det(A) * dot(c, Ai * c);
        const Real scale = std::abs(qv * qw) + bvw * bvw;
        if (scale > 0) worst = std::max(worst, std::abs(fl - fr) / scale);
    }
    out.pass = exact_fail == 0 && literal_ok == literal_total && worst < R(p["float_tolerance"]);
    out.summary = std::to_string(n) + " exact triples, " + std::to_string(exact_fail) + " failures (" +
                  std::to_string(literal_ok) + "/" + std::to_string(literal_total) +
                  " det +1 triples satisfy the unsigned identity); float max relative error " + fmt("%.2e", worst);
    out.data = {{"triples", n}, {"exact_failures", exact_fail}, {"det_plus_one", literal_total},
                {"max_float_relative_error", static_cast<double>(worst)}};
    return out;
}

bool proportional(const QForm& a, const QForm& b) {
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

CriterionResult integral_form(const json& p, Context&) {
    CriterionResult out;
    const std::array<IVec3, 5> q0m{IVec3{1, 0, 0}, {0, 0, 1}, {1, 2, 2}, {2, 2, 1}, {1, -2, 2}};
    auto ex = construct_integral_form(QForm::standard(), q0m, 3, 0);
    const bool example = ex.dist == 0 && ex.form.is_integral() && proportional(ex.form, QForm::standard());
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> le(p["log10_eps"][0].get<double>(), p["log10_eps"][1].get<double>());
    const Real C = R(p["C"]);
    const int n = p["instances"].get<int>();
    int fails = 0;
    Real worst = 0;
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
        auto qq = perturbed_quintuple(rng, std::pow(10.0L, static_cast<Real>(le(rng))), p["max_R"].get<int>());
        auto r = construct_integral_form(qq.q, qq.m, qq.R, qq.eps);
        bool vanish = true;
        for (const auto& m : qq.m) vanish = vanish && r.form(m).is_zero();
        const Real ratio = r.dist / (qq.eps * std::pow(qq.R, 10));
        worst = std::max(worst, ratio);
        const bool ok = r.form.is_integral() && vanish && ratio <= C;
        if (!ok) ++fails;
        rows.push_back({{"R", static_cast<double>(qq.R)}, {"eps", static_cast<double>(qq.eps)},
                        {"dist", static_cast<double>(r.dist)}, {"ratio", static_cast<double>(ratio)}, {"pass", ok}});
    }
    out.pass = example && fails == 0;
    out.summary = std::string("Q_0 quintuple ") + (example ? "dist 0, proportional" : "FAILED") + "; " +
                  std::to_string(n) + " perturbed quintuples, " + std::to_string(fails) +
                  " failures, worst dist/(eps R^10) = " + fmt("%.3g", worst) + fmt(" (C = %g)", C);
    out.data = {{"example", {{"dist", static_cast<double>(ex.dist)}, {"form", ex.form.str()}}}, {"rows", rows}};
    return out;
}

CriterionResult schedule(const json& p, Context&) {
    CriterionResult out;
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> B(1.1, 5), T(0.1, 3), x(0, 1), lt(0, 8);
    const int n = p["instances"].get<int>();
    int done = 0, fails = 0;
    json bad = json::array();
    while (done < n) {
        Real b = B(rng), d = x(rng) / (1 + b), tt = T(rng);
        if (d <= 1e-3L) continue;
        Real t = (1 + b) * tt * std::exp(static_cast<Real>(lt(rng)));
        ++done;
        try {
            check_walk_schedule(walk_schedule(b, d, tt, t), R(p["tolerance"]));
        } catch (const DomainError& e) {
            ++fails;
            bad.push_back({{"B", static_cast<double>(b)}, {"delta", static_cast<double>(d)}, {"T", static_cast<double>(tt)},
                           {"t", static_cast<double>(t)}, {"error", e.what()}});
        }
    }
    out.pass = fails == 0;
    out.summary = std::to_string(n) + " schedules, " + std::to_string(fails) + " invariant violations";
    out.data = {{"failures", bad}};
    return out;
}

// basis [v, e1, -e3] with v = ((1 - q)/200, 1, 100), so Q_0(v) = q
Lattice3 planted_lattice(const mpq_class& q) {
    SMat3 b;
    for (auto& row : b)
        for (auto& x : row) x = Scalar(0);
    b[0][0] = Scalar(mpq_class((1 - q) / 200));
    b[1][0] = Scalar(1);
    b[2][0] = Scalar(100);
    b[0][1] = Scalar(1);
    b[2][2] = Scalar(-1);
    return Lattice3::exact(b, "planted");
}

CriterionResult exceptional(const json& p, Context&) {
    CriterionResult out;
    HeightParams hp = height_params(p);
    std::mt19937_64 rng(p["seed"].get<std::uint64_t>());
    const int n = p["lattices"].get<int>();
    int members = 0, checks = 0;
    for (int i = 0; i < n; ++i) {
        Lattice3 lat = i % 2 ? lattice_from_form(random_unit_form(rng, false)) : Lattice3(random_unimodular(rng, 1));
        for (Real s : Rs(p["s"])) {
            ++checks;
            if (in_exceptional_set(identity3(), lat, hp, s).member) ++members;
        }
    }
    // planted witness: Q_0(v) = q on a vector of norm 100, flowed by a_{ln 100}
    const int e = -p["planted_log10_q"].get<int>();
    mpz_class ten;
    mpz_ui_pow_ui(ten.get_mpz_t(), 10, e);
    HeightParams pp = hp;
    pp.eta = R(p["planted_eta"]);
    const Mat3 g = a_mat(std::log(100.0L));
    auto rep = in_exceptional_set(g, planted_lattice(mpq_class(1, ten)), pp, 1);
    bool planted = rep.member && rep.side == 1 && rep.witness;
    if (planted) {
        IVec3 m = canonical_sign(rep.witness->m);
        planted = m[1] == 0 && m[2] == 0 && m[0] >= 1 &&
                  std::abs(rep.witness->log_kappa + e * std::log(10.0L)) <= 1e-9L * e * std::log(10.0L);
    }
    auto mirror = in_exceptional_set(g, planted_lattice(mpq_class(1, ten)).dual().transformed(J_mat(), true), pp, 1);
    const bool mirrored = mirror.member && mirror.side == 2;
    const bool control = !in_exceptional_set(g, planted_lattice(mpq_class(1, 10)), pp, 1).member;
    out.pass = members == 0 && planted && mirrored && control;
    out.summary = std::to_string(checks) + " (id, Delta) checks, " + std::to_string(members) +
                  " members; planted witness " + (planted ? "found on side 1" : "MISSED") + ", mirror " +
                  (mirrored ? "found on side 2" : "MISSED") + ", control " + (control ? "clean" : "FLAGGED");
    out.data = {{"checks", checks}, {"members", members}, {"planted", planted}, {"mirror", mirrored}, {"control", control}};
    if (rep.witness)
        out.data["witness"] = {{"m", rep.witness->m}, {"log_kappa", static_cast<double>(rep.witness->log_kappa)}};
    return out;
}

CriterionResult equidistribution(const json& p, Context&) {
    CriterionResult out;
    const QForm q = form_from_json(p["form"]);
    EquidistOptions o;
    o.theta_samples = p["theta_samples"].get<long long>();
    o.eta = R(p["eta"]);
    o.M = R(p["M"]);
    auto rows = equidistribution_experiment(w_region(R(p["a"]), R(p["b"])), q, Rs(p["t"]), [](Real) { return Real(1); }, o);
    out.pass = true;
    json js = json::array();
    std::string s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && !(rows[i].deviation < rows[i - 1].deviation)) out.pass = false;
        js.push_back({{"t", static_cast<double>(rows[i].t)},
                      {"value", static_cast<double>(rows[i].value)},
                      {"limit", static_cast<double>(rows[i].limit)},
                      {"deviation", static_cast<double>(rows[i].deviation)}});
        s += (s.empty() ? "|avg - limit|: " : ", ") + fmt("t=%g ", static_cast<double>(rows[i].t)) +
             fmt("%.4g", rows[i].deviation);
    }
    out.summary = s + (out.pass ? " (decreasing)" : " (NOT decreasing)");
    out.data = {{"rows", js}};
    return out;
}

using Runner = CriterionResult (*)(const json&, Context&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> r{
        {"contraction", contraction}, {"divergence", divergence},   {"moment", moment_bound},
        {"counting", counting},       {"cq", cq_cross},             {"duality", duality},
        {"integral_form", integral_form}, {"schedule", schedule},   {"exceptional", exceptional},
        {"equidistribution", equidistribution}};
    return r;
}

CriterionResult run_one(const json& e, Context& ctx) {
    const std::string name = e.at("name").get<std::string>();
    const json& p = e.at("params");
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = runners().at(name)(p, ctx);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.name = name;
    r.id = p.value("id", 0);
    return r;
}

}  // namespace

bool BatterySummary::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

json BatterySummary::to_json() const {
    json rs = json::array();
    for (const auto& r : results)
        rs.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary},
                      {"data", r.data}});
    return {{"config", config}, {"results", rs}, {"all_pass", all_pass()}};
}

json default_battery_config() {
    json ex = json::array();
    std::vector<std::pair<int, std::string>> order;
    for (const auto& [name, params] : defaults()) order.emplace_back(params["id"].get<int>(), name);
    std::sort(order.begin(), order.end());
    for (const auto& [id, name] : order) ex.push_back({{"name", name}, {"params", defaults().at(name)}});
    return {{"experiments", ex}};
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& [name, r] : runners()) out.push_back(name);
    return out;
}

json resolve_battery_config(const json& config) {
    if (!config.is_object() || !config.contains("experiments") || !config["experiments"].is_array())
        throw DomainError("battery config needs an \"experiments\" list");
    json out = config;
    for (auto& e : out["experiments"]) {
        if (!e.is_object() || !e.contains("name")) throw DomainError("every experiment needs a \"name\"");
        const std::string name = e["name"].get<std::string>();
        if (!defaults().count(name)) throw DomainError("unknown experiment \"" + name + "\"");
        json p = defaults().at(name);
        if (e.contains("params")) {
            if (!e["params"].is_object()) throw DomainError("\"params\" of " + name + " must be an object");
            for (const auto& [k, v] : e["params"].items()) {
                if (!p.contains(k)) throw DomainError("unknown parameter \"" + k + "\" for " + name);
                p[k] = v;
            }
        }
        e["params"] = p;
    }
    return out;
}

CriterionResult run_experiment(const json& experiment) {
    Context ctx;
    json cfg = resolve_battery_config(json{{"experiments", json::array({experiment})}});
    return run_one(cfg["experiments"][0], ctx);
}

BatterySummary run_battery(const json& config, const std::function<void(const CriterionResult&)>& on_result) {
    BatterySummary s;
    s.config = resolve_battery_config(config);
    Context ctx;
    for (const auto& e : s.config["experiments"]) {
        s.results.push_back(run_one(e, ctx));
        if (on_result) on_result(s.results.back());
    }
    return s;
}

}  // namespace opplab
