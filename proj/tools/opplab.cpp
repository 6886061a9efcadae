#include "opplab/acceptance.hpp"
#include "opplab/count.hpp"
#include "opplab/dioph.hpp"
#include "opplab/flows.hpp"
#include "opplab/group.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace opplab;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitPrecondition = 2;
constexpr int kExitResource = 3;
constexpr int kExitBattery = 4;

// a literal is inline JSON when it starts with '{' or '[', a file path otherwise
json read_literal(const std::string& s) {
    auto first = s.find_first_not_of(" \t\n");
    if (first != std::string::npos && (s[first] == '{' || s[first] == '[')) return json::parse(s);
    std::ifstream in(s);
    if (!in) throw DomainError("cannot open " + s);
    return json::parse(in);
}

QForm parse_form(const std::string& s) {
    if (s == "q0") return QForm::standard();
    return form_from_json(read_literal(s));
}

// "integer", "q0", a form literal, {"form": F} or {"basis": [[row], [row], [row]]}
Lattice3 parse_lattice(const std::string& s) {
    if (s == "integer") return Lattice3::integer();
    if (s == "q0") return lattice_from_form(QForm::standard());
    json j = read_literal(s);
    if (j.contains("basis")) {
        Mat3 b{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) b[i][k] = j["basis"].at(i).at(k).get<double>();
        if (std::abs(det(b) - 1) > 1e-9L) throw DomainError("lattice basis must have determinant 1");
        return Lattice3(b, "cli basis");
    }
    return lattice_from_form(form_from_json(j.contains("form") ? j["form"] : j));
}

json real_json(Real x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return static_cast<double>(x);
}

std::string csv_cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

struct Output {
    std::string path;
    std::string format = "json";

    void add(CLI::App* app) {
        app->add_option("--out", path, "write the report here instead of stdout");
        app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }

    // csv prints the rows only, with the keys of the first row as header
    void write(const std::string& command, const json& config, const json& rows, const json& extra = {}) const {
        std::ostringstream os;
        if (format == "csv") {
            if (!rows.empty()) {
                std::vector<std::string> keys;
                for (const auto& [k, v] : rows[0].items()) keys.push_back(k);
                for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
                os << '\n';
                for (const auto& r : rows) {
                    for (std::size_t i = 0; i < keys.size(); ++i) {
                        std::string c = r.contains(keys[i]) ? csv_cell(r[keys[i]]) : "";
                        if (c.find_first_of(",\"\n") != std::string::npos) {
                            std::string q = "\"";
                            for (char ch : c) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                            c = q + "\"";
                        }
                        os << (i ? "," : "") << c;
                    }
                    os << '\n';
                }
            }
        } else {
            json rep = {{"command", command}, {"config", config}, {"rows", rows}};
            if (!extra.is_null()) rep.update(extra);
            os << rep.dump(2) << '\n';
        }
        if (path.empty()) {
            std::cout << os.str();
        } else {
            std::ofstream f(path);
            if (!f) throw DomainError("cannot write " + path);
            f << os.str();
        }
    }
};

struct HeightFlags {
    Real delta = 0.01L, eta = 0.5L, M = 2, D = 1024;
    void add(CLI::App* app) {
        app->add_option("--delta", delta, "delta in (0, 0.01]");
        app->add_option("--eta", eta, "eta in (0, 1]");
        app->add_option("--M", M, "M > 1");
        app->add_option("--D", D, "constant D > 0");
    }
    HeightParams params() const {
        HeightParams p;
        p.delta = delta;
        p.eta = eta;
        p.M = M;
        p.D = D;
        p.validate();
        return p;
    }
    json to_json() const {
        return {{"delta", real_json(delta)}, {"eta", real_json(eta)}, {"M", real_json(M)}, {"D", real_json(D)}};
    }
};

HeightKind height_kind(const std::string& s) {
    if (s == "alpha") return HeightKind::Alpha;
    if (s == "alpha_hat") return HeightKind::AlphaHatEtaM;
    if (s == "alpha_hat_prime") return HeightKind::AlphaHatPrime;
    if (s == "alpha_tilde") return HeightKind::AlphaTilde;
    throw DomainError("unknown height " + s);
}

const std::vector<std::string> kHeights{"alpha", "alpha_hat", "alpha_hat_prime", "alpha_tilde"};

json ivec_json(const IVec3& m) { return json::array({m[0], m[1], m[2]}); }

IVec3 ivec_from(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()}; }

json count_row(const CountReport& r) {
    json per_line = json::array(), per_plane = json::array();
    for (const auto& l : r.per_line) per_line.push_back({{"m", ivec_json(l.m)}, {"points", l.points}});
    for (const auto& p : r.per_plane) per_plane.push_back({{"normal", ivec_json(p.normal)}, {"points", p.points}});
    return {{"a", real_json(r.a)},
            {"b", real_json(r.b)},
            {"T", real_json(r.T)},
            {"raw", r.raw},
            {"modified", r.modified},
            {"excluded_line_points", r.excluded_line_points},
            {"excluded_plane_points", r.excluded_plane_points},
            {"c_q", real_json(r.c_q)},
            {"i_q", real_json(r.i_q)},
            {"predicted", real_json(r.predicted)},
            {"census_complete", r.census_complete},
            {"per_line", per_line},
            {"per_plane", per_plane}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opplab: heights, flows, Diophantine type and point counts for ternary quadratic forms"};
    app.require_subcommand(0, 1);
    long long max_box = enumeration_cap();
    app.add_option("--max-box", max_box, "cap on enumerated points per lattice search");

    // count
    auto* count = app.add_subcommand("count", "N_Q(a, b, T) by slice enumeration");
    std::string form_s;
    double a = -1, b = 1;
    std::vector<double> Ts{100};
    bool modified = false, with_cq = false;
    int census_R = 100;
    long long max_slices = 1'000'000'000;
    Output out_count;
    count->add_option("--form", form_s, "form literal, file or q0")->required();
    count->add_option("--a", a);
    count->add_option("--b", b);
    count->add_option("--T", Ts, "one or more radii")->expected(1, -1);
    count->add_flag("--modified", modified, "report the count with isotropic lines and degenerate planes removed");
    count->add_flag("--predict", with_cq, "compute C_Q and I_Q and the predicted count");
    count->add_option("--census-R", census_R, "search radius of the line and plane census");
    count->add_option("--max-slices", max_slices, "resource cap on (v1, v2) slices");
    out_count.add(count);
    count->footer("CSV columns: a,b,T,raw,modified,excluded_line_points,excluded_plane_points,c_q,i_q,predicted,"
                  "census_complete,per_line,per_plane");

    // cq
    auto* cq = app.add_subcommand("cq", "C_Q by the surface integral and/or the volume slope");
    std::string method = "both";
    double cq_tol = 0.01;
    int cq_grid = 1000, cq_reps = 8;
    std::uint64_t cq_seed = 1;
    Output out_cq;
    cq->add_option("--form", form_s)->required();
    cq->add_option("--method", method)->check(CLI::IsMember({"surface", "volume", "both"}));
    cq->add_option("--tolerance", cq_tol, "relative agreement required with --method both");
    cq->add_option("--grid", cq_grid);
    cq->add_option("--replicates", cq_reps);
    cq->add_option("--seed", cq_seed);
    out_cq.add(cq);
    cq->footer("CSV columns: method,value,error");

    // iq
    auto* iq = app.add_subcommand("iq", "I_Q(a, b): isotropic lines and degenerate planes");
    double T_probe = 1000;
    Output out_iq;
    iq->add_option("--form", form_s)->required();
    iq->add_option("--a", a);
    iq->add_option("--b", b);
    iq->add_option("--T-probe", T_probe, "radius used to fit rational-ratio planes");
    iq->add_option("--census-R", census_R);
    out_iq.add(iq);
    iq->footer("CSV columns: normal,coefficient,empirical");

    // census
    auto* census = app.add_subcommand("census", "rational isotropic lines and degenerate planes");
    Output out_census;
    census->add_option("--form", form_s)->required();
    census->add_option("--R", census_R, "search radius");
    out_census.add(census);
    census->footer("CSV columns: kind,vector,q1,q2,q12,rational_ratio");

    // alpha
    auto* alpha_cmd = app.add_subcommand("alpha", "height of a_t u_r Delta");
    std::string lattice_s = "integer", kind_s = "alpha";
    double t = 0, r = 0;
    HeightFlags hf_alpha;
    Output out_alpha;
    alpha_cmd->add_option("--lattice", lattice_s, "integer, q0, a form or {\"basis\": rows}");
    alpha_cmd->add_option("--kind", kind_s)->check(CLI::IsMember(kHeights));
    alpha_cmd->add_option("--t", t);
    alpha_cmd->add_option("--r", r);
    hf_alpha.add(alpha_cmd);
    out_alpha.add(alpha_cmd);
    alpha_cmd->footer("CSV columns: kind,t,r,value");

    // moment
    auto* moment_cmd = app.add_subcommand("moment", "orbit integral of a height power");
    std::vector<double> ts{1};
    double exponent = 1, rel_tol = 1e-4;
    std::string orbit = "unipotent";
    HeightFlags hf_moment;
    Output out_moment;
    moment_cmd->add_option("--lattice", lattice_s);
    moment_cmd->add_option("--kind", kind_s)->check(CLI::IsMember(kHeights));
    moment_cmd->add_option("--t", ts)->expected(1, -1);
    moment_cmd->add_option("--exponent", exponent);
    moment_cmd->add_option("--orbit", orbit)->check(CLI::IsMember({"unipotent", "compact"}));
    moment_cmd->add_option("--rel-tol", rel_tol);
    hf_moment.add(moment_cmd);
    out_moment.add(moment_cmd);
    moment_cmd->footer("CSV columns: t,value,error_bound,nodes");

    // verify
    auto* verify = app.add_subcommand("verify", "contraction and subharmonicity checks");
    std::string which_family, which = "phi";
    int trials = 10;
    std::uint64_t seed = 1;
    double lambda = 1, s_param = 1, range = 10;
    HeightFlags hf_verify;
    Output out_verify;
    verify->add_option("family", which_family, "contraction or subharmonic")
        ->required()
        ->check(CLI::IsMember({"contraction", "subharmonic"}));
    verify->add_option("--which", which,
                       "contraction: phi, phistar, norm, expansion; subharmonic: lambda, superharmonic, "
                       "hat_expansion, hat_prime, tilde");
    verify->add_option("--trials", trials);
    verify->add_option("--seed", seed);
    verify->add_option("--t", ts, "contraction: flow times drawn uniformly from this list")->expected(1, -1);
    verify->add_option("--lambda", lambda, "contraction: 1 by default; subharmonic: 0.9 by default");
    verify->add_option("--s", s_param, "subharmonic: flow time");
    verify->add_option("--range", range, "contraction: w drawn from [-range, range]^3");
    verify->add_option("--lattice", lattice_s, "subharmonic: lattice");
    hf_verify.add(verify);
    out_verify.add(verify);
    verify->footer("CSV columns: trial,lhs,rhs,error_bound,pass,vacuous,skipped");

    // dioph
    auto* dioph = app.add_subcommand("dioph", "Diophantine type and integral approximants");
    dioph->require_subcommand(1);
    auto* dtype = dioph->add_subcommand("type", "min of |Q - rho Q'| |Q'|^M over integral Q'");
    double dM = 2;
    int cap = 4;
    long long max_leaves = 400'000'000;
    Output out_dioph;
    dtype->add_option("--form", form_s)->required();
    dtype->add_option("--M", dM);
    dtype->add_option("--cap", cap, "largest coefficient of Q'");
    dtype->add_option("--max-leaves", max_leaves);
    out_dioph.add(dtype);
    auto* dcons = dioph->add_subcommand("construct", "integral form from five near-isotropic vectors");
    std::string ms;
    double dR = 3, deps = 0;
    dcons->add_option("--form", form_s)->required();
    dcons->add_option("--m", ms, "JSON list of five integer vectors")->required();
    dcons->add_option("--R", dR);
    dcons->add_option("--eps", deps);
    out_dioph.add(dcons);
    auto* dcal = dioph->add_subcommand("calibrate", "worst dist / (eps R^10) over perturbed quintuples");
    int instances = 1000;
    std::uint64_t dseed = 2718;
    dcal->add_option("--instances", instances);
    dcal->add_option("--seed", dseed);
    out_dioph.add(dcal);

    // sojourn
    auto* sojourn = app.add_subcommand("sojourn", "measure of r in [-1, 1] with a_t u_r Delta in K(s, eps)");
    double eps = 0.1;
    long long samples = 10000;
    Output out_sojourn;
    sojourn->add_option("--lattice", lattice_s);
    sojourn->add_option("--t", t);
    sojourn->add_option("--s", s_param);
    sojourn->add_option("--eps", eps);
    sojourn->add_option("--samples", samples);
    sojourn->add_option("--seed", seed);
    out_sojourn.add(sojourn);
    sojourn->footer("CSV columns: fraction,lo,hi,samples,hits");

    // equidist
    auto* equidist = app.add_subcommand("equidist", "K-averages of the Siegel transform of a region indicator");
    double ea = -0.5, eb = 0.5;
    long long theta_samples = 1 << 17;
    Output out_equidist;
    equidist->add_option("--form", form_s)->required();
    equidist->add_option("--a", ea);
    equidist->add_option("--b", eb);
    equidist->add_option("--t", ts)->expected(1, -1);
    equidist->add_option("--samples", theta_samples);
    out_equidist.add(equidist);
    equidist->footer("CSV columns: t,value,limit,deviation");

    // schedule
    auto* sched = app.add_subcommand("schedule", "walk schedule s_1 < ... < s_k and its invariants");
    double sB = 2, sdelta = 0.1, sT = 1, st = 20;
    Output out_sched;
    sched->add_option("--B", sB);
    sched->add_option("--delta", sdelta);
    sched->add_option("--T", sT);
    sched->add_option("--t", st);
    out_sched.add(sched);
    sched->footer("CSV columns: i,s");

    // battery
    auto* battery = app.add_subcommand("battery", "run a configured experiment battery");
    std::string config_path;
    std::vector<std::string> sets;
    bool dump = false;
    Output out_battery;
    battery->add_option("config", config_path, "battery JSON; the built-in default when omitted");
    battery->add_option("--set", sets, "override, e.g. counting.max_deviation=0.05")->expected(0, -1);
    battery->add_flag("--dump-config", dump, "print the default config and exit");
    out_battery.add(battery);

    if (argc <= 1) {
        std::cerr << app.help();
        return kExitPrecondition;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitPrecondition;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kExitPrecondition;
    }

    try {
        set_enumeration_cap(max_box);
        const json global = {{"enum.max_box", max_box}};
        if (count->parsed()) {
            QForm q = parse_form(form_s);
            CountOptions o;
            o.census_R = census_R;
            o.max_slices = max_slices;
            std::vector<Real> radii(Ts.begin(), Ts.end());
            if (with_cq) {
                o.c_q = compute_CQ(q, CQMethod::Surface).value;
                o.i_q = compute_IQ(q, a, b, radii.back(), census_R).value;
            }
            json rows = json::array();
            for (const auto& rep : count_points(q, a, b, radii, o)) {
                json row = count_row(rep);
                row["value"] = modified ? rep.modified : rep.raw;
                rows.push_back(row);
            }
            out_count.write("count", {{"form", form_to_json(q)}, {"a", a}, {"b", b}, {"T", Ts}, {"modified", modified},
                                      {"census_R", census_R}, {"max_slices", max_slices}, {"global", global}},
                            rows);
        } else if (cq->parsed()) {
            QForm q = parse_form(form_s);
            CQOptions o;
            o.grid = cq_grid;
            o.replicates = cq_reps;
            o.seed = cq_seed;
            json rows = json::array();
            std::vector<Real> vals;
            if (method != "volume") {
                auto res = compute_CQ(q, CQMethod::Surface, o);
                vals.push_back(res.value);
                rows.push_back({{"method", "surface"}, {"value", real_json(res.value)}, {"error", real_json(res.error)}});
            }
            if (method != "surface") {
                auto res = compute_CQ(q, CQMethod::VolumeSlope, o);
                vals.push_back(res.value);
                rows.push_back({{"method", "volume"}, {"value", real_json(res.value)}, {"error", real_json(res.error)}});
            }
            json extra;
            if (vals.size() == 2) {
                Real rel = std::abs(vals[1] - vals[0]) / vals[0];
                extra = {{"relative_difference", real_json(rel)}, {"agree", rel < cq_tol}};
            }
            out_cq.write("cq", {{"form", form_to_json(q)}, {"method", method}, {"tolerance", cq_tol}, {"grid", cq_grid},
                                {"replicates", cq_reps}, {"seed", cq_seed}},
                         rows, extra);
        } else if (iq->parsed()) {
            QForm q = parse_form(form_s);
            auto res = compute_IQ(q, a, b, T_probe, census_R);
            json rows = json::array();
            for (const auto& p : res.planes)
                rows.push_back({{"normal", ivec_json(p.normal)}, {"coefficient", real_json(p.coefficient)},
                                {"empirical", p.empirical}});
            out_iq.write("iq", {{"form", form_to_json(q)}, {"a", a}, {"b", b}, {"T_probe", T_probe}, {"census_R", census_R}},
                         rows,
                         {{"I_Q", real_json(res.value)}, {"line_term", real_json(res.line_term)}, {"L_Q", real_json(res.L_Q)}});
        } else if (census->parsed()) {
            QForm q = parse_form(form_s);
            auto lines = isotropic_lines(q, census_R);
            auto planes = degenerate_planes(q, census_R);
            json rows = json::array();
            for (const auto& m : lines.lines)
                rows.push_back({{"kind", "line"}, {"vector", ivec_json(m)}, {"q1", ""}, {"q2", ""}, {"q12", ""},
                                {"rational_ratio", ""}});
            for (const auto& p : planes.planes)
                rows.push_back({{"kind", "plane"}, {"vector", ivec_json(p.normal)}, {"q1", p.q1.str()}, {"q2", p.q2.str()},
                                {"q12", p.q12.str()}, {"rational_ratio", p.rational_ratio}});
            out_census.write("census", {{"form", form_to_json(q)}, {"R", census_R}}, rows,
                             {{"lines_unbounded", lines.unbounded}, {"planes_unbounded", planes.unbounded},
                              {"diagnostic", lines.diagnostic + planes.diagnostic}});
        } else if (alpha_cmd->parsed()) {
            Lattice3 lat = parse_lattice(lattice_s);
            HeightParams p = hf_alpha.params();
            Real v = height_value(height_kind(kind_s), FlowPoint{t, r, {}}.matrix(), lat, p);
            out_alpha.write("alpha", {{"lattice", lattice_s}, {"kind", kind_s}, {"t", t}, {"r", r}, {"height", hf_alpha.to_json()}},
                            json::array({{{"kind", kind_s}, {"t", t}, {"r", r}, {"value", real_json(v)}}}));
        } else if (moment_cmd->parsed()) {
            Lattice3 lat = parse_lattice(lattice_s);
            HeightParams p = hf_moment.params();
            MomentOptions mo;
            mo.rel_tol = rel_tol;
            json rows = json::array();
            for (double tt : ts) {
                auto res = moment(lat, tt, exponent, p, height_kind(kind_s),
                                  orbit == "compact" ? OrbitKind::Compact : OrbitKind::Unipotent, mo);
                rows.push_back({{"t", tt}, {"value", real_json(res.value)}, {"error_bound", real_json(res.error_bound)},
                                {"nodes", res.node_count}});
            }
            out_moment.write("moment", {{"lattice", lattice_s}, {"kind", kind_s}, {"t", ts}, {"exponent", exponent},
                                        {"orbit", orbit}, {"rel_tol", rel_tol}, {"height", hf_moment.to_json()}},
                             rows);
        } else if (verify->parsed()) {
            HeightParams p = hf_verify.params();
            if (!verify->count("--lambda") && which_family == "subharmonic") lambda = 0.9;
            std::mt19937_64 rng(seed);
            json rows = json::array();
            int fails = 0;
            auto push = [&](int i, const VerifyResult& v, const std::string& skipped) {
                rows.push_back({{"trial", i}, {"lhs", real_json(v.lhs)}, {"rhs", real_json(v.rhs)},
                                {"error_bound", real_json(v.error_bound)}, {"pass", v.pass}, {"vacuous", v.vacuous},
                                {"skipped", skipped}});
                if (!v.pass) ++fails;
            };
            if (which_family == "contraction") {
                static const std::map<std::string, LinearKind> kinds{{"phi", LinearKind::Phi},
                                                                     {"phistar", LinearKind::PhiStar},
                                                                     {"norm", LinearKind::NormLambda},
                                                                     {"expansion", LinearKind::Expansion}};
                if (!kinds.count(which)) throw DomainError("unknown contraction " + which);
                std::uniform_real_distribution<double> u(-range, range);
                std::uniform_int_distribution<std::size_t> pick(0, ts.size() - 1);
                for (int i = 0; i < trials; ++i) {
                    Vec3 w{u(rng), u(rng), u(rng)};
                    Real tt = ts[pick(rng)];
                    try {
                        push(i, verify_linear_contraction(w, tt, p, {kinds.at(which), lambda}), "");
                    } catch (const DomainError& e) {
                        VerifyResult v;
                        v.pass = true;
                        push(i, v, e.what());
                    }
                }
            } else {
                static const std::map<std::string, SubharmonicKind> kinds{
                    {"lambda", SubharmonicKind::AlphaLambda},
                    {"superharmonic", SubharmonicKind::AlphaSuperharmonic},
                    {"hat_expansion", SubharmonicKind::AlphaHatExpansion},
                    {"hat_prime", SubharmonicKind::AlphaHatPrime},
                    {"tilde", SubharmonicKind::AlphaTilde}};
                if (!kinds.count(which)) throw DomainError("unknown subharmonic check " + which);
                Lattice3 lat = parse_lattice(lattice_s);
                std::uniform_real_distribution<double> ur(-1, 1), ut(0, 3);
                for (int i = 0; i < trials; ++i) {
                    Mat3 g = FlowPoint{ut(rng), ur(rng), {}}.matrix();
                    auto v = verify_subharmonic(g, lat, p, s_param, {kinds.at(which), lambda});
                    push(i, v, v.skipped_reason);
                }
            }
            out_verify.write("verify", {{"family", which_family}, {"which", which}, {"trials", trials}, {"seed", seed},
                                        {"t", ts}, {"lambda", lambda}, {"s", s_param}, {"height", hf_verify.to_json()}},
                             rows, {{"failures", fails}});
            if (fails) return kExitBattery;
        } else if (dtype->parsed()) {
            QForm q = parse_form(form_s);
            auto res = estimate_dioph_type(q, dM, cap, max_leaves);
            out_dioph.write("dioph type", {{"form", form_to_json(q)}, {"M", dM}, {"cap", cap}, {"max_leaves", max_leaves}},
                            json::array({{{"c_min", real_json(res.c_min)}, {"rho", real_json(res.rho)},
                                          {"dist", real_json(res.dist)}, {"argmin", res.argmin.str()},
                                          {"visited", res.visited}}}));
        } else if (dcons->parsed()) {
            QForm q = parse_form(form_s);
            json mj = read_literal(ms);
            if (!mj.is_array() || mj.size() != 5) throw DomainError("--m needs five vectors");
            std::array<IVec3, 5> m;
            for (int i = 0; i < 5; ++i) m[i] = ivec_from(mj[i]);
            auto res = construct_integral_form(q, m, dR, deps);
            out_dioph.write("dioph construct", {{"form", form_to_json(q)}, {"m", mj}, {"R", dR}, {"eps", deps}},
                            json::array({{{"form", res.form.str()}, {"det_gamma", res.det_gamma.str()},
                                          {"rho", real_json(res.rho)}, {"dist", real_json(res.dist)},
                                          {"norm", real_json(res.norm)}, {"within_bound", res.within_bound}}}));
        } else if (dcal->parsed()) {
            std::mt19937_64 rng(dseed);
            std::uniform_real_distribution<double> le(-9, -6);
            Real worst = 0;
            json rows = json::array();
            for (int i = 0; i < instances; ++i) {
                auto qq = perturbed_quintuple(rng, std::pow(10.0L, static_cast<Real>(le(rng))));
                auto res = construct_integral_form(qq.q, qq.m, qq.R, qq.eps);
                Real ratio = res.dist / (qq.eps * std::pow(qq.R, 10));
                worst = std::max(worst, ratio);
                rows.push_back({{"R", real_json(qq.R)}, {"eps", real_json(qq.eps)}, {"dist", real_json(res.dist)},
                                {"ratio", real_json(ratio)}});
            }
            out_dioph.write("dioph calibrate", {{"instances", instances}, {"seed", dseed}}, rows,
                            {{"worst_ratio", real_json(worst)}, {"suggested_C", real_json(10 * worst)},
                             {"frozen_C", real_json(kIntegralFormConstant)}});
        } else if (sojourn->parsed()) {
            Lattice3 lat = parse_lattice(lattice_s);
            auto f = sojourn_fraction(k_set_predicate(lat, t, s_param, eps), samples, seed);
            out_sojourn.write("sojourn", {{"lattice", lattice_s}, {"t", t}, {"s", s_param}, {"eps", eps},
                                          {"samples", samples}, {"seed", seed}},
                              json::array({{{"fraction", real_json(f.fraction)}, {"lo", real_json(f.lo)},
                                            {"hi", real_json(f.hi)}, {"samples", f.samples}, {"hits", f.hits}}}));
        } else if (equidist->parsed()) {
            QForm q = parse_form(form_s);
            EquidistOptions o;
            o.theta_samples = theta_samples;
            std::vector<Real> grid(ts.begin(), ts.end());
            json rows = json::array();
            for (const auto& row :
                 equidistribution_experiment(w_region(ea, eb), q, grid, [](Real) { return Real(1); }, o))
                rows.push_back({{"t", real_json(row.t)}, {"value", real_json(row.value)}, {"limit", real_json(row.limit)},
                                {"deviation", real_json(row.deviation)}});
            out_equidist.write("equidist", {{"form", form_to_json(q)}, {"a", ea}, {"b", eb}, {"t", ts},
                                            {"samples", theta_samples}},
                               rows);
        } else if (sched->parsed()) {
            auto w = walk_schedule(sB, sdelta, sT, st);
            json rows = json::array();
            for (std::size_t i = 0; i < w.s.size(); ++i) rows.push_back({{"i", i + 1}, {"s", real_json(w.s[i])}});
            check_walk_schedule(w);
            out_sched.write("schedule", {{"B", sB}, {"delta", sdelta}, {"T", sT}, {"t", st}}, rows,
                            {{"k", w.k}, {"tau", real_json(w.tau)}, {"invariants", "ok"}});
        } else if (battery->parsed()) {
            if (dump) {
                std::cout << default_battery_config().dump(2) << '\n';
                return 0;
            }
            nlohmann::json cfg = config_path.empty() ? default_battery_config() : nlohmann::json(read_literal(config_path));
            cfg = resolve_battery_config(cfg);
            for (const auto& kv : sets) {
                auto eq = kv.find('='), dot_pos = kv.find('.');
                if (eq == std::string::npos || dot_pos == std::string::npos || dot_pos > eq)
                    throw DomainError("--set expects experiment.key=value");
                std::string name = kv.substr(0, dot_pos), key = kv.substr(dot_pos + 1, eq - dot_pos - 1);
                nlohmann::json value = nlohmann::json::parse(kv.substr(eq + 1));
                bool found = false;
                for (auto& e : cfg["experiments"])
                    if (e["name"] == name) {
                        if (!e["params"].contains(key)) throw DomainError("unknown parameter " + key);
                        e["params"][key] = value;
                        found = true;
                    }
                if (!found) throw DomainError("no experiment named " + name + " in the config");
            }
            auto summary = run_battery(cfg, [](const CriterionResult& r) {
                std::fprintf(stderr, "[%s] %d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                             r.summary.c_str(), r.seconds);
            });
            json rows = json::array();
            for (const auto& r : summary.results)
                rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}});
            json full = summary.to_json();
            out_battery.write("battery", summary.config, rows, {{"results", full["results"]}, {"all_pass", full["all_pass"]}});
            if (!summary.all_pass()) return kExitBattery;
        }
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPrecondition;
    }
    return 0;
}
