#include "opplab/quadrature.hpp"

#include "opplab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

namespace opplab {

namespace {

// Kronrod 15-point nodes on [-1, 1] (non-negative half) with Kronrod and embedded Gauss 7 weights.
constexpr Real kXgk[8] = {
    0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
    0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
    0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
    0.207784955007898467600689403773245L, 0.000000000000000000000000000000000L};
constexpr Real kWgk[8] = {
    0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
    0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
    0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
    0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
constexpr Real kWg[4] = {0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
                         0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};

struct Leaf {
    Real a, b, value, error;
};

struct ByError {
    bool operator()(const Leaf& x, const Leaf& y) const { return x.error < y.error; }
};

class Engine {
public:
    Engine(const Integrand& f, Real span) : f_(f), span_(span) {}

    Leaf rule(Real a, Real b) {
        const Real c = a + (b - a) / 2, h = (b - a) / 2;
        Real fc = eval(c, h);
        Real k = fc * kWgk[7], g = fc * kWg[3];
        for (int j = 0; j < 7; ++j) {
            Real x = h * kXgk[j];
            Real f1 = eval(c - x, h), f2 = eval(c + x, h);
            k += kWgk[j] * (f1 + f2);
            if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
        }
        k *= h;
        g *= h;
        Real err = std::abs(k - g);
        // floor at a few ulps of the leaf's own magnitude
        err = std::max(err, 64 * std::numeric_limits<Real>::epsilon() * std::abs(k));
        return {a, b, k, err};
    }

    long long nodes() const { return nodes_; }
    bool infinite() const { return infinite_; }

private:
    Real eval(Real x, Real h) {
        ++nodes_;
        Real v = f_(x);
        if (std::isfinite(v)) return v;
        if (std::isnan(v)) throw DomainError("integrand returned NaN");
        // +inf at a node: probe a neighbourhood to tell an isolated pole from an infinite plateau
        Real d = std::max(h * 1e-3L, span_ * 1e-12L);
        int inf_count = 0;
        Real best = 0;
        for (Real s : {-1.0L, -0.5L, 0.5L, 1.0L}) {
            ++nodes_;
            Real p = f_(x + s * d);
            if (std::isinf(p))
                ++inf_count;
            else
                best = std::max(best, p);
        }
        if (inf_count == 4) {
            infinite_ = true;
            return 0;
        }
        return best;
    }

    const Integrand& f_;
    Real span_;
    long long nodes_ = 0;
    bool infinite_ = false;
};

Real total(const std::vector<Leaf>& leaves, Real Leaf::* field) {
    NeumaierSum s;
    for (const auto& l : leaves) s.add(l.*field);
    return s.value();
}

}  // namespace

QuadratureResult orbit_integral(const Integrand& f, Real a, Real b, const std::vector<Real>& singularities,
                                Real tol, const QuadratureOptions& opt) {
    if (!(a < b)) throw DomainError("integration interval must satisfy a < b");
    if (!(tol > 0) && !(opt.rel_tol > 0)) throw DomainError("tolerance must be positive");
    QuadratureResult res;
    std::vector<Real> cuts{a, b};
    for (int i = 1; i < opt.initial_panels; ++i) cuts.push_back(a + (b - a) * i / opt.initial_panels);
    for (Real s : singularities)
        if (s > a && s < b) {
            cuts.push_back(s);
            res.singularity_nodes.push_back(s);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::sort(res.singularity_nodes.begin(), res.singularity_nodes.end());
    res.singularity_nodes.erase(std::unique(res.singularity_nodes.begin(), res.singularity_nodes.end()),
                                res.singularity_nodes.end());

    Engine eng(f, b - a);
    std::priority_queue<Leaf, std::vector<Leaf>, ByError> queue;
    std::vector<Leaf> done;  // leaves that cannot be split further
    Real val = 0, err = 0;
    auto recompute = [&] {
        std::vector<Leaf> all = done;
        auto copy = queue;
        while (!copy.empty()) {
            all.push_back(copy.top());
            copy.pop();
        }
        std::sort(all.begin(), all.end(), [](const Leaf& x, const Leaf& y) { return x.a < y.a; });
        return all;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Leaf l = eng.rule(cuts[i], cuts[i + 1]);
        val += l.value;
        err += l.error;
        queue.push(l);
    }
    auto target = [&](Real v) { return std::max(tol, opt.rel_tol * std::abs(v)); };
    long long since_resum = 0;
    while (!queue.empty() && !eng.infinite()) {
        if (err <= target(val)) {
            // running sums drift; confirm with a compensated resum before stopping
            auto all = recompute();
            val = total(all, &Leaf::value);
            err = total(all, &Leaf::error);
            if (err <= target(val)) break;
        }
        if (eng.nodes() > opt.max_nodes) {
            auto all = recompute();
            res.value = total(all, &Leaf::value);
            res.error_bound = total(all, &Leaf::error);
            res.node_count = eng.nodes();
            throw QuadratureError("quadrature node budget exhausted", res);
        }
        Leaf l = queue.top();
        queue.pop();
        Real mid = l.a + (l.b - l.a) / 2;
        if (!(mid > l.a && mid < l.b)) {
            done.push_back(l);
            continue;
        }
        Leaf left = eng.rule(l.a, mid), right = eng.rule(mid, l.b);
        val += left.value + right.value - l.value;
        err += left.error + right.error - l.error;
        queue.push(left);
        queue.push(right);
        if (++since_resum == 4096) {
            since_resum = 0;
            auto all = recompute();
            val = total(all, &Leaf::value);
            err = total(all, &Leaf::error);
        }
    }
    if (eng.infinite()) {
        res.value = kInf;
        res.error_bound = 0;
        res.infinite = true;
        res.node_count = eng.nodes();
        return res;
    }
    auto all = recompute();
    res.value = total(all, &Leaf::value);
    res.error_bound = total(all, &Leaf::error);
    if (opt.certify) {
        NeumaierSum doubled;
        for (const auto& l : all) {
            Real mid = l.a + (l.b - l.a) / 2;
            if (mid > l.a && mid < l.b) {
                doubled.add(eng.rule(l.a, mid).value);
                doubled.add(eng.rule(mid, l.b).value);
            } else {
                doubled.add(l.value);
            }
        }
        if (eng.infinite()) {
            res.value = kInf;
            res.error_bound = 0;
            res.infinite = true;
        } else {
            res.error_bound = std::max(res.error_bound, std::abs(doubled.value() - res.value));
        }
    }
    res.node_count = eng.nodes();
    return res;
}

MonteCarloResult monte_carlo_integral(const Integrand& f, Real a, Real b, long long samples, std::uint64_t seed) {
    if (!(a < b)) throw DomainError("integration interval must satisfy a < b");
    if (samples < 2) throw DomainError("need at least two samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    NeumaierSum s, s2;
    for (long long i = 0; i < samples; ++i) {
        Real v = f(a + (b - a) * static_cast<Real>(u(rng)));
        s.add(v);
        s2.add(v * v);
    }
    Real n = static_cast<Real>(samples);
    Real mean = s.value() / n;
    Real var = std::max<Real>(0, (s2.value() / n - mean * mean) * n / (n - 1));
    MonteCarloResult r;
    r.samples = samples;
    r.value = (b - a) * mean;
    r.std_error = (b - a) * std::sqrt(var / n);
    return r;
}

}  // namespace opplab
