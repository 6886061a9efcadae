#include "opplab/numeric.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace opplab {

namespace {
constexpr Real kBandHuge = 1e30L;
}

namespace {

int roots_into(Real a, Real b, Real c, Real* out) {
    if (a == 0) {
        if (b == 0) return 0;
        out[0] = -c / b;
        return 1;
    }
    Real disc = b * b - 4 * a * c;
    if (disc < 0) return 0;
    Real s = -(b + (b >= 0 ? 1 : -1) * std::sqrt(disc)) / 2;
    if (s == 0) {
        out[0] = 0;
        return 1;
    }
    out[0] = s / a;
    out[1] = c / s;
    if (out[0] > out[1]) std::swap(out[0], out[1]);
    return 2;
}

}  // namespace

int real_roots(Real a, Real b, Real c, Real (&out)[2]) { return roots_into(a, b, c, out); }

std::vector<Real> real_roots(Real a, Real b, Real c) {
    Real r[2];
    int n = roots_into(a, b, c, r);
    return std::vector<Real>(r, r + n);
}

std::vector<std::pair<Real, Real>> quadratic_band(const BandQuadratic& q, Real tau, Real lo, Real hi) {
    std::vector<std::pair<Real, Real>> out;
    quadratic_band(q, tau, lo, hi, out);
    return out;
}

void quadratic_band(const BandQuadratic& q, Real tau, Real lo, Real hi, std::vector<std::pair<Real, Real>>& out) {
    out.clear();
    if (lo > hi) return;
    auto add = [&](Real p, Real r) {
        p = std::max(lo, std::floor(p));
        r = std::min(hi, std::ceil(r));
        if (p <= r) out.emplace_back(p, r);
    };
    auto near_vertex = [&](Real x) { return 2 * std::sqrt((tau + q.error(x)) / std::abs(q.a)); };
    Real bps[10];
    int nb = 0;
    bps[nb++] = lo;
    bps[nb++] = hi;
    const Real shifts[3] = {-tau, 0, tau};
    for (int si = 0; si < 3; ++si) {
        if (tau == 0 && si != 1) continue;
        Real rs[2];
        int nr = roots_into(q.a, q.b, q.c + shifts[si], rs);
        for (int j = 0; j < nr; ++j) {
            Real x = rs[j];
            if (!std::isfinite(x)) continue;
            Real slope = std::abs(2 * q.a * x + q.b), e = q.error(x);
            Real shift_bound = e == 0 ? 0 : slope > 0 ? 4 * e / slope : kBandHuge;
            if (q.a != 0) shift_bound = std::min(shift_bound, near_vertex(x));
            Real pad = 1 + 1e-12L * std::abs(x) + shift_bound;
            add(x - pad, x + pad);
            if (x > lo && x < hi) bps[nb++] = x;
        }
    }
    if (q.a != 0) {
        Real v = -q.b / (2 * q.a);
        if (std::abs(q(v)) < tau + q.error(v)) {
            Real w = 1 + 1e-12L * std::abs(v) + near_vertex(v);
            add(v - w, v + w);
        }
        if (v > lo && v < hi) bps[nb++] = v;
    }
    std::sort(bps, bps + nb);
    for (int i = 0; i + 1 < nb; ++i) {
        Real p = bps[i], r = bps[i + 1];
        Real mid = p + (r - p) / 2;
        if (std::abs(q(mid)) < tau + q.error(mid)) add(p - 1, r + 1);
    }
    for (Real x : {lo, hi})
        if (std::abs(q(x)) < tau + q.error(x)) add(x, x);
    if (out.size() < 2) return;
    std::sort(out.begin(), out.end());
    std::size_t w = 0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].first <= out[w].second + 1)
            out[w].second = std::max(out[w].second, out[i].second);
        else
            out[++w] = out[i];
    }
    out.resize(w + 1);
}

int worker_threads() {
    if (const char* env = std::getenv("OPPLAB_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace opplab
