#include "cwbnlw/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cwbnlw {

ProblemParams ProblemParams::make(int d, std::vector<int> m0, double rho, double alpha,
                                  double eps) {
    if (d < 1 || d > LatticeIndex::kMaxSpatialDim)
        throw std::invalid_argument("ProblemParams: d out of range");
    if (static_cast<int>(m0.size()) != d)
        throw std::invalid_argument("ProblemParams: m0 has wrong dimension");
    if (rho <= 0.0) throw std::invalid_argument("ProblemParams: rho must be positive");
    if (alpha < 0.0) throw std::invalid_argument("ProblemParams: alpha must be >= 0");
    if (eps < 0.0) throw std::invalid_argument("ProblemParams: eps must be >= 0");
    ProblemParams p;
    p.d = d;
    p.m0 = std::move(m0);
    p.rho = rho;
    p.alpha = alpha;
    p.eps = eps;
    if (p.m0_norm2() == 0) throw std::invalid_argument("ProblemParams: m0 must be nonzero");
    p.lambda0 = std::sqrt(static_cast<double>(p.m0_norm2()) + rho);
    return p;
}

ResonantSet resonant_set(const ProblemParams& params) {
    const std::int64_t target = params.m0_norm2();
    if (target <= 0) throw std::invalid_argument("resonant_set: |m0| must be positive");
    const int d = params.d;
    const int lim = static_cast<int>(std::sqrt(static_cast<double>(target))) + 1;

    ResonantSet out;
    std::vector<int> m(d, 0);
    std::function<void(int, std::int64_t)> walk = [&](int axis, std::int64_t rem) {
        if (axis == d) {
            if (rem != 0) return;
            LatticeIndex site(std::span<const int>(m.data(), static_cast<std::size_t>(d)), 1);
            out.splus.push_back(site);
            return;
        }
        for (int v = -lim; v <= lim; ++v) {
            std::int64_t sq = static_cast<std::int64_t>(v) * v;
            if (sq > rem) continue;
            m[axis] = v;
            walk(axis + 1, rem - sq);
        }
        m[axis] = 0;
    };
    walk(0, target);

    std::sort(out.splus.begin(), out.splus.end());
    out.b = static_cast<int>(out.splus.size());
    LatticeIndex m0site = params.m0_site();
    out.m0_pos = -1;
    for (int i = 0; i < out.b; ++i) {
        if (out.splus[i] == m0site)
            out.m0_pos = i;
        else
            out.other_pos.push_back(i);
        out.sites.insert(out.splus[i]);
        out.sites.insert(-out.splus[i]);
    }
    if (out.m0_pos < 0) throw std::logic_error("resonant_set: m0 not found on its own sphere");
    return out;
}

FourierField build_seed_field(const ProblemParams& params, const ResonantSet& S,
                              const Amplitudes& amp) {
    if (amp.pm.size() != S.other_pos.size())
        throw std::invalid_argument("build_seed_field: p_m size mismatch");
    FourierField u0(params.d);
    u0.set_pair(S.splus[S.m0_pos], amp.p0 / 2.0);
    for (std::size_t i = 0; i < amp.pm.size(); ++i)
        u0.set_pair(S.splus[S.other_pos[i]], amp.pm[i] / 2.0);
    return u0;
}

}  // namespace cwbnlw
