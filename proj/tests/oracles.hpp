// Test-only oracles, deliberately independent of the implementation paths
// they check: plain triple-loop convolutions, full-ball enumerations and a
// dense Newton solve of the complete truncated system.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "cwbnlw/fourier_field.hpp"
#include "cwbnlw/problem.hpp"

namespace cwbnlw::testing {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Random symmetric field supported in the l^1 ball of the given radius.
inline FourierField random_field(int d, int radius, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    FourierField f(d);
    std::vector<int> m(d, 0);
    std::function<void(int, int)> walk = [&](int axis, int budget) {
        if (axis == d) {
            for (int n = -budget; n <= budget; ++n) {
                LatticeIndex xi(std::span<const int>(m.data(), static_cast<std::size_t>(d)), n);
                if (!xi.is_canonical()) continue;
                if (uniform01(rng) < 0.5) continue;  // sparse support
                f.set_pair(xi, scale * (2.0 * uniform01(rng) - 1.0));
            }
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            m[axis] = v;
            walk(axis + 1, budget - std::abs(v));
        }
        m[axis] = 0;
    };
    walk(0, radius);
    return f;
}

/// Plain map-accumulation convolution, no symmetrization tricks.
inline std::map<LatticeIndex, double> plain_convolve(const std::map<LatticeIndex, double>& a,
                                                     const std::map<LatticeIndex, double>& b) {
    std::map<LatticeIndex, double> out;
    for (const auto& [xa, va] : a)
        for (const auto& [xb, vb] : b) out[xa + xb] += va * vb;
    return out;
}

inline std::map<LatticeIndex, double> as_map(const FourierField& f) {
    std::map<LatticeIndex, double> out;
    for (const auto& [xi, v] : f.coeffs()) out[xi] = v;
    return out;
}

/// Literal triple loop for (u^3)^.
inline std::map<LatticeIndex, double> plain_cube(const FourierField& f) {
    auto m = as_map(f);
    std::map<LatticeIndex, double> out;
    for (const auto& [x1, v1] : m)
        for (const auto& [x2, v2] : m)
            for (const auto& [x3, v3] : m) out[x1 + x2 + x3] += v1 * v2 * v3;
    return out;
}

/// Full-ball double loop for the singular set (independent of the annulus
/// enumeration in separation_analysis).
inline std::vector<LatticeIndex> singular_sites_bruteforce(double lambda, int N, double B, int d) {
    std::vector<LatticeIndex> out;
    std::vector<int> m(d, 0);
    std::function<void(int, int)> walk = [&](int axis, int budget) {
        if (axis == d) {
            for (int n = -budget; n <= budget; ++n) {
                double val = -static_cast<double>(n) * n * lambda * lambda;
                for (int k = 0; k < d; ++k) val += static_cast<double>(m[k]) * m[k];
                if (std::abs(val) < B)
                    out.emplace_back(std::span<const int>(m.data(), static_cast<std::size_t>(d)),
                                     n);
            }
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            m[axis] = v;
            walk(axis + 1, budget - std::abs(v));
        }
        m[axis] = 0;
    };
    walk(0, N);
    std::sort(out.begin(), out.end());
    return out;
}

/// Dense Newton on the complete truncated system: unknowns are the pair
/// coefficients of every canonical site in the ball |xi|_1 < N except
/// (m0, 1) (pinned at p0/2) plus the frequency lambda; equations are the
/// full lattice equation at every canonical site. Uses its own convolution.
struct FullSystemSolution {
    bool converged = false;
    double lambda = 0.0;
    std::map<LatticeIndex, double> coeffs;  // canonical representatives
    double residual_sup = 0.0;
    int iterations = 0;
};

inline FullSystemSolution dense_full_system_newton(const ProblemParams& params,
                                                   const ResonantSet& S, double p0, int N,
                                                   int max_iter = 40, double tol = 1e-13) {
    std::vector<LatticeIndex> canon;
    {
        std::vector<int> m(params.d, 0);
        std::function<void(int, int)> walk = [&](int axis, int budget) {
            if (axis == params.d) {
                for (int n = -budget; n <= budget; ++n) {
                    LatticeIndex xi(std::span<const int>(m.data(),
                                                         static_cast<std::size_t>(params.d)),
                                    n);
                    if (xi.is_canonical()) canon.push_back(xi);
                }
                return;
            }
            for (int v = -budget; v <= budget; ++v) {
                m[axis] = v;
                walk(axis + 1, budget - std::abs(v));
            }
            m[axis] = 0;
        };
        walk(0, N - 1);
        std::sort(canon.begin(), canon.end());
    }
    const LatticeIndex pinned = S.splus[S.m0_pos];
    std::vector<LatticeIndex> unknowns;
    for (const auto& xi : canon)
        if (!(xi == pinned)) unknowns.push_back(xi);
    const int nu = static_cast<int>(unknowns.size());
    const int ne = static_cast<int>(canon.size());  // nu coefficient eqs + lambda eq

    std::map<LatticeIndex, double> u;
    u[pinned] = p0 / 2.0;
    double lambda = params.lambda0;

    auto full_field = [&] {
        std::map<LatticeIndex, double> full;
        for (const auto& [xi, v] : u) {
            full[xi] = v;
            full[-xi] = v;
        }
        return full;
    };

    const double e2 = params.eps * params.eps;
    FullSystemSolution out;
    for (int it = 0; it < max_iter; ++it) {
        auto full = full_field();
        auto sq = plain_convolve(full, full);
        auto cube = plain_convolve(sq, full);

        Eigen::VectorXd F(ne);
        double sup = 0.0;
        for (int r = 0; r < ne; ++r) {
            const LatticeIndex& xi = canon[r];
            auto itc = cube.find(xi);
            double cc = itc == cube.end() ? 0.0 : itc->second;
            double ui = u.count(xi) ? u[xi] : 0.0;
            F(r) = params.linear_symbol(xi, lambda) * ui +
                   e2 * fractional_symbol(xi, params.alpha) * cc;
            sup = std::max(sup, std::abs(F(r)));
        }
        out.residual_sup = sup;
        out.iterations = it;
        if (sup < tol) {
            out.converged = true;
            break;
        }

        Eigen::MatrixXd J(ne, nu + 1);
        for (int r = 0; r < ne; ++r) {
            const LatticeIndex& xi = canon[r];
            double sym = fractional_symbol(xi, params.alpha);
            for (int cidx = 0; cidx < nu; ++cidx) {
                const LatticeIndex& eta = unknowns[cidx];
                double dcube;
                auto term = [&](const LatticeIndex& z) {
                    auto itq = sq.find(z);
                    return itq == sq.end() ? 0.0 : itq->second;
                };
                if (eta == -eta)
                    dcube = 3.0 * term(xi - eta);
                else
                    dcube = 3.0 * (term(xi - eta) + term(xi + eta));
                double lin = (xi == eta || xi == -eta) ? params.linear_symbol(xi, lambda) : 0.0;
                J(r, cidx) = lin + e2 * sym * dcube;
            }
            double ui = u.count(xi) ? u.at(xi) : 0.0;
            J(r, nu) = -2.0 * static_cast<double>(xi.n()) * xi.n() * lambda * ui;
        }
        Eigen::VectorXd delta = J.partialPivLu().solve(-F);
        for (int cidx = 0; cidx < nu; ++cidx) {
            double nv = (u.count(unknowns[cidx]) ? u[unknowns[cidx]] : 0.0) + delta(cidx);
            if (nv == 0.0)
                u.erase(unknowns[cidx]);
            else
                u[unknowns[cidx]] = nv;
        }
        lambda += delta(nu);
    }
    out.lambda = lambda;
    out.coeffs = u;
    return out;
}

}  // namespace cwbnlw::testing
