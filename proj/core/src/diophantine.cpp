#include "cwbnlw/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace cwbnlw {

void GdcSpec::validate() const {
    if (b_tilde < 1) throw std::invalid_argument("GdcSpec: b_tilde >= 1");
    if (degree < 1) throw std::invalid_argument("GdcSpec: degree >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("GdcSpec: gamma > 0");
    if (tau < 0.0) throw std::invalid_argument("GdcSpec: tau >= 0");
}

RhoWitness check_rho_condition(double rho, double gamma, std::int64_t n_max, int d) {
    if (n_max < 1) throw std::invalid_argument("check_rho_condition: n_max >= 1");
    RhoWitness w;
    w.scaled = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= n_max; ++n) {
        double nr = static_cast<double>(n) * rho;
        std::int64_t k = static_cast<std::int64_t>(std::llround(nr));
        double val = std::abs(nr - static_cast<double>(k));
        double scaled = val * std::pow(static_cast<double>(n), 2.0 * d);
        if (scaled < w.scaled) {
            w.n = n;
            w.k = k;
            w.value = val;
            w.scaled = scaled;
        }
    }
    w.pass = w.scaled > gamma;
    return w;
}

namespace {

/// Exponent tuples of total degree <= degree in b variables, lexicographic.
std::vector<std::vector<int>> monomial_exponents(int b, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> e(b, 0);
    std::function<void(int, int)> walk = [&](int axis, int rem) {
        if (axis == b) {
            out.push_back(e);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            e[axis] = v;
            walk(axis + 1, rem - v);
        }
        e[axis] = 0;
    };
    walk(0, degree);
    return out;
}

struct GdcScan {
    const std::vector<double>* mono_values = nullptr;
    double tau = 0.0;
    std::int64_t coeff_bound = 0;
    std::int64_t budget = 0;
    std::int64_t visited = 0;
    bool exhausted = false;

    double best_quality = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> best_coeffs;
    std::vector<std::int64_t> coeffs;

    void leaf(double value, std::int64_t a_sum) {
        double q = std::abs(value) * std::pow(static_cast<double>(a_sum), tau);
        if (q < best_quality) {
            best_quality = q;
            best_coeffs = coeffs;
        }
    }

    // Enumerates coefficient vectors with |a|_1 <= coeff_bound whose first
    // nonzero entry is positive (the sign mirror has the same |P|).
    void walk(std::size_t idx, std::int64_t rem, double value, std::int64_t a_sum,
              bool lead_found) {
        if (exhausted) return;
        if (idx == mono_values->size()) {
            if (a_sum > 0) {
                ++visited;
                if (visited > budget) {
                    exhausted = true;
                    return;
                }
                leaf(value, a_sum);
            }
            return;
        }
        std::int64_t lo = lead_found ? -rem : 0;
        for (std::int64_t a = lo; a <= rem; ++a) {
            coeffs[idx] = a;
            walk(idx + 1, rem - std::llabs(a), value + static_cast<double>(a) * (*mono_values)[idx],
                 a_sum + std::llabs(a), lead_found || a != 0);
            if (exhausted) return;
        }
        coeffs[idx] = 0;
    }
};

GdcScan run_scan(const std::vector<double>& x, const GdcSpec& spec, std::int64_t budget) {
    spec.validate();
    if (static_cast<int>(x.size()) != spec.b_tilde)
        throw std::invalid_argument("check_gdc_poly: point dimension mismatch");
    if (spec.coeff_bound <= 0)
        throw std::invalid_argument("check_gdc_poly: finite coeff_bound required");

    auto exps = monomial_exponents(spec.b_tilde, spec.degree);
    std::vector<double> mv(exps.size());
    for (std::size_t i = 0; i < exps.size(); ++i) {
        double v = 1.0;
        for (int j = 0; j < spec.b_tilde; ++j)
            for (int k = 0; k < exps[i][j]; ++k) v *= x[j];
        mv[i] = v;
    }
    GdcScan scan;
    scan.mono_values = &mv;
    scan.tau = spec.tau;
    scan.coeff_bound = spec.coeff_bound;
    scan.budget = budget;
    scan.coeffs.assign(mv.size(), 0);
    scan.walk(0, spec.coeff_bound, 0.0, 0, false);
    return scan;
}

}  // namespace

GdcWitness check_gdc_poly(const std::vector<double>& x, const GdcSpec& spec, std::int64_t budget) {
    GdcScan scan = run_scan(x, spec, budget);
    GdcWitness w;
    w.exhaustive = !scan.exhausted;
    w.coeffs = scan.best_coeffs;
    std::int64_t a_sum = 0;
    for (auto a : w.coeffs) a_sum += std::llabs(a);
    w.threshold = spec.gamma * std::pow(static_cast<double>(a_sum), -spec.tau);
    w.value = scan.best_quality * std::pow(static_cast<double>(a_sum), -spec.tau);
    w.ratio = w.value / w.threshold;
    w.pass = scan.best_quality > spec.gamma;
    return w;
}

double gdc_quality(const std::vector<double>& x, const GdcSpec& spec, std::int64_t budget) {
    return run_scan(x, spec, budget).best_quality;
}

std::vector<MeasureEstimate> excluded_measure_estimate(const GdcSpec& spec,
                                                       const std::vector<double>& gammas,
                                                       double lo, double hi, std::int64_t samples,
                                                       std::uint64_t seed) {
    if (samples < 1000)
        throw std::invalid_argument("excluded_measure_estimate: need >= 1000 samples");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double a, double b) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return a + (b - a) * u;
    };
    std::vector<std::int64_t> excluded(gammas.size(), 0);
    std::vector<double> x(spec.b_tilde);
    for (std::int64_t s = 0; s < samples; ++s) {
        for (int j = 0; j < spec.b_tilde; ++j) x[j] = uniform(lo, hi);
        double q = gdc_quality(x, spec);
        for (std::size_t gi = 0; gi < gammas.size(); ++gi)
            if (q <= gammas[gi]) ++excluded[gi];
    }
    std::vector<MeasureEstimate> out(gammas.size());
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        out[gi].gamma = gammas[gi];
        out[gi].samples = samples;
        out[gi].fraction = static_cast<double>(excluded[gi]) / static_cast<double>(samples);
        out[gi].envelope =
            std::pow(gammas[gi], 1.0 / (static_cast<double>(spec.b_tilde) * spec.degree));
        out[gi].implied_C = out[gi].envelope > 0.0 ? out[gi].fraction / out[gi].envelope : 0.0;
    }
    return out;
}

namespace {

struct Interval {
    double lo, hi;
    Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
    Interval operator*(const Interval& o) const {
        double a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
        return {std::min(std::min(a, b), std::min(c, d)),
                std::max(std::max(a, b), std::max(c, d))};
    }
    double abs_lo() const { return (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi)); }
    double abs_hi() const { return std::max(std::abs(lo), std::abs(hi)); }
};

Interval horner(const std::vector<std::int64_t>& poly, Interval t) {
    Interval acc{0.0, 0.0};
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
        double a = static_cast<double>(*it);
        acc = acc * t + Interval{a, a};
    }
    return acc;
}

}  // namespace

double sublevel_measure_bruteforce(const std::vector<std::int64_t>& poly, double eps, double lo,
                                   double hi, double tol) {
    bool nonzero = false;
    for (auto a : poly) nonzero |= (a != 0);
    if (!nonzero) throw std::invalid_argument("sublevel_measure_bruteforce: zero polynomial");
    const double min_width = tol * 0.01;

    std::function<double(double, double)> recurse = [&](double a, double b) -> double {
        Interval val = horner(poly, Interval{a, b});
        if (val.abs_lo() >= eps) return 0.0;
        if (val.abs_hi() < eps) return b - a;
        if (b - a < min_width) return 0.5 * (b - a);
        double mid = 0.5 * (a + b);
        return recurse(a, mid) + recurse(mid, b);
    };
    return recurse(lo, hi);
}

}  // namespace cwbnlw
