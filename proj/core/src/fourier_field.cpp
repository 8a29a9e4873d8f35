#include "cwbnlw/fourier_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <stdexcept>

#include "cwbnlw/problem.hpp"

namespace cwbnlw {

void FourierField::set_pair(const LatticeIndex& xi, double value) {
    LatticeIndex a = xi.canonical();
    LatticeIndex b = -a;
    if (value == 0.0) {
        coeffs_.erase(a);
        if (!(b == a)) coeffs_.erase(b);
        radius_dirty_ = true;
        return;
    }
    coeffs_[a] = value;
    if (!(b == a)) coeffs_[b] = value;
    if (!radius_dirty_) radius_ = std::max(radius_, a.one_norm());
}

void FourierField::add_pair(const LatticeIndex& xi, double value) {
    if (value == 0.0) return;
    set_pair(xi, at(xi.canonical()) + value);
}

int FourierField::support_radius() const {
    if (radius_dirty_) {
        int r = 0;
        for (const auto& [xi, v] : coeffs_) r = std::max(r, xi.one_norm());
        radius_ = r;
        radius_dirty_ = false;
    }
    return radius_;
}

int FourierField::axis_radius(int axis) const {
    int r = 0;
    for (const auto& [xi, v] : coeffs_) {
        int c = axis < dim_ ? xi.m(axis) : xi.n();
        r = std::max(r, std::abs(c));
    }
    return r;
}

std::vector<LatticeIndex> FourierField::canonical_sites() const {
    std::vector<LatticeIndex> out;
    out.reserve(coeffs_.size() / 2 + 1);
    for (const auto& [xi, v] : coeffs_)
        if (xi.is_canonical()) out.push_back(xi);
    std::sort(out.begin(), out.end());
    return out;
}

bool FourierField::symmetry_ok() const {
    for (const auto& [xi, v] : coeffs_) {
        auto it = coeffs_.find(-xi);
        if (it == coeffs_.end() || it->second != v) return false;
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double l2_norm(const FourierField& f) {
    double s = 0.0;
    for (const auto& xi : f.canonical_sites()) {
        double v = f.at(xi);
        s += (xi.is_zero() ? 1.0 : 2.0) * v * v;
    }
    return std::sqrt(s);
}

double sup_norm(const FourierField& f) {
    double s = 0.0;
    for (const auto& [xi, v] : f.coeffs()) s = std::max(s, std::abs(v));
    return s;
}

double gevrey_weighted_sum(const FourierField& f, double c, const SiteSet& exclude) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("gevrey_weighted_sum: need 0 < c < 1");
    double s = 0.0;
    for (const auto& xi : f.canonical_sites()) {
        double w = std::exp(std::pow(static_cast<double>(xi.one_norm()), c));
        if (!exclude.count(xi)) s += std::abs(f.at(xi)) * w;
        LatticeIndex mxi = -xi;
        if (!(mxi == xi) && !exclude.count(mxi)) s += std::abs(f.at(mxi)) * w;
    }
    return s;
}

FourierField apply_fractional(const FourierField& f, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("apply_fractional: alpha must be >= 0");
    if (alpha == 0.0) return f;
    FourierField g(f.dim());
    for (const auto& xi : f.canonical_sites())
        g.set_pair(xi, f.at(xi) * fractional_symbol(xi, alpha));
    return g;
}

namespace {

// Overwrite each mirror entry with the value at the canonical representative
// so the evenness invariant holds bit for bit.
FourierField collect_symmetric(int dim, const FourierField::Map& raw) {
    FourierField out(dim);
    for (const auto& [xi, v] : raw)
        if (xi.is_canonical() && v != 0.0) out.set_pair(xi, v);
    return out;
}

void check_support_cap(int radius, const FieldOptions& opt, const char* who) {
    if (radius > opt.support_cap)
        throw Error("support_exceeded", std::string(who) + ": output radius " +
                                            std::to_string(radius) + " exceeds cap " +
                                            std::to_string(opt.support_cap));
}

int next_fast_size(int n) {
    for (;; ++n) {
        int r = n;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return n;
    }
}

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

/// Cube through an alias-free tensor grid: per-axis grid size >= 6 r_a + 1
/// so the coefficients of u^3 are exact up to roundoff.
FourierField cube_fft(const FourierField& f) {
    const int d = f.dim();
    const int D = d + 1;
    std::vector<int> g(D);
    std::vector<int> r(D);
    for (int a = 0; a < D; ++a) {
        r[a] = f.axis_radius(a);
        g[a] = next_fast_size(6 * r[a] + 1);
    }
    std::size_t total = 1;
    for (int a = 0; a < D; ++a) total *= static_cast<std::size_t>(g[a]);

    std::vector<std::complex<double>> buf(total, {0.0, 0.0});
    auto flat = [&](const LatticeIndex& xi) {
        std::size_t idx = 0;
        for (int a = 0; a < D; ++a) {
            int v = a < d ? xi.m(a) : xi.n();
            int w = ((v % g[a]) + g[a]) % g[a];
            idx = idx * static_cast<std::size_t>(g[a]) + static_cast<std::size_t>(w);
        }
        return idx;
    };
    for (const auto& [xi, v] : f.coeffs()) buf[flat(xi)] = {v, 0.0};

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        fwd = fftw_plan_dft(D, g.data(), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(D, g.data(), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (auto& z : buf) {
        double u = z.real();
        z = {u * u * u, 0.0};
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    const double scale = 1.0 / static_cast<double>(total);
    double max_abs = 0.0;
    for (const auto& z : buf) max_abs = std::max(max_abs, std::abs(z.real()));
    const double drop = max_abs * 1e-18;

    FourierField out(d);
    const int R = 3 * f.support_radius();
    // Enumerate canonical sites of the output ball and mirror.
    std::vector<int> coord(D, 0);
    std::function<void(int, int)> walk = [&](int axis, int budget) {
        if (axis == D) {
            LatticeIndex xi(std::span<const int>(coord.data(), static_cast<std::size_t>(d)),
                            coord[d]);
            if (!xi.is_canonical()) return;
            double v = buf[flat(xi)].real() * scale;
            if (std::abs(v) > drop) out.set_pair(xi, v);
            return;
        }
        int lim = std::min(budget, 3 * r[axis]);
        for (int v = -lim; v <= lim; ++v) {
            coord[axis] = v;
            walk(axis + 1, budget - std::abs(v));
        }
    };
    walk(0, R);
    return out;
}

}  // namespace

FourierField convolve(const FourierField& f, const FourierField& g, const FieldOptions& opt) {
    if (f.dim() != g.dim()) throw std::invalid_argument("convolve: dimension mismatch");
    check_support_cap(f.support_radius() + g.support_radius(), opt, "convolve");
    FourierField::Map raw;
    raw.reserve(f.size() + g.size());
    for (const auto& [a, va] : f.coeffs())
        for (const auto& [b, vb] : g.coeffs()) raw[a + b] += va * vb;
    return collect_symmetric(f.dim(), raw);
}

FourierField pointwise_cube(const FourierField& f, const FieldOptions& opt) {
    if (f.empty()) return FourierField(f.dim());
    check_support_cap(3 * f.support_radius(), opt, "pointwise_cube");
    if (f.size() <= opt.fft_threshold) {
        FourierField sq = convolve(f, f, opt);
        return convolve(sq, f, opt);
    }
    return cube_fft(f);
}

FourierField project_P(const FourierField& f, const SiteSet& S) {
    FourierField out(f.dim());
    for (const auto& xi : f.canonical_sites())
        if (!S.count(xi) && !S.count(-xi)) out.set_pair(xi, f.at(xi));
    return out;
}

FourierField project_Q(const FourierField& f, const SiteSet& S) {
    FourierField out(f.dim());
    for (const auto& xi : f.canonical_sites())
        if (S.count(xi) || S.count(-xi)) out.set_pair(xi, f.at(xi));
    return out;
}

FourierField project_ball(const FourierField& f, int N) {
    FourierField out(f.dim());
    for (const auto& xi : f.canonical_sites())
        if (xi.one_norm() < N) out.set_pair(xi, f.at(xi));
    return out;
}

FourierField project_N(const FourierField& f, const SiteSet& S, int N) {
    return project_ball(project_P(f, S), N);
}

}  // namespace cwbnlw
