#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cwbnlw/lattice.hpp"

namespace cwbnlw {

using SiteSet = std::unordered_set<LatticeIndex, LatticeIndexHash>;

/// Finitely supported real coefficient map xi -> u^(xi) with the evenness
/// symmetry u^(xi) = u^(-xi). Both members of a pair are stored and kept
/// equal exactly; unlisted sites are exactly zero.
class FourierField {
public:
    using Map = std::unordered_map<LatticeIndex, double, LatticeIndexHash>;

    FourierField() = default;
    explicit FourierField(int dim) : dim_(dim) {}

    int dim() const { return dim_; }

    double at(const LatticeIndex& xi) const {
        auto it = coeffs_.find(xi);
        return it == coeffs_.end() ? 0.0 : it->second;
    }

    /// Assign value at the pair {xi, -xi}; value 0 erases.
    void set_pair(const LatticeIndex& xi, double value);

    /// Accumulate value at the pair {xi, -xi}.
    void add_pair(const LatticeIndex& xi, double value);

    std::size_t size() const { return coeffs_.size(); }
    bool empty() const { return coeffs_.empty(); }
    void clear() {
        coeffs_.clear();
        radius_ = 0;
        radius_dirty_ = false;
    }

    /// Smallest R with supp contained in the l^1 ball of radius R.
    int support_radius() const;

    /// Largest |m_axis| (resp. |n| for axis == dim) over the support.
    int axis_radius(int axis) const;

    const Map& coeffs() const { return coeffs_; }

    /// Canonical representatives of the support, sorted (deterministic order).
    std::vector<LatticeIndex> canonical_sites() const;

    bool symmetry_ok() const;

private:
    int dim_ = 1;
    Map coeffs_;
    mutable int radius_ = 0;
    mutable bool radius_dirty_ = false;
};

struct FieldOptions {
    /// Hard cap on the l^1 support radius of any produced field.
    int support_cap = 1 << 14;
    /// Convolutions switch to the tensor-grid FFT path above this
    /// stored-site count.
    std::size_t fft_threshold = 512;
};

/// ||f||_2 = sqrt(sum |f^(xi)|^2), Parseval norm of the hull function.
double l2_norm(const FourierField& f);

double sup_norm(const FourierField& f);

/// sum_{xi not in exclude} |f^(xi)| e^{|xi|_1^c}, the Gevrey-weighted tail.
/// Requires 0 < c < 1.
double gevrey_weighted_sum(const FourierField& f, double c, const SiteSet& exclude = {});

/// D^alpha: multiply each coefficient at (m, n) by <m>^alpha.
FourierField apply_fractional(const FourierField& f, double alpha);

/// Plain coefficient convolution (f * g)^(xi) = sum f^(eta) g^(xi - eta).
FourierField convolve(const FourierField& f, const FourierField& g,
                      const FieldOptions& opt = {});

/// Cube in physical space, i.e. the triple self-convolution of coefficients.
/// Uses direct convolution for small supports and an alias-free tensor-grid
/// FFT above the threshold; the two paths agree to ~1e-12 and are tested
/// against each other.
FourierField pointwise_cube(const FourierField& f, const FieldOptions& opt = {});

/// Gamma_P: zero out coefficients on S.
FourierField project_P(const FourierField& f, const SiteSet& S);

/// Gamma_Q: keep only coefficients on S.
FourierField project_Q(const FourierField& f, const SiteSet& S);

/// Restriction to the open ball |xi|_1 < N.
FourierField project_ball(const FourierField& f, int N);

/// Gamma_N = ball restriction composed with Gamma_P.
FourierField project_N(const FourierField& f, const SiteSet& S, int N);

}  // namespace cwbnlw
