#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace cwbnlw {

/// A site xi = (m, n) of the space-time Fourier lattice Z^d x Z.
/// m is the spatial mode vector, n the temporal mode. The spatial
/// dimension d is fixed per problem instance (1 <= d <= kMaxSpatialDim).
class LatticeIndex {
public:
    static constexpr int kMaxSpatialDim = 4;

    LatticeIndex() = default;

    LatticeIndex(std::span<const int> m, int n) : n_(n), dim_(static_cast<int>(m.size())) {
        if (dim_ < 1 || dim_ > kMaxSpatialDim)
            throw std::invalid_argument("LatticeIndex: spatial dimension out of range");
        for (int k = 0; k < dim_; ++k) m_[k] = m[k];
    }

    LatticeIndex(std::initializer_list<int> m, int n)
        : LatticeIndex(std::span<const int>(m.begin(), m.size()), n) {}

    int dim() const { return dim_; }
    int n() const { return n_; }
    int m(int axis) const { return m_[axis]; }
    std::span<const int> m() const { return {m_.data(), static_cast<std::size_t>(dim_)}; }

    /// |xi|_1 = sum_k |m_k| + |n|
    int one_norm() const {
        int s = std::abs(n_);
        for (int k = 0; k < dim_; ++k) s += std::abs(m_[k]);
        return s;
    }

    /// |m|^2 (spatial Euclidean norm squared)
    std::int64_t spatial_norm2() const {
        std::int64_t s = 0;
        for (int k = 0; k < dim_; ++k) s += static_cast<std::int64_t>(m_[k]) * m_[k];
        return s;
    }

    bool is_zero() const {
        if (n_ != 0) return false;
        for (int k = 0; k < dim_; ++k)
            if (m_[k] != 0) return false;
        return true;
    }

    /// True when xi is the chosen representative of the pair {xi, -xi}:
    /// the first nonzero coordinate of (m, n) is positive.
    bool is_canonical() const {
        for (int k = 0; k < dim_; ++k)
            if (m_[k] != 0) return m_[k] > 0;
        return n_ >= 0;
    }

    LatticeIndex canonical() const { return is_canonical() ? *this : -*this; }

    LatticeIndex operator-() const {
        LatticeIndex r = *this;
        for (int k = 0; k < r.dim_; ++k) r.m_[k] = -r.m_[k];
        r.n_ = -r.n_;
        return r;
    }

    LatticeIndex operator+(const LatticeIndex& o) const {
        LatticeIndex r = *this;
        for (int k = 0; k < dim_; ++k) r.m_[k] += o.m_[k];
        r.n_ += o.n_;
        return r;
    }

    LatticeIndex operator-(const LatticeIndex& o) const { return *this + (-o); }

    bool operator==(const LatticeIndex&) const = default;
    auto operator<=>(const LatticeIndex&) const = default;

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(static_cast<std::uint32_t>(dim_));
        for (int k = 0; k < dim_; ++k) mix(static_cast<std::uint32_t>(m_[k]));
        mix(static_cast<std::uint32_t>(n_));
        return static_cast<std::size_t>(h);
    }

    std::string to_string() const;

private:
    std::array<int, kMaxSpatialDim> m_{};
    int n_ = 0;
    int dim_ = 1;
};

inline int one_norm(const LatticeIndex& xi) { return xi.one_norm(); }

/// l^1 distance between two sites of the same dimension.
inline int one_dist(const LatticeIndex& a, const LatticeIndex& b) { return (a - b).one_norm(); }

struct LatticeIndexHash {
    std::size_t operator()(const LatticeIndex& xi) const { return xi.hash(); }
};

/// <m> = sqrt(|m|^2 + 1), the Japanese bracket of the spatial part.
double spatial_bracket(const LatticeIndex& xi);

/// <m>^alpha, the symbol of the fractional derivative D^alpha.
double fractional_symbol(const LatticeIndex& xi, double alpha);

}  // namespace cwbnlw
