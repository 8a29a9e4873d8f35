#include "cwbnlw/lattice.hpp"

#include <cmath>
#include <sstream>

namespace cwbnlw {

std::string LatticeIndex::to_string() const {
    std::ostringstream os;
    os << "(";
    for (int k = 0; k < dim_; ++k) os << m_[k] << ",";
    os << n_ << ")";
    return os.str();
}

double spatial_bracket(const LatticeIndex& xi) {
    return std::sqrt(static_cast<double>(xi.spatial_norm2()) + 1.0);
}

double fractional_symbol(const LatticeIndex& xi, double alpha) {
    if (alpha == 0.0) return 1.0;
    return std::pow(spatial_bracket(xi), alpha);
}

}  // namespace cwbnlw
