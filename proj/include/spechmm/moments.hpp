#ifndef SPECHMM_MOMENTS_HPP
#define SPECHMM_MOMENTS_HPP

#include "spechmm/types.hpp"

#include <cstdint>
#include <optional>

namespace spechmm {

// Basis moments of one, two and three consecutive observations:
// l(a)    = E[phi_a(Y_1)]
// n(a,b)  = E[phi_a(Y_1) phi_b(Y_2)]
// p(a,c)  = E[phi_a(Y_1) phi_c(Y_3)]
// m3(a,b,c) = E[phi_a(Y_1) phi_b(Y_2) phi_c(Y_3)]
// sample_count is empty for population moments.
struct MomentSet {
  Vec l;
  Mat n;
  Mat p;
  Tensor3 m3;
  std::optional<std::int64_t> sample_count;

  int dim() const { return static_cast<int>(l.size()); }

  void validate() const {
    const int m = dim();
    if (m < 1) throw DimensionError("MomentSet: empty moments");
    if (n.rows() != m || n.cols() != m || p.rows() != m || p.cols() != m || m3.dim() != m)
      throw DimensionError("MomentSet: inconsistent dimensions");
    if (!l.allFinite() || !n.allFinite() || !p.allFinite() || !m3.all_finite())
      throw DomainError("MomentSet: non-finite entries");
  }
};

}  // namespace spechmm

#endif  // SPECHMM_MOMENTS_HPP
