#ifndef SPECHMM_BASES_HPP
#define SPECHMM_BASES_HPP

#include "spechmm/types.hpp"

#include <functional>
#include <string>

namespace spechmm::bases {

enum class Family { kHistogram, kTrigonometric };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// An orthonormal projection basis of size M on [0, 1].
struct BasisSpec {
  Family family = Family::kHistogram;
  int size = 1;  // M

  void validate() const;
};

BasisSpec histogram(int m);
BasisSpec trigonometric(int m);

// (phi_1(y), ..., phi_M(y)). Histogram: phi_m = sqrt(M) on the m-th bin,
// with y = 1 assigned to the last bin. Trigonometric: 1, sqrt(2) cos(2 pi k y),
// sqrt(2) sin(2 pi k y). Throws DomainError outside [0, 1].
Vec eval_basis(const BasisSpec& spec, double y);

// Bin index of y for an M-bin histogram (last bin closed).
int histogram_bin(int m, double y);

// Quadrature rule on [0, 1] with positive weights.
struct Quadrature {
  Vec nodes;
  Vec weights;

  static Quadrature gauss_legendre(int n);
  // cells equal subintervals, each carrying a scaled Gauss-Legendre rule.
  static Quadrature composite_gauss_legendre(int cells, int nodes_per_cell);
  // Rule adequate for inner products against the basis: bin-aligned composite
  // for histograms (the indicators are discontinuous at bin edges), plain
  // Gauss-Legendre for the trigonometric family.
  static Quadrature for_projection(const BasisSpec& spec, int target_nodes = 2048);

  int size() const { return static_cast<int>(nodes.size()); }

  double integrate(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) acc += weights(i) * f(nodes(i));
    return acc;
  }
};

// Coefficients of a function in a basis.
struct CoeffVec {
  BasisSpec basis;
  Vec coefficients;

  double l2_norm() const { return coefficients.norm(); }
};

// Coefficient m approximates <f, phi_m> under the quadrature rule.
CoeffVec project_density(const std::function<double(double)>& f, const BasisSpec& spec,
                         const Quadrature& quad);

// sum_m c_m phi_m(y); may be negative for projection estimates.
double reconstruct(const CoeffVec& c, double y);

struct Eta3 {
  double value = 0.0;
  bool is_upper_bound = false;
};

// Triple-product oscillation functional controlling the moment-estimator
// concentration. Exact sqrt(2) M^{3/2} for histograms (M >= 2); the same
// expression is returned as an upper bound for the trigonometric family.
Eta3 eta3(const BasisSpec& spec);

}  // namespace spechmm::bases

#endif  // SPECHMM_BASES_HPP
