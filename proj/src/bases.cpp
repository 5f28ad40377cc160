#include "spechmm/bases.hpp"

#include <cmath>
#include <numbers>

namespace spechmm::bases {

std::string family_name(Family f) {
  return f == Family::kHistogram ? "histogram" : "trigonometric";
}

Family family_from_name(const std::string& name) {
  if (name == "histogram" || name == "hist") return Family::kHistogram;
  if (name == "trigonometric" || name == "trig") return Family::kTrigonometric;
  throw ValidationError("unknown basis family: " + name);
}

void BasisSpec::validate() const {
  if (size < 1) throw DomainError("BasisSpec: size must be at least 1");
  if (family == Family::kTrigonometric && size % 2 == 0)
    throw DomainError("BasisSpec: trigonometric basis requires odd size");
}

BasisSpec histogram(int m) {
  BasisSpec spec{Family::kHistogram, m};
  spec.validate();
  return spec;
}

BasisSpec trigonometric(int m) {
  BasisSpec spec{Family::kTrigonometric, m};
  spec.validate();
  return spec;
}

int histogram_bin(int m, double y) {
  const int bin = static_cast<int>(y * m);
  return bin >= m ? m - 1 : bin;
}

Vec eval_basis(const BasisSpec& spec, double y) {
  spec.validate();
  if (!(y >= 0.0 && y <= 1.0))
    throw DomainError("eval_basis: y outside [0, 1]");
  const int m = spec.size;
  Vec out = Vec::Zero(m);
  if (spec.family == Family::kHistogram) {
    out(histogram_bin(m, y)) = std::sqrt(static_cast<double>(m));
    return out;
  }
  out(0) = 1.0;
  const double sqrt2 = std::numbers::sqrt2;
  for (int k = 1; 2 * k < m + 1; ++k) {
    const double arg = 2.0 * std::numbers::pi * k * y;
    if (2 * k - 1 < m) out(2 * k - 1) = sqrt2 * std::cos(arg);
    if (2 * k < m) out(2 * k) = sqrt2 * std::sin(arg);
  }
  return out;
}

Quadrature Quadrature::gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: node count must be positive");
  Quadrature q;
  q.nodes = Vec(n);
  q.weights = Vec(n);
  // Newton iteration on Legendre polynomials over [-1, 1], then affine map.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.nodes(i) = 0.5 * (1.0 - x);
    q.weights(i) = 0.5 * w;
    q.nodes(n - 1 - i) = 0.5 * (1.0 + x);
    q.weights(n - 1 - i) = 0.5 * w;
  }
  return q;
}

Quadrature Quadrature::composite_gauss_legendre(int cells, int nodes_per_cell) {
  if (cells < 1) throw DomainError("composite_gauss_legendre: cell count must be positive");
  const Quadrature base = gauss_legendre(nodes_per_cell);
  Quadrature q;
  q.nodes = Vec(cells * nodes_per_cell);
  q.weights = Vec(cells * nodes_per_cell);
  const double h = 1.0 / cells;
  for (int c = 0; c < cells; ++c) {
    for (int i = 0; i < nodes_per_cell; ++i) {
      q.nodes(c * nodes_per_cell + i) = (c + base.nodes(i)) * h;
      q.weights(c * nodes_per_cell + i) = base.weights(i) * h;
    }
  }
  return q;
}

Quadrature Quadrature::for_projection(const BasisSpec& spec, int target_nodes) {
  spec.validate();
  if (spec.family == Family::kHistogram) {
    const int per_cell = std::max(8, (target_nodes + spec.size - 1) / spec.size);
    return composite_gauss_legendre(spec.size, per_cell);
  }
  return gauss_legendre(target_nodes);
}

CoeffVec project_density(const std::function<double(double)>& f, const BasisSpec& spec,
                         const Quadrature& quad) {
  spec.validate();
  Vec coeffs = Vec::Zero(spec.size);
  for (int i = 0; i < quad.size(); ++i) {
    const double fi = f(quad.nodes(i));
    coeffs += (quad.weights(i) * fi) * eval_basis(spec, quad.nodes(i));
  }
  return CoeffVec{spec, coeffs};
}

double reconstruct(const CoeffVec& c, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("reconstruct: y outside [0, 1]");
  if (c.coefficients.size() != c.basis.size)
    throw DimensionError("reconstruct: coefficient count does not match basis size");
  if (c.basis.family == Family::kHistogram) {
    const int m = c.basis.size;
    return c.coefficients(histogram_bin(m, y)) * std::sqrt(static_cast<double>(m));
  }
  return c.coefficients.dot(eval_basis(c.basis, y));
}

Eta3 eta3(const BasisSpec& spec) {
  spec.validate();
  if (spec.size == 1) return Eta3{0.0, false};  // single constant function
  const double value = std::numbers::sqrt2 * std::pow(static_cast<double>(spec.size), 1.5);
  return Eta3{value, spec.family == Family::kTrigonometric};
}

}  // namespace spechmm::bases
