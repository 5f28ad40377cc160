#ifndef SPECHMM_TYPES_HPP
#define SPECHMM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spechmm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Error taxonomy. The CLI maps validation-type failures to exit code 2 and
// numerical/estimation failures to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

// Reducible or periodic transition structure.
struct StructureError : Error {
  using Error::Error;
};

struct RankDeficiencyError : Error {
  using Error::Error;
};

struct EigenSeparationError : Error {
  using Error::Error;
};

// Theta redraws exhausted without a valid diagonalization.
struct DiagonalizationError : Error {
  using Error::Error;
};

struct EstimationError : Error {
  explicit EstimationError(const std::string& msg, double cond = 0.0)
      : Error(msg), condition_number(cond) {}
  double condition_number;
};

struct CapabilityError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

inline bool all_finite(const Mat& a) { return a.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

// Probability vector: nonnegative weights summing to 1 within 1e-12.
class ProbVec {
 public:
  ProbVec() = default;

  explicit ProbVec(Vec weights) : w_(std::move(weights)) {
    if (w_.size() == 0) throw DimensionError("ProbVec: empty weight vector");
    if (!w_.allFinite()) throw DomainError("ProbVec: non-finite weight");
    if (w_.minCoeff() < 0.0)
      throw DomainError("ProbVec: negative weight " + std::to_string(w_.minCoeff()));
    if (std::abs(w_.sum() - 1.0) > 1e-12)
      throw DomainError("ProbVec: weights sum to " + std::to_string(w_.sum()));
  }

  // Clamps tiny negative entries at 0 and rescales to unit sum.
  static ProbVec normalized(Vec weights) {
    if (weights.size() == 0) throw DimensionError("ProbVec: empty weight vector");
    if (!weights.allFinite()) throw DomainError("ProbVec: non-finite weight");
    Vec w = weights.cwiseMax(0.0);
    const double s = w.sum();
    if (s <= 0.0) throw DomainError("ProbVec: weights sum to zero");
    ProbVec p;
    p.w_ = w / s;
    return p;
  }

  int dim() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }
  const Vec& vec() const { return w_; }

 private:
  Vec w_;
};

// Order-3 tensor with all three dimensions equal, stored as the M slices
// T(., b, .) so the middle-index slices used downstream come out as matrices.
class Tensor3 {
 public:
  Tensor3() : m_(0) {}

  explicit Tensor3(int m) : m_(m) {
    if (m < 1) throw DimensionError("Tensor3: dimension must be positive");
    slices_.assign(static_cast<std::size_t>(m), Mat::Zero(m, m));
  }

  int dim() const { return m_; }

  double operator()(int a, int b, int c) const { return slices_[static_cast<std::size_t>(b)](a, c); }
  double& operator()(int a, int b, int c) { return slices_[static_cast<std::size_t>(b)](a, c); }

  const Mat& slice(int b) const { return slices_[static_cast<std::size_t>(b)]; }
  Mat& slice(int b) { return slices_[static_cast<std::size_t>(b)]; }

  bool all_finite() const {
    for (const Mat& s : slices_)
      if (!s.allFinite()) return false;
    return true;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const Mat& s : slices_) acc += s.squaredNorm();
    return std::sqrt(acc);
  }

  double frobenius_distance(const Tensor3& other) const {
    if (other.m_ != m_) throw DimensionError("Tensor3: dimension mismatch");
    double acc = 0.0;
    for (int b = 0; b < m_; ++b) acc += (slices_[b] - other.slices_[b]).squaredNorm();
    return std::sqrt(acc);
  }

 private:
  int m_;
  std::vector<Mat> slices_;
};

}  // namespace spechmm

#endif  // SPECHMM_TYPES_HPP
