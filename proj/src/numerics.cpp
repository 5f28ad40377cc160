#include "spechmm/numerics.hpp"

#include "spechmm/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace spechmm::numerics {

void fix_column_signs(Mat& a) {
  for (int j = 0; j < a.cols(); ++j) {
    int idx = 0;
    a.col(j).cwiseAbs().maxCoeff(&idx);
    if (a(idx, j) < 0.0) a.col(j) = -a.col(j);
  }
}

Mat top_k_right_singular(const Mat& a, int k) {
  if (!a.allFinite()) throw DomainError("top_k_right_singular: non-finite input");
  if (k < 1) throw DimensionError("top_k_right_singular: k must be at least 1");
  if (k > std::min(a.rows(), a.cols()))
    throw DimensionError("top_k_right_singular: k exceeds matrix dimension");
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinV);
  if (svd.singularValues()(k - 1) < kRankTol)
    throw RankDeficiencyError("top_k_right_singular: sigma_k below rank threshold");
  Mat v = svd.matrixV().leftCols(k);
  fix_column_signs(v);
  return v;
}

EigenPairs real_eig_distinct(const Mat& c, double separation_tol) {
  if (c.rows() != c.cols()) throw DimensionError("real_eig_distinct: matrix not square");
  if (!c.allFinite()) throw DomainError("real_eig_distinct: non-finite input");
  const int k = static_cast<int>(c.rows());
  if (k == 1) {
    EigenPairs out;
    out.vectors = Mat::Ones(1, 1);
    out.values = Vec::Constant(1, c(0, 0));
    return out;
  }

  Eigen::EigenSolver<Mat> solver(c);
  if (solver.info() != Eigen::Success)
    throw EigenSeparationError("real_eig_distinct: eigensolver failed to converge");

  const auto values = solver.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (int i = 0; i < k; ++i) {
    if (std::abs(values(i).imag()) > separation_tol * scale)
      throw EigenSeparationError("real_eig_distinct: complex eigenvalue encountered");
  }

  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return values(i).real() > values(j).real(); });

  EigenPairs out;
  out.values = Vec(k);
  out.vectors = Mat(k, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = values(order[static_cast<std::size_t>(j)]).real();
    Vec col = solver.eigenvectors().col(order[static_cast<std::size_t>(j)]).real();
    const double norm = col.norm();
    if (norm <= 0.0)
      throw EigenSeparationError("real_eig_distinct: degenerate eigenvector");
    out.vectors.col(j) = col / norm;
  }

  for (int j = 0; j + 1 < k; ++j) {
    if (out.values(j) - out.values(j + 1) <= separation_tol)
      throw EigenSeparationError("real_eig_distinct: eigenvalues not separated");
  }

  // Residual check guards against silently accepting an ill-conditioned basis.
  const double residual = (c * out.vectors - out.vectors * out.values.asDiagonal()).norm();
  if (residual > 1e-8 * std::max(1e-30, c.norm()))
    throw EigenSeparationError("real_eig_distinct: reconstruction residual too large");

  fix_column_signs(out.vectors);
  return out;
}

Vec project_to_simplex(const Vec& v) {
  if (!v.allFinite()) throw DomainError("project_to_simplex: non-finite input");
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  int support = 0;
  for (int j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) {
      theta = candidate;
      support = j + 1;
    }
  }
  (void)support;
  return (v.array() - theta).cwiseMax(0.0);
}

Mat project_row_stochastic(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionError("project_row_stochastic: matrix not square");
  if (!a.allFinite()) throw DomainError("project_row_stochastic: non-finite input");
  Mat out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    out.row(i) = project_to_simplex(a.row(i).transpose()).transpose();
  return out;
}

bool is_primitive(const Mat& q) {
  const int k = static_cast<int>(q.rows());
  using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMat adj = (q.array() > 0.0).matrix();
  BoolMat power = adj;
  for (int step = 1; step <= k * k; ++step) {
    if (power.all()) return true;
    BoolMat next = BoolMat::Constant(k, k, false);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l)
          if (power(i, l) && adj(l, j)) {
            next(i, j) = true;
            break;
          }
    power = next;
  }
  return power.all();
}

ProbVec stationary_of(const Mat& q) {
  if (q.rows() != q.cols()) throw DimensionError("stationary_of: matrix not square");
  if (!q.allFinite()) throw DomainError("stationary_of: non-finite input");
  const int k = static_cast<int>(q.rows());
  if (q.minCoeff() < -1e-12) throw DomainError("stationary_of: negative entry");
  for (int i = 0; i < k; ++i) {
    if (std::abs(q.row(i).sum() - 1.0) > 1e-9)
      throw DomainError("stationary_of: rows do not sum to 1");
  }
  if (!is_primitive(q))
    throw StructureError("stationary_of: chain is reducible or periodic");

  Mat a(k + 1, k);
  a.topRows(k) = Mat::Identity(k, k) - q.transpose();
  a.bottomRows(1) = Mat::Ones(1, k);
  Vec rhs = Vec::Zero(k + 1);
  rhs(k) = 1.0;
  Vec pi = pinv_solve(a, rhs);
  return ProbVec::normalized(pi);
}

Mat haar_orthogonal(int k, std::uint64_t seed) {
  if (k < 1) throw DimensionError("haar_orthogonal: k must be at least 1");
  Rng rng(seed);
  Mat g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(k, k);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Vec pinv_solve(const Mat& a, const Vec& b) {
  if (!a.allFinite() || !b.allFinite()) throw DomainError("pinv_solve: non-finite input");
  if (a.rows() != b.size()) throw DimensionError("pinv_solve: shape mismatch");
  if (a.rows() == a.cols()) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(a.cols() - 1) < kRankTol)
      throw RankDeficiencyError("pinv_solve: singular square system");
    return svd.solve(b);
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(b);
}

double smallest_singular_value(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace spechmm::numerics
