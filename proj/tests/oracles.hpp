// Test-only reference implementations, kept independent of the library code
// paths they check.
#ifndef SPECHMM_TESTS_ORACLES_HPP
#define SPECHMM_TESTS_ORACLES_HPP

#include "spechmm/model.hpp"
#include "spechmm/types.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

using spechmm::Mat;
using spechmm::Vec;

// Exhaustive search over a regular grid of the simplex (K = 2 or 3).
inline Vec grid_simplex_projection(const Vec& v, double step = 1e-3) {
  const int k = static_cast<int>(v.size());
  Vec best = Vec::Zero(k);
  double best_dist = std::numeric_limits<double>::infinity();
  const int cells = static_cast<int>(std::round(1.0 / step));
  if (k == 2) {
    for (int i = 0; i <= cells; ++i) {
      Vec w(2);
      w << i * step, 1.0 - i * step;
      const double d = (w - v).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = w;
      }
    }
    return best;
  }
  if (k == 3) {
    for (int i = 0; i <= cells; ++i) {
      for (int j = 0; j + i <= cells; ++j) {
        Vec w(3);
        w << i * step, j * step, 1.0 - (i + j) * step;
        const double d = (w - v).squaredNorm();
        if (d < best_dist) {
          best_dist = d;
          best = w;
        }
      }
    }
    return best;
  }
  throw std::runtime_error("grid oracle supports K in {2, 3}");
}

// Posterior of X_k by brute-force summation over all K^n hidden paths.
struct PathPosteriors {
  Mat filter;  // n x K: P(X_k = x | Y_{1:k})
  Mat smooth;  // n x K: P(X_k = x | Y_{1:n})
};

inline PathPosteriors enumerate_paths(const spechmm::model::HmmSpec& hmm,
                                      std::span<const double> obs) {
  const int k = hmm.num_states;
  const int n = static_cast<int>(obs.size());
  PathPosteriors out;
  out.filter = Mat::Zero(n, k);
  out.smooth = Mat::Zero(n, k);

  std::vector<int> path(static_cast<std::size_t>(n), 0);
  // Full-record smoothing weights.
  {
    std::vector<double> mass(static_cast<std::size_t>(n) * k, 0.0);
    double total = 0.0;
    const std::int64_t count = static_cast<std::int64_t>(std::pow(k, n));
    for (std::int64_t code = 0; code < count; ++code) {
      std::int64_t c = code;
      for (int t = 0; t < n; ++t) {
        path[static_cast<std::size_t>(t)] = static_cast<int>(c % k);
        c /= k;
      }
      double w = hmm.pi[path[0]] * spechmm::model::eval_emission(hmm, path[0], obs[0]);
      for (int t = 1; t < n; ++t)
        w *= hmm.q(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]) *
             spechmm::model::eval_emission(hmm, path[static_cast<std::size_t>(t)],
                                           obs[static_cast<std::size_t>(t)]);
      total += w;
      for (int t = 0; t < n; ++t)
        mass[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(path[static_cast<std::size_t>(t)])] += w;
    }
    for (int t = 0; t < n; ++t)
      for (int x = 0; x < k; ++x) out.smooth(t, x) = mass[static_cast<std::size_t>(t) * k + x] / total;
  }
  // Filtering weights per prefix length.
  for (int len = 1; len <= n; ++len) {
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    double total = 0.0;
    const std::int64_t count = static_cast<std::int64_t>(std::pow(k, len));
    for (std::int64_t code = 0; code < count; ++code) {
      std::int64_t c = code;
      for (int t = 0; t < len; ++t) {
        path[static_cast<std::size_t>(t)] = static_cast<int>(c % k);
        c /= k;
      }
      double w = hmm.pi[path[0]] * spechmm::model::eval_emission(hmm, path[0], obs[0]);
      for (int t = 1; t < len; ++t)
        w *= hmm.q(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]) *
             spechmm::model::eval_emission(hmm, path[static_cast<std::size_t>(t)],
                                           obs[static_cast<std::size_t>(t)]);
      total += w;
      mass[static_cast<std::size_t>(path[static_cast<std::size_t>(len - 1)])] += w;
    }
    for (int x = 0; x < k; ++x) out.filter(len - 1, x) = mass[static_cast<std::size_t>(x)] / total;
  }
  return out;
}

// Plain trapezoid rule on a uniform grid over [0, 1].
inline double trapezoid(const std::function<double(double)>& f, int intervals) {
  double acc = 0.5 * (f(0.0) + f(1.0));
  for (int i = 1; i < intervals; ++i) acc += f(static_cast<double>(i) / intervals);
  return acc / intervals;
}

}  // namespace oracles

#endif  // SPECHMM_TESTS_ORACLES_HPP
