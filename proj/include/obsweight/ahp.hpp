#pragma once

// Pairwise-comparison matrices and priority derivation (Analytic Hierarchy
// Process). Priorities are expressed as percentages summing to 100.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obsweight/error.hpp"

namespace obsweight::ahp {

inline constexpr std::size_t kMinItems = 2;
inline constexpr std::size_t kMaxItems = 10;
inline constexpr double kReciprocityTolerance = 1e-12;
inline constexpr double kDefaultCrThreshold = 0.10;

/// Saaty random-index constants RI(n), n = 1..10.
inline constexpr std::array<double, 10> kRandomIndex = {0.0,  0.0,  0.58, 0.90, 1.12,
                                                        1.24, 1.32, 1.41, 1.45, 1.49};

inline double random_index(std::size_t n) {
  if (n < 1 || n > kRandomIndex.size()) {
    throw Error(ErrorKind::UnsupportedSize,
                "no random index for matrix size " + std::to_string(n));
  }
  return kRandomIndex[n - 1];
}

/// One upper-triangle judgment: how strongly item `row` dominates item `col`.
struct Judgment {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 1.0;
};

/// Positive reciprocal n x n judgment matrix over labelled items.
class ComparisonMatrix {
public:
  ComparisonMatrix(std::vector<std::string> items, std::vector<double> entries)
      : items_(std::move(items)), entries_(std::move(entries)) {
    validate();
  }

  /// Builds a matrix from its strict upper triangle; the diagonal is 1 and
  /// lower entries are reciprocals. Every upper cell must be given once.
  static ComparisonMatrix from_judgments(std::vector<std::string> items,
                                         std::span<const Judgment> judgments) {
    const std::size_t n = items.size();
    if (n < kMinItems) {
      throw Error(ErrorKind::Validation,
                  "comparison matrix needs at least 2 items, got " + std::to_string(n));
    }
    std::vector<double> entries(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) entries[i * n + i] = 1.0;
    for (const Judgment& j : judgments) {
      const std::string where =
          "judgment (" + std::to_string(j.row) + ", " + std::to_string(j.col) + ")";
      if (j.row >= n || j.col >= n) {
        throw Error(ErrorKind::Validation, where + " is outside a " + std::to_string(n) + "x" +
                                               std::to_string(n) + " matrix");
      }
      if (j.row >= j.col) {
        throw Error(ErrorKind::Validation, where + " is not in the strict upper triangle");
      }
      if (!(j.value > 0.0) || !std::isfinite(j.value)) {
        throw Error(ErrorKind::Validation, where + " must be positive and finite");
      }
      if (entries[j.row * n + j.col] != 0.0) {
        throw Error(ErrorKind::Validation, where + " given more than once");
      }
      entries[j.row * n + j.col] = j.value;
      entries[j.col * n + j.row] = 1.0 / j.value;
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = r + 1; c < n; ++c) {
        if (entries[r * n + c] == 0.0) {
          throw Error(ErrorKind::Validation, "missing judgment (" + std::to_string(r) + ", " +
                                                 std::to_string(c) + ")");
        }
      }
    }
    return ComparisonMatrix(std::move(items), std::move(entries));
  }

  /// Rank-one matrix entries[i][j] = w_i / w_j.
  static ComparisonMatrix consistent(std::vector<std::string> items,
                                     std::span<const double> weights) {
    const std::size_t n = weights.size();
    std::vector<Judgment> judgments;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = r + 1; c < n; ++c) judgments.push_back({r, c, weights[r] / weights[c]});
    }
    return from_judgments(std::move(items), judgments);
  }

  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<std::string>& items() const noexcept { return items_; }
  double operator()(std::size_t row, std::size_t col) const { return entries_[row * size() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(entries_).subspan(r * size(), size());
  }

  /// Strict upper triangle as judgments, row-major.
  std::vector<Judgment> upper_triangle() const {
    std::vector<Judgment> out;
    for (std::size_t r = 0; r < size(); ++r) {
      for (std::size_t c = r + 1; c < size(); ++c) out.push_back({r, c, (*this)(r, c)});
    }
    return out;
  }

  /// Reorders items (and rows/columns) so that item k of the result is item
  /// order[k] of this matrix.
  ComparisonMatrix permuted(std::span<const std::size_t> order) const {
    const std::size_t n = size();
    if (order.size() != n) {
      throw Error(ErrorKind::Validation, "permutation length does not match matrix size");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t k : order) {
      if (k >= n || seen[k]) throw Error(ErrorKind::Validation, "invalid permutation");
      seen[k] = true;
    }
    std::vector<std::string> items;
    std::vector<double> entries(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      items.push_back(items_[order[r]]);
      for (std::size_t c = 0; c < n; ++c) entries[r * n + c] = (*this)(order[r], order[c]);
    }
    return ComparisonMatrix(std::move(items), std::move(entries));
  }

private:
  void validate() const {
    const std::size_t n = items_.size();
    if (n < kMinItems) {
      throw Error(ErrorKind::Validation,
                  "comparison matrix needs at least 2 items, got " + std::to_string(n));
    }
    if (entries_.size() != n * n) {
      throw Error(ErrorKind::Validation, "comparison matrix has " + std::to_string(entries_.size()) +
                                             " entries, expected " + std::to_string(n * n));
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double v = entries_[r * n + c];
        const std::string where = "entry (" + std::to_string(r) + ", " + std::to_string(c) + ")";
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw Error(ErrorKind::Validation, where + " must be positive and finite");
        }
        if (r == c && v != 1.0) {
          throw Error(ErrorKind::Validation, where + " is on the diagonal and must be 1");
        }
        if (c > r && std::abs(v * entries_[c * n + r] - 1.0) > kReciprocityTolerance) {
          throw Error(ErrorKind::Validation, where + " is not reciprocal to entry (" +
                                                 std::to_string(c) + ", " + std::to_string(r) +
                                                 ")");
        }
      }
    }
  }

  std::vector<std::string> items_;
  std::vector<double> entries_;
};

/// Weights over labelled items, summing to 100.
struct PriorityVector {
  std::vector<std::string> items;
  std::vector<double> weights;
};

enum class PriorityMethod { GeometricMean, Eigenvector };

namespace detail {

inline std::vector<double> normalize_to_100(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x = 100.0 * x / total;
  return v;
}

inline std::vector<double> row_geometric_means(const ComparisonMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> gm(n);
  for (std::size_t r = 0; r < n; ++r) {
    double product = 1.0;
    for (double v : m.row(r)) product *= v;
    gm[r] = std::pow(product, 1.0 / static_cast<double>(n));
  }
  return gm;
}

// Power iteration for the Perron vector; positive matrices converge from the
// geometric-mean start within a few dozen steps.
inline std::vector<double> principal_eigenvector(const ComparisonMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> w = normalize_to_100(row_geometric_means(m));
  std::vector<double> next(n);
  for (int iter = 0; iter < 10000; ++iter) {
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += m(r, c) * w[c];
      next[r] = acc;
    }
    next = normalize_to_100(std::move(next));
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - w[i]));
    w.swap(next);
    next.assign(n, 0.0);
    if (delta < 1e-13) break;
  }
  return w;
}

}  // namespace detail

/// Priority weights of a matrix's items. The geometric-mean method takes the
/// n-th root of each row product and normalizes the roots to 100.
inline PriorityVector derive_priorities(const ComparisonMatrix& matrix,
                                        PriorityMethod method = PriorityMethod::GeometricMean) {
  std::vector<double> weights = method == PriorityMethod::GeometricMean
                                    ? detail::normalize_to_100(detail::row_geometric_means(matrix))
                                    : detail::principal_eigenvector(matrix);
  return {matrix.items(), std::move(weights)};
}

struct ConsistencyReport {
  double lambda_max = 0.0;
  double consistency_index = 0.0;
  double consistency_ratio = 0.0;
  bool acceptable = true;
};

/// Saaty consistency check of `matrix` against priorities derived from it.
/// CI and CR are clamped at zero; rounding can push lambda_max a hair below n.
inline ConsistencyReport consistency(const ComparisonMatrix& matrix, const PriorityVector& priorities,
                                     double threshold = kDefaultCrThreshold) {
  const std::size_t n = matrix.size();
  if (n < kMinItems || n > kMaxItems) {
    throw Error(ErrorKind::UnsupportedSize,
                "consistency is defined for 2..10 items, got " + std::to_string(n));
  }
  if (priorities.weights.size() != n) {
    throw Error(ErrorKind::Validation, "priority vector length does not match matrix size");
  }
  ConsistencyReport report;
  double ratio_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double aw = 0.0;
    for (std::size_t c = 0; c < n; ++c) aw += matrix(r, c) * priorities.weights[c];
    ratio_sum += aw / priorities.weights[r];
  }
  report.lambda_max = ratio_sum / static_cast<double>(n);
  if (n > 2) {
    const double nd = static_cast<double>(n);
    report.consistency_index = std::max(0.0, (report.lambda_max - nd) / (nd - 1.0));
    report.consistency_ratio = report.consistency_index / random_index(n);
  }
  report.acceptable = report.consistency_ratio <= threshold;
  return report;
}

/// Weighted arithmetic mean of per-expert priority vectors, renormalized to
/// 100. Without expert weights every expert counts equally.
inline PriorityVector aggregate_experts(std::span<const PriorityVector> vectors,
                                        std::optional<std::span<const double>> expert_weights = {}) {
  if (vectors.empty()) throw Error(ErrorKind::Aggregation, "no priority vectors to aggregate");
  const std::vector<std::string>& items = vectors.front().items;
  for (std::size_t e = 0; e < vectors.size(); ++e) {
    if (vectors[e].items != items || vectors[e].weights.size() != items.size()) {
      throw Error(ErrorKind::Aggregation,
                  "priority vector " + std::to_string(e) + " has a different item list");
    }
  }
  if (expert_weights && expert_weights->size() != vectors.size()) {
    throw Error(ErrorKind::Aggregation, "expected " + std::to_string(vectors.size()) +
                                            " expert weights, got " +
                                            std::to_string(expert_weights->size()));
  }
  if (vectors.size() == 1) {
    const double we = expert_weights ? expert_weights->front() : 1.0;
    if (!(we > 0.0) || !std::isfinite(we)) {
      throw Error(ErrorKind::Aggregation, "expert weight 0 must be positive");
    }
    return vectors.front();
  }
  std::vector<double> mean(items.size(), 0.0);
  double weight_total = 0.0;
  for (std::size_t e = 0; e < vectors.size(); ++e) {
    const double we = expert_weights ? (*expert_weights)[e] : 1.0;
    if (!(we > 0.0) || !std::isfinite(we)) {
      throw Error(ErrorKind::Aggregation, "expert weight " + std::to_string(e) + " must be positive");
    }
    weight_total += we;
    for (std::size_t i = 0; i < items.size(); ++i) mean[i] += we * vectors[e].weights[i];
  }
  for (double& m : mean) m /= weight_total;
  return {items, detail::normalize_to_100(std::move(mean))};
}

/// Element-wise geometric mean of judgment matrices over identical items.
/// The result stays reciprocal.
inline ComparisonMatrix aggregate_judgments(std::span<const ComparisonMatrix> matrices) {
  if (matrices.empty()) throw Error(ErrorKind::Aggregation, "no matrices to aggregate");
  const auto& items = matrices.front().items();
  const std::size_t n = items.size();
  for (std::size_t e = 0; e < matrices.size(); ++e) {
    if (matrices[e].items() != items) {
      throw Error(ErrorKind::Aggregation, "matrix " + std::to_string(e) + " has a different item list");
    }
  }
  std::vector<Judgment> judgments;
  const double inv = 1.0 / static_cast<double>(matrices.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      double log_sum = 0.0;
      for (const auto& m : matrices) log_sum += std::log(m(r, c));
      judgments.push_back({r, c, std::exp(log_sum * inv)});
    }
  }
  return ComparisonMatrix::from_judgments(items, judgments);
}

}  // namespace obsweight::ahp
