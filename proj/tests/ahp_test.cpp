#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "obsweight/ahp.hpp"
#include "oracles.hpp"

using namespace obsweight;
using namespace obsweight::ahp;

namespace {

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("item" + std::to_string(i));
  return out;
}

ComparisonMatrix from_dense(const oracle::Dense& d) {
  std::vector<double> e;
  for (const auto& r : d) e.insert(e.end(), r.begin(), r.end());
  return ComparisonMatrix(labels(d.size()), e);
}

oracle::Dense to_dense(const ComparisonMatrix& m) {
  oracle::Dense d(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) d[r].assign(m.row(r).begin(), m.row(r).end());
  return d;
}

// Random reciprocal matrix with Saaty-scale upper entries.
ComparisonMatrix random_saaty(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> scale(1, 9);
  std::bernoulli_distribution invert(0.5);
  std::vector<Judgment> js;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      double v = scale(rng);
      js.push_back({r, c, invert(rng) ? 1.0 / v : v});
    }
  }
  return ComparisonMatrix::from_judgments(labels(n), js);
}

}  // namespace

TEST(DerivePriorities, ConsistentFourTwoOne) {
  const auto m = from_dense({{1, 2, 4}, {0.5, 1, 2}, {0.25, 0.5, 1}});
  const auto pv = derive_priorities(m);
  EXPECT_NEAR(pv.weights[0], 57.142857, 1e-6);
  EXPECT_NEAR(pv.weights[1], 28.571429, 1e-6);
  EXPECT_NEAR(pv.weights[2], 14.285714, 1e-6);
  EXPECT_EQ(pv.items, m.items());
}

TEST(DerivePriorities, TwoByTwoIndifference) {
  const auto pv = derive_priorities(from_dense({{1, 1}, {1, 1}}));
  EXPECT_DOUBLE_EQ(pv.weights[0], 50.0);
  EXPECT_DOUBLE_EQ(pv.weights[1], 50.0);
}

TEST(DerivePriorities, ThreeFiveThreeMatchesOracle) {
  const oracle::Dense d = {{1, 3, 5}, {1.0 / 3, 1, 3}, {1.0 / 5, 1.0 / 3, 1}};
  const auto pv = derive_priorities(from_dense(d));
  // Frozen from 30-digit arithmetic on the row geometric means.
  const double frozen[] = {63.6985571744757129650, 25.8284994374495005958, 10.4729433880747864392};
  const auto ref = oracle::gm_priorities(d);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(pv.weights[i], frozen[i], 1e-12);
    EXPECT_NEAR(pv.weights[i], ref[i], 1e-12);
  }
}

TEST(DerivePriorities, MatchesOracleOnRandomMatrices) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto m = random_saaty(rng, n);
    const auto pv = derive_priorities(m);
    const auto ref = oracle::gm_priorities(to_dense(m));
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(pv.weights[i], ref[i], 1e-10 * ref[i]);
      total += pv.weights[i];
    }
    EXPECT_NEAR(total, 100.0, 1e-9);
  }
}

TEST(DerivePriorities, EigenvectorAgreesOnConsistentMatrices) {
  const std::vector<double> w = {5, 3, 1.5, 0.5};
  const auto m = ComparisonMatrix::consistent(labels(4), w);
  const auto gm = derive_priorities(m, PriorityMethod::GeometricMean);
  const auto ev = derive_priorities(m, PriorityMethod::Eigenvector);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(gm.weights[i], 100.0 * w[i] / 10.0, 1e-9);
    EXPECT_NEAR(ev.weights[i], gm.weights[i], 1e-9);
  }
}

TEST(DerivePriorities, EigenvectorSatisfiesEigenEquation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_saaty(rng, 3 + trial % 6);
    const auto ev = derive_priorities(m, PriorityMethod::Eigenvector);
    const double lambda = oracle::perron_eigenvalue(to_dense(m));
    for (std::size_t r = 0; r < m.size(); ++r) {
      double aw = 0;
      for (std::size_t c = 0; c < m.size(); ++c) aw += m(r, c) * ev.weights[c];
      EXPECT_NEAR(aw, lambda * ev.weights[r], 1e-8 * aw);
    }
  }
}

TEST(Consistency, ConsistentMatrixHasZeroRatio) {
  const auto m = from_dense({{1, 2, 4}, {0.5, 1, 2}, {0.25, 0.5, 1}});
  const auto cr = consistency(m, derive_priorities(m));
  EXPECT_NEAR(cr.lambda_max, 3.0, 1e-12);
  EXPECT_NEAR(cr.consistency_index, 0.0, 1e-12);
  EXPECT_NEAR(cr.consistency_ratio, 0.0, 1e-12);
  EXPECT_TRUE(cr.acceptable);
}

TEST(Consistency, TwoByTwoAlwaysConsistent) {
  for (double v : {1.0, 3.0, 9.0, 1.0 / 7, 2.5}) {
    const auto m = ComparisonMatrix::from_judgments(labels(2), std::vector<Judgment>{{0, 1, v}});
    const auto cr = consistency(m, derive_priorities(m));
    EXPECT_EQ(cr.consistency_ratio, 0.0);
    EXPECT_EQ(cr.consistency_index, 0.0);
    EXPECT_TRUE(cr.acceptable);
  }
}

TEST(Consistency, CyclicJudgmentsAreRejected) {
  const oracle::Dense d = {{1, 9, 1.0 / 9}, {1.0 / 9, 1, 9}, {9, 1.0 / 9, 1}};
  const auto m = from_dense(d);
  const auto cr = consistency(m, derive_priorities(m));
  // Circulant: Perron eigenvalue is the row sum 1 + 9 + 1/9.
  const double lambda = 1.0 + 9.0 + 1.0 / 9.0;
  EXPECT_NEAR(oracle::perron_eigenvalue(d), lambda, 1e-12);
  EXPECT_NEAR(cr.lambda_max, lambda, 1e-12);
  EXPECT_NEAR(cr.consistency_ratio, 6.13026819923371647509578544061, 1e-12);
  EXPECT_GT(cr.consistency_ratio, 0.10);
  EXPECT_FALSE(cr.acceptable);
}

TEST(Consistency, ThreeFiveThreeFrozen) {
  const auto m = from_dense({{1, 3, 5}, {1.0 / 3, 1, 3}, {1.0 / 5, 1.0 / 3, 1}});
  const auto cr = consistency(m, derive_priorities(m));
  EXPECT_NEAR(cr.lambda_max, 3.03851109055817007081, 1e-12);
  EXPECT_NEAR(cr.consistency_ratio, 0.0331992159984224748364, 1e-12);
  EXPECT_TRUE(cr.acceptable);
}

TEST(Consistency, LambdaMaxMatchesPerronForGeometricPriorities) {
  // For n = 3 the geometric-mean vector is the Perron vector of any
  // reciprocal matrix, so lambda_max must equal the Perron eigenvalue.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_saaty(rng, 3);
    const auto cr = consistency(m, derive_priorities(m));
    EXPECT_NEAR(cr.lambda_max, oracle::perron_eigenvalue(to_dense(m)), 1e-9);
    EXPECT_GE(cr.consistency_ratio, 0.0);
  }
}

TEST(Consistency, UnsupportedSizes) {
  std::vector<double> w(11, 1.0);
  const auto m = ComparisonMatrix::consistent(labels(11), w);
  try {
    consistency(m, derive_priorities(m));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedSize);
  }
  EXPECT_THROW(random_index(0), Error);
  EXPECT_DOUBLE_EQ(random_index(10), 1.49);
}

TEST(Consistency, ThresholdIsConfigurable) {
  const auto m = from_dense({{1, 3, 5}, {1.0 / 3, 1, 3}, {1.0 / 5, 1.0 / 3, 1}});
  EXPECT_FALSE(consistency(m, derive_priorities(m), 0.01).acceptable);
}

TEST(ComparisonMatrix, RejectsInvalidEntries) {
  auto kind_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // sentinel: nothing thrown
  };
  EXPECT_EQ(kind_of([] { ComparisonMatrix(labels(1), {1.0}); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ComparisonMatrix(labels(2), {1, 2, 0.5}); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ComparisonMatrix(labels(2), {2, 2, 0.5, 1}); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ComparisonMatrix(labels(2), {1, 2, 0.6, 1}); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ComparisonMatrix(labels(2), {1, -2, -0.5, 1}); }), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] {
              ComparisonMatrix::from_judgments(labels(2), std::vector<Judgment>{{0, 1, 0.0}});
            }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { ComparisonMatrix::from_judgments(labels(3), std::vector<Judgment>{{0, 1, 2}}); }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] {
              ComparisonMatrix::from_judgments(labels(2), std::vector<Judgment>{{1, 0, 2}});
            }),
            ErrorKind::Validation);
  try {
    ComparisonMatrix(labels(3), {1, 2, 3, 0.5, 1, 4, 1.0 / 3, 0.3, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("entry (1, 2)"), std::string::npos) << e.what();
  }
}

TEST(Properties, PermutationEquivariance) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto m = random_saaty(rng, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto base = derive_priorities(m);
    const auto permuted = derive_priorities(m.permuted(order));
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(permuted.weights[k], base.weights[order[k]], 1e-12 * base.weights[order[k]]);
      EXPECT_EQ(permuted.items[k], base.items[order[k]]);
    }
  }
}

TEST(Properties, ScaleExactOnConsistentMatrices) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const auto m = ComparisonMatrix::consistent(labels(n), w);
    const auto pv = derive_priorities(m);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pv.weights[i], 100.0 * w[i] / total, 1e-9 * pv.weights[i]);
    EXPECT_LE(consistency(m, pv).consistency_ratio, 1e-9);
  }
}

TEST(AggregateExperts, Examples) {
  const PriorityVector a{{"x", "y"}, {60, 40}}, b{{"x", "y"}, {40, 60}};
  const std::vector<PriorityVector> both = {a, b};
  auto eq = aggregate_experts(both);
  EXPECT_DOUBLE_EQ(eq.weights[0], 50);
  EXPECT_DOUBLE_EQ(eq.weights[1], 50);

  const std::vector<double> ew = {3, 1};
  auto weighted = aggregate_experts(both, std::span<const double>(ew));
  EXPECT_DOUBLE_EQ(weighted.weights[0], 55);
  EXPECT_DOUBLE_EQ(weighted.weights[1], 45);

  const std::vector<PriorityVector> single = {{{"a", "b", "c"}, {50, 30, 20}}};
  auto one = aggregate_experts(single);
  EXPECT_DOUBLE_EQ(one.weights[0], 50);
  EXPECT_DOUBLE_EQ(one.weights[1], 30);
  EXPECT_DOUBLE_EQ(one.weights[2], 20);
}

TEST(AggregateExperts, IdenticalInputsAreFixedPoints) {
  const PriorityVector v{{"a", "b", "c", "d"}, {41.5, 23.25, 20.25, 15}};
  const std::vector<PriorityVector> copies(5, v);
  const auto out = aggregate_experts(copies);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out.weights[i], v.weights[i], 1e-12);
}

TEST(AggregateExperts, Errors) {
  const std::vector<PriorityVector> mismatched = {{{"x", "y"}, {60, 40}}, {{"y", "x"}, {40, 60}}};
  EXPECT_THROW(aggregate_experts(mismatched), Error);
  EXPECT_THROW(aggregate_experts(std::span<const PriorityVector>{}), Error);
  const std::vector<PriorityVector> ok = {{{"x", "y"}, {60, 40}}};
  const std::vector<double> bad = {0.0};
  EXPECT_THROW(aggregate_experts(ok, std::span<const double>(bad)), Error);
}

TEST(AggregateJudgments, ReciprocalOppositesCancel) {
  const auto a = ComparisonMatrix::from_judgments(labels(2), std::vector<Judgment>{{0, 1, 3.0}});
  const auto b = ComparisonMatrix::from_judgments(labels(2), std::vector<Judgment>{{0, 1, 1.0 / 3}});
  const std::vector<ComparisonMatrix> ms = {a, b};
  const auto pv = derive_priorities(aggregate_judgments(ms));
  EXPECT_NEAR(pv.weights[0], 50.0, 1e-12);
}
