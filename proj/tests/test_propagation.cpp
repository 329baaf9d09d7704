#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"
#include "sgap/errors.hpp"
#include "sgap/operator.hpp"
#include "sgap/propagation.hpp"

using namespace sgap;

namespace {

const GraphAggregator kAllKinds[] = {GraphAggregator::aug_na(), GraphAggregator::ppr(0.1), GraphAggregator::ppr(0.3),
                                     GraphAggregator::triangle_ia()};

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

GraphCSR connected_random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  auto edges = oracle::random_edges(n, p, rng);
  for (std::uint32_t v = 1; v < n; ++v) edges.emplace_back(v - 1, v);  // path backbone
  edges.emplace_back(0, 2);                                            // odd cycle
  return from_edges(n, edges);
}

}  // namespace

TEST(Operator, AugNaTwoNodes) {
  const PropagationOperator op = build_operator(load_edge_list("0 1", 2), GraphAggregator::aug_na());
  const Matrix d = to_dense(op.base);
  EXPECT_TRUE(d.isApprox(Matrix::Constant(2, 2, 0.5)));
  Matrix prev(2, 2);
  prev << 1, 0, 0, 1;
  const Matrix out = apply_step(op, prev, prev);
  EXPECT_TRUE(out.isApprox(Matrix::Constant(2, 2, 0.5)));
}

TEST(Operator, PprStepExample) {
  const PropagationOperator op = build_operator(load_edge_list("0 1", 2), GraphAggregator::ppr(0.1));
  Matrix m0(2, 2);
  m0 << 1, 0, 0, 1;
  const Matrix m1 = apply_step(op, m0, m0);
  EXPECT_NEAR(m1(0, 0), 0.55, 1e-15);
  EXPECT_NEAR(m1(0, 1), 0.45, 1e-15);
}

TEST(Operator, PprAlphaOneIsIdentityBitwise) {
  std::mt19937_64 rng(5);
  const GraphCSR g = connected_random_graph(40, 0.1, rng);
  const Matrix m0 = random_matrix(40, 3, rng);
  const MessageStack s = propagate(build_operator(g, GraphAggregator::ppr(1.0)), m0, 5);
  for (const Matrix& m : s.steps) EXPECT_EQ(std::memcmp(m.data(), m0.data(), sizeof(double) * m0.size()), 0);
}

TEST(Operator, PprAlphaOutOfRange) {
  const GraphCSR g = load_edge_list("0 1", 2);
  EXPECT_THROW(build_operator(g, GraphAggregator::ppr(0.0)), ConfigError);
  EXPECT_THROW(build_operator(g, GraphAggregator::ppr(1.5)), ConfigError);
}

TEST(Operator, TriangleIaOnPathIsIdentity) {
  const PropagationOperator op = build_operator(load_edge_list("0 1\n1 2\n", 3), GraphAggregator::triangle_ia());
  EXPECT_TRUE(to_dense(op.base).isApprox(Matrix::Identity(3, 3)));
  std::mt19937_64 rng(1);
  const Matrix prev = random_matrix(3, 4, rng);
  EXPECT_EQ(apply_step(op, prev, prev), prev);
}

TEST(Operator, ShapeMismatch) {
  const PropagationOperator op = build_operator(load_edge_list("0 1", 2), GraphAggregator::aug_na());
  EXPECT_THROW(apply_step(op, Matrix::Zero(3, 2), Matrix::Zero(3, 2)), DimensionError);
  EXPECT_THROW(apply_step(op, Matrix::Zero(2, 2), Matrix::Zero(2, 3)), DimensionError);
}

TEST(Operator, MatchesDenseOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const auto edges = oracle::random_edges(n, 0.05 + 0.4 * (rng() % 100) / 100.0, rng);
    const GraphCSR g = from_edges(n, edges);
    const oracle::Dense a = oracle::adjacency(n, edges);
    const Matrix m0 = random_matrix(static_cast<Eigen::Index>(n), 3, rng);
    for (const GraphAggregator& ga : kAllKinds) {
      for (bool row_norm : {false, true}) {
        const oracle::DenseOperator ref = oracle::dense_operator(a, ga, row_norm);
        const PropagationOperator op = build_operator(g, ga, OperatorOptions{row_norm});
        EXPECT_LE((to_dense(op.base) - ref.p).cwiseAbs().maxCoeff(), 1e-12);
        const auto expect = oracle::dense_propagate(ref, m0, 4);
        const MessageStack got = propagate(op, m0, 4);
        for (std::size_t t = 0; t <= 4; ++t) EXPECT_LE((got.steps[t] - expect[t]).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(Operator, EntriesNonNegativeAndStochastic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const GraphCSR g = from_edges(n, oracle::random_edges(n, 0.3, rng));
    const Matrix aug = to_dense(build_operator(g, GraphAggregator::aug_na()).base);
    const Matrix tri = to_dense(build_operator(g, GraphAggregator::triangle_ia()).base);
    const Matrix ppr = to_dense(build_operator(g, GraphAggregator::ppr(0.2)).base);
    EXPECT_GE(aug.minCoeff(), 0.0);
    EXPECT_GE(tri.minCoeff(), 0.0);
    EXPECT_GE(ppr.minCoeff(), 0.0);
    EXPECT_LE((aug.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LE((tri.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Propagate, ZeroStepsKeepsInput) {
  std::mt19937_64 rng(4);
  const Matrix m0 = random_matrix(5, 2, rng);
  const MessageStack s = propagate(build_operator(load_edge_list("0 1\n2 3", 5), GraphAggregator::aug_na()), m0, 0);
  ASSERT_EQ(s.steps.size(), 1u);
  EXPECT_EQ(s.steps[0], m0);
}

TEST(Propagate, BitwiseIndependentOfWorkersAndBatches) {
  std::mt19937_64 rng(77);
  const GraphCSR g = connected_random_graph(200, 0.03, rng);
  const Matrix m0 = random_matrix(200, 6, rng);
  for (const GraphAggregator& ga : kAllKinds) {
    const PropagationOperator op = build_operator(g, ga);
    const MessageStack ref = propagate(op, m0, 6, PropagateOptions{1});
    for (std::size_t w : {2u, 3u, 4u, 8u}) {
      for (std::size_t b : {0u, 1u, 7u, 64u, 1000u}) {
        EXPECT_EQ(propagate(op, m0, 6, PropagateOptions{w, b}), ref) << "workers " << w << " batch " << b;
      }
    }
  }
}

TEST(Propagate, AugNaConservesColumnMass) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const GraphCSR g = connected_random_graph(60, 0.05, rng);
    const Matrix m0 = random_matrix(60, 4, rng).cwiseAbs();
    const MessageStack s = propagate(build_operator(g, GraphAggregator::aug_na()), m0, 10);
    const Eigen::RowVectorXd before = m0.colwise().sum();
    const Eigen::RowVectorXd after = s.steps[10].colwise().sum();
    EXPECT_LE(((after - before).array().abs() / before.array().abs()).maxCoeff(), 1e-8);
  }
}

TEST(Propagate, TriangleIaKeepsSimplex) {
  std::mt19937_64 rng(10);
  const GraphCSR g = from_edges(40, oracle::random_edges(40, 0.25, rng));
  Matrix m0 = random_matrix(40, 5, rng).cwiseAbs();
  for (Eigen::Index r = 0; r < m0.rows(); ++r) m0.row(r) /= m0.row(r).sum();
  const MessageStack s = propagate(build_operator(g, GraphAggregator::triangle_ia()), m0, 10);
  for (const Matrix& m : s.steps) {
    EXPECT_GE(m.minCoeff(), 0.0);
    EXPECT_LE((m.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Propagate, AugNaSmoothsMessages) {
  std::mt19937_64 rng(12);
  auto spread = [](const Matrix& m) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i + 1; j < m.rows(); ++j) total += (m.row(i) - m.row(j)).norm();
    return total;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const GraphCSR g = connected_random_graph(50, 0.1, rng);
    const MessageStack s = propagate(build_operator(g, GraphAggregator::aug_na()), random_matrix(50, 4, rng), 10);
    EXPECT_LT(spread(s.steps[10]), spread(s.steps[1]));
  }
}

TEST(Propagate, PprStaysBounded) {
  std::mt19937_64 rng(13);
  const GraphCSR g = connected_random_graph(50, 0.1, rng);
  const Matrix m0 = random_matrix(50, 3, rng);
  const MessageStack s = propagate(build_operator(g, GraphAggregator::ppr(0.1)), m0, 10);
  // The symmetric normalization has spectral norm 1, so every step is a
  // contraction towards a bounded fixed point.
  for (const Matrix& m : s.steps) EXPECT_LE((m - m0).norm(), 2.0 * m0.norm() + 1e-12);
}

TEST(Propagate, MemoryBudgetNamesRequiredBytes) {
  const GraphCSR g = load_edge_list("0 1", 2);
  try {
    propagate(build_operator(g, GraphAggregator::aug_na()), Matrix::Ones(2, 3), 4, PropagateOptions{1, 0, 10});
    FAIL();
  } catch (const ResourceError& e) {
    EXPECT_EQ(e.required_bytes(), stack_bytes(2, 3, 4));
    EXPECT_EQ(e.required_bytes(), 5u * 2 * 3 * sizeof(double));
  }
}

TEST(Stack, SaveLoadRoundTrip) {
  std::mt19937_64 rng(14);
  const auto path = std::filesystem::temp_directory_path() / "sgap_stack_test.sgapm";
  const MessageStack s = propagate(build_operator(connected_random_graph(20, 0.2, rng), GraphAggregator::ppr(0.2)),
                                   random_matrix(20, 3, rng), 3);
  save_stack(s, path);
  EXPECT_EQ(load_stack(path), s);
  EXPECT_EQ(s.prefix(1).steps.size(), 2u);
  EXPECT_EQ(s.prefix(1).steps[1], s.steps[1]);
  std::filesystem::remove(path);
}

TEST(Cache, ServesPrefixesAndPersists) {
  std::mt19937_64 rng(15);
  const GraphCSR g = connected_random_graph(30, 0.2, rng);
  const Matrix m0 = random_matrix(30, 2, rng);
  const auto dir = std::filesystem::temp_directory_path() / "sgap_cache_test";
  std::filesystem::remove_all(dir);
  const PropagationOperator op = build_operator(g, GraphAggregator::aug_na());
  {
    PropagationCache cache(dir);
    const MessageStack deep = cache.get(g, GraphAggregator::aug_na(), {}, m0, 6);
    EXPECT_EQ(deep, propagate(op, m0, 6));
    EXPECT_EQ(cache.misses(), 1u);
    const MessageStack shallow = cache.get(g, GraphAggregator::aug_na(), {}, m0, 3);
    EXPECT_EQ(shallow, deep.prefix(3));
    EXPECT_EQ(cache.hits(), 1u);
    cache.get(g, GraphAggregator::ppr(0.1), {}, m0, 3);
    EXPECT_EQ(cache.misses(), 2u);
  }
  PropagationCache reloaded(dir);
  EXPECT_EQ(reloaded.get(g, GraphAggregator::aug_na(), {}, m0, 4), propagate(op, m0, 4));
  EXPECT_EQ(reloaded.hits(), 1u);
  std::filesystem::remove_all(dir);
}
