#include <gtest/gtest.h>

#include <random>

#include <coupled/errors.hpp>
#include <coupled/libsvm.hpp>
#include <coupled/oracle.hpp>

using namespace coupled;

TEST(LibSvm, SingleRow) {
  const SparseExamples ex = parse_libsvm("1 1:0.5 3:2.0\n");
  ASSERT_EQ(ex.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(ex.rows[0].label, 1.0);
  using Entries = std::vector<std::pair<std::size_t, double>>;
  EXPECT_EQ(ex.rows[0].entries, (Entries{{1, 0.5}, {3, 2.0}}));
  EXPECT_EQ(ex.num_features, 3u);
}

TEST(LibSvm, EmptyInput) {
  const SparseExamples ex = parse_libsvm("");
  EXPECT_TRUE(ex.rows.empty());
  EXPECT_EQ(ex.num_features, 0u);
}

TEST(LibSvm, NonIncreasingIndex) {
  try {
    parse_libsvm("+1 2:1 1:1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 8u);
  }
}

TEST(LibSvm, CommentsBlankLinesAndLimits) {
  const std::string text = "# header\n\n-1 2:3 # trailing\n+1 1:1 4:-2.5e-1\n2 5:1\n";
  const SparseExamples all = parse_libsvm(text);
  ASSERT_EQ(all.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(all.rows[0].label, -1.0);
  EXPECT_DOUBLE_EQ(all.rows[1].entries[1].second, -0.25);
  EXPECT_EQ(all.num_features, 5u);
  const SparseExamples two = parse_libsvm(text, 2);
  EXPECT_EQ(two.rows.size(), 2u);
  EXPECT_EQ(two.num_features, 4u);
  EXPECT_EQ(parse_libsvm(text, std::nullopt, 10).num_features, 10u);
  EXPECT_THROW(parse_libsvm(text, std::nullopt, 3), ParseError);
}

TEST(LibSvm, MalformedTokens) {
  EXPECT_THROW(parse_libsvm("abc 1:1\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 1:x\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 1-2\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 :2\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 3:\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 0:1\n"), ParseError);
  try {
    parse_libsvm("1 1:1\n0 2:q\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 5u);
  }
}

TEST(LibSvm, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> gap(1, 4), len(0, 6);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    SparseExamples ex;
    const int rows = len(rng) + 1;
    for (int r = 0; r < rows; ++r) {
      SparseRow row;
      row.label = normal(rng);
      std::size_t idx = 0;
      for (int k = len(rng); k > 0; --k) {
        idx += static_cast<std::size_t>(gap(rng));
        row.entries.emplace_back(idx, normal(rng) * 1e3);
      }
      if (!row.entries.empty()) ex.num_features = std::max(ex.num_features, idx);
      ex.rows.push_back(row);
    }
    const SparseExamples back = parse_libsvm(serialize_libsvm(ex));
    EXPECT_EQ(back.rows, ex.rows);
    EXPECT_EQ(back.num_features, ex.num_features);
  }
}

TEST(LibSvm, FixtureFile) {
  const SparseExamples ex = read_libsvm_file(COUPLED_TEST_DATA "/sample.libsvm");
  EXPECT_EQ(ex.rows.size(), 24u);
  EXPECT_EQ(ex.num_features, 14u);
  EXPECT_EQ(read_libsvm_file(COUPLED_TEST_DATA "/sample.libsvm", 10).rows.size(), 10u);
  EXPECT_THROW(read_libsvm_file(COUPLED_TEST_DATA "/missing.libsvm"), InvalidParam);
}

TEST(Vfl, ConstraintStructure) {
  const SparseExamples ex = read_libsvm_file(COUPLED_TEST_DATA "/sample.libsvm");
  const Graph g = make_graph(Topology::path, 3);
  const ProblemInstance inst = gen_vfl(ex, 0.1, g, {5, 5, 4});
  EXPECT_EQ(inst.m(), 24);
  EXPECT_EQ(inst.dims(), (std::vector<Eigen::Index>{5 + 24, 5, 4}));
  // sum_i A_i x_i = sum_i F_i w_i - z
  const Matrix F = ex.dense_features();
  Vector x = Vector::LinSpaced(inst.total_dim(), -1.0, 1.0);
  const Vector w0 = x.segment(0, 5), z = x.segment(5, 24), w1 = x.segment(29, 5), w2 = x.segment(34, 4);
  const Vector want = F.leftCols(5) * w0 + F.middleCols(5, 5) * w1 + F.rightCols(4) * w2 - z;
  EXPECT_LE((inst.constraint_residual(x) - want).norm(), 1e-12);
}

TEST(Vfl, OptimumIsRidgeRegression) {
  const SparseExamples ex = read_libsvm_file(COUPLED_TEST_DATA "/sample.libsvm");
  const double lambda = 0.3;
  const ProblemInstance inst = gen_vfl(ex, lambda, make_graph(Topology::ring, 3), {4, 6, 4});
  const ReferenceSolution ref = kkt_oracle(inst);
  // centralized: min 1/2||F w - l||^2 + lambda ||w||^2
  const Matrix F = ex.dense_features();
  const Vector l = ex.labels();
  const Vector w = (F.transpose() * F + 2.0 * lambda * Matrix::Identity(14, 14))
                       .ldlt().solve(F.transpose() * l);
  Vector got(14);
  got << ref.x_star.segment(0, 4), ref.x_star.segment(4 + 24, 6), ref.x_star.segment(34, 4);
  EXPECT_LE((got - w).norm(), 1e-9 * (1.0 + w.norm()));
}

TEST(Vfl, Errors) {
  const SparseExamples ex = parse_libsvm("1 1:1 2:1\n0 2:1\n");
  const Graph g = make_graph(Topology::path, 2);
  EXPECT_THROW(gen_vfl(ex, 0.0, g, {1, 1}), InvalidParam);
  EXPECT_THROW(gen_vfl(ex, 0.1, g, {1, 2}), SplitMismatch);
  EXPECT_THROW(gen_vfl(ex, 0.1, g, {2}), SplitMismatch);
  EXPECT_THROW(gen_vfl(ex, 0.1, g, {2, 0}), SplitMismatch);
}
