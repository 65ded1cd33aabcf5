#include <gtest/gtest.h>

#include <cmath>

#include <coupled/chebyshev.hpp>
#include <coupled/errors.hpp>
#include <coupled/oracle.hpp>

using namespace coupled;

namespace {

// Orthonormal basis of the column space of M.
Matrix range_of(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > 1e-9 * std::max(1.0, s[0])) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

TEST(KktOracle, ResourceAllocationClosedForm) {
  const Graph g = make_graph(Topology::ring, 4);
  std::vector<Vector> centers;
  for (int i = 0; i < 4; ++i) centers.push_back(Vector::Constant(2, 0.3 * i - 0.2));
  const Vector budget = (Vector(2) << 1.0, -2.0).finished();
  const ProblemInstance inst = gen_resource_allocation(4, 2, centers, budget, g);
  const ReferenceSolution ref = kkt_oracle(inst);
  const auto expect = resource_allocation_optimum(centers, budget);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_LE((inst.block(ref.x_star, i) - expect[i]).norm(), 1e-12);
  EXPECT_LE(ref.kkt_residual, 1e-10);
}

TEST(KktOracle, TwoNodeSplit) {
  const Graph g = make_graph(Topology::path, 2);
  const ProblemInstance inst =
      gen_resource_allocation(2, 1, {Vector::Zero(1), Vector::Zero(1)}, Vector::Ones(1), g);
  const ReferenceSolution ref = kkt_oracle(inst);
  EXPECT_NEAR(ref.x_star[0], 0.5, 1e-14);
  EXPECT_NEAR(ref.x_star[1], 0.5, 1e-14);
  // Q x + c = A' lambda with Q = I, c = 0
  EXPECT_NEAR(ref.multiplier[0], 0.5, 1e-14);
}

TEST(KktOracle, SyntheticResidualSmall) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = make_graph(Topology::erdos_renyi, 8, 0.4, seed);
    const ProblemInstance inst = gen_synthetic_regression(8, 3, 5, 0.1, g, seed);
    const ReferenceSolution ref = kkt_oracle(inst);
    EXPECT_LE(ref.kkt_residual, 1e-10 * (1.0 + ref.x_star.norm()));
    EXPECT_LE(inst.feasibility_residual(ref.x_star), 1e-10);
  }
}

TEST(KktOracle, RankDeficientConstraints) {
  // Duplicate constraint rows: multiplier is still well defined.
  const Graph g = make_graph(Topology::path, 2);
  std::vector<NodeData> nodes;
  for (int i = 0; i < 2; ++i) {
    Matrix A(2, 1);
    A << 1.0, 1.0;
    nodes.push_back({ObjectiveBlock::quadratic(Matrix::Identity(1, 1), Vector::Zero(1)), A,
                     Vector::Constant(2, 0.5)});
  }
  const ProblemInstance inst(g, std::move(nodes));
  const ReferenceSolution ref = kkt_oracle(inst);
  EXPECT_NEAR(ref.x_star[0], 0.5, 1e-13);
  EXPECT_LE(ref.kkt_residual, 1e-12);
}

TEST(KktOracle, NearSingularRaises) {
  const Graph g = make_graph(Topology::path, 2);
  std::vector<NodeData> nodes;
  for (int i = 0; i < 2; ++i) {
    Matrix Q = Matrix::Zero(2, 2);
    Q(0, 0) = 1.0;
    Q(1, 1) = 1e-18;
    Matrix A = Matrix::Zero(1, 2);
    A(0, 0) = 1.0;
    nodes.push_back({ObjectiveBlock::quadratic(Q, Vector::Zero(2)), A, Vector::Zero(1)});
  }
  const ProblemInstance inst(g, std::move(nodes));
  EXPECT_THROW(kkt_oracle(inst), SingularKKT);
}

TEST(FiniteDiff, Examples) {
  auto sq = [](const Vector& x) { return x.squaredNorm(); };
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  EXPECT_LE((finite_diff_grad(sq, x, 1e-5) - 2.0 * x).norm(), 1e-8);
  auto cubic = [](const Vector& x) { return x[0] * x[0] * x[0]; };
  EXPECT_NEAR(finite_diff_grad(cubic, Vector::Constant(1, 2.0), 1e-4)[0], 12.0, 1e-6);
  EXPECT_THROW(finite_diff_grad(sq, x, 0.0), InvalidParam);
}

TEST(DenseOperators, CompressedSpectrumOnRange) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Graph g = make_graph(Topology::erdos_renyi, 6, 0.5, seed);
    const ProblemInstance inst = gen_synthetic_regression(6, 2, 3, 0.1, g, seed);
    const GossipMatrix gm = laplacian_gossip(g);
    const DerivedConstants dc = derived_constants(inst);
    const DenseLiftedOperators ops = dense_lifted_operators(inst, dc, gm);

    const Matrix R = range_of(ops.B.transpose());
    const Matrix restricted = R.transpose() * ops.P_B_of_BtB * R;
    Eigen::SelfAdjointEigenSolver<Matrix> es(restricted);
    EXPECT_GE(es.eigenvalues().minCoeff(), dc.mu_K - 1e-9);
    EXPECT_LE(es.eigenvalues().maxCoeff(), dc.L_K + 1e-9);

    EXPECT_LE((ops.K.transpose() * ops.K - ops.P_B_of_BtB).norm(), 1e-9 * ops.P_B_of_BtB.norm());

    // ker K = ker B
    const Matrix N = Eigen::FullPivLU<Matrix>(ops.B).kernel();
    EXPECT_LE((ops.K * N).norm(), 1e-8 * (1.0 + N.norm()));
    const Eigen::Index rank_K = Eigen::FullPivLU<Matrix>(ops.K).setThreshold(1e-8).rank();
    EXPECT_EQ(rank_K, R.cols());
  }
}

TEST(DenseOperators, WprimeIsSquareRootOfW) {
  const Graph g = make_graph(Topology::ring, 5);
  const ProblemInstance inst = gen_synthetic_regression(5, 2, 2, 0.1, g, 1);
  const GossipMatrix gm = laplacian_gossip(g);
  const DenseLiftedOperators ops = dense_lifted_operators(inst, derived_constants(inst), gm);
  const double scale = 1.0 / std::sqrt(gm.L_W);
  EXPECT_GT(scale, 0.0);
  // W' is a polynomial in W, so it commutes with W and kills the consensus direction.
  EXPECT_LE((ops.W_prime * gm.W - gm.W * ops.W_prime).norm(), 1e-10);
  EXPECT_LE((ops.W_prime * Vector::Ones(5)).norm(), 1e-10);
}

TEST(DenseOperators, RefusesLargeLiftedDimension) {
  const Graph g = make_graph(Topology::ring, 100);
  const ProblemInstance inst = gen_synthetic_regression(100, 2, 20, 0.1, g, 1);
  EXPECT_THROW(dense_lifted_operators(inst, derived_constants(inst), laplacian_gossip(g)),
               DimensionTooLarge);
}
