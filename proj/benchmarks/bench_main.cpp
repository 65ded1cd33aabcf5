#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include <coupled/coupled.hpp>

using namespace coupled;

namespace {

struct World {
  ProblemInstance inst;
  GossipMatrix gossip;
  DerivedConstants dc;
  SolverParams params;

  explicit World(std::size_t n)
      : inst(gen_synthetic_regression(n, 3, 10, 1e-3, make_graph(Topology::erdos_renyi, n, 0.2, 42), 7)),
        gossip(laplacian_gossip(inst.graph())),
        dc(derived_constants(inst)),
        params(theorem1_params(inst.L_f(), inst.mu_f(), {}, dc)) {}
};

const World& world(std::size_t n) {
  static World w20(20), w50(50);
  return n == 20 ? w20 : w50;
}

LiftedVector random_point(const World& w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  LiftedVector u = LiftedVector::zeros(w.inst.total_dim(), w.inst.m(),
                                       static_cast<Eigen::Index>(w.inst.n()));
  for (Eigen::Index k = 0; k < u.x.size(); ++k) u.x[k] = normal(rng);
  for (Eigen::Index k = 0; k < u.y.size(); ++k) u.y.data()[k] = normal(rng);
  return u;
}

void BM_MulWprime(benchmark::State& state) {
  const World& w = world(static_cast<std::size_t>(state.range(0)));
  SimNet net(w.inst.graph(), w.gossip);
  const Matrix y = random_point(w, 1).y;
  for (auto _ : state) benchmark::DoNotOptimize(mul_wprime(y, net));
  state.counters["comm_rounds"] = static_cast<double>(net.counters().comm_rounds) / state.iterations();
}
BENCHMARK(BM_MulWprime)->Arg(20)->Arg(50);

void BM_KChebyshev(benchmark::State& state) {
  const World& w = world(static_cast<std::size_t>(state.range(0)));
  SimNet net(w.inst.graph(), w.gossip);
  const LiftedVector u = random_point(w, 2);
  for (auto _ : state) benchmark::DoNotOptimize(k_chebyshev(u, w.inst, w.dc, net));
}
BENCHMARK(BM_KChebyshev)->Arg(20)->Arg(50);

void BM_GradG(benchmark::State& state) {
  const World& w = world(static_cast<std::size_t>(state.range(0)));
  SimNet net(w.inst.graph(), w.gossip);
  const LiftedVector u = random_point(w, 3);
  for (auto _ : state) benchmark::DoNotOptimize(grad_G(u, w.inst, w.params, net));
}
BENCHMARK(BM_GradG)->Arg(20)->Arg(50);

// Cost per outer iteration, measured over a fixed 100-iteration run.
void BM_SolverIterations(benchmark::State& state) {
  const World& w = world(static_cast<std::size_t>(state.range(0)));
  SolverParams p = w.params;
  p.max_iters = 100;
  p.tol_x = 0.0;
  for (auto _ : state) {
    SimNet net(w.inst.graph(), w.gossip);
    benchmark::DoNotOptimize(solve(w.inst, p, net));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SolverIterations)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ParseLibsvm(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> feat(1, 200);
  std::string text;
  for (int r = 0; r < state.range(0); ++r) {
    text += std::to_string(val(rng));
    int last = 0;
    for (int k = 0; k < 20; ++k) {
      last += feat(rng) % 10 + 1;
      text += " " + std::to_string(last) + ":" + std::to_string(val(rng));
    }
    text += '\n';
  }
  for (auto _ : state) benchmark::DoNotOptimize(parse_libsvm(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseLibsvm)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
