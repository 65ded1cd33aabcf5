#include "coupled/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "coupled/errors.hpp"

namespace coupled {

Graph::Graph(std::size_t n, std::vector<Edge> edges)
    : n_(n), adjacency_(n) {
  for (auto& [i, j] : edges) {
    if (i >= n || j >= n) throw InvalidParam("edge endpoint out of range");
    if (i == j) throw InvalidParam("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw InvalidParam("duplicate edge");
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

  if (n_ == 0) return;
  std::vector<bool> seen(n_, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto w : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  connected_ = reached == n_;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) return false;
  const auto& nb = adjacency_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

Topology parse_topology(const std::string& name) {
  if (name == "path") return Topology::path;
  if (name == "ring") return Topology::ring;
  if (name == "star") return Topology::star;
  if (name == "complete") return Topology::complete;
  if (name == "erdos_renyi") return Topology::erdos_renyi;
  throw InvalidParam("unknown topology '" + name + "'");
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::path: return "path";
    case Topology::ring: return "ring";
    case Topology::star: return "star";
    case Topology::complete: return "complete";
    case Topology::erdos_renyi: return "erdos_renyi";
  }
  return "unknown";
}

Graph make_graph(Topology topology, std::size_t n,
                 std::optional<double> edge_prob, std::uint64_t seed) {
  if (n < 2) throw InvalidParam("graph needs at least 2 nodes");
  const bool random = topology == Topology::erdos_renyi;
  if (random != edge_prob.has_value())
    throw InvalidParam("edge_prob is required iff topology is erdos_renyi");

  std::vector<Graph::Edge> edges;
  switch (topology) {
    case Topology::path:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      return Graph(n, std::move(edges));
    case Topology::ring:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      if (n > 2) edges.emplace_back(0, n - 1);
      return Graph(n, std::move(edges));
    case Topology::star:
      for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
      return Graph(n, std::move(edges));
    case Topology::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      return Graph(n, std::move(edges));
    case Topology::erdos_renyi:
      break;
  }

  const double p = *edge_prob;
  if (!(p > 0.0 && p <= 1.0)) throw InvalidParam("edge_prob must be in (0, 1]");
  for (int attempt = 0; attempt < kErdosRenyiRetries; ++attempt) {
    std::seed_seq chain{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(chain);
    std::bernoulli_distribution coin(p);
    edges.clear();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    Graph g(n, edges);
    if (g.connected()) return g;
  }
  throw UnconnectableGraph("no connected Erdos-Renyi sample after " +
                           std::to_string(kErdosRenyiRetries) + " draws");
}

GossipMatrix laplacian_gossip(const Graph& g) {
  if (!g.connected()) throw NotConnected("graph is not connected");
  const auto n = static_cast<Eigen::Index>(g.size());
  GossipMatrix out;
  out.W = Matrix::Zero(n, n);
  for (const auto& [i, j] : g.edges()) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    out.W(a, b) -= 1.0;
    out.W(b, a) -= 1.0;
    out.W(a, a) += 1.0;
    out.W(b, b) += 1.0;
  }
  const auto spec = symmetric_spectrum(out.W, kTolPsd);
  if (spec.near_zero != 1 || spec.min_positive <= 0.0)
    throw NotConnected("smallest nonzero Laplacian eigenvalue not separated from 0");
  out.lambda_max = spec.max;
  out.lambda_min_plus = spec.min_positive;
  out.L_W = out.lambda_max * out.lambda_max;
  out.mu_W = out.lambda_min_plus * out.lambda_min_plus;
  out.kappa_W = out.lambda_max / out.lambda_min_plus;
  return out;
}

GossipCheck check_gossip(const Graph& g, const Matrix& W) {
  GossipCheck c;
  const auto n = static_cast<Eigen::Index>(g.size());
  if (W.rows() != n || W.cols() != n) return c;
  const double scale = W.norm();
  c.symmetric = (W - W.transpose()).norm() <= 1e-14 * std::max(scale, 1.0);

  c.pattern_matches = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool edge =
          g.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if ((W(i, j) != 0.0) != edge) c.pattern_matches = false;
    }
  }

  c.consensus_kernel = (W * Vector::Ones(n)).norm() <= 1e-12 * scale;

  const Matrix sym = 0.5 * (W + W.transpose());
  const auto spec = symmetric_spectrum(sym, kTolPsd);
  c.psd = spec.eigenvalues.size() > 0 &&
          spec.eigenvalues.minCoeff() >= -kTolPsd * std::max(spec.max, 1.0);
  c.kernel_dim_one = spec.near_zero == 1;
  return c;
}

}  // namespace coupled
