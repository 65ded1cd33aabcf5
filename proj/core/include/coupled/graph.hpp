#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coupled/linalg.hpp"

namespace coupled {

// Undirected simple graph on nodes 0..n-1. Edges are stored as (i, j) with
// i < j, sorted and deduplicated.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool connected() const { return connected_; }
  bool has_edge(std::size_t i, std::size_t j) const;
  const std::vector<std::size_t>& neighbors(std::size_t i) const {
    return adjacency_[i];
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  bool connected_ = false;
};

enum class Topology { path, ring, star, complete, erdos_renyi };

Topology parse_topology(const std::string& name);
std::string to_string(Topology t);

inline constexpr int kErdosRenyiRetries = 1000;

// Builds a connected graph. Erdos-Renyi graphs are resampled along a
// deterministic seed chain until connected.
Graph make_graph(Topology topology, std::size_t n,
                 std::optional<double> edge_prob = std::nullopt,
                 std::uint64_t seed = 0);

inline constexpr double kTolPsd = 1e-9;

// Symmetric PSD gossip matrix tied to a graph, with its spectral constants.
struct GossipMatrix {
  Matrix W;
  double lambda_max = 0.0;
  double lambda_min_plus = 0.0;
  double L_W = 0.0;   // >= lambda_max^2
  double mu_W = 0.0;  // <= lambda_min_plus^2
  double kappa_W = 0.0;
};

// W = D - Adj with tight spectral constants.
GossipMatrix laplacian_gossip(const Graph& g);

struct GossipCheck {
  bool symmetric = false;
  bool psd = false;
  bool consensus_kernel = false;  // ||W 1|| <= 1e-12 ||W||
  bool kernel_dim_one = false;
  bool pattern_matches = false;   // nonzeros exactly on edges and diagonal
  bool ok() const {
    return symmetric && psd && consensus_kernel && kernel_dim_one &&
           pattern_matches;
  }
};

GossipCheck check_gossip(const Graph& g, const Matrix& W);

}  // namespace coupled
