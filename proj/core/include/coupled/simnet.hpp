#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"

namespace coupled {

enum class LocalityMode { enforce, audit_only };
enum class MatmulDirection { A, A_transpose };

struct Counters {
  std::uint64_t grad_calls = 0;
  std::uint64_t matmul_rounds = 0;
  std::uint64_t comm_rounds = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

// Synchronous simulation of n compute nodes. Each round is one of three
// kinds (gradient, local matmul, communication); a communication round is
// one multiplication of a stacked vector by W and lets node i read only
// the blocks of nodes j with W_ij != 0.
class SimNet {
 public:
  SimNet(Graph graph, GossipMatrix gossip,
         LocalityMode mode = LocalityMode::enforce);

  std::size_t size() const { return graph_.size(); }
  const Graph& graph() const { return graph_; }
  const GossipMatrix& gossip() const { return gossip_; }
  LocalityMode mode() const { return mode_; }
  const Counters& counters() const { return counters_; }
  // Non-neighbor reads observed in audit mode.
  std::size_t locality_violations() const { return violations_; }

  // Per-node (j, W_ij) pairs in ascending j, diagonal included.
  const std::vector<std::pair<std::size_t, double>>& stencil(
      std::size_t i) const {
    return stencil_[i];
  }

  // Named per-node storage.
  void put(std::size_t node, const std::string& name, Vector v);
  const Vector& get(std::size_t node, const std::string& name) const;
  bool has(std::size_t node, const std::string& name) const;

  // View handed to each node during a communication round. Reads of a
  // non-neighbor raise LocalityViolation in enforce mode.
  class NodeContext {
   public:
    std::size_t id() const { return id_; }
    const Vector& read(std::size_t peer, const std::string& name);
    void write(const std::string& name, Vector v);

   private:
    friend class SimNet;
    NodeContext(SimNet& net, std::size_t id) : net_(net), id_(id) {}
    SimNet& net_;
    std::size_t id_;
    std::vector<std::pair<std::string, Vector>> staged_;
  };

  // Runs fn on every node against the pre-round store; writes become
  // visible after the barrier. Counts one communication round.
  void communication_round(const std::function<void(NodeContext&)>& fn);

  void gossip_round(const std::string& name_in, const std::string& name_out);
  void matmul_round(MatmulDirection dir, const std::string& name_in,
                    const std::string& name_out, const ProblemInstance& inst);
  void grad_round(const std::string& name_in, const std::string& name_out,
                  const ProblemInstance& inst);

  // Value-level forms of the same rounds, used by the algorithms. Per-node
  // m-blocks are the columns of an m x n matrix; x is node-major stacked.
  Matrix gossip(const Matrix& in);
  Matrix apply_A(const ProblemInstance& inst, const Vector& x);
  Vector apply_At(const ProblemInstance& inst, const Matrix& y);
  Vector gradient(const ProblemInstance& inst, const Vector& x);

 private:
  void check_instance(const ProblemInstance& inst) const;
  const Vector& lookup(std::size_t node, const std::string& name) const;

  Graph graph_;
  GossipMatrix gossip_;
  LocalityMode mode_;
  Counters counters_;
  std::size_t violations_ = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil_;
  std::vector<std::map<std::string, Vector>> store_;
  unsigned threads_ = 1;
};

// Worker count from COUPLED_DECENT_THREADS (unset or 0 = hardware).
unsigned configured_threads();

}  // namespace coupled
