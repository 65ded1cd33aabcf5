#include "coupled/simnet.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include "coupled/errors.hpp"

namespace coupled {

namespace {

// Below this many scalar multiply-adds per round the loop stays serial.
constexpr Eigen::Index kParallelWork = 1 << 16;

template <typename Fn>
void for_each_node(std::size_t n, unsigned threads, Eigen::Index work, Fn&& fn) {
  if (threads <= 1 || work < kParallelWork || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t t = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += t) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

unsigned configured_threads() {
  const char* env = std::getenv("COUPLED_DECENT_THREADS");
  long v = 0;
  if (env != nullptr) v = std::strtol(env, nullptr, 10);
  if (v > 0) return static_cast<unsigned>(v);
  return std::max(1u, std::thread::hardware_concurrency());
}

SimNet::SimNet(Graph graph, GossipMatrix gossip, LocalityMode mode)
    : graph_(std::move(graph)),
      gossip_(std::move(gossip)),
      mode_(mode),
      stencil_(graph_.size()),
      store_(graph_.size()),
      threads_(configured_threads()) {
  const auto n = static_cast<Eigen::Index>(graph_.size());
  if (gossip_.W.rows() != n || gossip_.W.cols() != n)
    throw ShapeMismatch("gossip matrix size differs from the graph");
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    for (std::size_t j = 0; j < graph_.size(); ++j) {
      const double w = gossip_.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w == 0.0) continue;
      if (i != j && !graph_.has_edge(i, j)) {
        if (mode_ == LocalityMode::enforce) throw LocalityViolation(i, j);
        ++violations_;
      }
      stencil_[i].emplace_back(j, w);
    }
  }
}

void SimNet::put(std::size_t node, const std::string& name, Vector v) {
  if (node >= size()) throw InvalidParam("node index out of range");
  store_[node][name] = std::move(v);
}

const Vector& SimNet::lookup(std::size_t node, const std::string& name) const {
  auto it = store_[node].find(name);
  if (it == store_[node].end())
    throw InvalidParam("node " + std::to_string(node) + " has no block '" + name + "'");
  return it->second;
}

const Vector& SimNet::get(std::size_t node, const std::string& name) const {
  if (node >= size()) throw InvalidParam("node index out of range");
  return lookup(node, name);
}

bool SimNet::has(std::size_t node, const std::string& name) const {
  return node < size() && store_[node].count(name) > 0;
}

const Vector& SimNet::NodeContext::read(std::size_t peer, const std::string& name) {
  if (peer >= net_.size()) throw InvalidParam("peer index out of range");
  if (peer != id_ && !net_.graph_.has_edge(id_, peer)) {
    if (net_.mode_ == LocalityMode::enforce) throw LocalityViolation(id_, peer);
    ++net_.violations_;
  }
  return net_.lookup(peer, name);
}

void SimNet::NodeContext::write(const std::string& name, Vector v) {
  staged_.emplace_back(name, std::move(v));
}

void SimNet::communication_round(const std::function<void(NodeContext&)>& fn) {
  std::vector<NodeContext> ctx;
  ctx.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) ctx.push_back(NodeContext(*this, i));
  for (auto& c : ctx) fn(c);
  // barrier
  for (auto& c : ctx)
    for (auto& [name, v] : c.staged_) store_[c.id_][name] = std::move(v);
  ++counters_.comm_rounds;
}

void SimNet::gossip_round(const std::string& name_in, const std::string& name_out) {
  const Eigen::Index width = lookup(0, name_in).size();
  for (std::size_t i = 1; i < size(); ++i)
    if (lookup(i, name_in).size() != width)
      throw ShapeMismatch("gossip_round: blocks of '" + name_in + "' differ in width");
  communication_round([&](NodeContext& ctx) {
    Vector acc = Vector::Zero(width);
    for (const auto& [j, w] : stencil_[ctx.id()]) acc += w * ctx.read(j, name_in);
    ctx.write(name_out, std::move(acc));
  });
}

void SimNet::check_instance(const ProblemInstance& inst) const {
  if (inst.n() != size()) throw ShapeMismatch("instance node count differs from the network");
}

void SimNet::matmul_round(MatmulDirection dir, const std::string& name_in,
                          const std::string& name_out, const ProblemInstance& inst) {
  check_instance(inst);
  std::vector<Vector> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Matrix& A = inst.node(i).A;
    const Vector& in = lookup(i, name_in);
    if (dir == MatmulDirection::A) {
      if (in.size() != A.cols()) throw ShapeMismatch("matmul_round: block width differs from d_i");
      out[i] = A * in;
    } else {
      if (in.size() != A.rows()) throw ShapeMismatch("matmul_round: block width differs from m");
      out[i] = A.transpose() * in;
    }
  }
  for (std::size_t i = 0; i < size(); ++i) store_[i][name_out] = std::move(out[i]);
  ++counters_.matmul_rounds;
}

void SimNet::grad_round(const std::string& name_in, const std::string& name_out,
                        const ProblemInstance& inst) {
  check_instance(inst);
  std::vector<Vector> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Vector& in = lookup(i, name_in);
    if (in.size() != inst.dims()[i]) throw ShapeMismatch("grad_round: block width differs from d_i");
    out[i] = inst.node(i).f.gradient(in);
  }
  for (std::size_t i = 0; i < size(); ++i) store_[i][name_out] = std::move(out[i]);
  ++counters_.grad_calls;
}

Matrix SimNet::gossip(const Matrix& in) {
  if (in.cols() != static_cast<Eigen::Index>(size()))
    throw ShapeMismatch("gossip: one column per node expected");
  Matrix out(in.rows(), in.cols());
  const Eigen::Index work = in.size() * 4;
  for_each_node(size(), threads_, work, [&](std::size_t i) {
    auto col = out.col(static_cast<Eigen::Index>(i));
    col.setZero();
    for (const auto& [j, w] : stencil_[i]) col += w * in.col(static_cast<Eigen::Index>(j));
  });
  ++counters_.comm_rounds;
  return out;
}

Matrix SimNet::apply_A(const ProblemInstance& inst, const Vector& x) {
  check_instance(inst);
  if (x.size() != inst.total_dim()) throw ShapeMismatch("apply_A: wrong x size");
  Matrix out(inst.m(), static_cast<Eigen::Index>(size()));
  for_each_node(size(), threads_, inst.m() * inst.total_dim(), [&](std::size_t i) {
    out.col(static_cast<Eigen::Index>(i)).noalias() = inst.node(i).A * inst.block(x, i);
  });
  ++counters_.matmul_rounds;
  return out;
}

Vector SimNet::apply_At(const ProblemInstance& inst, const Matrix& y) {
  check_instance(inst);
  if (y.rows() != inst.m() || y.cols() != static_cast<Eigen::Index>(size()))
    throw ShapeMismatch("apply_At: wrong y shape");
  Vector out(inst.total_dim());
  for_each_node(size(), threads_, inst.m() * inst.total_dim(), [&](std::size_t i) {
    out.segment(inst.offset(i), inst.dims()[i]).noalias() =
        inst.node(i).A.transpose() * y.col(static_cast<Eigen::Index>(i));
  });
  ++counters_.matmul_rounds;
  return out;
}

Vector SimNet::gradient(const ProblemInstance& inst, const Vector& x) {
  check_instance(inst);
  if (x.size() != inst.total_dim()) throw ShapeMismatch("gradient: wrong x size");
  Vector out(inst.total_dim());
  Eigen::Index work = 0;
  for (auto d : inst.dims()) work += d * d;
  for_each_node(size(), threads_, work, [&](std::size_t i) {
    out.segment(inst.offset(i), inst.dims()[i]) = inst.node(i).f.gradient(inst.block(x, i));
  });
  ++counters_.grad_calls;
  return out;
}

}  // namespace coupled
