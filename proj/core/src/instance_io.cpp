#include "coupled/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coupled/errors.hpp"

namespace coupled {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                        const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ShapeMismatch(what + ": expected " + std::to_string(rows) + " rows");
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ShapeMismatch(what + ": expected " + std::to_string(cols) + " columns");
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return M;
}

Vector vector_from_json(const json& j, Eigen::Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw ShapeMismatch(what + ": expected length " + std::to_string(size));
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst, int indent) {
  json doc;
  doc["n"] = inst.n();
  doc["m"] = inst.m();
  doc["dims"] = inst.dims();
  json edges = json::array();
  for (const auto& [i, j] : inst.graph().edges()) edges.push_back({i, j});
  doc["graph"] = {{"n", inst.graph().size()}, {"edges", edges}};
  json blocks = json::array();
  for (const auto& nd : inst.nodes()) {
    json b;
    if (nd.f.kind() == ObjectiveKind::quadratic) {
      b["Q"] = matrix_to_json(nd.f.Q());
      b["c"] = vector_to_json(nd.f.c());
      b["offset"] = nd.f.offset();
    } else {
      b["oracle"] = nd.f.tag();
      b["dim"] = nd.f.dim();
      b["L_f"] = nd.f.L();
      b["mu_f"] = nd.f.mu();
    }
    b["A"] = matrix_to_json(nd.A);
    b["b"] = vector_to_json(nd.b);
    blocks.push_back(std::move(b));
  }
  doc["blocks"] = std::move(blocks);
  return doc.dump(indent);
}

ProblemInstance instance_from_json(const std::string& text, const OracleRegistry& oracles) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParam(std::string("instance file is not valid JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("n").get<std::size_t>();
    const auto m = doc.at("m").get<Eigen::Index>();
    const auto dims = doc.at("dims").get<std::vector<Eigen::Index>>();
    const json& g = doc.at("graph");
    std::vector<Graph::Edge> edges;
    for (const auto& e : g.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidParam("graph edges must be pairs");
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    Graph graph(g.at("n").get<std::size_t>(), std::move(edges));
    const json& blocks = doc.at("blocks");
    if (dims.size() != n || blocks.size() != n || graph.size() != n)
      throw ShapeMismatch("n, dims, graph and blocks disagree on the node count");
    std::vector<NodeData> nodes;
    for (std::size_t i = 0; i < n; ++i) {
      const json& b = blocks[i];
      const Eigen::Index d = dims[i];
      const std::string where = "block " + std::to_string(i);
      Matrix A = matrix_from_json(b.at("A"), m, d, where + " A");
      Vector rhs = vector_from_json(b.at("b"), m, where + " b");
      if (b.contains("oracle")) {
        const auto tag = b.at("oracle").get<std::string>();
        auto it = oracles.find(tag);
        if (it == oracles.end()) throw InvalidParam(where + ": unknown oracle '" + tag + "'");
        nodes.push_back({it->second(d, b.at("L_f").get<double>(), b.at("mu_f").get<double>()),
                         std::move(A), std::move(rhs)});
      } else {
        Matrix Q = matrix_from_json(b.at("Q"), d, d, where + " Q");
        Vector c = vector_from_json(b.at("c"), d, where + " c");
        const double offset = b.value("offset", 0.0);
        nodes.push_back({ObjectiveBlock::quadratic(std::move(Q), std::move(c), offset),
                         std::move(A), std::move(rhs)});
      }
    }
    return ProblemInstance(std::move(graph), std::move(nodes));
  } catch (const json::exception& e) {
    throw InvalidParam(std::string("malformed instance file: ") + e.what());
  }
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParam("cannot write '" + path + "'");
  out << instance_to_json(inst) << '\n';
  if (!out) throw InvalidParam("write failed for '" + path + "'");
}

ProblemInstance load_instance(const std::string& path, const OracleRegistry& oracles) {
  std::ifstream in(path);
  if (!in) throw InvalidParam("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str(), oracles);
}

}  // namespace coupled
