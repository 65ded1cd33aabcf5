#pragma once

#include <functional>
#include <map>
#include <string>

#include "coupled/problem.hpp"

namespace coupled {

// Rebuilds oracle-kind blocks from their tag when loading an instance file.
using OracleFactory =
    std::function<ObjectiveBlock(Eigen::Index dim, double L, double mu)>;
using OracleRegistry = std::map<std::string, OracleFactory>;

// JSON layout: {n, m, dims, graph: {n, edges: [[i, j], ...]},
//   blocks: [{Q, c, offset, A, b} | {oracle, dim, L_f, mu_f, A, b}]}
// with 0-based node indices and dense matrices as arrays of rows.
std::string instance_to_json(const ProblemInstance& inst, int indent = 1);
ProblemInstance instance_from_json(const std::string& text,
                                   const OracleRegistry& oracles = {});

void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path,
                              const OracleRegistry& oracles = {});

}  // namespace coupled
