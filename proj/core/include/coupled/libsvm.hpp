#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"

namespace coupled {

struct SparseRow {
  double label = 0.0;
  std::vector<std::pair<std::size_t, double>> entries;  // 1-based, increasing

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct SparseExamples {
  std::vector<SparseRow> rows;
  std::size_t num_features = 0;

  // Dense rows x num_features feature matrix and label vector.
  Matrix dense_features() const;
  Vector labels() const;
};

// Parses `label idx:val idx:val ...` lines; '#' starts a comment. Blank lines
// are skipped. num_features is the largest index seen unless given.
SparseExamples parse_libsvm(std::string_view text,
                            std::optional<std::size_t> max_rows = std::nullopt,
                            std::optional<std::size_t> num_features = std::nullopt);
SparseExamples read_libsvm_file(const std::string& path,
                                std::optional<std::size_t> max_rows = std::nullopt);

std::string serialize_libsvm(const SparseExamples& ex);

// Feature-partitioned ridge regression. Node 0 holds (w_0, z) and
// f_0 = 1/2||z - l||^2 + lambda||w_0||^2 with A_0 = [F_0, -I]; node i > 0
// holds w_i with f_i = lambda||w_i||^2 and A_i = F_i. All b_i = 0, so the
// constraint reads sum_i F_i w_i = z.
ProblemInstance gen_vfl(const SparseExamples& features, double lambda,
                        const Graph& graph,
                        const std::vector<std::size_t>& column_split);

}  // namespace coupled
