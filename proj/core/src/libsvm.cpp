#include "coupled/libsvm.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "coupled/errors.hpp"

namespace coupled {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

double parse_real(std::string_view tok, std::size_t line, std::size_t col,
                  const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (tok.empty() || ec != std::errc() || ptr != end)
    throw ParseError(line, col, std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  return v;
}

}  // namespace

SparseExamples parse_libsvm(std::string_view text, std::optional<std::size_t> max_rows,
                            std::optional<std::size_t> num_features) {
  SparseExamples out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (max_rows && out.rows.size() >= *max_rows) break;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    SparseRow row;
    bool have_label = false;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      if (i >= line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      const std::string_view tok = line.substr(start, i - start);
      const std::size_t col = start + 1;
      if (!have_label) {
        row.label = parse_real(tok, line_no, col, "label");
        have_label = true;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(line_no, col, "malformed index:value pair '" + std::string(tok) + "'");
      const std::string_view idx_tok = tok.substr(0, colon);
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size())
        throw ParseError(line_no, col, "non-numeric index '" + std::string(idx_tok) + "'");
      if (idx == 0) throw ParseError(line_no, col, "feature indices are 1-based");
      if (!row.entries.empty() && idx <= row.entries.back().first)
        throw ParseError(line_no, col, "non-increasing index " + std::to_string(idx));
      const double val = parse_real(tok.substr(colon + 1), line_no, col + colon + 1, "value");
      row.entries.emplace_back(idx, val);
    }
    if (!have_label) continue;
    if (!row.entries.empty())
      out.num_features = std::max(out.num_features, row.entries.back().first);
    out.rows.push_back(std::move(row));
  }
  if (num_features) {
    if (*num_features < out.num_features)
      throw ParseError(line_no, 1, "feature index exceeds the declared feature count");
    out.num_features = *num_features;
  }
  return out;
}

SparseExamples read_libsvm_file(const std::string& path, std::optional<std::size_t> max_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParam("cannot open LibSVM file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_libsvm(ss.str(), max_rows);
}

std::string serialize_libsvm(const SparseExamples& ex) {
  std::string out;
  char buf[64];
  for (const auto& row : ex.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.label);
    out += buf;
    for (const auto& [idx, val] : row.entries) {
      std::snprintf(buf, sizeof buf, " %zu:%.17g", idx, val);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Matrix SparseExamples::dense_features() const {
  Matrix F = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(num_features));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [idx, val] : rows[r].entries)
      F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx - 1)) = val;
  return F;
}

Vector SparseExamples::labels() const {
  Vector l(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) l[static_cast<Eigen::Index>(r)] = rows[r].label;
  return l;
}

ProblemInstance gen_vfl(const SparseExamples& features, double lambda, const Graph& graph,
                        const std::vector<std::size_t>& column_split) {
  if (!(lambda > 0.0)) throw InvalidParam("lambda must be positive");
  if (features.rows.empty()) throw InvalidParam("no samples");
  if (column_split.size() != graph.size())
    throw SplitMismatch("split count differs from the node count");
  if (std::accumulate(column_split.begin(), column_split.end(), std::size_t{0}) !=
      features.num_features)
    throw SplitMismatch("column split does not sum to the feature count");
  for (auto s : column_split)
    if (s == 0) throw SplitMismatch("every node needs at least one feature column");

  const Matrix F = features.dense_features();
  const Vector l = features.labels();
  const Eigen::Index m = F.rows();
  std::vector<NodeData> nodes;
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < column_split.size(); ++i) {
    const auto w = static_cast<Eigen::Index>(column_split[i]);
    const Matrix Fi = F.middleCols(col, w);
    col += w;
    if (i == 0) {
      Vector qd(w + m);
      qd << Vector::Constant(w, 2.0 * lambda), Vector::Ones(m);
      Vector c(w + m);
      c << Vector::Zero(w), -l;
      Matrix A(m, w + m);
      A << Fi, -Matrix::Identity(m, m);
      nodes.push_back({ObjectiveBlock::quadratic(qd.asDiagonal().toDenseMatrix(), c,
                                                 0.5 * l.squaredNorm()),
                       std::move(A), Vector::Zero(m)});
    } else {
      nodes.push_back({ObjectiveBlock::quadratic(2.0 * lambda * Matrix::Identity(w, w),
                                                 Vector::Zero(w)),
                       Fi, Vector::Zero(m)});
    }
  }
  return ProblemInstance(graph, std::move(nodes));
}

}  // namespace coupled
