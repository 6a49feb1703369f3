#include "glyphclust/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "glyphclust/textfmt.hpp"

namespace glyphclust {

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> labels,
                                         std::vector<double> values)
    : labels_(std::move(labels)), values_(std::move(values)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw std::invalid_argument("matrix: no labels");
  if (values_.size() != n * n) throw std::invalid_argument("matrix: values are not n x n");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw std::invalid_argument("matrix: empty label");
    if (l.find(',') != std::string::npos || l.find('\n') != std::string::npos) {
      throw std::invalid_argument("matrix: label '" + l + "' contains a separator");
    }
    if (!seen.insert(l).second) throw std::invalid_argument("matrix: duplicate label '" + l + "'");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (values_[i * n + i] != 0.0) {
      throw std::invalid_argument("matrix: nonzero diagonal at " + labels_[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values_[i * n + j];
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("matrix: invalid entry at (" + labels_[i] + "," + labels_[j] + ")");
      }
      if (values_[i * n + j] != values_[j * n + i]) {
        throw std::invalid_argument("matrix: asymmetric at (" + labels_[i] + "," + labels_[j] + ")");
      }
    }
  }
}

std::optional<std::size_t> DissimilarityMatrix::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

DissimilarityMatrix build_matrix(const std::vector<Shape>& shapes, const AlignConfig& cfg,
                                 int threads, std::vector<PairLog>* log) {
  const std::size_t n = shapes.size();
  if (n < 2) throw std::invalid_argument("build_matrix: need at least 2 shapes");
  std::vector<std::string> labels;
  labels.reserve(n);
  for (const Shape& s : shapes) {
    validate_shape(s);
    labels.push_back(s.label);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }

  std::vector<double> values(n * n, 0.0);
  std::vector<PairLog> records(pairs.size());
  std::vector<char> failed(pairs.size(), 0);

  auto work = [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    // Canonical order by label keeps the value independent of shape order.
    const bool swap = shapes[j].label < shapes[i].label;
    const Shape& a = swap ? shapes[j] : shapes[i];
    const Shape& b = swap ? shapes[i] : shapes[j];
    const AlignResult r = align(a, b, cfg);
    values[i * n + j] = values[j * n + i] = r.symmetric_misfit();
    records[p] = {shapes[i].label, shapes[j].label, r.symmetric_misfit(), r.iterations,
                  r.converged};
    if (!r.converged) failed[p] = 1;
  };

  const int nthreads = std::max(1, threads);
  if (nthreads == 1 || pairs.size() < 2) {
    for (std::size_t p = 0; p < pairs.size(); ++p) work(p);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (pairs.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(pairs.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t p = lo; p < hi; ++p) work(p);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (failed[p]) {
      throw std::runtime_error("alignment did not converge for pair (" + records[p].a + ", " +
                               records[p].b + ")");
    }
  }
  if (log) *log = std::move(records);
  return DissimilarityMatrix(std::move(labels), std::move(values));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

DissimilarityMatrix parse_matrix_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> labels;
  if (!std::getline(in, line)) throw std::invalid_argument("matrix csv: empty input");
  {
    auto cells = split_csv_line(line);
    if (cells.size() < 2 || !trim(cells[0]).empty()) {
      throw std::invalid_argument("matrix csv: header must start with an empty cell");
    }
    for (std::size_t i = 1; i < cells.size(); ++i) labels.push_back(trim(cells[i]));
  }
  const std::size_t n = labels.size();
  std::vector<double> values(n * n, 0.0);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (row >= n) throw std::invalid_argument("matrix csv: more rows than labels");
    auto cells = split_csv_line(line);
    if (cells.size() != n + 1) {
      throw std::invalid_argument("matrix csv: row '" + trim(cells[0]) + "' has " +
                                  std::to_string(cells.size() - 1) + " values, expected " +
                                  std::to_string(n));
    }
    if (trim(cells[0]) != labels[row]) {
      throw std::invalid_argument("matrix csv: row label '" + trim(cells[0]) +
                                  "' does not match header order");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::string cell = trim(cells[j + 1]);
      double v = 0.0;
      if (cell.empty()) {
        if (row != j) throw std::invalid_argument("matrix csv: empty off-diagonal cell");
      } else {
        std::size_t pos = 0;
        try {
          v = std::stod(cell, &pos);
        } catch (const std::exception&) {
          pos = std::string::npos;
        }
        if (pos != cell.size() || !std::isfinite(v)) {
          throw std::invalid_argument("matrix csv: bad value '" + cell + "'");
        }
      }
      values[row * n + j] = v;
    }
    ++row;
  }
  if (row != n) throw std::invalid_argument("matrix csv: fewer rows than labels");

  for (std::size_t i = 0; i < n; ++i) {
    if (values[i * n + i] != 0.0) {
      throw std::invalid_argument("matrix csv: nonzero diagonal at " + labels[i]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(values[i * n + j] - values[j * n + i]) > 1e-12) {
        throw std::invalid_argument("matrix csv: asymmetric at (" + labels[i] + "," + labels[j] + ")");
      }
      values[j * n + i] = values[i * n + j];  // mirror the upper triangle exactly
    }
  }
  return DissimilarityMatrix(std::move(labels), std::move(values));
}

DissimilarityMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_matrix_csv(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string serialize_matrix_csv(const DissimilarityMatrix& m, bool full_precision) {
  const std::size_t n = m.size();
  std::string out;
  for (const auto& l : m.labels()) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += m.label(i);
    for (std::size_t j = 0; j < n; ++j) {
      out += ",";
      out += full_precision ? fmt_full(m(i, j)) : fmt_fixed(m(i, j), 4);
    }
    out += "\n";
  }
  return out;
}

std::pair<std::size_t, std::size_t> min_off_diagonal(const DissimilarityMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("min_off_diagonal: need at least 2 objects");
  std::pair<std::size_t, std::size_t> best{0, 1};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m(i, j) < m(best.first, best.second)) best = {i, j};
    }
  }
  return best;
}

}  // namespace glyphclust
