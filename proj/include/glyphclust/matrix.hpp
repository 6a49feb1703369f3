#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glyphclust/geometry.hpp"

namespace glyphclust {

/// Labeled symmetric nonnegative dissimilarity matrix with a zero diagonal.
/// Entries are exactly symmetric by construction. These are not metric
/// distances: the triangle inequality is neither required nor checked.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;

  /// Validates symmetry, zero diagonal, finiteness, nonnegativity and label
  /// uniqueness; throws std::invalid_argument otherwise.
  DissimilarityMatrix(std::vector<std::string> labels, std::vector<double> values);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * labels_.size() + j];
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<std::string> labels_;
  std::vector<double> values_;  // row-major size x size
};

struct PairLog {
  std::string a;
  std::string b;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Pairwise dissimilarities for >= 2 shapes with unique labels; each
/// unordered pair is aligned once. A pair whose alignment does not converge
/// raises std::runtime_error naming the pair. `log`, when given, receives
/// one record per unordered pair in row-major pair order regardless of the
/// thread count.
DissimilarityMatrix build_matrix(const std::vector<Shape>& shapes,
                                 const AlignConfig& cfg = {}, int threads = 1,
                                 std::vector<PairLog>* log = nullptr);

/// CSV: header row `,label1,...`; each data row `label_i,v_i1,...`.
/// Accepts `.2329`-style entries and empty or `0` diagonal cells. Rejects
/// ragged rows, asymmetry beyond 1e-12, nonzero diagonals and negative or
/// non-finite entries.
DissimilarityMatrix parse_matrix_csv(const std::string& text);
DissimilarityMatrix load_matrix_csv(const std::string& path);

/// Emits 4 decimals by default (the tables' convention); full_precision
/// round-trips every double exactly.
std::string serialize_matrix_csv(const DissimilarityMatrix& m, bool full_precision = false);

/// Indices (i, j), i < j, of the smallest off-diagonal entry; ties resolve
/// to the first pair in row-major order. Requires size >= 2.
std::pair<std::size_t, std::size_t> min_off_diagonal(const DissimilarityMatrix& m);

}  // namespace glyphclust
