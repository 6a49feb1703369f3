#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glyphclust/matrix.hpp"

namespace glyphclust {

/// Least-squares non-decreasing fit (pool adjacent violators). Input must
/// already be ordered by ascending dissimilarity; idempotent.
std::vector<double> isotonic_fit(const std::vector<double>& values);

/// sqrt( sum (f(d) - dhat)^2 / sum dhat^2 ). All-zero dhat is an error.
double kruskal_stress(const std::vector<double>& disparities, const std::vector<double>& dhat);

enum class MdsInit { ClassicalScaling, Random };

struct MdsConfig {
  int dim = 2;  // 2 or 3
  MdsInit init = MdsInit::ClassicalScaling;
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-9;  // relative stress change
  int restarts = 1;   // restart r > 0 uses Random init with seed + r
};

struct Embedding {
  int dim = 2;
  std::vector<double> coords;  // row-major n x dim
  double stress = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Stress after the initial configuration and after each accepted update;
  /// non-increasing by construction.
  std::vector<double> stress_history;
  /// Diagnostic: adjacent order inversions of the embedded distances along
  /// the ascending-dissimilarity pair order. Monotonicity is guaranteed for
  /// the fitted disparities, not for the raw embedded distances.
  int dhat_order_violations = 0;
};

/// Kruskal non-metric MDS: alternates an isotonic disparity fit (pairs
/// ordered by ascending dissimilarity, ties kept in row-major pair order)
/// with majorisation coordinate updates; a step is only accepted when the
/// stress does not increase. Requires n >= dim + 1 and at least one nonzero
/// dissimilarity.
Embedding embed(const DissimilarityMatrix& m, const MdsConfig& cfg = {});

/// Same, from an explicit n x dim starting configuration.
Embedding embed_from(const DissimilarityMatrix& m, const std::vector<double>& init_coords,
                     const MdsConfig& cfg = {});

/// Pairs (i, j), i < j, in row-major order: the order used for disparities.
std::vector<std::pair<int, int>> pair_order(int n);

/// `label,x,y[,z]` rows preceded by a `# stress=... iterations=...` comment.
std::string serialize_embedding_csv(const Embedding& e, const std::vector<std::string>& labels,
                                    bool full_precision = false);

}  // namespace glyphclust
