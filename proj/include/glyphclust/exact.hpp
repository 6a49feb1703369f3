#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "glyphclust/matrix.hpp"

namespace glyphclust {

/// Assignment of N objects to k clusters in restricted-growth normal form:
/// assignment[0] == 0 and each value exceeds the running maximum by at most
/// one, so every set partition has exactly one representative.
struct Partition {
  std::vector<int> assignment;
  int k = 0;

  /// Relabels an arbitrary assignment into normal form.
  static Partition from_assignment(const std::vector<int>& raw);
  /// Builds from explicit clusters over objects 0..n-1 (must cover all).
  static Partition from_clusters(const std::vector<std::vector<int>>& clusters, int n);

  int size() const { return static_cast<int>(assignment.size()); }
  std::vector<std::vector<int>> clusters() const;

  bool operator==(const Partition& o) const = default;
};

enum class PerClusterCost {
  MaxPair,      // criterion 1: largest within-cluster dissimilarity
  SumPair,      // criterion 2: sum of within-cluster dissimilarities
  MinStarSum,   // criterion 3: smallest per-object sum of dissimilarities to the rest
  MinStarMean,  // criterion 4: smallest per-object mean of dissimilarities to the rest
};

enum class CostCombiner { Sum, Max };

struct CostCriterion {
  PerClusterCost per_cluster = PerClusterCost::MinStarMean;
  CostCombiner combiner = CostCombiner::Max;

  bool operator==(const CostCriterion&) const = default;
};

/// Parses tokens like "4b" or "1a"; throws std::invalid_argument otherwise.
CostCriterion parse_criterion(std::string_view token);
std::string criterion_name(CostCriterion crit);

struct ClusterCost {
  double cost = 0.0;
  /// The star center: member minimising the mean dissimilarity to the other
  /// members (ties to the lowest index). Singletons have cost 0 and are
  /// their own model.
  int model = -1;
};

ClusterCost cluster_cost(const std::vector<int>& members, const DissimilarityMatrix& m,
                         CostCriterion crit);

struct EvaluatedClustering {
  Partition partition;
  std::vector<double> cluster_costs;
  std::vector<int> models;
  double total = 0.0;
};

EvaluatedClustering clustering_cost(const Partition& p, const DissimilarityMatrix& m,
                                    CostCriterion crit);

/// Stirling number of the second kind S(n, k); saturates at ULLONG_MAX.
unsigned long long stirling2(int n, int k);

/// Visits every partition of n objects into exactly k nonempty clusters in
/// lexicographic restricted-growth-string order. Throws std::invalid_argument
/// unless 1 <= k <= n.
void enumerate_partitions(int n, int k, const std::function<void(const Partition&)>& visit);

struct EnumerationBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The top_m clusterings of lowest total cost, ascending, ties broken by
/// lexicographic partition order. Throws EnumerationBudgetError when
/// S(n, k) exceeds the budget (use hierarchical clustering instead).
std::vector<EvaluatedClustering> optimal_clustering(const DissimilarityMatrix& m, int k,
                                                    CostCriterion crit, int top_m = 1,
                                                    unsigned long long budget = 100000000ULL);

}  // namespace glyphclust
