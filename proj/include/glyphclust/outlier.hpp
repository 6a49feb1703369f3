#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "glyphclust/exact.hpp"
#include "glyphclust/matrix.hpp"

namespace glyphclust {

struct DixonResult {
  double q = std::numeric_limits<double>::quiet_NaN();
  int n = 0;                 // combined sample size, suspect included
  double p_value = std::numeric_limits<double>::quiet_NaN();
  long long mc_samples = 0;
  bool applicable = false;   // false when n < 3
};

/// Q = (x_n - x_{n-1}) / (x_n - x_1) over the sorted sample data + {suspect}.
/// n < 3 yields applicable == false; zero range is an error.
DixonResult dixon_q(const std::vector<double>& data, double suspect);

/// Shared Monte-Carlo sampler for the null distribution of Q over n i.i.d.
/// standard Gaussians. Samples are generated by a counter-based stream, so
/// results are identical for any thread count; per-n sample sets are cached
/// and reused across p-value queries. Not safe for concurrent calls.
class DixonSampler {
 public:
  DixonSampler(long long mc_samples, std::uint64_t seed, int threads = 1);

  /// Monte-Carlo estimate of P(Q >= q) for sample size n >= 3.
  double pvalue(double q, int n);

  long long mc_samples() const { return mc_samples_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const std::vector<double>& samples(int n);

  long long mc_samples_;
  std::uint64_t seed_;
  int threads_;
  std::map<int, std::vector<double>> sorted_q_;  // ascending per n
};

/// One-shot convenience around DixonSampler.
double dixon_pvalue(double q, int n, long long mc_samples, std::uint64_t seed,
                    int threads = 1);

enum class VerdictReason { DixonAccept, DixonReject, BelowClusterMax, TargetTooSmall };

struct MembershipVerdict {
  int candidate = -1;
  double suspect = 0.0;      // dissimilarity of the candidate to the target model
  int model = -1;
  bool admissible = false;
  /// False only when the target is a singleton: no internal distance exists,
  /// so no rule can run at all.
  bool testable = false;
  VerdictReason reason = VerdictReason::TargetTooSmall;
  double q = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double fallback_bound = std::numeric_limits<double>::quiet_NaN();
};

struct OutlierConfig {
  double alpha = 0.05;
  /// Control-group max/min bound used when the target is too small for
  /// Dixon's test; 1.0 is the strictest possible choice.
  double ratio = 1.0;
  long long mc_samples = 1000000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Can `candidate` belong to the target cluster? In order:
///   (i)  suspect <= max distance-to-model inside the target: admissible;
///   (ii) else, with >= 2 reference distances, Dixon's test at cfg.alpha;
///   (iii) else (two-member target) admissible iff
///        suspect <= cfg.ratio * min internal dissimilarity of the target.
/// A singleton target supports none of these and is flagged untestable.
MembershipVerdict test_membership(int candidate, const std::vector<int>& target,
                                  const DissimilarityMatrix& m, const OutlierConfig& cfg,
                                  DixonSampler& sampler);
MembershipVerdict test_membership(int candidate, const std::vector<int>& target,
                                  const DissimilarityMatrix& m, const OutlierConfig& cfg);

struct MergeEvent {
  std::string from_name;
  std::string into_name;
  std::string new_name;
  std::vector<int> members_from;
  std::vector<int> members_into;
  double avg_linkage = 0.0;
  int new_model = -1;
  bool used_dixon = false;  // true when some admissibility needed a Dixon accept
};

struct RejectionRow {
  int candidate = -1;
  std::string from_name;
  std::string to_name;
  std::vector<int> target_members;
  double q = 0.0;
  int n = 0;
  double p_value = 1.0;
};

struct ClusterSummary {
  std::string name;
  std::vector<int> members;
  int model = -1;
  // Distance-to-model statistics; NaN for clusters of fewer than 2 members.
  double mean = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double max_over_min = std::numeric_limits<double>::quiet_NaN();
};

struct ValidationReport {
  Partition initial;
  std::vector<ClusterSummary> initial_clusters;
  std::vector<MergeEvent> merges;
  std::vector<RejectionRow> rejections;  // Dixon rejections only, p < alpha
  Partition final;
  std::vector<ClusterSummary> final_clusters;
  double alpha = 0.05;
  double ratio = 1.0;
  long long mc_samples = 0;
  std::uint64_t seed = 0;
};

/// Repeatedly merges cluster pairs that admit every member of each side into
/// the other (untestable singleton directions do not object, but a merge
/// needs at least one direction that actually ran a rule). Among the
/// mergeable pairs, merges needing no Dixon accept are performed first,
/// then by ascending average-linkage distance. Only coarsens: no initial
/// cluster is ever split.
ValidationReport validate_clusters(const Partition& initial, const DissimilarityMatrix& m,
                                   const OutlierConfig& cfg);

ClusterSummary summarize_cluster(std::string name, const std::vector<int>& members,
                                 const DissimilarityMatrix& m);

std::string report_text(const ValidationReport& report, const DissimilarityMatrix& m);
std::string report_json(const ValidationReport& report, const DissimilarityMatrix& m);

}  // namespace glyphclust
