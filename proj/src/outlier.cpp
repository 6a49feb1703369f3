#include "glyphclust/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "glyphclust/hier.hpp"
#include "glyphclust/textfmt.hpp"

namespace glyphclust {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// k-th value of the splitmix64 stream with the given seed; counter-based,
// so any sample can be produced independently of the rest.
double uniform_at(std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t z = mix64(seed + (k + 1) * kGolden);
  return (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Acklam's rational approximation to the standard normal quantile, sharpened
// with one Halley step; accurate to close to machine precision.
double inv_norm_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (p <= 1.0 - plow) {
    const double r = p - 0.5;
    const double s = r * r;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  } else {
    const double r = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace

DixonResult dixon_q(const std::vector<double>& data, double suspect) {
  if (data.empty()) throw std::invalid_argument("dixon_q: empty data");
  std::vector<double> all = data;
  all.push_back(suspect);
  std::sort(all.begin(), all.end());
  DixonResult r;
  r.n = static_cast<int>(all.size());
  if (r.n < 3) return r;  // applicable stays false
  const double range = all.back() - all.front();
  if (range == 0.0) throw std::invalid_argument("dixon_q: zero range");
  r.q = (all[r.n - 1] - all[r.n - 2]) / range;
  r.applicable = true;
  return r;
}

DixonSampler::DixonSampler(long long mc_samples, std::uint64_t seed, int threads)
    : mc_samples_(mc_samples), seed_(seed), threads_(std::max(1, threads)) {
  if (mc_samples < 1) throw std::invalid_argument("DixonSampler: mc_samples must be >= 1");
}

const std::vector<double>& DixonSampler::samples(int n) {
  auto it = sorted_q_.find(n);
  if (it != sorted_q_.end()) return it->second;

  std::vector<double> q(static_cast<std::size_t>(mc_samples_));
  const std::uint64_t stream = mix64(seed_ + static_cast<std::uint64_t>(n) * 0xD1B54A32D192ED03ULL);
  auto fill = [&](long long lo, long long hi) {
    for (long long s = lo; s < hi; ++s) {
      double hi1 = -std::numeric_limits<double>::infinity();  // largest
      double hi2 = hi1;                                       // second largest
      double lo1 = std::numeric_limits<double>::infinity();   // smallest
      const std::uint64_t base = static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(n);
      for (int j = 0; j < n; ++j) {
        const double x = inv_norm_cdf(uniform_at(stream, base + j));
        if (x > hi1) {
          hi2 = hi1;
          hi1 = x;
        } else if (x > hi2) {
          hi2 = x;
        }
        if (x < lo1) lo1 = x;
      }
      q[static_cast<std::size_t>(s)] = (hi1 - hi2) / (hi1 - lo1);
    }
  };
  if (threads_ == 1 || mc_samples_ < 4096) {
    fill(0, mc_samples_);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (mc_samples_ + threads_ - 1) / threads_;
    for (int t = 0; t < threads_; ++t) {
      const long long lo = t * chunk;
      const long long hi = std::min<long long>(mc_samples_, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(fill, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  std::sort(q.begin(), q.end());
  return sorted_q_.emplace(n, std::move(q)).first->second;
}

double DixonSampler::pvalue(double q, int n) {
  if (n < 3) throw std::invalid_argument("dixon_pvalue: n must be >= 3");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("dixon_pvalue: q must be in [0,1]");
  const std::vector<double>& s = samples(n);
  const auto it = std::lower_bound(s.begin(), s.end(), q);
  return static_cast<double>(s.end() - it) / static_cast<double>(mc_samples_);
}

double dixon_pvalue(double q, int n, long long mc_samples, std::uint64_t seed, int threads) {
  DixonSampler sampler(mc_samples, seed, threads);
  return sampler.pvalue(q, n);
}

MembershipVerdict test_membership(int candidate, const std::vector<int>& target,
                                  const DissimilarityMatrix& m, const OutlierConfig& cfg,
                                  DixonSampler& sampler) {
  if (target.empty()) throw std::invalid_argument("test_membership: empty target");
  if (candidate < 0 || static_cast<std::size_t>(candidate) >= m.size()) {
    throw std::invalid_argument("test_membership: candidate out of range");
  }
  for (int x : target) {
    if (x < 0 || static_cast<std::size_t>(x) >= m.size()) {
      throw std::invalid_argument("test_membership: target index out of range");
    }
    if (x == candidate) throw std::invalid_argument("test_membership: candidate inside target");
  }
  if (!(cfg.ratio >= 1.0)) throw std::invalid_argument("test_membership: ratio must be >= 1");

  MembershipVerdict v;
  v.candidate = candidate;
  v.model = cluster_cost(target, m, {PerClusterCost::MinStarMean, CostCombiner::Max}).model;
  v.suspect = m(candidate, v.model);

  if (target.size() == 1) {
    // No internal distance exists, so no rule can run at all.
    v.testable = false;
    v.admissible = false;
    v.reason = VerdictReason::TargetTooSmall;
    return v;
  }

  std::vector<double> data;
  data.reserve(target.size() - 1);
  for (int x : target) {
    if (x != v.model) data.push_back(m(x, v.model));
  }
  const double maxd = *std::max_element(data.begin(), data.end());

  v.testable = true;
  if (v.suspect <= maxd) {
    v.admissible = true;
    v.reason = VerdictReason::BelowClusterMax;
    return v;
  }
  if (data.size() >= 2) {
    const DixonResult dq = dixon_q(data, v.suspect);
    v.q = dq.q;
    v.n = dq.n;
    v.p_value = sampler.pvalue(dq.q, dq.n);
    v.admissible = v.p_value >= cfg.alpha;
    v.reason = v.admissible ? VerdictReason::DixonAccept : VerdictReason::DixonReject;
    return v;
  }
  // Two-member target: Dixon needs more references, fall back to the
  // control-group variability bound.
  double min_internal = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < target.size(); ++i) {
    for (std::size_t j = i + 1; j < target.size(); ++j) {
      min_internal = std::min(min_internal, m(target[i], target[j]));
    }
  }
  v.fallback_bound = cfg.ratio * min_internal;
  v.admissible = v.suspect <= v.fallback_bound;
  v.reason = VerdictReason::TargetTooSmall;
  return v;
}

MembershipVerdict test_membership(int candidate, const std::vector<int>& target,
                                  const DissimilarityMatrix& m, const OutlierConfig& cfg) {
  DixonSampler sampler(cfg.mc_samples, cfg.seed, cfg.threads);
  return test_membership(candidate, target, m, cfg, sampler);
}

ClusterSummary summarize_cluster(std::string name, const std::vector<int>& members,
                                 const DissimilarityMatrix& m) {
  ClusterSummary s;
  s.name = std::move(name);
  s.members = members;
  std::sort(s.members.begin(), s.members.end());
  s.model = cluster_cost(s.members, m, {PerClusterCost::MinStarMean, CostCombiner::Max}).model;
  if (s.members.size() >= 2) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int x : s.members) {
      if (x == s.model) continue;
      const double d = m(x, s.model);
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    s.mean = sum / static_cast<double>(s.members.size() - 1);
    s.min = lo;
    s.max = hi;
    s.max_over_min = hi / lo;
  }
  return s;
}

ValidationReport validate_clusters(const Partition& initial, const DissimilarityMatrix& m,
                                   const OutlierConfig& cfg) {
  if (initial.size() != static_cast<int>(m.size())) {
    throw std::invalid_argument("validate_clusters: partition size does not match matrix");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw std::invalid_argument("validate_clusters: alpha must be in [0,1]");
  }
  DixonSampler sampler(cfg.mc_samples, cfg.seed, cfg.threads);

  struct Live {
    std::string name;
    std::vector<int> members;
  };
  std::vector<Live> live;
  {
    const auto clusters = initial.clusters();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      Live l{std::to_string(c + 1), clusters[c]};
      std::sort(l.members.begin(), l.members.end());
      live.push_back(std::move(l));
    }
  }

  ValidationReport report;
  report.initial = initial;
  report.alpha = cfg.alpha;
  report.ratio = cfg.ratio;
  report.mc_samples = cfg.mc_samples;
  report.seed = cfg.seed;
  for (const Live& l : live) {
    report.initial_clusters.push_back(summarize_cluster(l.name, l.members, m));
  }

  std::set<std::pair<int, std::vector<int>>> seen_rejections;
  auto test_direction = [&](const Live& from, const Live& to, bool& all_ok, bool& any_tested,
                            bool& used_dixon) {
    for (int candidate : from.members) {
      const MembershipVerdict v = test_membership(candidate, to.members, m, cfg, sampler);
      if (v.reason == VerdictReason::DixonReject) {
        if (seen_rejections.emplace(candidate, to.members).second) {
          report.rejections.push_back(
              {candidate, from.name, to.name, to.members, v.q, v.n, v.p_value});
        }
      }
      if (v.testable) any_tested = true;
      if (v.reason == VerdictReason::DixonAccept) used_dixon = true;
      if (v.testable && !v.admissible) all_ok = false;
    }
  };

  while (live.size() > 1) {
    struct Candidate {
      bool used_dixon;
      double avg;
      std::size_t x, y;
    };
    std::optional<Candidate> best;
    for (std::size_t x = 0; x < live.size(); ++x) {
      for (std::size_t y = x + 1; y < live.size(); ++y) {
        bool all_ok = true, any_tested = false, used_dixon = false;
        test_direction(live[x], live[y], all_ok, any_tested, used_dixon);
        test_direction(live[y], live[x], all_ok, any_tested, used_dixon);
        if (!all_ok || !any_tested) continue;
        const double avg = linkage_distance(live[x].members, live[y].members, m, Linkage::Average);
        const Candidate cand{used_dixon, avg, x, y};
        const auto key = [](const Candidate& c) {
          return std::make_tuple(c.used_dixon ? 1 : 0, c.avg, c.x, c.y);
        };
        if (!best || key(cand) < key(*best)) best = cand;
      }
    }
    if (!best) break;

    Live merged;
    merged.name = live[best->x].name + "+" + live[best->y].name;
    merged.members = live[best->x].members;
    merged.members.insert(merged.members.end(), live[best->y].members.begin(),
                          live[best->y].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    const int model =
        cluster_cost(merged.members, m, {PerClusterCost::MinStarMean, CostCombiner::Max}).model;
    report.merges.push_back({live[best->x].name, live[best->y].name, merged.name,
                             live[best->x].members, live[best->y].members, best->avg, model,
                             best->used_dixon});
    live[best->x] = std::move(merged);
    live.erase(live.begin() + best->y);
  }

  std::vector<std::vector<int>> final_clusters;
  std::sort(live.begin(), live.end(),
            [](const Live& a, const Live& b) { return a.members.front() < b.members.front(); });
  for (const Live& l : live) {
    final_clusters.push_back(l.members);
    report.final_clusters.push_back(summarize_cluster(l.name, l.members, m));
  }
  report.final = Partition::from_clusters(final_clusters, initial.size());
  return report;
}

namespace {

std::string member_list(const std::vector<int>& members, const DissimilarityMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += " ";
    out += m.label(members[i]);
  }
  return out;
}

std::string stat_or_dash(double v) {
  return std::isnan(v) ? std::string("-") : fmt_fixed(v, 4);
}

void summary_lines(std::ostringstream& out, const std::vector<ClusterSummary>& clusters,
                   const DissimilarityMatrix& m) {
  for (const ClusterSummary& c : clusters) {
    out << "  " << c.name << ": model=" << m.label(c.model) << "  mean=" << stat_or_dash(c.mean)
        << "  min=" << stat_or_dash(c.min) << "  max=" << stat_or_dash(c.max)
        << "  max/min=" << stat_or_dash(c.max_over_min) << "  members: " << member_list(c.members, m)
        << "\n";
  }
}

}  // namespace

std::string report_text(const ValidationReport& report, const DissimilarityMatrix& m) {
  std::ostringstream out;
  out << "cluster validation  alpha=" << fmt_fixed(report.alpha, 4)
      << "  ratio=" << fmt_fixed(report.ratio, 4) << "  mc-samples=" << report.mc_samples
      << "  seed=" << report.seed << "\n\n";
  out << "initial clusters:\n";
  summary_lines(out, report.initial_clusters, m);
  out << "\nmerges:\n";
  if (report.merges.empty()) out << "  (none)\n";
  for (const MergeEvent& e : report.merges) {
    out << "  " << e.from_name << " + " << e.into_name << " -> " << e.new_name
        << "  (average linkage " << fmt_fixed(e.avg_linkage, 4) << ", model "
        << m.label(e.new_model) << ")\n";
  }
  out << "\nrejections (Dixon, p < alpha):\n";
  if (report.rejections.empty()) out << "  (none)\n";
  for (const RejectionRow& r : report.rejections) {
    out << "  " << m.label(r.candidate) << "  from " << r.from_name << "  to " << r.to_name
        << "  p=" << fmt_fixed(r.p_value, 4) << "\n";
  }
  out << "\nfinal clusters:\n";
  summary_lines(out, report.final_clusters, m);
  return out.str();
}

std::string report_json(const ValidationReport& report, const DissimilarityMatrix& m) {
  nlohmann::json j;
  j["alpha"] = report.alpha;
  j["ratio"] = report.ratio;
  j["mc_samples"] = report.mc_samples;
  j["seed"] = report.seed;

  auto cluster_json = [&](const ClusterSummary& c) {
    nlohmann::json out;
    out["name"] = c.name;
    out["model"] = m.label(c.model);
    nlohmann::json members = nlohmann::json::array();
    for (int x : c.members) members.push_back(m.label(x));
    out["members"] = members;
    if (!std::isnan(c.mean)) {
      out["mean"] = c.mean;
      out["min"] = c.min;
      out["max"] = c.max;
      out["max_over_min"] = c.max_over_min;
    }
    return out;
  };

  j["initial"] = nlohmann::json::array();
  for (const auto& c : report.initial_clusters) j["initial"].push_back(cluster_json(c));
  j["merges"] = nlohmann::json::array();
  for (const MergeEvent& e : report.merges) {
    j["merges"].push_back({{"from", e.from_name},
                           {"into", e.into_name},
                           {"name", e.new_name},
                           {"average_linkage", e.avg_linkage},
                           {"model", m.label(e.new_model)},
                           {"used_dixon", e.used_dixon}});
  }
  j["rejections"] = nlohmann::json::array();
  for (const RejectionRow& r : report.rejections) {
    j["rejections"].push_back({{"candidate", m.label(r.candidate)},
                               {"from", r.from_name},
                               {"to", r.to_name},
                               {"q", r.q},
                               {"n", r.n},
                               {"p_value", r.p_value}});
  }
  j["final"] = nlohmann::json::array();
  for (const auto& c : report.final_clusters) j["final"].push_back(cluster_json(c));
  return j.dump(2) + "\n";
}

}  // namespace glyphclust
