#include "glyphclust/exact.hpp"

#include <algorithm>
#include <climits>
#include <limits>
#include <map>

namespace glyphclust {

Partition Partition::from_assignment(const std::vector<int>& raw) {
  Partition p;
  p.assignment.reserve(raw.size());
  std::map<int, int> relabel;
  for (int c : raw) {
    auto [it, fresh] = relabel.emplace(c, static_cast<int>(relabel.size()));
    p.assignment.push_back(it->second);
    (void)fresh;
  }
  p.k = static_cast<int>(relabel.size());
  return p;
}

Partition Partition::from_clusters(const std::vector<std::vector<int>>& clusters, int n) {
  std::vector<int> raw(n, -1);
  int c = 0;
  for (const auto& cl : clusters) {
    if (cl.empty()) throw std::invalid_argument("partition: empty cluster");
    for (int i : cl) {
      if (i < 0 || i >= n) throw std::invalid_argument("partition: object index out of range");
      if (raw[i] != -1) throw std::invalid_argument("partition: object assigned twice");
      raw[i] = c;
    }
    ++c;
  }
  for (int i = 0; i < n; ++i) {
    if (raw[i] == -1) throw std::invalid_argument("partition: object missing from clusters");
  }
  return from_assignment(raw);
}

std::vector<std::vector<int>> Partition::clusters() const {
  std::vector<std::vector<int>> out(k);
  for (int i = 0; i < size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

CostCriterion parse_criterion(std::string_view token) {
  if (token.size() != 2) throw std::invalid_argument("criterion: expected e.g. '4b'");
  CostCriterion c;
  switch (token[0]) {
    case '1': c.per_cluster = PerClusterCost::MaxPair; break;
    case '2': c.per_cluster = PerClusterCost::SumPair; break;
    case '3': c.per_cluster = PerClusterCost::MinStarSum; break;
    case '4': c.per_cluster = PerClusterCost::MinStarMean; break;
    default: throw std::invalid_argument("criterion: per-cluster part must be 1..4");
  }
  switch (token[1]) {
    case 'a': c.combiner = CostCombiner::Sum; break;
    case 'b': c.combiner = CostCombiner::Max; break;
    default: throw std::invalid_argument("criterion: combiner part must be 'a' or 'b'");
  }
  return c;
}

std::string criterion_name(CostCriterion crit) {
  std::string s;
  switch (crit.per_cluster) {
    case PerClusterCost::MaxPair: s = "1"; break;
    case PerClusterCost::SumPair: s = "2"; break;
    case PerClusterCost::MinStarSum: s = "3"; break;
    case PerClusterCost::MinStarMean: s = "4"; break;
  }
  s += crit.combiner == CostCombiner::Sum ? "a" : "b";
  return s;
}

ClusterCost cluster_cost(const std::vector<int>& members, const DissimilarityMatrix& m,
                         CostCriterion crit) {
  if (members.empty()) throw std::invalid_argument("cluster_cost: empty cluster");
  for (int i : members) {
    if (i < 0 || static_cast<std::size_t>(i) >= m.size()) {
      throw std::invalid_argument("cluster_cost: index out of range");
    }
  }
  const std::size_t sz = members.size();

  // The star center minimises the sum (equivalently the mean) of
  // dissimilarities to the other members; ties go to the lowest index.
  double best_sum = std::numeric_limits<double>::infinity();
  int model = members[0];
  std::vector<int> sorted = members;
  std::sort(sorted.begin(), sorted.end());
  for (int o : sorted) {
    double sum = 0.0;
    for (int x : sorted) {
      if (x != o) sum += m(o, x);
    }
    if (sum < best_sum) {
      best_sum = sum;
      model = o;
    }
  }
  if (sz == 1) return {0.0, model};

  double cost = 0.0;
  switch (crit.per_cluster) {
    case PerClusterCost::MaxPair: {
      for (std::size_t i = 0; i < sz; ++i) {
        for (std::size_t j = i + 1; j < sz; ++j) {
          cost = std::max(cost, m(sorted[i], sorted[j]));
        }
      }
      break;
    }
    case PerClusterCost::SumPair: {
      for (std::size_t i = 0; i < sz; ++i) {
        for (std::size_t j = i + 1; j < sz; ++j) cost += m(sorted[i], sorted[j]);
      }
      break;
    }
    case PerClusterCost::MinStarSum:
      cost = best_sum;
      break;
    case PerClusterCost::MinStarMean:
      cost = best_sum / static_cast<double>(sz - 1);
      break;
  }
  return {cost, model};
}

EvaluatedClustering clustering_cost(const Partition& p, const DissimilarityMatrix& m,
                                    CostCriterion crit) {
  if (p.size() != static_cast<int>(m.size())) {
    throw std::invalid_argument("clustering_cost: partition size does not match matrix");
  }
  EvaluatedClustering ev;
  ev.partition = p;
  const auto clusters = p.clusters();
  ev.cluster_costs.reserve(clusters.size());
  ev.models.reserve(clusters.size());
  double total = crit.combiner == CostCombiner::Sum ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& cl : clusters) {
    const ClusterCost cc = cluster_cost(cl, m, crit);
    ev.cluster_costs.push_back(cc.cost);
    ev.models.push_back(cc.model);
    if (crit.combiner == CostCombiner::Sum) {
      total += cc.cost;
    } else {
      total = std::max(total, cc.cost);
    }
  }
  ev.total = total;
  return ev;
}

unsigned long long stirling2(int n, int k) {
  if (n < 0 || k < 0) throw std::invalid_argument("stirling2: negative argument");
  if (k > n) return 0;
  if (k == 0) return n == 0 ? 1 : 0;
  // S(n,k) = k S(n-1,k) + S(n-1,k-1), saturating on overflow.
  std::vector<unsigned long long> row(k + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = std::min(i, k); j >= 1; --j) {
      const unsigned long long a = row[j];
      const unsigned long long b = j > 0 ? row[j - 1] : 0;
      unsigned long long v;
      if (a != 0 && a > (ULLONG_MAX - b) / static_cast<unsigned long long>(j)) {
        v = ULLONG_MAX;
      } else {
        v = a * static_cast<unsigned long long>(j) + b;
        if (v < b) v = ULLONG_MAX;
      }
      row[j] = v;
    }
    row[0] = 0;
  }
  return row[k];
}

void enumerate_partitions(int n, int k, const std::function<void(const Partition&)>& visit) {
  if (n < 1) throw std::invalid_argument("enumerate_partitions: n must be >= 1");
  if (k < 1 || k > n) {
    throw std::invalid_argument("enumerate_partitions: need 1 <= k <= n");
  }
  Partition p;
  p.assignment.assign(n, 0);
  p.k = k;
  // Depth-first over restricted-growth strings, pruned so the remaining
  // positions can still introduce enough new clusters to reach k.
  auto rec = [&](auto&& self, int i, int mx) -> void {
    if (i == n) {
      if (mx + 1 == k) visit(p);
      return;
    }
    const int hi = std::min(mx + 1, k - 1);
    for (int v = 0; v <= hi; ++v) {
      const int new_mx = std::max(mx, v);
      if ((k - 1) - new_mx <= (n - 1) - i) {
        p.assignment[i] = v;
        self(self, i + 1, new_mx);
      }
    }
  };
  rec(rec, 1, 0);
}

std::vector<EvaluatedClustering> optimal_clustering(const DissimilarityMatrix& m, int k,
                                                    CostCriterion crit, int top_m,
                                                    unsigned long long budget) {
  const int n = static_cast<int>(m.size());
  if (k < 1 || k > n) throw std::invalid_argument("optimal_clustering: need 1 <= k <= n");
  if (top_m < 1) throw std::invalid_argument("optimal_clustering: top_m must be >= 1");
  const unsigned long long count = stirling2(n, k);
  if (count > budget) {
    throw EnumerationBudgetError(
        "optimal_clustering: S(" + std::to_string(n) + "," + std::to_string(k) + ") = " +
        std::to_string(count) + " partitions exceed the enumeration budget of " +
        std::to_string(budget) + "; use hierarchical clustering instead");
  }

  // Bounded selection: the heap top is the worst kept entry under the
  // (total, lexicographic assignment) order.
  auto better = [](const EvaluatedClustering& a, const EvaluatedClustering& b) {
    if (a.total != b.total) return a.total < b.total;
    return a.partition.assignment < b.partition.assignment;
  };
  std::vector<EvaluatedClustering> heap;
  heap.reserve(top_m + 1);
  enumerate_partitions(n, k, [&](const Partition& p) {
    EvaluatedClustering ev = clustering_cost(p, m, crit);
    if (heap.size() < static_cast<std::size_t>(top_m)) {
      heap.push_back(std::move(ev));
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(ev, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = std::move(ev);
      std::push_heap(heap.begin(), heap.end(), better);
    }
  });
  std::sort(heap.begin(), heap.end(), better);
  return heap;
}

}  // namespace glyphclust
