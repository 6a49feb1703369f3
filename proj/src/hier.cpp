#include "glyphclust/hier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "glyphclust/textfmt.hpp"

namespace glyphclust {

Linkage parse_linkage(std::string_view token) {
  if (token == "single") return Linkage::Single;
  if (token == "complete") return Linkage::Complete;
  if (token == "average") return Linkage::Average;
  throw std::invalid_argument("linkage: expected single, complete or average");
}

std::string linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "?";
}

double linkage_distance(const std::vector<int>& c1, const std::vector<int>& c2,
                        const DissimilarityMatrix& m, Linkage l) {
  if (c1.empty() || c2.empty()) throw std::invalid_argument("linkage_distance: empty cluster");
  std::set<int> seen(c1.begin(), c1.end());
  for (int j : c2) {
    if (seen.count(j)) throw std::invalid_argument("linkage_distance: clusters overlap");
  }
  double acc = l == Linkage::Single ? std::numeric_limits<double>::infinity()
             : l == Linkage::Complete ? 0.0
                                      : 0.0;
  for (int i : c1) {
    for (int j : c2) {
      const double d = m(i, j);
      switch (l) {
        case Linkage::Single: acc = std::min(acc, d); break;
        case Linkage::Complete: acc = std::max(acc, d); break;
        case Linkage::Average: acc += d; break;
      }
    }
  }
  if (l == Linkage::Average) acc /= static_cast<double>(c1.size() * c2.size());
  return acc;
}

Dendrogram agglomerate(const DissimilarityMatrix& m, Linkage l) {
  const int n = static_cast<int>(m.size());
  if (n < 2) throw std::invalid_argument("agglomerate: need at least 2 objects");

  Dendrogram d;
  d.n = n;
  d.merges.reserve(n - 1);

  struct Active {
    int id;
    int size;
  };
  std::vector<Active> active;
  active.reserve(n);
  for (int i = 0; i < n; ++i) active.push_back({i, 1});

  // Distances between active clusters, keyed by node-id pair, maintained
  // with Lance-Williams updates (exact for these three linkages).
  const int total_nodes = 2 * n - 1;
  std::vector<double> dist(static_cast<std::size_t>(total_nodes) * total_nodes, 0.0);
  auto dref = [&](int a, int b) -> double& { return dist[a * total_nodes + b]; };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) dref(i, j) = dref(j, i) = m(i, j);
  }

  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const int a = std::min(active[x].id, active[y].id);
        const int b = std::max(active[x].id, active[y].id);
        const double v = dref(a, b);
        if (v < best || (v == best && (a < bi || (a == bi && b < bj)))) {
          best = v;
          bi = a;
          bj = b;
        }
      }
    }

    const int new_id = n + step;
    d.merges.push_back({bi, bj, best});

    int size_i = 0, size_j = 0;
    for (const Active& a : active) {
      if (a.id == bi) size_i = a.size;
      if (a.id == bj) size_j = a.size;
    }
    for (const Active& a : active) {
      if (a.id == bi || a.id == bj) continue;
      const double di = dref(std::min(a.id, bi), std::max(a.id, bi));
      const double dj = dref(std::min(a.id, bj), std::max(a.id, bj));
      double v = 0.0;
      switch (l) {
        case Linkage::Single: v = std::min(di, dj); break;
        case Linkage::Complete: v = std::max(di, dj); break;
        case Linkage::Average:
          v = (size_i * di + size_j * dj) / static_cast<double>(size_i + size_j);
          break;
      }
      dref(std::min(a.id, new_id), std::max(a.id, new_id)) = v;
      dref(std::max(a.id, new_id), std::min(a.id, new_id)) = v;
    }
    std::erase_if(active, [&](const Active& a) { return a.id == bi || a.id == bj; });
    active.push_back({new_id, size_i + size_j});
  }
  return d;
}

std::vector<std::vector<int>> leaves_per_node(const Dendrogram& d) {
  std::vector<std::vector<int>> out(2 * d.n - 1);
  for (int i = 0; i < d.n; ++i) out[i] = {i};
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    const Merge& mg = d.merges[t];
    auto& node = out[d.n + t];
    node = out[mg.left];
    node.insert(node.end(), out[mg.right].begin(), out[mg.right].end());
    std::sort(node.begin(), node.end());
  }
  return out;
}

Partition cut(const Dendrogram& d, double height) {
  if (height < 0.0) throw std::invalid_argument("cut: height must be >= 0");
  std::vector<int> parent(2 * d.n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // Representative leaf for each node, so kept merges can union through
  // dropped subtrees without caring about order.
  std::vector<int> rep(2 * d.n - 1, -1);
  for (int i = 0; i < d.n; ++i) rep[i] = i;
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    const Merge& mg = d.merges[t];
    rep[d.n + t] = rep[mg.left];
    if (mg.height <= height) parent[find(rep[mg.left])] = find(rep[mg.right]);
  }
  std::vector<int> raw(d.n);
  for (int i = 0; i < d.n; ++i) raw[i] = find(i);
  return Partition::from_assignment(raw);
}

CalibrationRatio calibrate(std::string glyph, std::vector<double> distances) {
  if (distances.size() < 2) throw std::invalid_argument("calibrate: need at least 2 distances");
  double lo = distances[0], hi = distances[0], sum = 0.0;
  for (double v : distances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("calibrate: distances must be positive (glyph '" + glyph + "')");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  CalibrationRatio r;
  r.glyph = std::move(glyph);
  r.mean = sum / static_cast<double>(distances.size());
  r.ratio = hi / lo;
  r.distances_to_model = std::move(distances);
  return r;
}

std::vector<CalibrationRatio> parse_control_file(const std::string& text) {
  std::vector<CalibrationRatio> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label)) continue;
    std::vector<double> dists;
    double v;
    while (ls >> v) dists.push_back(v);
    if (!ls.eof()) throw std::invalid_argument("control file: bad number in row '" + label + "'");
    rows.push_back(calibrate(label, std::move(dists)));
  }
  if (rows.empty()) throw std::invalid_argument("control file: no rows");
  return rows;
}

std::vector<CalibrationRatio> load_control_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open control file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_control_file(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

double max_control_ratio(const std::vector<CalibrationRatio>& rows) {
  if (rows.empty()) throw std::invalid_argument("max_control_ratio: no rows");
  double best = rows[0].ratio;
  for (const auto& r : rows) best = std::max(best, r.ratio);
  return best;
}

double calibrated_cut_height(const DissimilarityMatrix& m, double ratio) {
  if (ratio < 1.0) throw std::invalid_argument("calibrated_cut_height: ratio must be >= 1");
  const auto [i, j] = min_off_diagonal(m);
  return ratio * m(i, j);
}

std::string serialize_dendrogram(const Dendrogram& d) {
  std::string out;
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    const Merge& mg = d.merges[t];
    out += std::to_string(d.n + t) + " " + std::to_string(mg.left) + " " +
           std::to_string(mg.right) + " " + fmt_full(mg.height) + "\n";
  }
  return out;
}

namespace {

std::string newick_node(const Dendrogram& d, const std::vector<std::string>& labels, int node,
                        double parent_height) {
  if (node < d.n) {
    return labels[node] + ":" + fmt_fixed(parent_height, 6);
  }
  const Merge& mg = d.merges[node - d.n];
  std::string s = "(" + newick_node(d, labels, mg.left, mg.height) + "," +
                  newick_node(d, labels, mg.right, mg.height) + ")";
  if (parent_height > 0.0) s += ":" + fmt_fixed(parent_height - mg.height, 6);
  return s;
}

}  // namespace

std::string to_newick(const Dendrogram& d, const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != d.n) {
    throw std::invalid_argument("to_newick: label count does not match dendrogram");
  }
  return newick_node(d, labels, 2 * d.n - 2, 0.0) + ";\n";
}

}  // namespace glyphclust
