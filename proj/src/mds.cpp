#include "glyphclust/mds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "glyphclust/textfmt.hpp"

namespace glyphclust {

std::vector<double> isotonic_fit(const std::vector<double>& values) {
  // Pool adjacent violators with unit weights.
  struct Block {
    double mean;
    double weight;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1.0});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.mean * a.weight + b.mean * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) {
    for (int i = 0; i < static_cast<int>(b.weight + 0.5); ++i) out.push_back(b.mean);
  }
  return out;
}

double kruskal_stress(const std::vector<double>& disparities, const std::vector<double>& dhat) {
  if (disparities.size() != dhat.size()) {
    throw std::invalid_argument("kruskal_stress: length mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < dhat.size(); ++i) {
    const double r = disparities[i] - dhat[i];
    num += r * r;
    den += dhat[i] * dhat[i];
  }
  if (den == 0.0) throw std::invalid_argument("kruskal_stress: all embedded distances are zero");
  return std::sqrt(num / den);
}

std::vector<std::pair<int, int>> pair_order(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

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

double uniform_at(std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t z = mix64(seed + (k + 1) * kGolden);
  return (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

std::vector<double> classical_scaling(const DissimilarityMatrix& m, int dim) {
  const int n = static_cast<int>(m.size());
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) b(i, j) = m(i, j) * m(i, j);
  }
  // Double centering: B = -1/2 J D^2 J.
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const double total_mean = b.mean();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (b(i, j) - row_mean(i) - row_mean(j) + total_mean);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  std::vector<double> coords(static_cast<std::size_t>(n) * dim, 0.0);
  for (int d = 0; d < dim; ++d) {
    const int idx = n - 1 - d;  // eigenvalues ascending: take the largest first
    const double lambda = eig.eigenvalues()(idx);
    if (lambda <= 0.0) continue;
    const double scale = std::sqrt(lambda);
    for (int i = 0; i < n; ++i) coords[i * dim + d] = scale * eig.eigenvectors()(i, idx);
  }
  return coords;
}

struct Workspace {
  int n = 0;
  int dim = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> order;  // pair indices sorted by ascending dissimilarity, stable
  std::vector<double> d;   // dissimilarities per pair
};

void distances(const Workspace& w, const std::vector<double>& coords, std::vector<double>& dhat) {
  dhat.resize(w.pairs.size());
  for (std::size_t p = 0; p < w.pairs.size(); ++p) {
    const auto [i, j] = w.pairs[p];
    double s = 0.0;
    for (int d = 0; d < w.dim; ++d) {
      const double diff = coords[i * w.dim + d] - coords[j * w.dim + d];
      s += diff * diff;
    }
    dhat[p] = std::sqrt(s);
  }
}

// Disparities fitted to the embedded distances along the dissimilarity order.
std::vector<double> fit_disparities(const Workspace& w, const std::vector<double>& dhat) {
  std::vector<double> targets(w.order.size());
  for (std::size_t r = 0; r < w.order.size(); ++r) targets[r] = dhat[w.order[r]];
  const std::vector<double> fitted = isotonic_fit(targets);
  std::vector<double> disp(w.order.size());
  for (std::size_t r = 0; r < w.order.size(); ++r) disp[w.order[r]] = fitted[r];
  return disp;
}

// Guttman transform of the configuration against fixed disparities.
std::vector<double> guttman(const Workspace& w, const std::vector<double>& coords,
                            const std::vector<double>& dhat, const std::vector<double>& disp) {
  const int n = w.n, dim = w.dim;
  std::vector<double> ratio(w.pairs.size(), 0.0);
  for (std::size_t p = 0; p < w.pairs.size(); ++p) {
    if (dhat[p] > 0.0) ratio[p] = disp[p] / dhat[p];
  }
  std::vector<double> rowsum(n, 0.0);
  for (std::size_t p = 0; p < w.pairs.size(); ++p) {
    rowsum[w.pairs[p].first] += ratio[p];
    rowsum[w.pairs[p].second] += ratio[p];
  }
  std::vector<double> next(coords.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) next[i * dim + d] = rowsum[i] * coords[i * dim + d];
  }
  for (std::size_t p = 0; p < w.pairs.size(); ++p) {
    const auto [i, j] = w.pairs[p];
    for (int d = 0; d < dim; ++d) {
      next[i * dim + d] -= ratio[p] * coords[j * dim + d];
      next[j * dim + d] -= ratio[p] * coords[i * dim + d];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : next) v *= inv;
  return next;
}

Embedding run(const DissimilarityMatrix& m, std::vector<double> coords, const MdsConfig& cfg) {
  Workspace w;
  w.n = static_cast<int>(m.size());
  w.dim = cfg.dim;
  w.pairs = pair_order(w.n);
  w.d.resize(w.pairs.size());
  for (std::size_t p = 0; p < w.pairs.size(); ++p) w.d[p] = m(w.pairs[p].first, w.pairs[p].second);
  w.order.resize(w.pairs.size());
  std::iota(w.order.begin(), w.order.end(), 0);
  std::stable_sort(w.order.begin(), w.order.end(),
                   [&](int a, int b) { return w.d[a] < w.d[b]; });

  std::vector<double> dhat;
  distances(w, coords, dhat);
  if (*std::max_element(dhat.begin(), dhat.end()) == 0.0) {
    throw std::invalid_argument("mds: degenerate configuration, all points coincide");
  }
  std::vector<double> disp = fit_disparities(w, dhat);
  double stress = kruskal_stress(disp, dhat);

  Embedding e;
  e.dim = cfg.dim;
  e.stress_history.push_back(stress);
  e.converged = false;

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    std::vector<double> next = guttman(w, coords, dhat, disp);
    std::vector<double> next_dhat;
    distances(w, next, next_dhat);
    std::vector<double> next_disp = fit_disparities(w, next_dhat);
    double next_stress = kruskal_stress(next_disp, next_dhat);

    // The majorisation step decreases the raw residual for fixed
    // disparities; the normalised stress can still tick up, so back off
    // toward the previous configuration until it does not.
    int halvings = 0;
    while (next_stress > stress && halvings < 40) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (next[i] + coords[i]);
      distances(w, next, next_dhat);
      next_disp = fit_disparities(w, next_dhat);
      next_stress = kruskal_stress(next_disp, next_dhat);
      ++halvings;
    }
    if (next_stress > stress) {
      e.converged = true;
      break;
    }

    const double drop = stress - next_stress;
    coords = std::move(next);
    dhat = std::move(next_dhat);
    disp = std::move(next_disp);
    stress = next_stress;
    e.stress_history.push_back(stress);

    if (stress <= 1e-14 || drop <= cfg.tol * std::max(stress, 1e-30)) {
      e.converged = true;
      ++iter;
      break;
    }
  }

  e.coords = std::move(coords);
  e.stress = stress;
  e.iterations = iter;
  int violations = 0;
  for (std::size_t r = 1; r < w.order.size(); ++r) {
    if (dhat[w.order[r]] < dhat[w.order[r - 1]]) ++violations;
  }
  e.dhat_order_violations = violations;
  return e;
}

std::vector<double> random_coords(int n, int dim, std::uint64_t seed) {
  std::vector<double> coords(static_cast<std::size_t>(n) * dim);
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = uniform_at(seed, i) - 0.5;
  return coords;
}

void check_input(const DissimilarityMatrix& m, const MdsConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) throw std::invalid_argument("mds: dim must be 2 or 3");
  if (static_cast<int>(m.size()) < cfg.dim + 1) {
    throw std::invalid_argument("mds: need at least dim + 1 objects");
  }
  bool any = false;
  for (double v : m.values()) {
    if (v > 0.0) any = true;
  }
  if (!any) throw std::invalid_argument("mds: all dissimilarities are zero");
  if (cfg.max_iters < 1) throw std::invalid_argument("mds: max_iters must be >= 1");
  if (cfg.restarts < 1) throw std::invalid_argument("mds: restarts must be >= 1");
}

}  // namespace

Embedding embed(const DissimilarityMatrix& m, const MdsConfig& cfg) {
  check_input(m, cfg);
  const int n = static_cast<int>(m.size());
  Embedding best;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> init;
    if (r == 0 && cfg.init == MdsInit::ClassicalScaling) {
      init = classical_scaling(m, cfg.dim);
    } else {
      init = random_coords(n, cfg.dim, cfg.seed + static_cast<std::uint64_t>(r));
    }
    Embedding e = run(m, std::move(init), cfg);
    if (r == 0 || e.stress < best.stress) best = std::move(e);
  }
  return best;
}

Embedding embed_from(const DissimilarityMatrix& m, const std::vector<double>& init_coords,
                     const MdsConfig& cfg) {
  check_input(m, cfg);
  if (init_coords.size() != m.size() * static_cast<std::size_t>(cfg.dim)) {
    throw std::invalid_argument("embed_from: init coords must be n x dim");
  }
  return run(m, init_coords, cfg);
}

std::string serialize_embedding_csv(const Embedding& e, const std::vector<std::string>& labels,
                                    bool full_precision) {
  if (labels.size() * static_cast<std::size_t>(e.dim) != e.coords.size()) {
    throw std::invalid_argument("serialize_embedding_csv: label count does not match coords");
  }
  std::string out = "# stress=" + fmt_full(e.stress) + " iterations=" + std::to_string(e.iterations) + "\n";
  out += e.dim == 2 ? "label,x,y\n" : "label,x,y,z\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    for (int d = 0; d < e.dim; ++d) {
      const double v = e.coords[i * e.dim + d];
      out += ",";
      out += full_precision ? fmt_full(v) : fmt_fixed(v, 6);
    }
    out += "\n";
  }
  return out;
}

}  // namespace glyphclust
