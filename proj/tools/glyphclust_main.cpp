// Command-line pipeline: measure contour dissimilarities, cluster them
// exactly or hierarchically, validate clusters with Dixon's outlier test,
// and embed the objects in the plane with non-metric MDS.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glyphclust/exact.hpp"
#include "glyphclust/geometry.hpp"
#include "glyphclust/hier.hpp"
#include "glyphclust/matrix.hpp"
#include "glyphclust/mds.hpp"
#include "glyphclust/outlier.hpp"
#include "glyphclust/svg.hpp"
#include "glyphclust/textfmt.hpp"

namespace fs = std::filesystem;
using namespace glyphclust;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

Partition load_partition(const std::string& path, const DissimilarityMatrix& m,
                         std::vector<std::vector<int>>* clusters_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition file: " + path);
  std::vector<std::vector<int>> clusters;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<int> cluster;
    std::string label;
    while (ls >> label) {
      const auto idx = m.index_of(label);
      if (!idx) throw std::invalid_argument(path + ": unknown label '" + label + "'");
      cluster.push_back(static_cast<int>(*idx));
    }
    if (!cluster.empty()) clusters.push_back(std::move(cluster));
  }
  if (clusters.empty()) throw std::invalid_argument(path + ": no clusters");
  if (clusters_out) *clusters_out = clusters;
  return Partition::from_clusters(clusters, static_cast<int>(m.size()));
}

std::string cluster_labels(const std::vector<int>& members, const DissimilarityMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += " ";
    out += m.label(members[i]);
  }
  return out;
}

double resolve_ratio(const std::optional<double>& ratio_flag,
                     const std::vector<std::string>& control_files) {
  if (ratio_flag) {
    if (*ratio_flag < 1.0) throw std::invalid_argument("--ratio must be >= 1");
    return *ratio_flag;
  }
  if (control_files.empty()) {
    throw std::invalid_argument("either --ratio or --control is required");
  }
  std::vector<CalibrationRatio> rows;
  for (const auto& f : control_files) {
    for (auto& r : load_control_file(f)) rows.push_back(std::move(r));
  }
  return max_control_ratio(rows);
}

struct MeasureArgs {
  std::vector<std::string> files;
  std::string out = ".";
  int threads = 1;
  double tol = 1e-9;
  int max_iters = 200;
  int rotation_starts = 1;
  bool full_precision = false;
};

int run_measure(const MeasureArgs& a) {
  std::vector<Shape> shapes;
  for (const auto& f : a.files) {
    for (auto& s : load_contours(f)) shapes.push_back(std::move(s));
  }
  if (shapes.size() < 2) throw std::invalid_argument("measure: need at least 2 glyphs");

  AlignConfig cfg{a.tol, a.max_iters, a.rotation_starts};
  std::vector<PairLog> log;
  const DissimilarityMatrix m = build_matrix(shapes, cfg, a.threads, &log);
  for (const PairLog& r : log) {
    std::cout << "pair " << r.a << "," << r.b << ": dissimilarity=" << fmt_full(r.value)
              << " iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
              << "\n";
  }
  const fs::path out = prepare_out_dir(a.out) / "matrix.csv";
  write_file(out, serialize_matrix_csv(m, a.full_precision));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

struct ExactArgs {
  std::string matrix;
  int k = 2;
  std::string criterion = "4b";
  int top = 1;
  unsigned long long budget = 100000000ULL;
  std::string out = ".";
};

int run_exact(const ExactArgs& a) {
  const DissimilarityMatrix m = load_matrix_csv(a.matrix);
  const CostCriterion crit = parse_criterion(a.criterion);
  const auto ranked = optimal_clustering(m, a.k, crit, a.top, a.budget);

  std::cout << "exact clustering  n=" << m.size() << "  k=" << a.k
            << "  criterion=" << criterion_name(crit) << "  top=" << a.top << "\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const EvaluatedClustering& ev = ranked[r];
    std::cout << "rank " << (r + 1) << ": total=" << fmt_fixed(ev.total, 4) << "\n";
    const auto clusters = ev.partition.clusters();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      std::cout << "  cluster " << (c + 1) << ": model=" << m.label(ev.models[c])
                << "  cost=" << fmt_fixed(ev.cluster_costs[c], 4)
                << "  members: " << cluster_labels(clusters[c], m) << "\n";
      for (int x : clusters[c]) {
        if (x == ev.models[c]) continue;
        std::cout << "    " << m.label(x) << ": " << fmt_fixed(m(ev.models[c], x), 4) << "\n";
      }
    }
  }

  const fs::path dir = prepare_out_dir(a.out);
  const auto best_clusters = ranked.front().partition.clusters();
  for (std::size_t c = 0; c < best_clusters.size(); ++c) {
    const fs::path f = dir / ("star_" + std::to_string(c + 1) + ".svg");
    write_file(f, svg_star(best_clusters[c], ranked.front().models[c], m.labels(), m));
    std::cout << "wrote " << f.string() << "\n";
  }
  return 0;
}

struct HierArgs {
  std::string matrix;
  std::string linkage = "average";
  std::optional<double> cut_height;
  std::optional<double> ratio;
  std::vector<std::string> control_files;
  std::string out = ".";
};

int run_hier(const HierArgs& a) {
  const DissimilarityMatrix m = load_matrix_csv(a.matrix);
  const Linkage l = parse_linkage(a.linkage);
  const Dendrogram d = agglomerate(m, l);

  std::cout << "hierarchical clustering  n=" << m.size() << "  linkage=" << linkage_name(l)
            << "\n";
  auto node_name = [&](int id) {
    return id < d.n ? m.label(id) : "#" + std::to_string(id);
  };
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    const Merge& mg = d.merges[t];
    std::cout << "merge " << (t + 1) << ": " << node_name(mg.left) << " + " << node_name(mg.right)
              << " -> #" << (d.n + t) << " @ " << fmt_fixed(mg.height, 4) << "\n";
  }

  std::optional<double> cut_h;
  if (a.cut_height) {
    cut_h = *a.cut_height;
    std::cout << "cut height: " << fmt_fixed(*cut_h, 4) << " (explicit)\n";
  } else if (a.ratio || !a.control_files.empty()) {
    const double ratio = resolve_ratio(a.ratio, a.control_files);
    const auto [i, j] = min_off_diagonal(m);
    cut_h = calibrated_cut_height(m, ratio);
    std::cout << "cut height: " << fmt_fixed(*cut_h, 4) << " (ratio " << fmt_fixed(ratio, 4)
              << " x minimum " << fmt_fixed(m(i, j), 4) << " at " << m.label(i) << "," << m.label(j)
              << ")\n";
  }

  const fs::path dir = prepare_out_dir(a.out);
  write_file(dir / "dendrogram.svg", svg_dendrogram(d, m.labels(), cut_h));
  write_file(dir / "dendrogram.txt", serialize_dendrogram(d));
  write_file(dir / "dendrogram.nwk", to_newick(d, m.labels()));
  std::cout << "wrote " << (dir / "dendrogram.svg").string() << "\n";

  if (cut_h) {
    const Partition p = cut(d, *cut_h);
    std::cout << "clusters at cut (" << p.k << "):\n";
    std::string partition_text;
    const auto clusters = p.clusters();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      std::cout << "  " << (c + 1) << ": " << cluster_labels(clusters[c], m) << "\n";
      partition_text += cluster_labels(clusters[c], m) + "\n";
    }
    write_file(dir / "partition.txt", partition_text);
    std::cout << "wrote " << (dir / "partition.txt").string() << "\n";
  }
  return 0;
}

struct CalibrateArgs {
  std::vector<std::string> control_files;
};

int run_calibrate(const CalibrateArgs& a) {
  std::vector<CalibrationRatio> rows;
  for (const auto& f : a.control_files) {
    for (auto& r : load_control_file(f)) rows.push_back(std::move(r));
  }
  std::cout << "control-group calibration\n";
  for (const CalibrationRatio& r : rows) {
    std::cout << "  " << r.glyph << ": n=" << r.distances_to_model.size()
              << "  mean=" << fmt_fixed(r.mean, 4) << "  max/min=" << fmt_fixed(r.ratio, 4) << "\n";
  }
  std::cout << "calibration ratio (max over rows): " << fmt_fixed(max_control_ratio(rows), 4)
            << "\n";
  return 0;
}

struct ValidateArgs {
  std::string matrix;
  std::string partition;
  double alpha = 0.05;
  std::optional<double> ratio;
  std::vector<std::string> control_files;
  long long mc_samples = 1000000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = ".";
};

int run_validate(const ValidateArgs& a) {
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) {
    throw std::invalid_argument("--alpha must be strictly between 0 and 1");
  }
  const DissimilarityMatrix m = load_matrix_csv(a.matrix);
  const Partition initial = load_partition(a.partition, m);
  OutlierConfig cfg;
  cfg.alpha = a.alpha;
  cfg.ratio = resolve_ratio(a.ratio, a.control_files);
  cfg.mc_samples = a.mc_samples;
  cfg.seed = a.seed;
  cfg.threads = a.threads;

  const ValidationReport report = validate_clusters(initial, m, cfg);
  std::cout << report_text(report, m);
  const fs::path out = prepare_out_dir(a.out) / "validation.json";
  write_file(out, report_json(report, m));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

struct MdsArgs {
  std::string matrix;
  int dim = 2;
  std::string init = "classical";
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-9;
  int restarts = 1;
  std::optional<std::string> partition;
  std::string out = ".";
  bool full_precision = false;
};

int run_mds(const MdsArgs& a) {
  if (a.dim != 2 && a.dim != 3) throw std::invalid_argument("--dim must be 2 or 3");
  const DissimilarityMatrix m = load_matrix_csv(a.matrix);

  MdsConfig cfg;
  cfg.dim = a.dim;
  if (a.init == "classical") {
    cfg.init = MdsInit::ClassicalScaling;
  } else if (a.init == "random") {
    cfg.init = MdsInit::Random;
  } else {
    throw std::invalid_argument("--init must be classical or random");
  }
  cfg.seed = a.seed;
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  cfg.restarts = a.restarts;

  const Embedding e = embed(m, cfg);
  std::cout << "mds  n=" << m.size() << "  dim=" << e.dim << "  stress=" << fmt_fixed(e.stress, 6)
            << "  iterations=" << e.iterations << "  converged=" << (e.converged ? "yes" : "no")
            << "  order-violations=" << e.dhat_order_violations << "\n";

  const fs::path dir = prepare_out_dir(a.out);
  write_file(dir / "embedding.csv", serialize_embedding_csv(e, m.labels(), a.full_precision));

  std::vector<std::vector<int>> clusters;
  std::vector<int> models;
  if (a.partition) {
    load_partition(*a.partition, m, &clusters);
    for (const auto& c : clusters) {
      models.push_back(cluster_cost(c, m, {PerClusterCost::MinStarMean, CostCombiner::Max}).model);
    }
  }
  write_file(dir / "mds.svg",
             svg_scatter(e, m.labels(), a.partition ? &clusters : nullptr,
                         a.partition ? &models : nullptr));
  std::cout << "wrote " << (dir / "embedding.csv").string() << "\n";
  std::cout << "wrote " << (dir / "mds.svg").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typeface forensics: contour dissimilarities, exact and hierarchical clustering, "
               "Dixon outlier validation, non-metric MDS"};
  app.require_subcommand(1);

  MeasureArgs measure_args;
  auto* measure = app.add_subcommand("measure", "compute the dissimilarity matrix of glyph contours");
  measure->add_option("files", measure_args.files, "contour files")
      ->required()
      ->check(CLI::ExistingFile);
  measure->add_option("--out", measure_args.out, "output directory");
  measure->add_option("--threads", measure_args.threads, "worker threads");
  measure->add_option("--align-tol", measure_args.tol, "alignment relative-improvement tolerance");
  measure->add_option("--align-max-iters", measure_args.max_iters, "alignment iteration cap");
  measure->add_option("--rotation-starts", measure_args.rotation_starts,
                      "number of initial rotations to try");
  measure->add_flag("--full-precision", measure_args.full_precision,
                    "write full-precision values instead of 4 decimals");

  ExactArgs exact_args;
  auto* exact = app.add_subcommand("exact", "optimal clustering by exhaustive enumeration");
  exact->add_option("--matrix", exact_args.matrix, "dissimilarity CSV")
      ->required()
      ->check(CLI::ExistingFile);
  exact->add_option("--k", exact_args.k, "number of clusters")->required();
  exact->add_option("--criterion", exact_args.criterion, "cost criterion, e.g. 4b");
  exact->add_option("--top", exact_args.top, "how many best clusterings to report");
  exact->add_option("--budget", exact_args.budget, "enumeration budget (partition count)");
  exact->add_option("--out", exact_args.out, "output directory for star figures");

  HierArgs hier_args;
  auto* hier = app.add_subcommand("hier", "agglomerative hierarchical clustering");
  hier->add_option("--matrix", hier_args.matrix, "dissimilarity CSV")
      ->required()
      ->check(CLI::ExistingFile);
  hier->add_option("--linkage", hier_args.linkage, "single, complete or average");
  hier->add_option("--cut", hier_args.cut_height, "explicit cut height");
  hier->add_option("--ratio", hier_args.ratio, "control-group max/min ratio for the cut");
  hier->add_option("--control", hier_args.control_files, "control-distance files")
      ->check(CLI::ExistingFile);
  hier->add_option("--out", hier_args.out, "output directory");

  CalibrateArgs calibrate_args;
  auto* calibrate = app.add_subcommand("calibrate", "control-group variability ratios");
  calibrate->add_option("--control", calibrate_args.control_files, "control-distance files")
      ->required()
      ->check(CLI::ExistingFile);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "merge or separate clusters with Dixon's test");
  validate->add_option("--matrix", validate_args.matrix, "dissimilarity CSV")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--partition", validate_args.partition, "initial partition file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--alpha", validate_args.alpha, "rejection threshold");
  validate->add_option("--ratio", validate_args.ratio, "control-group max/min ratio");
  validate->add_option("--control", validate_args.control_files, "control-distance files")
      ->check(CLI::ExistingFile);
  validate->add_option("--mc-samples", validate_args.mc_samples, "Monte-Carlo sample count");
  validate->add_option("--seed", validate_args.seed, "Monte-Carlo seed");
  validate->add_option("--threads", validate_args.threads, "worker threads");
  validate->add_option("--out", validate_args.out, "output directory");

  MdsArgs mds_args;
  auto* mds = app.add_subcommand("mds", "non-metric multidimensional scaling");
  mds->add_option("--matrix", mds_args.matrix, "dissimilarity CSV")
      ->required()
      ->check(CLI::ExistingFile);
  mds->add_option("--dim", mds_args.dim, "embedding dimension, 2 or 3");
  mds->add_option("--init", mds_args.init, "classical or random");
  mds->add_option("--seed", mds_args.seed, "random-init seed");
  mds->add_option("--max-iters", mds_args.max_iters, "iteration cap");
  mds->add_option("--tol", mds_args.tol, "relative stress-change tolerance");
  mds->add_option("--restarts", mds_args.restarts, "random restarts");
  mds->add_option("--partition", mds_args.partition, "partition file for star overlay")
      ->check(CLI::ExistingFile);
  mds->add_option("--out", mds_args.out, "output directory");
  mds->add_flag("--full-precision", mds_args.full_precision,
                "write full-precision coordinates instead of 6 decimals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(measure)) return run_measure(measure_args);
    if (app.got_subcommand(exact)) return run_exact(exact_args);
    if (app.got_subcommand(hier)) return run_hier(hier_args);
    if (app.got_subcommand(calibrate)) return run_calibrate(calibrate_args);
    if (app.got_subcommand(validate)) return run_validate(validate_args);
    if (app.got_subcommand(mds)) return run_mds(mds_args);
  } catch (const EnumerationBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
