#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "glyphclust/exact.hpp"
#include "glyphclust/matrix.hpp"

namespace glyphclust {

enum class Linkage { Single, Complete, Average };

Linkage parse_linkage(std::string_view token);
std::string linkage_name(Linkage l);

struct Merge {
  int left = 0;    // node id; 0..n-1 are leaves, n..2n-2 internal in creation order
  int right = 0;
  double height = 0.0;
};

struct Dendrogram {
  int n = 0;
  std::vector<Merge> merges;  // exactly n-1 entries
};

/// min / max / mean of cross-pair dissimilarities between two disjoint
/// nonempty clusters; overlapping clusters are an error.
double linkage_distance(const std::vector<int>& c1, const std::vector<int>& c2,
                        const DissimilarityMatrix& m, Linkage l);

/// Sequential agglomeration: at each step the globally closest pair of
/// active clusters merges; ties resolve to the lexicographically smallest
/// (min node id, max node id) pair. In each merge, left < right.
Dendrogram agglomerate(const DissimilarityMatrix& m, Linkage l);

/// Leaf sets under every node id (leaves first, then merge nodes).
std::vector<std::vector<int>> leaves_per_node(const Dendrogram& d);

/// Connected components after dropping merges with height > cut; merges at
/// exactly the cut height are kept.
Partition cut(const Dendrogram& d, double height);

struct CalibrationRatio {
  std::string glyph;
  std::vector<double> distances_to_model;
  double mean = 0.0;
  double ratio = 1.0;  // max / min
};

/// Requires >= 2 strictly positive distances.
CalibrationRatio calibrate(std::string glyph, std::vector<double> distances);

/// One row per line: `<label> d1 d2 ...`; `#` comments and blanks ignored.
std::vector<CalibrationRatio> parse_control_file(const std::string& text);
std::vector<CalibrationRatio> load_control_file(const std::string& path);

/// The most permissive bound observed across control glyphs.
double max_control_ratio(const std::vector<CalibrationRatio>& rows);

/// ratio times the smallest off-diagonal entry, full precision.
double calibrated_cut_height(const DissimilarityMatrix& m, double ratio);

/// One line per merge: `node_id left right height` (full precision).
std::string serialize_dendrogram(const Dendrogram& d);
std::string to_newick(const Dendrogram& d, const std::vector<std::string>& labels);

}  // namespace glyphclust
