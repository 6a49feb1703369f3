#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glyphclust/hier.hpp"
#include "glyphclust/matrix.hpp"
#include "glyphclust/mds.hpp"

namespace glyphclust {

/// Dendrogram with leaves along the bottom; the earlier-formed child of each
/// merge is drawn on the left. An optional dashed horizontal line marks the
/// cut height.
std::string svg_dendrogram(const Dendrogram& d, const std::vector<std::string>& labels,
                           std::optional<double> cut_height = std::nullopt);

/// Star figure for one cluster: model at the center, members around it,
/// edges labeled with the dissimilarity to the model. Edge lengths are not
/// proportional to the dissimilarity.
std::string svg_star(const std::vector<int>& members, int model,
                     const std::vector<std::string>& labels, const DissimilarityMatrix& m);

/// 2D scatter of an embedding (the first two coordinates when dim == 3).
/// With clusters and models given, draws an edge from each model to the
/// other members of its cluster.
std::string svg_scatter(const Embedding& e, const std::vector<std::string>& labels,
                        const std::vector<std::vector<int>>* clusters = nullptr,
                        const std::vector<int>* models = nullptr);

}  // namespace glyphclust
