#include "glyphclust/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "glyphclust/textfmt.hpp"

namespace glyphclust {

namespace {

std::string px(double v) { return fmt_fixed(v, 2); }

void open_svg(std::ostringstream& out, double w, double h) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << px(w) << " " << px(h)
      << "\" width=\"" << px(w) << "\" height=\"" << px(h) << "\">\n"
      << "<rect width=\"" << px(w) << "\" height=\"" << px(h) << "\" fill=\"white\"/>\n";
}

void line(std::ostringstream& out, double x1, double y1, double x2, double y2,
          const std::string& stroke, const std::string& extra = "") {
  out << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2) << "\" y2=\""
      << px(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
}

void text(std::ostringstream& out, double x, double y, const std::string& s,
          const std::string& extra = "") {
  out << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\"" << extra
      << ">" << xml_escape(s) << "</text>\n";
}

}  // namespace

std::string svg_dendrogram(const Dendrogram& d, const std::vector<std::string>& labels,
                           std::optional<double> cut_height) {
  if (static_cast<int>(labels.size()) != d.n) {
    throw std::invalid_argument("svg_dendrogram: label count does not match dendrogram");
  }
  const double slot = 36.0;
  const double margin_left = 64.0, margin_right = 20.0;
  const double margin_top = 20.0, margin_bottom = 52.0;
  const double plot_h = 360.0;
  const double width = margin_left + slot * d.n + margin_right;
  const double height = margin_top + plot_h + margin_bottom;

  double max_h = 0.0;
  for (const Merge& mg : d.merges) max_h = std::max(max_h, mg.height);
  if (cut_height) max_h = std::max(max_h, *cut_height);
  if (max_h <= 0.0) max_h = 1.0;
  auto y_of = [&](double h) { return margin_top + plot_h * (1.0 - h / max_h); };

  // Leaf order: depth-first from the root, earlier-formed (then lower-id)
  // child on the left.
  const int total = 2 * d.n - 1;
  std::vector<double> node_h(total, 0.0);
  for (std::size_t t = 0; t < d.merges.size(); ++t) node_h[d.n + t] = d.merges[t].height;
  std::vector<int> leaf_order;
  leaf_order.reserve(d.n);
  {
    std::vector<int> stack{total - 1};
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node < d.n) {
        leaf_order.push_back(node);
        continue;
      }
      const Merge& mg = d.merges[node - d.n];
      int first = mg.left, second = mg.right;
      if (std::make_pair(node_h[second], second) < std::make_pair(node_h[first], first)) {
        std::swap(first, second);
      }
      stack.push_back(second);  // popped after `first`, so drawn to the right
      stack.push_back(first);
    }
  }
  std::vector<double> node_x(total, 0.0);
  for (int s = 0; s < d.n; ++s) node_x[leaf_order[s]] = margin_left + slot * (s + 0.5);
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    node_x[d.n + t] = 0.5 * (node_x[d.merges[t].left] + node_x[d.merges[t].right]);
  }

  std::ostringstream out;
  open_svg(out, width, height);

  // Axis with five evenly spaced ticks.
  line(out, margin_left, margin_top, margin_left, margin_top + plot_h, "black");
  for (int t = 0; t <= 5; ++t) {
    const double h = max_h * t / 5.0;
    line(out, margin_left - 4, y_of(h), margin_left, y_of(h), "black");
    text(out, 4, y_of(h) + 4, fmt_fixed(h, 4), " font-size=\"10\"");
  }

  for (const Merge& mg : d.merges) {
    const double y = y_of(mg.height);
    line(out, node_x[mg.left], y_of(node_h[mg.left]), node_x[mg.left], y, "black");
    line(out, node_x[mg.right], y_of(node_h[mg.right]), node_x[mg.right], y, "black");
    line(out, node_x[mg.left], y, node_x[mg.right], y, "black");
  }

  for (int i = 0; i < d.n; ++i) {
    text(out, node_x[i], margin_top + plot_h + 14, labels[i],
         " font-size=\"11\" text-anchor=\"middle\"");
  }

  if (cut_height) {
    const double y = y_of(*cut_height);
    line(out, margin_left, y, width - margin_right, y, "red", " stroke-dasharray=\"6,4\"");
    text(out, width - margin_right - 2, y - 4, "cut " + fmt_fixed(*cut_height, 4),
         " font-size=\"11\" fill=\"red\" text-anchor=\"end\"");
  }

  out << "</svg>\n";
  return out.str();
}

std::string svg_star(const std::vector<int>& members, int model,
                     const std::vector<std::string>& labels, const DissimilarityMatrix& m) {
  if (std::find(members.begin(), members.end(), model) == members.end()) {
    throw std::invalid_argument("svg_star: model must be a member");
  }
  const double size = 420.0;
  const double cx = size / 2, cy = size / 2;
  const double radius = 150.0;

  std::vector<int> around;
  for (int x : members) {
    if (x != model) around.push_back(x);
  }
  std::sort(around.begin(), around.end());

  std::ostringstream out;
  open_svg(out, size, size);
  for (std::size_t k = 0; k < around.size(); ++k) {
    const double angle = -M_PI / 2 + 2.0 * M_PI * k / around.size();
    const double x = cx + radius * std::cos(angle);
    const double y = cy + radius * std::sin(angle);
    line(out, cx, cy, x, y, "black", " class=\"star-edge\"");
    const double lx = cx + 0.55 * radius * std::cos(angle);
    const double ly = cy + 0.55 * radius * std::sin(angle);
    text(out, lx, ly - 3, fmt_fixed(m(model, around[k]), 4),
         " font-size=\"10\" text-anchor=\"middle\"");
    out << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"4\" fill=\"black\"/>\n";
    text(out, x, y + 16, labels[around[k]], " font-size=\"12\" text-anchor=\"middle\"");
  }
  out << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\"5\" fill=\"red\"/>\n";
  text(out, cx, cy - 10, labels[model], " font-size=\"13\" text-anchor=\"middle\" font-weight=\"bold\"");
  out << "</svg>\n";
  return out.str();
}

std::string svg_scatter(const Embedding& e, const std::vector<std::string>& labels,
                        const std::vector<std::vector<int>>* clusters,
                        const std::vector<int>* models) {
  const std::size_t n = labels.size();
  if (n * static_cast<std::size_t>(e.dim) != e.coords.size()) {
    throw std::invalid_argument("svg_scatter: label count does not match embedding");
  }
  if ((clusters == nullptr) != (models == nullptr)) {
    throw std::invalid_argument("svg_scatter: clusters and models must be given together");
  }

  double xmin = e.coords[0], xmax = e.coords[0];
  double ymin = e.coords[1], ymax = e.coords[1];
  for (std::size_t i = 0; i < n; ++i) {
    xmin = std::min(xmin, e.coords[i * e.dim]);
    xmax = std::max(xmax, e.coords[i * e.dim]);
    ymin = std::min(ymin, e.coords[i * e.dim + 1]);
    ymax = std::max(ymax, e.coords[i * e.dim + 1]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double margin = 48.0, plot = 480.0;
  const double size = plot + 2 * margin;
  auto sx = [&](std::size_t i) {
    return margin + (e.coords[i * e.dim] - xmin) / span * plot;
  };
  auto sy = [&](std::size_t i) {
    // SVG y grows downward.
    return margin + (ymax - e.coords[i * e.dim + 1]) / span * plot;
  };

  std::ostringstream out;
  open_svg(out, size, size);
  text(out, margin, 18, "stress " + fmt_fixed(e.stress, 4), " font-size=\"11\"");

  if (clusters) {
    for (std::size_t c = 0; c < clusters->size(); ++c) {
      const int model = (*models)[c];
      for (int x : (*clusters)[c]) {
        if (x == model) continue;
        line(out, sx(model), sy(model), sx(x), sy(x), "steelblue", " class=\"star-edge\"");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << "<circle class=\"pt\" cx=\"" << px(sx(i)) << "\" cy=\"" << px(sy(i))
        << "\" r=\"3.5\" fill=\"black\"/>\n";
    text(out, sx(i) + 6, sy(i) - 6, labels[i], " font-size=\"11\"");
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace glyphclust
