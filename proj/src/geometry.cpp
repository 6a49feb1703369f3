#include "glyphclust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "glyphclust/textfmt.hpp"

namespace glyphclust {

namespace {

struct Segment {
  Point2 a;
  Point2 b;
};

// Foot of the perpendicular clamped to the segment.
Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return a + t * ab;
}

std::vector<Segment> segments_of(const Shape& s) {
  std::vector<Segment> segs;
  segs.reserve(s.vertex_count());
  for (const auto& curve : s.curves) {
    const auto& v = curve.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      segs.push_back({v[i], v[(i + 1) % v.size()]});
    }
  }
  return segs;
}

std::vector<Point2> vertices_of(const Shape& s) {
  std::vector<Point2> pts;
  pts.reserve(s.vertex_count());
  for (const auto& curve : s.curves) {
    pts.insert(pts.end(), curve.vertices.begin(), curve.vertices.end());
  }
  return pts;
}

Point2 closest_point_on_segments(Point2 p, const std::vector<Segment>& segs) {
  double best = std::numeric_limits<double>::infinity();
  Point2 foot{};
  for (const auto& seg : segs) {
    const Point2 c = closest_point_on_segment(p, seg.a, seg.b);
    const Point2 d = p - c;
    const double dist2 = dot(d, d);
    if (dist2 < best) {
      best = dist2;
      foot = c;
    }
  }
  return foot;
}

double mean_sq_distance(const std::vector<Point2>& pts, const std::vector<Segment>& segs) {
  double sum = 0.0;
  for (const Point2& p : pts) {
    const Point2 c = closest_point_on_segments(p, segs);
    const Point2 d = p - c;
    sum += dot(d, d);
  }
  return sum / static_cast<double>(pts.size());
}

// Least-squares rotation + translation carrying src onto dst.
RigidTransform fit_rigid(const std::vector<Point2>& src, const std::vector<Point2>& dst) {
  const double n = static_cast<double>(src.size());
  Point2 sc{0, 0}, dc{0, 0};
  for (std::size_t i = 0; i < src.size(); ++i) {
    sc = sc + src[i];
    dc = dc + dst[i];
  }
  sc = (1.0 / n) * sc;
  dc = (1.0 / n) * dc;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Point2 s = src[i] - sc;
    const Point2 d = dst[i] - dc;
    num += cross(s, d);
    den += dot(s, d);
  }
  RigidTransform t;
  t.rotation = (num == 0.0 && den == 0.0) ? 0.0 : std::atan2(num, den);
  const double c = std::cos(t.rotation), s = std::sin(t.rotation);
  t.translation = {dc.x - (c * sc.x - s * sc.y), dc.y - (s * sc.x + c * sc.y)};
  return t;
}

}  // namespace

std::size_t Shape::vertex_count() const {
  std::size_t n = 0;
  for (const auto& c : curves) n += c.vertices.size();
  return n;
}

Point2 RigidTransform::apply(Point2 p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = -rotation;
  const double c = std::cos(rotation), s = std::sin(rotation);
  inv.translation = {-(c * translation.x + s * translation.y),
                     -(-s * translation.x + c * translation.y)};
  return inv;
}

void validate_shape(const Shape& s) {
  if (s.label.empty()) throw std::invalid_argument("shape has an empty label");
  if (s.curves.empty()) {
    throw std::invalid_argument("shape '" + s.label + "' has no curves");
  }
  for (const auto& curve : s.curves) {
    const auto& v = curve.vertices;
    if (v.size() < 3) {
      throw std::invalid_argument("shape '" + s.label + "': curve with fewer than 3 vertices");
    }
    for (const Point2& p : v) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("shape '" + s.label + "': non-finite coordinate");
      }
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2& a = v[i];
      const Point2& b = v[(i + 1) % v.size()];
      if (a.x == b.x && a.y == b.y) {
        throw std::invalid_argument("shape '" + s.label + "': repeated consecutive vertex");
      }
    }
    bool collinear = true;
    for (std::size_t i = 2; i < v.size() && collinear; ++i) {
      if (cross(v[1] - v[0], v[i] - v[0]) != 0.0) collinear = false;
    }
    if (collinear) {
      throw std::invalid_argument("shape '" + s.label + "': degenerate collinear curve");
    }
  }
}

Point2 barycenter(const Shape& s) {
  Point2 sum{0, 0};
  std::size_t n = 0;
  for (const auto& curve : s.curves) {
    for (const Point2& p : curve.vertices) {
      sum = sum + p;
      ++n;
    }
  }
  return (1.0 / static_cast<double>(n)) * sum;
}

Shape transformed(const Shape& s, const RigidTransform& t) {
  Shape out;
  out.label = s.label;
  out.curves.reserve(s.curves.size());
  for (const auto& curve : s.curves) {
    ClosedPolyline c;
    c.vertices.reserve(curve.vertices.size());
    for (const Point2& p : curve.vertices) c.vertices.push_back(t.apply(p));
    out.curves.push_back(std::move(c));
  }
  return out;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  if (a.x == b.x && a.y == b.y) {
    throw std::invalid_argument("point_segment_distance: degenerate segment");
  }
  const Point2 c = closest_point_on_segment(p, a, b);
  return std::hypot(p.x - c.x, p.y - c.y);
}

double point_shape_distance(Point2 p, const Shape& s) {
  validate_shape(s);
  const auto segs = segments_of(s);
  const Point2 c = closest_point_on_segments(p, segs);
  return std::hypot(p.x - c.x, p.y - c.y);
}

double directed_misfit(const Shape& a, const Shape& b) {
  validate_shape(a);
  validate_shape(b);
  return mean_sq_distance(vertices_of(a), segments_of(b));
}

AlignResult align(const Shape& a, const Shape& b, const AlignConfig& cfg) {
  validate_shape(a);
  validate_shape(b);
  if (cfg.max_iters < 1) throw std::invalid_argument("align: max_iters must be >= 1");
  if (cfg.rotation_starts < 1) throw std::invalid_argument("align: rotation_starts must be >= 1");

  const std::vector<Point2> a_pts = vertices_of(a);
  const std::vector<Point2> b_pts = vertices_of(b);
  const std::vector<Segment> b_segs = segments_of(b);
  const Point2 a_bar = barycenter(a);
  const Point2 b_bar = barycenter(b);

  // Segment topology of a, as vertex index pairs, reused for the moving copy.
  std::vector<std::pair<std::size_t, std::size_t>> a_topo;
  {
    std::size_t base = 0;
    for (const auto& curve : a.curves) {
      const std::size_t k = curve.vertices.size();
      for (std::size_t i = 0; i < k; ++i) a_topo.emplace_back(base + i, base + (i + 1) % k);
      base += k;
    }
  }

  auto world_points = [&](const RigidTransform& t) {
    std::vector<Point2> w(a_pts.size());
    for (std::size_t i = 0; i < a_pts.size(); ++i) w[i] = t.apply(a_pts[i]);
    return w;
  };
  auto misfits = [&](const std::vector<Point2>& a_world) {
    std::vector<Segment> a_segs(a_topo.size());
    for (std::size_t i = 0; i < a_topo.size(); ++i) {
      a_segs[i] = {a_world[a_topo[i].first], a_world[a_topo[i].second]};
    }
    return std::pair<double, double>{mean_sq_distance(a_world, b_segs),
                                     mean_sq_distance(b_pts, a_segs)};
  };

  AlignResult best;
  bool have_best = false;

  for (int start = 0; start < cfg.rotation_starts; ++start) {
    RigidTransform t;
    t.rotation = 2.0 * M_PI * start / cfg.rotation_starts;
    const double c = std::cos(t.rotation), s = std::sin(t.rotation);
    t.translation = {b_bar.x - (c * a_bar.x - s * a_bar.y),
                     b_bar.y - (s * a_bar.x + c * a_bar.y)};

    std::vector<Point2> a_world = world_points(t);
    auto [mab, mba] = misfits(a_world);
    double current = 0.5 * (mab + mba);
    // Improvements are judged against the initialization misfit; a rule
    // relative to the current value would never trigger on pairs whose
    // misfit decays geometrically toward zero.
    const double init_misfit = current;

    AlignResult run{t, mab, mba, 0, false};
    int iter = 0;
    bool converged = false;
    for (; iter < cfg.max_iters; ++iter) {
      // Correspondences in both directions, expressed in a's own frame so
      // the total transform is refit from scratch each iteration.
      std::vector<Point2> src, dst;
      src.reserve(a_pts.size() + b_pts.size());
      dst.reserve(a_pts.size() + b_pts.size());
      for (std::size_t i = 0; i < a_pts.size(); ++i) {
        src.push_back(a_pts[i]);
        dst.push_back(closest_point_on_segments(a_world[i], b_segs));
      }
      std::vector<Segment> a_segs(a_topo.size());
      for (std::size_t i = 0; i < a_topo.size(); ++i) {
        a_segs[i] = {a_world[a_topo[i].first], a_world[a_topo[i].second]};
      }
      const RigidTransform inv = t.inverse();
      for (const Point2& q : b_pts) {
        const Point2 foot = closest_point_on_segments(q, a_segs);
        src.push_back(inv.apply(foot));
        dst.push_back(q);
      }

      const RigidTransform next = fit_rigid(src, dst);
      const std::vector<Point2> next_world = world_points(next);
      auto [nab, nba] = misfits(next_world);
      const double next_misfit = 0.5 * (nab + nba);

      if (next_misfit < run.symmetric_misfit()) {
        run.transform = next;
        run.misfit_ab = nab;
        run.misfit_ba = nba;
      }
      const double improvement =
          init_misfit > 0.0 ? (current - next_misfit) / init_misfit : 0.0;
      t = next;
      a_world = next_world;
      const bool done = current == 0.0 || improvement < cfg.tol;
      current = next_misfit;
      if (done) {
        converged = true;
        ++iter;
        break;
      }
    }
    run.iterations = iter;
    run.converged = converged;

    if (!have_best || run.symmetric_misfit() < best.symmetric_misfit()) {
      best = run;
      have_best = true;
    }
  }
  return best;
}

double dissimilarity(const Shape& a, const Shape& b, const AlignConfig& cfg) {
  // Canonical argument order makes the value exactly symmetric.
  if (b.label < a.label) return dissimilarity(b, a, cfg);
  return align(a, b, cfg).symmetric_misfit();
}

namespace {

bool parse_double(const std::string& tok, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size() && std::isfinite(out);
}

}  // namespace

std::vector<Shape> parse_contours(const std::string& text) {
  std::vector<Shape> shapes;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("contour parse error at line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;

    if (tok == "glyph") {
      std::string label;
      if (!(ls >> label)) fail("glyph line without a label");
      std::string extra;
      if (ls >> extra) fail("unexpected token after glyph label");
      for (const Shape& s : shapes) {
        if (s.label == label) fail("duplicate glyph label '" + label + "'");
      }
      shapes.push_back(Shape{label, {}});
    } else if (tok == "curve") {
      if (shapes.empty()) fail("curve before any glyph line");
      std::string extra;
      if (ls >> extra) fail("unexpected token after curve");
      shapes.back().curves.push_back({});
    } else {
      if (shapes.empty() || shapes.back().curves.empty()) {
        fail("vertex outside of a curve");
      }
      std::string ytok;
      if (!(ls >> ytok)) fail("vertex line needs two coordinates");
      std::string extra;
      if (ls >> extra) fail("unexpected token after vertex");
      double x, y;
      if (!parse_double(tok, x) || !parse_double(ytok, y)) fail("bad coordinate");
      shapes.back().curves.back().vertices.push_back({x, y});
    }
  }

  if (shapes.empty()) throw std::invalid_argument("contour file contains no glyphs");
  for (const Shape& s : shapes) validate_shape(s);
  return shapes;
}

std::vector<Shape> load_contours(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open contour file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_contours(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string serialize_contours(const std::vector<Shape>& shapes) {
  std::string out;
  for (const Shape& s : shapes) {
    out += "glyph " + s.label + "\n";
    for (const auto& curve : s.curves) {
      out += "curve\n";
      for (const Point2& p : curve.vertices) {
        out += fmt_full(p.x) + " " + fmt_full(p.y) + "\n";
      }
    }
  }
  return out;
}

}  // namespace glyphclust
