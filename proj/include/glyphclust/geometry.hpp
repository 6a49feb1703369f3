#pragma once

#include <string>
#include <vector>

namespace glyphclust {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

/// A closed polygonal curve; the last vertex connects back to the first.
struct ClosedPolyline {
  std::vector<Point2> vertices;
};

/// A glyph contour: one or more closed curves (counters add extra curves).
/// Coordinates are millimetres, dissimilarities mm^2.
struct Shape {
  std::string label;
  std::vector<ClosedPolyline> curves;
  std::size_t vertex_count() const;
};

/// Rotation about the origin followed by a translation.
struct RigidTransform {
  double rotation = 0.0;             // radians
  Point2 translation{0.0, 0.0};      // mm

  Point2 apply(Point2 p) const;
  RigidTransform inverse() const;
};

struct AlignConfig {
  // Stop when the per-iteration misfit improvement, measured relative to the
  // misfit at the barycenter initialization, drops below tol.
  double tol = 1e-9;
  int max_iters = 200;
  int rotation_starts = 1;  // evenly spaced initial rotations; 1 = assume similar orientation
};

struct AlignResult {
  RigidTransform transform;  // applied to the first shape
  double misfit_ab = 0.0;    // directed misfit of T(a) onto b, mm^2
  double misfit_ba = 0.0;    // directed misfit of b onto T(a), mm^2
  int iterations = 0;
  bool converged = false;

  double symmetric_misfit() const { return 0.5 * (misfit_ab + misfit_ba); }
};

/// Throws std::invalid_argument when a curve has fewer than 3 vertices,
/// repeats consecutive vertices (including the closing pair), is fully
/// collinear, or carries non-finite coordinates.
void validate_shape(const Shape& s);

Point2 barycenter(const Shape& s);
Shape transformed(const Shape& s, const RigidTransform& t);

/// Distance from p to the closest point of segment [a,b]; a == b is an error.
double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// Distance from p to the closest segment of any curve of s.
double point_shape_distance(Point2 p, const Shape& s);

/// Mean over the vertices of a of the squared distance to the contour of b.
/// No alignment is performed here.
double directed_misfit(const Shape& a, const Shape& b);

/// Iterative closest-point rigid registration of a onto b, starting from
/// coincident barycenters, minimising the two-way misfit sum. Returns the
/// best transform seen; `converged` is false when max_iters ran out while
/// the misfit was still improving.
AlignResult align(const Shape& a, const Shape& b, const AlignConfig& cfg = {});

/// Aligns, then returns the mean of the two directed misfits. Computed once
/// per unordered pair (arguments are ordered canonically by label), so the
/// result is exactly symmetric.
double dissimilarity(const Shape& a, const Shape& b, const AlignConfig& cfg = {});

// Contour text format: a `glyph <label>` line opens a shape, each `curve`
// line opens a closed polyline, and every following `x y` line adds a
// vertex in mm. `#` starts a comment; blank lines are ignored.
std::vector<Shape> parse_contours(const std::string& text);
std::vector<Shape> load_contours(const std::string& path);
std::string serialize_contours(const std::vector<Shape>& shapes);

}  // namespace glyphclust
