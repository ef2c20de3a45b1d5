#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "concavlab/common.hpp"

namespace concavlab {

using Point = Eigen::Vector2d;

enum class Shape { Disk, Ellipse, Superellipse, Square };

std::string shape_name(Shape s);

/// Bounded open convex planar region. Disk/Ellipse/Superellipse are smooth
/// and strongly convex; Square is the degenerate flat-sided baseline kept
/// for the classical isotropic checks.
class ConvexDomain {
 public:
  static ConvexDomain disk(const Point& center, double radius);
  static ConvexDomain ellipse(const Point& center, double a, double b);
  static ConvexDomain superellipse(const Point& center, double a, double b, int exponent);
  static ConvexDomain square(const Point& corner, double side);

  Shape shape() const { return shape_; }
  bool strongly_convex() const { return shape_ != Shape::Square; }
  const Point& center() const { return center_; }
  double semi_axis_a() const { return a_; }
  double semi_axis_b() const { return b_; }
  int exponent() const { return p_; }
  double side() const { return 2.0 * a_; }
  Point corner() const { return center_ - Point(a_, b_); }

  /// True iff x lies in the open region (boundary excluded).
  bool contains(const Point& x) const;

  /// Distance to the boundary from an inside point; exact for Disk/Square,
  /// minimized over a boundary parameterization otherwise.
  /// Throws point-outside-domain when !contains(x).
  double boundary_distance(const Point& x) const;

  /// Distance to the boundary curve from anywhere (no sign, no precondition).
  double distance_to_boundary_curve(const Point& x) const;

  /// boundary_distance inside, negative curve distance outside.
  double signed_boundary_distance(const Point& x) const;

  double diameter() const;

  /// Largest rho for which the inner parallel set is nonempty.
  double inradius() const;

  /// Axis-aligned bounding box (xmin, xmax, ymin, ymax).
  Eigen::Vector4d bounding_box() const;

  /// Retracts x onto the closed set {signed distance >= rho} along the ray
  /// toward the center. Identity when already inside.
  Point project_inside(const Point& x, double rho) const;

  /// Boundary point at parameter t in [0, 2*pi). Disk/Ellipse/Superellipse only.
  Point boundary_point(double t) const;

 private:
  ConvexDomain(Shape s, Point c, double a, double b, int p)
      : shape_(s), center_(std::move(c)), a_(a), b_(b), p_(p) {}

  Shape shape_;
  Point center_;
  double a_, b_;  // radius (a_ == b_), semi-axes, or half-side
  int p_ = 2;
};

struct InnerParallelSet {
  ConvexDomain parent;
  double rho = 0.0;

  bool contains(const Point& x) const {
    return parent.contains(x) && parent.boundary_distance(x) > rho;
  }
  bool empty() const { return rho >= parent.inradius(); }
};

/// The set {x : d(x, boundary) > rho}; empty is a valid result.
InnerParallelSet inner_parallel(const ConvexDomain& domain, double rho);

/// m uniformly spaced points on [x1, x3] including both endpoints (m >= 2).
std::vector<Point> segment_samples(const Point& x1, const Point& x3, int m);

}  // namespace concavlab
