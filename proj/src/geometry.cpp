#include "concavlab/geometry.hpp"

#include <cmath>

namespace concavlab {

namespace {

constexpr int kBoundarySamples = 1024;

// Golden-section minimization of fn on [lo, hi] down to interval width tol.
template <class F>
double golden_min(F&& fn, double lo, double hi, double tol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

double sgn(double v) { return v < 0 ? -1.0 : (v > 0 ? 1.0 : 0.0); }

}  // namespace

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Disk: return "disk";
    case Shape::Ellipse: return "ellipse";
    case Shape::Superellipse: return "superellipse";
    case Shape::Square: return "square";
  }
  return "?";
}

ConvexDomain ConvexDomain::disk(const Point& center, double radius) {
  if (!(radius > 0)) fail("invalid-domain", "disk radius must be positive");
  return ConvexDomain(Shape::Disk, center, radius, radius, 2);
}

ConvexDomain ConvexDomain::ellipse(const Point& center, double a, double b) {
  if (!(a > 0) || !(b > 0)) fail("invalid-domain", "ellipse semi-axes must be positive");
  return ConvexDomain(Shape::Ellipse, center, a, b, 2);
}

ConvexDomain ConvexDomain::superellipse(const Point& center, double a, double b, int exponent) {
  if (!(a > 0) || !(b > 0)) fail("invalid-domain", "superellipse semi-axes must be positive");
  if (exponent < 2 || exponent % 2 != 0)
    fail("invalid-domain", "superellipse exponent must be an even integer >= 2");
  return ConvexDomain(Shape::Superellipse, center, a, b, exponent);
}

ConvexDomain ConvexDomain::square(const Point& corner, double side) {
  if (!(side > 0)) fail("invalid-domain", "square side must be positive");
  double half = 0.5 * side;
  return ConvexDomain(Shape::Square, corner + Point(half, half), half, half, 2);
}

bool ConvexDomain::contains(const Point& x) const {
  Point d = x - center_;
  switch (shape_) {
    case Shape::Disk:
      return d.squaredNorm() < a_ * a_;
    case Shape::Ellipse: {
      double u = d.x() / a_, v = d.y() / b_;
      return u * u + v * v < 1.0;
    }
    case Shape::Superellipse: {
      double u = std::abs(d.x() / a_), v = std::abs(d.y() / b_);
      return std::pow(u, p_) + std::pow(v, p_) < 1.0;
    }
    case Shape::Square:
      return std::max(std::abs(d.x()), std::abs(d.y())) < a_;
  }
  return false;
}

Point ConvexDomain::boundary_point(double t) const {
  if (shape_ == Shape::Square) fail("invalid-domain", "square has no smooth boundary parameterization");
  double ct = std::cos(t), st = std::sin(t);
  if (shape_ == Shape::Disk || p_ == 2)
    return center_ + Point(a_ * ct, b_ * st);
  double e = 2.0 / p_;
  return center_ + Point(a_ * sgn(ct) * std::pow(std::abs(ct), e),
                         b_ * sgn(st) * std::pow(std::abs(st), e));
}

double ConvexDomain::distance_to_boundary_curve(const Point& x) const {
  Point d = x - center_;
  switch (shape_) {
    case Shape::Disk:
      return std::abs(a_ - d.norm());
    case Shape::Square: {
      double ax = std::abs(d.x()), ay = std::abs(d.y());
      if (ax <= a_ && ay <= a_) return a_ - std::max(ax, ay);
      double ox = std::max(ax - a_, 0.0), oy = std::max(ay - a_, 0.0);
      return std::hypot(ox, oy);
    }
    default: {
      // Dense presampling picks the basin; golden section refines it.
      auto dist2 = [&](double t) { return (x - boundary_point(t)).squaredNorm(); };
      const double two_pi = 2.0 * M_PI;
      double best_t = 0.0, best = dist2(0.0);
      for (int k = 1; k < kBoundarySamples; ++k) {
        double t = two_pi * k / kBoundarySamples;
        double v = dist2(t);
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
      double w = two_pi / kBoundarySamples;
      double t = golden_min(dist2, best_t - w, best_t + w, 1e-13);
      return std::sqrt(dist2(t));
    }
  }
}

double ConvexDomain::signed_boundary_distance(const Point& x) const {
  double d = distance_to_boundary_curve(x);
  return contains(x) ? d : -d;
}

double ConvexDomain::boundary_distance(const Point& x) const {
  if (!contains(x)) fail("point-outside-domain", "boundary_distance requires an interior point");
  return distance_to_boundary_curve(x);
}

double ConvexDomain::diameter() const {
  switch (shape_) {
    case Shape::Disk: return 2.0 * a_;
    case Shape::Ellipse: return 2.0 * std::max(a_, b_);
    case Shape::Square: return 2.0 * a_ * std::sqrt(2.0);
    case Shape::Superellipse: {
      // Centrally symmetric, so the diameter doubles the farthest boundary point.
      auto neg_r2 = [&](double t) { return -(boundary_point(t) - center_).squaredNorm(); };
      double best_t = 0.0, best = neg_r2(0.0);
      for (int k = 1; k < kBoundarySamples; ++k) {
        double t = M_PI * k / kBoundarySamples;
        double v = neg_r2(t);
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
      double w = M_PI / kBoundarySamples;
      double t = golden_min(neg_r2, best_t - w, best_t + w, 1e-10);
      return 2.0 * std::sqrt(-neg_r2(t));
    }
  }
  return 0.0;
}

double ConvexDomain::inradius() const {
  switch (shape_) {
    case Shape::Disk: return a_;
    case Shape::Square: return a_;
    default: return std::min(a_, b_);  // attained on the shorter axis for p >= 2
  }
}

Eigen::Vector4d ConvexDomain::bounding_box() const {
  return Eigen::Vector4d(center_.x() - a_, center_.x() + a_, center_.y() - b_, center_.y() + b_);
}

Point ConvexDomain::project_inside(const Point& x, double rho) const {
  if (rho >= inradius()) fail("empty-parallel-set", "no point lies at depth rho");
  if (signed_boundary_distance(x) >= rho) return x;
  // Bisect along the ray to the center for the depth-rho crossing.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    Point p = x + mid * (center_ - x);
    if (signed_boundary_distance(p) >= rho)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-15) break;
  }
  return x + hi * (center_ - x);
}

InnerParallelSet inner_parallel(const ConvexDomain& domain, double rho) {
  if (rho < 0) fail("invalid-rho", "inner parallel depth must be >= 0");
  return InnerParallelSet{domain, rho};
}

std::vector<Point> segment_samples(const Point& x1, const Point& x3, int m) {
  if (m < 2) fail("invalid-sample-count", "segment_samples requires m >= 2");
  std::vector<Point> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    double t = static_cast<double>(k) / (m - 1);
    out.push_back((1.0 - t) * x1 + t * x3);
  }
  return out;
}

}  // namespace concavlab
