#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "concavlab/geometry.hpp"

namespace concavlab {

/// Uniform grid with square cells over the bounding box of a convex domain.
/// The interior mask keeps exactly the nodes strictly inside the domain.
class Grid {
 public:
  /// n nodes across the longer bounding-box side; the other side gets the
  /// node count that keeps cells square (its extent is re-centered).
  static std::shared_ptr<const Grid> over_domain(const ConvexDomain& domain, int n);

  /// Reconstructs a grid from file geometry; the mask comes from the values.
  static std::shared_ptr<const Grid> from_box(double xmin, double xmax, double ymin,
                                              double ymax, int nx, int ny,
                                              std::optional<ConvexDomain> domain);

  int nx = 0, ny = 0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  double h = 0;
  std::optional<ConvexDomain> domain;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // nx x ny
  int interior_count = 0;

  double x(int i) const { return xmin + i * h; }
  double y(int j) const { return ymin + j * h; }
  Point node(int i, int j) const { return Point(x(i), y(j)); }

  bool in_mask(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx && j < ny && mask(i, j);
  }
  /// All four corners of cell (i, j) lie in the mask.
  bool cell_interior(int i, int j) const {
    return in_mask(i, j) && in_mask(i + 1, j) && in_mask(i, j + 1) && in_mask(i + 1, j + 1);
  }

  void recount();
};

}  // namespace concavlab
