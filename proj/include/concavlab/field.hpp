#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "concavlab/grid.hpp"

namespace concavlab {

/// Scalar samples on the interior nodes of a masked grid. Exterior nodes
/// carry NaN. An optional Dirichlet trace gives the continuous extension
/// value on the boundary (0 for every problem solved here; absent for
/// log-transformed fields, which blow up at the boundary).
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const Grid> grid, Eigen::ArrayXXd values,
              std::optional<double> trace);

  static ScalarField from_function(std::shared_ptr<const Grid> grid,
                                   const std::function<double(const Point&)>& fn,
                                   std::optional<double> trace = 0.0);
  static ScalarField constant(std::shared_ptr<const Grid> grid, double value,
                              std::optional<double> trace = 0.0);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const Eigen::ArrayXXd& values() const { return values_; }
  Eigen::ArrayXXd& values() { return values_; }
  double value(int i, int j) const { return values_(i, j); }
  std::optional<double> trace() const { return trace_; }

  double max_abs() const;  // sup over interior nodes
  double min_interior() const;

 private:
  std::shared_ptr<const Grid> grid_;
  Eigen::ArrayXXd values_;
  std::optional<double> trace_;
};

/// Bilinear interpolation at x. Needs the surrounding cell fully interior;
/// otherwise extends the bilinear of the nearest fully interior cell within
/// 2h. Exact for affine fields; exact at interior nodes.
/// Throws point-too-close-to-boundary when no valid cell exists.
double interpolate(const ScalarField& f, const Point& x);

/// interpolate() with a fallback to the Dirichlet trace for points of the
/// closed domain where no interpolation cell exists.
double field_value(const ScalarField& f, const Point& x);

Eigen::Vector2d gradient_at(const ScalarField& f, int i, int j);
Eigen::Matrix2d hessian_at(const ScalarField& f, int i, int j);

/// Node-wise u^((1-beta)/2); Dirichlet trace 0. Requires u > 0 on the mask.
ScalarField transform_power(const ScalarField& u, double beta);

/// Node-wise log u; no finite trace. Requires u > 0 on the mask.
ScalarField transform_log(const ScalarField& u);

ScalarField negate(const ScalarField& f);

/// #FIELD v1 text format. Round-trips values bit-exactly.
void write_field(const ScalarField& f, const std::string& path);
ScalarField read_field(const std::string& path,
                       std::optional<ConvexDomain> domain = std::nullopt,
                       std::optional<double> trace = 0.0);

}  // namespace concavlab
