#include "concavlab/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace concavlab {

namespace {

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ScalarField::ScalarField(std::shared_ptr<const Grid> grid, Eigen::ArrayXXd values,
                         std::optional<double> trace)
    : grid_(std::move(grid)), values_(std::move(values)), trace_(trace) {
  if (values_.rows() != grid_->nx || values_.cols() != grid_->ny)
    fail("value-count-mismatch", "field values do not match the grid");
  for (int j = 0; j < grid_->ny; ++j)
    for (int i = 0; i < grid_->nx; ++i)
      if (grid_->mask(i, j) && !std::isfinite(values_(i, j)))
        fail("invalid-field", "non-finite value at an interior node");
}

ScalarField ScalarField::from_function(std::shared_ptr<const Grid> grid,
                                       const std::function<double(const Point&)>& fn,
                                       std::optional<double> trace) {
  Eigen::ArrayXXd vals(grid->nx, grid->ny);
  vals.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < grid->ny; ++j)
    for (int i = 0; i < grid->nx; ++i)
      if (grid->mask(i, j)) vals(i, j) = fn(grid->node(i, j));
  return ScalarField(grid, std::move(vals), trace);
}

ScalarField ScalarField::constant(std::shared_ptr<const Grid> grid, double value,
                                  std::optional<double> trace) {
  return from_function(std::move(grid), [value](const Point&) { return value; }, trace);
}

double ScalarField::max_abs() const {
  double m = 0;
  for (int j = 0; j < grid_->ny; ++j)
    for (int i = 0; i < grid_->nx; ++i)
      if (grid_->mask(i, j)) m = std::max(m, std::abs(values_(i, j)));
  return m;
}

double ScalarField::min_interior() const {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid_->ny; ++j)
    for (int i = 0; i < grid_->nx; ++i)
      if (grid_->mask(i, j)) m = std::min(m, values_(i, j));
  return m;
}

namespace {

double bilinear_in_cell(const ScalarField& f, int ci, int cj, const Point& x) {
  const Grid& g = f.grid();
  double tx = (x.x() - g.x(ci)) / g.h;
  double ty = (x.y() - g.y(cj)) / g.h;
  return f.value(ci, cj) * (1 - tx) * (1 - ty) + f.value(ci + 1, cj) * tx * (1 - ty) +
         f.value(ci, cj + 1) * (1 - tx) * ty + f.value(ci + 1, cj + 1) * tx * ty;
}

}  // namespace

double interpolate(const ScalarField& f, const Point& x) {
  const Grid& g = f.grid();
  int ci = static_cast<int>(std::floor((x.x() - g.xmin) / g.h));
  int cj = static_cast<int>(std::floor((x.y() - g.ymin) / g.h));
  ci = std::min(std::max(ci, 0), g.nx - 2);
  cj = std::min(std::max(cj, 0), g.ny - 2);
  if (g.cell_interior(ci, cj)) return bilinear_in_cell(f, ci, cj, x);

  // Nearest fully interior cell within 2h of x, by cell-center distance.
  int best_i = -1, best_j = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int dj = -2; dj <= 2; ++dj) {
    for (int di = -2; di <= 2; ++di) {
      int i = ci + di, j = cj + dj;
      if (i < 0 || j < 0 || i >= g.nx - 1 || j >= g.ny - 1) continue;
      if (!g.cell_interior(i, j)) continue;
      Point c(g.x(i) + 0.5 * g.h, g.y(j) + 0.5 * g.h);
      double d2 = (c - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i < 0 || best_d2 > 4.0 * g.h * g.h * 1.0000001)
    fail("point-too-close-to-boundary", "no interpolation cell within 2h");
  return bilinear_in_cell(f, best_i, best_j, x);
}

double field_value(const ScalarField& f, const Point& x) {
  const auto& dom = f.grid().domain;
  if (dom && !dom->contains(x)) {
    // Points of the closure outside the open region take the Dirichlet trace.
    if (f.trace() && dom->signed_boundary_distance(x) >= -1e-12) return *f.trace();
    fail("point-too-close-to-boundary", "point outside the domain closure");
  }
  try {
    return interpolate(f, x);
  } catch (const Error& e) {
    if (e.code() != "point-too-close-to-boundary") throw;
    if (f.trace() && dom) return *f.trace();
    throw;
  }
}

Eigen::Vector2d gradient_at(const ScalarField& f, int i, int j) {
  const Grid& g = f.grid();
  if (!g.in_mask(i, j) || !g.in_mask(i - 1, j) || !g.in_mask(i + 1, j) ||
      !g.in_mask(i, j - 1) || !g.in_mask(i, j + 1))
    fail("stencil-exits-domain", "gradient stencil needs the 4 axis neighbors");
  double inv2h = 0.5 / g.h;
  return {(f.value(i + 1, j) - f.value(i - 1, j)) * inv2h,
          (f.value(i, j + 1) - f.value(i, j - 1)) * inv2h};
}

Eigen::Matrix2d hessian_at(const ScalarField& f, int i, int j) {
  const Grid& g = f.grid();
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di)
      if (!g.in_mask(i + di, j + dj))
        fail("stencil-exits-domain", "hessian stencil needs the 8-neighborhood");
  double h2 = g.h * g.h;
  double fxx = (f.value(i + 1, j) - 2 * f.value(i, j) + f.value(i - 1, j)) / h2;
  double fyy = (f.value(i, j + 1) - 2 * f.value(i, j) + f.value(i, j - 1)) / h2;
  double fxy = (f.value(i + 1, j + 1) - f.value(i + 1, j - 1) - f.value(i - 1, j + 1) +
                f.value(i - 1, j - 1)) /
               (4 * h2);
  Eigen::Matrix2d H;
  H << fxx, fxy, fxy, fyy;
  return H;
}

ScalarField transform_power(const ScalarField& u, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) fail("beta-one-rejected", "beta must lie in [0,1)");
  const Grid& g = u.grid();
  double e = 0.5 * (1.0 - beta);
  Eigen::ArrayXXd vals = u.values();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask(i, j)) {
        if (!(u.value(i, j) > 0))
          fail("nonpositive-input-value", "power transform requires u > 0");
        vals(i, j) = std::pow(u.value(i, j), e);
      }
  return ScalarField(u.grid_ptr(), std::move(vals), 0.0);
}

ScalarField transform_log(const ScalarField& u) {
  const Grid& g = u.grid();
  Eigen::ArrayXXd vals = u.values();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask(i, j)) {
        if (!(u.value(i, j) > 0))
          fail("nonpositive-input-value", "log transform requires u > 0");
        vals(i, j) = std::log(u.value(i, j));
      }
  return ScalarField(u.grid_ptr(), std::move(vals), std::nullopt);
}

ScalarField negate(const ScalarField& f) {
  std::optional<double> trace;
  if (f.trace()) trace = -*f.trace();
  return ScalarField(f.grid_ptr(), -f.values(), trace);
}

void write_field(const ScalarField& f, const std::string& path) {
  const Grid& g = f.grid();
  std::ofstream out(path);
  if (!out) fail("io-error", "cannot open " + path + " for writing");
  out << "#FIELD v1\n";
  out << g.nx << " " << g.ny << " " << fmt17(g.xmin) << " " << fmt17(g.xmax) << " "
      << fmt17(g.ymin) << " " << fmt17(g.ymax) << "\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out << " ";
      out << (g.mask(i, j) ? fmt17(f.value(i, j)) : "nan");
    }
    out << "\n";
  }
}

ScalarField read_field(const std::string& path, std::optional<ConvexDomain> domain,
                       std::optional<double> trace) {
  std::ifstream in(path);
  if (!in) fail("io-error", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "#FIELD v1")
    fail("malformed-header", "expected '#FIELD v1' in " + path);
  int nx = 0, ny = 0;
  double xmin, xmax, ymin, ymax;
  if (!std::getline(in, line)) fail("malformed-header", "missing grid line");
  {
    std::istringstream is(line);
    if (!(is >> nx >> ny >> xmin >> xmax >> ymin >> ymax))
      fail("malformed-header", "bad grid line: " + line);
  }
  auto grid_mut = std::make_shared<Grid>(*Grid::from_box(xmin, xmax, ymin, ymax, nx, ny, domain));
  Eigen::ArrayXXd vals(nx, ny);
  for (int j = 0; j < ny; ++j) {
    if (!std::getline(in, line)) fail("value-count-mismatch", "missing value row");
    std::istringstream is(line);
    std::string tok;
    for (int i = 0; i < nx; ++i) {
      if (!(is >> tok)) fail("value-count-mismatch", "short value row");
      if (tok == "nan" || tok == "-nan") {
        vals(i, j) = std::numeric_limits<double>::quiet_NaN();
      } else {
        try {
          vals(i, j) = std::stod(tok);
        } catch (const std::exception&) {
          fail("value-count-mismatch", "bad value token '" + tok + "'");
        }
      }
    }
    std::string extra;
    if (is >> extra) fail("value-count-mismatch", "long value row");
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) grid_mut->mask(i, j) = std::isfinite(vals(i, j));
  grid_mut->recount();
  return ScalarField(grid_mut, std::move(vals), trace);
}

}  // namespace concavlab
