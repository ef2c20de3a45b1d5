#include "concavlab/grid.hpp"

#include <cmath>

namespace concavlab {

void Grid::recount() {
  interior_count = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask(i, j)) ++interior_count;
}

std::shared_ptr<const Grid> Grid::over_domain(const ConvexDomain& domain, int n) {
  if (n < 9) fail("invalid-grid", "grid resolution must be >= 9 nodes per side");
  Eigen::Vector4d bb = domain.bounding_box();
  double w = bb[1] - bb[0], hgt = bb[3] - bb[2];
  auto g = std::make_shared<Grid>();
  g->domain = domain;
  if (w >= hgt) {
    g->nx = n;
    g->h = w / (n - 1);
    g->ny = static_cast<int>(std::lround(hgt / g->h)) + 1;
  } else {
    g->ny = n;
    g->h = hgt / (n - 1);
    g->nx = static_cast<int>(std::lround(w / g->h)) + 1;
  }
  if (g->nx < 9 || g->ny < 9) fail("invalid-grid", "domain too thin for a square-cell grid");
  double cx = 0.5 * (bb[0] + bb[1]), cy = 0.5 * (bb[2] + bb[3]);
  g->xmin = cx - 0.5 * (g->nx - 1) * g->h;
  g->xmax = cx + 0.5 * (g->nx - 1) * g->h;
  g->ymin = cy - 0.5 * (g->ny - 1) * g->h;
  g->ymax = cy + 0.5 * (g->ny - 1) * g->h;
  g->mask.resize(g->nx, g->ny);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i) g->mask(i, j) = domain.contains(g->node(i, j));
  g->recount();
  if (g->interior_count == 0) fail("empty-mask", "no grid node lies inside the domain");
  return g;
}

std::shared_ptr<const Grid> Grid::from_box(double xmin, double xmax, double ymin, double ymax,
                                           int nx, int ny, std::optional<ConvexDomain> domain) {
  if (nx < 2 || ny < 2) fail("malformed-header", "grid needs at least 2 nodes per side");
  auto g = std::make_shared<Grid>();
  g->nx = nx;
  g->ny = ny;
  g->xmin = xmin;
  g->xmax = xmax;
  g->ymin = ymin;
  g->ymax = ymax;
  g->h = (xmax - xmin) / (nx - 1);
  double hy = (ymax - ymin) / (ny - 1);
  if (std::abs(hy - g->h) > 1e-12 * std::max(std::abs(g->h), 1.0))
    fail("malformed-header", "grid cells are not square");
  g->domain = std::move(domain);
  g->mask.setConstant(nx, ny, true);
  g->recount();
  return g;
}

}  // namespace concavlab
