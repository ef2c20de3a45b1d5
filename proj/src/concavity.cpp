#include "concavlab/concavity.hpp"

#include <algorithm>
#include <cmath>

namespace concavlab {

double concavity_fn(const ScalarField& f, const Triple& t) {
  double f1 = field_value(f, t.x1);
  double f3 = field_value(f, t.x3);
  double f2 = field_value(f, t.x2());
  return f2 - t.lambda * f3 - (1.0 - t.lambda) * f1;
}

double deficit_objective(const ScalarField& f, const Triple& t) {
  return -concavity_fn(f, t);
}

double joint_concavity_fn(const JointFn& g, const Triple& t, double s1, double s3) {
  double s2 = t.lambda * s3 + (1.0 - t.lambda) * s1;
  return g(t.x2(), s2) - t.lambda * g(t.x3, s3) - (1.0 - t.lambda) * g(t.x1, s1);
}

std::optional<double> harmonic_concavity_fn(const JointFn& g, const Triple& t, double s1,
                                            double s3) {
  double g1 = g(t.x1, s1);
  double g3 = g(t.x3, s3);
  double s2 = t.lambda * s3 + (1.0 - t.lambda) * s1;
  double denom = t.lambda * g1 + (1.0 - t.lambda) * g3;
  if (denom > 0.0) return g(t.x2(), s2) - g1 * g3 / denom;
  if (g1 == 0.0 && g3 == 0.0) return g(t.x2(), s2);
  return std::nullopt;
}

double hc_minus_jc(const JointFn& g, const Triple& t, double s1, double s3) {
  auto hc = harmonic_concavity_fn(g, t, s1, s3);
  if (!hc) fail("undefined-harmonic-concavity", "endpoint values admit no harmonic mean");
  return *hc - joint_concavity_fn(g, t, s1, s3);
}

namespace {

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t pair_rank = 0;
  int lam_idx = 0;
  Triple triple;
};

// Trace-aware evaluation that reports failure instead of throwing; the scan
// skips triples whose x2 is unreachable (possible only at rho = 0).
std::optional<double> safe_eval(const ScalarField& f, const Point& x) {
  try {
    return field_value(f, x);
  } catch (const Error& e) {
    if (e.code() == "point-too-close-to-boundary") return std::nullopt;
    throw;
  }
}

// Chord-endpoint evaluation: interpolation strictly within the data (no
// cell extension) with the trace as the boundary-band value. Extrapolated
// endpoint values would let the refinement chase invented growth into the
// boundary; the trace keeps the estimate one-sided there instead.
std::optional<double> endpoint_eval(const ScalarField& f, const Point& x) {
  const Grid& g = f.grid();
  int ci = static_cast<int>(std::floor((x.x() - g.xmin) / g.h));
  int cj = static_cast<int>(std::floor((x.y() - g.ymin) / g.h));
  ci = std::min(std::max(ci, 0), g.nx - 2);
  cj = std::min(std::max(cj, 0), g.ny - 2);
  // A point on a cell edge belongs to up to four cells; any interior one do.
  const double slack = 1e-12 * std::max(1.0, std::abs(g.h));
  for (int di = 0; di >= -1; --di) {
    for (int dj = 0; dj >= -1; --dj) {
      int i = ci + di, j = cj + dj;
      if (i < 0 || j < 0 || i >= g.nx - 1 || j >= g.ny - 1) continue;
      if (!g.cell_interior(i, j)) continue;
      if (x.x() < g.x(i) - slack || x.x() > g.x(i + 1) + slack) continue;
      if (x.y() < g.y(j) - slack || x.y() > g.y(j + 1) + slack) continue;
      double tx = (x.x() - g.x(i)) / g.h;
      double ty = (x.y() - g.y(j)) / g.h;
      return f.value(i, j) * (1 - tx) * (1 - ty) + f.value(i + 1, j) * tx * (1 - ty) +
             f.value(i, j + 1) * (1 - tx) * ty + f.value(i + 1, j + 1) * tx * ty;
    }
  }
  if (f.trace() && g.domain && g.domain->signed_boundary_distance(x) >= -1e-12)
    return *f.trace();
  return std::nullopt;
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.pair_rank != b.pair_rank) return a.pair_rank < b.pair_rank;
  return a.lam_idx < b.lam_idx;
}

// Nelder-Mead maximization of fn over R^dim; returns best value, point, and
// iteration count. Stops when the simplex diameter drops below diam_tol.
struct NelderMead {
  int dim;
  std::function<double(const Eigen::VectorXd&)> fn;

  std::tuple<double, Eigen::VectorXd, int> run(const Eigen::VectorXd& z0,
                                               const Eigen::VectorXd& steps,
                                               double diam_tol, int max_iter) const {
    const int n = dim;
    std::vector<Eigen::VectorXd> v(n + 1, z0);
    std::vector<double> fv(n + 1);
    for (int k = 0; k < n; ++k) v[k + 1][k] += steps[k];
    for (int k = 0; k <= n; ++k) fv[k] = fn(v[k]);

    auto order = [&] {
      std::vector<int> idx(n + 1);
      for (int k = 0; k <= n; ++k) idx[k] = k;
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] > fv[b]; });
      std::vector<Eigen::VectorXd> v2;
      std::vector<double> f2;
      for (int k = 0; k <= n; ++k) {
        v2.push_back(v[idx[k]]);
        f2.push_back(fv[idx[k]]);
      }
      v.swap(v2);
      fv.swap(f2);
    };

    int it = 0;
    for (; it < max_iter; ++it) {
      order();
      double diam = 0.0;
      for (int k = 1; k <= n; ++k)
        diam = std::max(diam, (v[k] - v[0]).lpNorm<Eigen::Infinity>());
      if (diam < diam_tol) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < n; ++k) centroid += v[k];
      centroid /= n;

      Eigen::VectorXd xr = centroid + (centroid - v[n]);
      double fr = fn(xr);
      if (fr > fv[0]) {
        Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[n]);
        double fe = fn(xe);
        if (fe > fr) {
          v[n] = xe;
          fv[n] = fe;
        } else {
          v[n] = xr;
          fv[n] = fr;
        }
      } else if (fr > fv[n - 1]) {
        v[n] = xr;
        fv[n] = fr;
      } else {
        Eigen::VectorXd xc = centroid + 0.5 * (v[n] - centroid);
        double fc = fn(xc);
        if (fc > fv[n]) {
          v[n] = xc;
          fv[n] = fc;
        } else {
          for (int k = 1; k <= n; ++k) {
            v[k] = v[0] + 0.5 * (v[k] - v[0]);
            fv[k] = fn(v[k]);
          }
        }
      }
    }
    order();
    return {fv[0], v[0], it};
  }
};

}  // namespace

DeficitReport max_deficit(const ScalarField& f, const DeficitOptions& opts) {
  const Grid& g = f.grid();
  if (!g.domain) fail("empty-mask", "deficit scan needs the grid's domain");
  if (opts.lambda_grid < 3) fail("invalid-options", "lambda_grid must be >= 3");
  const ConvexDomain& dom = *g.domain;
  const double h = g.h;

  double rho = opts.rho >= 0.0 ? opts.rho
                               : std::max(3.0 * h, opts.rho_frac * dom.inradius());
  if (rho >= dom.inradius()) fail("empty-mask", "localization depth exceeds the inradius");

  // Depth test per node; cheap closed forms for disk/square, curve search otherwise.
  std::vector<std::pair<int, int>> nodes;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask(i, j) && dom.boundary_distance(g.node(i, j)) > rho) nodes.emplace_back(i, j);
  if (nodes.empty()) fail("empty-mask", "no scan node at the requested depth");

  int stride = 1;
  std::vector<std::size_t> sel;
  for (;; ++stride) {
    sel.clear();
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes[k].first % stride == 0 && nodes[k].second % stride == 0) sel.push_back(k);
    long long m = static_cast<long long>(sel.size());
    if (m * (m - 1) / 2 <= opts.max_pairs) break;
  }
  const std::size_t M = sel.size();

  const int L = opts.lambda_grid;
  std::vector<double> lambdas(L);
  for (int k = 0; k < L; ++k) lambdas[k] = static_cast<double>(k + 1) / (L + 1);

  std::vector<Point> pts(M);
  std::vector<double> fvals(M);
  for (std::size_t k = 0; k < M; ++k) {
    auto [i, j] = nodes[sel[k]];
    pts[k] = g.node(i, j);
    fvals[k] = f.value(i, j);
  }

  // Phase 1: strided pair scan, deterministic top-k merge across chunks.
  int threads = effective_threads(opts.threads);
  const int keep = std::max(1, opts.top_k);
  std::vector<std::vector<Candidate>> chunk_best(std::max<std::size_t>(M, 1));
  parallel_chunks(M, threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t a = lo; a < hi; ++a) {
      std::vector<Candidate>& best = chunk_best[a];
      for (std::size_t b = a + 1; b < M; ++b) {
        for (int li = 0; li < L; ++li) {
          Triple t{pts[a], pts[b], lambdas[li]};
          auto f2 = safe_eval(f, t.x2());
          if (!f2) continue;
          double val = t.lambda * fvals[b] + (1.0 - t.lambda) * fvals[a] - *f2;
          if (best.size() < static_cast<std::size_t>(keep) || val > best.back().value) {
            Candidate c{val, a * M + b, li, t};
            auto pos = std::lower_bound(best.begin(), best.end(), c, better);
            best.insert(pos, c);
            if (best.size() > static_cast<std::size_t>(keep)) best.pop_back();
          }
        }
      }
    }
  });

  std::vector<Candidate> merged;
  for (auto& cb : chunk_best) merged.insert(merged.end(), cb.begin(), cb.end());
  std::stable_sort(merged.begin(), merged.end(), better);
  if (merged.size() > static_cast<std::size_t>(keep)) merged.resize(keep);

  DeficitReport rep;
  rep.rho = rho;
  rep.stride = stride;
  rep.lambda_grid = L;
  rep.h = h;
  rep.nx = g.nx;
  rep.ny = g.ny;

  if (merged.empty()) {  // single scan node: no pairs, vacuous deficit
    rep.argmax = Triple{pts[0], pts[0], 0.5};
    rep.deficit = 0.0;
    rep.coarse_value = 0.0;
    rep.refined_value = 0.0;
    rep.classification = boundary_audit(rep, f);
    return rep;
  }

  rep.coarse_value = merged.front().value;

  // Phase 2: Nelder-Mead in (x1, x3, lambda) with retraction onto the
  // closed localized domain; lambda is scaled to length units.
  const double lam_scale = std::max(dom.diameter(), 1.0);
  auto objective = [&](const Eigen::VectorXd& z) {
    Triple t;
    t.x1 = dom.project_inside(Point(z[0], z[1]), rho);
    t.x3 = dom.project_inside(Point(z[2], z[3]), rho);
    t.lambda = std::clamp(z[4] / lam_scale, 0.0, 1.0);
    auto f1 = endpoint_eval(f, t.x1);
    auto f3 = endpoint_eval(f, t.x3);
    auto f2 = safe_eval(f, t.x2());
    if (!f1 || !f3 || !f2) return -1e300;
    return t.lambda * *f3 + (1.0 - t.lambda) * *f1 - *f2;
  };

  struct Refined {
    double value;
    Triple triple;
    int iterations;
  };
  std::vector<Refined> refined(merged.size());
  parallel_chunks(merged.size(), threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Candidate& c = merged[k];
      Eigen::VectorXd z0(5), steps(5);
      z0 << c.triple.x1.x(), c.triple.x1.y(), c.triple.x3.x(), c.triple.x3.y(),
          c.triple.lambda * lam_scale;
      steps << h, h, h, h, 0.05 * lam_scale;
      NelderMead nm{5, objective};
      auto [val, z, iters] = nm.run(z0, steps, h / 100.0, opts.nm_max_iter);
      Triple t;
      t.x1 = dom.project_inside(Point(z[0], z[1]), rho);
      t.x3 = dom.project_inside(Point(z[2], z[3]), rho);
      t.lambda = std::clamp(z[4] / lam_scale, 0.0, 1.0);
      refined[k] = {val, t, iters};
    }
  });

  std::size_t best_k = 0;
  for (std::size_t k = 1; k < refined.size(); ++k) {
    const Refined& a = refined[k];
    const Refined& b = refined[best_k];
    if (a.value > b.value ||
        (a.value == b.value &&
         (a.triple.x3 - a.triple.x1).norm() < (b.triple.x3 - b.triple.x1).norm()))
      best_k = k;
  }

  rep.refined_value = std::max(refined[best_k].value, rep.coarse_value);
  rep.argmax = refined[best_k].value >= rep.coarse_value ? refined[best_k].triple
                                                         : merged.front().triple;
  rep.deficit = std::max(0.0, rep.refined_value);
  for (const Refined& r : refined) rep.refine_iterations += r.iterations;
  rep.classification = boundary_audit(rep, f);
  rep.interior = rep.classification == "interior";
  return rep;
}

std::string boundary_audit(const DeficitReport& report, const ScalarField& f) {
  const Grid& g = f.grid();
  double floor = 10.0 * g.h * g.h * f.max_abs();
  if (report.deficit <= floor) return "interior";  // vacuous: nothing to localize
  if (!g.domain) return "interior";
  const ConvexDomain& dom = *g.domain;
  double margin = std::min({dom.signed_boundary_distance(report.argmax.x1),
                            dom.signed_boundary_distance(report.argmax.x2()),
                            dom.signed_boundary_distance(report.argmax.x3)});
  if (margin <= 1e-9) return "boundary-violation";
  if (margin < 2.0 * g.h) return "near-boundary-warning";
  return "interior";
}

nlohmann::json DeficitReport::to_json() const {
  nlohmann::json j;
  j["x1"] = {argmax.x1.x(), argmax.x1.y()};
  j["x3"] = {argmax.x3.x(), argmax.x3.y()};
  j["lambda"] = argmax.lambda;
  j["x2"] = {argmax.x2().x(), argmax.x2().y()};
  j["deficit"] = deficit;
  j["coarse_value"] = coarse_value;
  j["refined_value"] = refined_value;
  j["interior"] = interior;
  j["classification"] = classification;
  j["rho"] = rho;
  j["stride"] = stride;
  j["lambda_grid"] = lambda_grid;
  j["refine_iterations"] = refine_iterations;
  j["h"] = h;
  j["grid"] = {nx, ny};
  return j;
}

}  // namespace concavlab
