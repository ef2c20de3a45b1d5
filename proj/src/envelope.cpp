#include "concavlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

namespace concavlab {

namespace {

using Vec3 = Eigen::Vector3d;

// Incremental quickhull over the lifted cloud. Four anchor points far below
// the corners keep the initial simplex fat, so coplanar clouds (affine
// fields) need no special casing; anchors never affect the upper facets.
class QuickHull {
 public:
  explicit QuickHull(std::vector<Vec3> pts) : pts_(std::move(pts)) {
    double scale = 0.0;
    for (const Vec3& p : pts_) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    eps_ = 1e-10 * std::max(scale, 1.0);
  }

  struct Facet {
    int a, b, c;
    Vec3 n;        // outward unit normal
    double off;    // n . p = off on the plane
    bool alive = true;
    std::vector<int> conflicts;
  };

  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<Vec3>& points() const { return pts_; }

  void build() {
    init_simplex();
    std::deque<int> work;
    for (int fi = 0; fi < static_cast<int>(facets_.size()); ++fi)
      if (!facets_[fi].conflicts.empty()) work.push_back(fi);

    long long guard = 64LL * static_cast<long long>(pts_.size()) + 4096;
    while (!work.empty() && guard-- > 0) {
      int fi = work.front();
      work.pop_front();
      Facet& f = facets_[fi];
      if (!f.alive || f.conflicts.empty()) continue;

      int apex = f.conflicts.front();
      double best = dist(fi, apex);
      for (int q : f.conflicts) {
        double d = dist(fi, q);
        if (d > best) {
          best = d;
          apex = q;
        }
      }

      // Visible set and horizon via twin-edge lookups.
      std::vector<int> visible{fi};
      std::vector<char> seen(facets_.size(), 0);
      seen[fi] = 1;
      std::vector<std::pair<int, int>> horizon;
      for (std::size_t k = 0; k < visible.size(); ++k) {
        const Facet& vf = facets_[visible[k]];
        const int vs[3] = {vf.a, vf.b, vf.c};
        for (int e = 0; e < 3; ++e) {
          int u = vs[e], v = vs[(e + 1) % 3];
          auto it = edge_.find(key(v, u));
          if (it == edge_.end()) continue;
          int tw = it->second;
          if (seen[tw]) continue;
          if (dist(tw, apex) > eps_) {
            seen[tw] = 1;
            visible.push_back(tw);
          } else {
            horizon.emplace_back(u, v);
          }
        }
      }

      std::vector<int> orphans;
      for (int vi : visible) {
        Facet& vf = facets_[vi];
        vf.alive = false;
        erase_edges(vi);
        for (int q : vf.conflicts)
          if (q != apex) orphans.push_back(q);
        vf.conflicts.clear();
      }

      std::vector<int> fresh;
      for (auto [u, v] : horizon) fresh.push_back(add_facet(u, v, apex));
      for (int q : orphans) {
        for (int nf : fresh) {
          if (dist(nf, q) > eps_) {
            facets_[nf].conflicts.push_back(q);
            break;
          }
        }
      }
      for (int nf : fresh)
        if (!facets_[nf].conflicts.empty()) work.push_back(nf);
    }
  }

  double dist(int fi, int pi) const {
    const Facet& f = facets_[fi];
    return f.n.dot(pts_[pi]) - f.off;
  }

 private:
  static std::uint64_t key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }

  // Orientation is fixed against the stored interior point before the
  // directed edges are registered, so shared edges always appear in
  // opposite directions in the two adjacent facets.
  int add_facet(int a, int b, int c) {
    Facet f;
    f.a = a;
    f.b = b;
    f.c = c;
    Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    double ln = n.norm();
    if (ln > 0) n /= ln;
    f.n = n;
    f.off = n.dot(pts_[a]);
    if (f.n.dot(inner_) - f.off > 0) {
      std::swap(f.b, f.c);
      f.n = -f.n;
      f.off = -f.off;
    }
    int idx = static_cast<int>(facets_.size());
    facets_.push_back(std::move(f));
    edge_[key(facets_[idx].a, facets_[idx].b)] = idx;
    edge_[key(facets_[idx].b, facets_[idx].c)] = idx;
    edge_[key(facets_[idx].c, facets_[idx].a)] = idx;
    return idx;
  }

  void erase_edges(int fi) {
    const Facet& f = facets_[fi];
    edge_.erase(key(f.a, f.b));
    edge_.erase(key(f.b, f.c));
    edge_.erase(key(f.c, f.a));
  }

  void init_simplex() {
    const int n = static_cast<int>(pts_.size());
    if (n < 4) fail("degenerate-hull", "hull needs at least 4 points");
    int i0 = 0, i1 = 0;
    for (int i = 1; i < n; ++i) {
      if (pts_[i].x() < pts_[i0].x()) i0 = i;
      if (pts_[i].x() > pts_[i1].x()) i1 = i;
    }
    if (i0 == i1) i1 = (i0 + 1) % n;
    Vec3 d01 = pts_[i1] - pts_[i0];
    int i2 = -1;
    double best = eps_;
    for (int i = 0; i < n; ++i) {
      double a = d01.cross(pts_[i] - pts_[i0]).norm();
      if (a > best) {
        best = a;
        i2 = i;
      }
    }
    if (i2 < 0) fail("degenerate-hull", "all points collinear");
    Vec3 nrm = d01.cross(pts_[i2] - pts_[i0]);
    int i3 = -1;
    best = eps_ * nrm.norm();
    for (int i = 0; i < n; ++i) {
      double d = std::abs(nrm.dot(pts_[i] - pts_[i0]));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (i3 < 0) fail("degenerate-hull", "all points coplanar");

    inner_ = 0.25 * (pts_[i0] + pts_[i1] + pts_[i2] + pts_[i3]);
    int f0 = add_facet(i0, i1, i2);
    int f1 = add_facet(i0, i1, i3);
    int f2 = add_facet(i0, i2, i3);
    int f3 = add_facet(i1, i2, i3);

    for (int q = 0; q < n; ++q) {
      if (q == i0 || q == i1 || q == i2 || q == i3) continue;
      for (int fi : {f0, f1, f2, f3}) {
        if (dist(fi, q) > eps_) {
          facets_[fi].conflicts.push_back(q);
          break;
        }
      }
    }
  }

  std::vector<Vec3> pts_;
  std::vector<Facet> facets_;
  std::unordered_map<std::uint64_t, int> edge_;
  Vec3 inner_ = Vec3::Zero();
  double eps_;
};

}  // namespace

EnvelopeResult concave_envelope(const ScalarField& f) {
  const Grid& g = f.grid();

  std::vector<Vec3> cloud;
  std::vector<std::pair<int, int>> node_of;
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -fmin;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask(i, j)) {
        cloud.emplace_back(g.x(i), g.y(j), f.value(i, j));
        node_of.emplace_back(i, j);
        fmin = std::min(fmin, f.value(i, j));
        fmax = std::max(fmax, f.value(i, j));
      }
  const std::size_t n_real = cloud.size();
  if (n_real == 0) fail("empty-mask", "envelope of an empty field");

  Eigen::ArrayXXd env = f.values();
  EnvelopeResult res{ScalarField(f.grid_ptr(), env, f.trace()), 0.0, 0.0, 0.0, false, 0, true};
  if (n_real < 3) return res;  // one or two nodes are their own majorant

  double pad = 0.5 * (g.xmax - g.xmin) + g.h;
  double zfloor = fmin - 10.0 * std::max(fmax - fmin, 1.0) - 1.0;
  cloud.emplace_back(g.xmin - pad, g.ymin - pad, zfloor);
  cloud.emplace_back(g.xmax + pad, g.ymin - pad, zfloor);
  cloud.emplace_back(g.xmin - pad, g.ymax + pad, zfloor);
  cloud.emplace_back(g.xmax + pad, g.ymax + pad, zfloor);

  QuickHull hull(std::move(cloud));
  hull.build();

  // Upper facets as planes z = (off - nx x - ny y) / nz. Every hull plane
  // with positive nz bounds the cloud from above, so the pointwise minimum
  // over them is exactly the upper-hull height.
  struct Plane {
    double cx, cy, c0;
  };
  std::vector<Plane> planes;
  int real_upper = 0;
  for (const auto& fc : hull.facets()) {
    if (!fc.alive || fc.n.z() <= 1e-10) continue;
    planes.push_back({-fc.n.x() / fc.n.z(), -fc.n.y() / fc.n.z(), fc.off / fc.n.z()});
    if (fc.a < static_cast<int>(n_real) && fc.b < static_cast<int>(n_real) &&
        fc.c < static_cast<int>(n_real))
      ++real_upper;
  }
  if (planes.empty()) fail("degenerate-hull", "no upward facet found");

  double dist = 0.0;
  for (std::size_t k = 0; k < n_real; ++k) {
    auto [i, j] = node_of[k];
    double x = g.x(i), y = g.y(j);
    double e = std::numeric_limits<double>::infinity();
    for (const Plane& p : planes) e = std::min(e, p.cx * x + p.cy * y + p.c0);
    e = std::max(e, f.value(i, j));  // majorant by construction; absorbs eps slop
    env(i, j) = e;
    dist = std::max(dist, e - f.value(i, j));
  }

  res.envelope = ScalarField(f.grid_ptr(), std::move(env), f.trace());
  res.distance = dist;
  res.facet_count = real_upper;
  return res;
}

EnvelopeResult hyers_ulam_witness(const ScalarField& f, double delta, double audit_k) {
  if (delta < 0) fail("invalid-delta", "delta must be >= 0");
  EnvelopeResult res = concave_envelope(f);
  res.delta = delta;
  double scale = std::max(f.max_abs(), 1.0);
  if (delta > 0) {
    res.ratio = res.distance / delta;
    res.ratio_defined = true;
    res.consistent = res.distance <= audit_k * delta + 1e-10 * scale;
  } else {
    res.ratio_defined = false;
    res.consistent = res.distance <= 1e-10 * scale;
  }
  return res;
}

Envelope1D concave_envelope_1d(const Eigen::VectorXd& xs, const Eigen::VectorXd& fs) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) fail("degenerate-hull", "1D envelope needs at least 2 nodes");
  if (fs.size() != n) fail("value-count-mismatch", "xs and fs differ in length");
  for (int i = 1; i < n; ++i)
    if (!(xs[i] > xs[i - 1])) fail("degenerate-hull", "xs must be strictly increasing");

  // Monotone chain, upper hull: right turns only.
  std::vector<int> hull;
  for (int i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      int p = hull[hull.size() - 2], q = hull[hull.size() - 1];
      double cross = (xs[q] - xs[p]) * (fs[i] - fs[p]) - (fs[q] - fs[p]) * (xs[i] - xs[p]);
      if (cross >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }

  Envelope1D out;
  out.envelope.resize(n);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    while (seg + 1 < hull.size() && xs[hull[seg + 1]] < xs[i]) ++seg;
    int p = hull[seg], q = hull[std::min(seg + 1, hull.size() - 1)];
    double e;
    if (p == q) {
      e = fs[p];
    } else {
      double t = (xs[i] - xs[p]) / (xs[q] - xs[p]);
      e = (1 - t) * fs[p] + t * fs[q];
    }
    e = std::max(e, fs[i]);
    out.envelope[i] = e;
    out.distance = std::max(out.distance, e - fs[i]);
  }
  return out;
}

}  // namespace concavlab
