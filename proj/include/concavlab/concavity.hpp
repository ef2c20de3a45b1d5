#pragma once

#include <functional>
#include <optional>
#include <string>

#include "concavlab/field.hpp"

#include <nlohmann/json.hpp>

namespace concavlab {

/// A pair of base points with the weight lambda; x2 is the affine combination.
struct Triple {
  Point x1 = Point::Zero();
  Point x3 = Point::Zero();
  double lambda = 0.5;

  Point x2() const { return lambda * x3 + (1.0 - lambda) * x1; }
  bool interior_for(const ConvexDomain& dom) const {
    return dom.contains(x1) && dom.contains(x2()) && dom.contains(x3);
  }
};

/// C_f(x1,x3,lambda) = f(x2) - lambda f(x3) - (1-lambda) f(x1).
/// Nonnegative for all triples iff f is concave.
double concavity_fn(const ScalarField& f, const Triple& t);

/// C_{-f}: positive where the chord of f lies above f (a convexity defect).
double deficit_objective(const ScalarField& f, const Triple& t);

using JointFn = std::function<double(const Point&, double)>;

/// JC_g((x1,s1),(x3,s3),lambda) = g(x2,s2) - lambda g(x3,s3) - (1-lambda) g(x1,s1).
double joint_concavity_fn(const JointFn& g, const Triple& t, double s1, double s3);

/// Harmonic concavity defect with the exact case split: defined when the
/// lambda-weighted endpoint combination is positive or both endpoint values
/// vanish; otherwise empty.
std::optional<double> harmonic_concavity_fn(const JointFn& g, const Triple& t, double s1,
                                            double s3);

/// HC - JC; >= 0 whenever both endpoint values are positive.
/// Throws undefined-harmonic-concavity when HC has no value.
double hc_minus_jc(const JointFn& g, const Triple& t, double s1, double s3);

struct DeficitOptions {
  int lambda_grid = 9;  // interior lambda values k/(L+1), k = 1..L
  int top_k = 16;       // scan triples refined by Nelder-Mead
  /// Scan localization depth; negative means max(3h, rho_frac * inradius).
  /// The resolution-independent floor keeps the estimator bias O(h^2) for
  /// transforms with unbounded curvature at the boundary.
  double rho = -1.0;
  double rho_frac = 0.05;
  long long max_pairs = 20'000'000;
  int threads = 0;
  int nm_max_iter = 400;
};

struct DeficitReport {
  Triple argmax;
  double deficit = 0.0;        // max(0, refined value)
  double coarse_value = 0.0;   // best scan value (unclamped)
  double refined_value = 0.0;  // best Nelder-Mead value (unclamped)
  std::string classification = "interior";
  bool interior = true;
  double rho = 0.0;
  int stride = 1;
  int lambda_grid = 0;
  int refine_iterations = 0;
  double h = 0.0;
  int nx = 0, ny = 0;

  nlohmann::json to_json() const;
};

/// Locates the maximum of C_{-f}: an exhaustive strided pair scan over the
/// localized mask followed by Nelder-Mead refinement of the best triples.
DeficitReport max_deficit(const ScalarField& f, const DeficitOptions& opts = {});

/// Classifies the argmax triple of a report: "interior" (margin >= 2h, or
/// deficit below the numerical floor), "near-boundary-warning", or
/// "boundary-violation".
std::string boundary_audit(const DeficitReport& report, const ScalarField& f);

}  // namespace concavlab
