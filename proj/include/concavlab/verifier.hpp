#pragma once

#include <optional>
#include <string>

#include "concavlab/concavity.hpp"
#include "concavlab/solver.hpp"

#include <nlohmann/json.hpp>

namespace concavlab {

/// The first-order coefficient b(x,s,xi) of the transformed equations.
/// PowerTransform: b = (-s)^{-1} f_xi(x) with
///   f_xi(x) = a(x)(1-beta)/2 + (1+beta)/(1-beta) * xi' alpha(x) xi, s < 0.
/// LogTransform:  b = xi' alpha(x) xi + a(x) + eps_phi e^s phi(e^{-s}).
struct BFunction {
  enum class Kind { PowerTransform, LogTransform };
  Kind kind = Kind::PowerTransform;
  CoefficientSet coeffs;
  double eps = 0.0;  // binds the coefficient templates
  double beta = 0.0;
  PhiKind phi = PhiKind::One;
  double gamma = 0.0;
  double eps_phi = 0.0;

  static BFunction power_transform(CoefficientSet coeffs, double eps, double beta);
  static BFunction log_transform(CoefficientSet coeffs, double eps, PhiKind phi, double gamma,
                                 double eps_phi);

  double f_xi(const Point& x, const Eigen::Vector2d& xi) const;
  bool s_admissible(double s) const { return kind == Kind::LogTransform || s < 0.0; }
  double b(const Point& x, double s, const Eigen::Vector2d& xi) const;
  double db_ds(const Point& x, double s, const Eigen::Vector2d& xi) const;
};

/// Infima of b and of its s-derivative over segment x s-segment sampling.
/// The "safe" values subtract a first-order Lipschitz sampling margin; the
/// audits must pass with both versions.
struct SigmaNu {
  double sigma_raw = 0.0, sigma_safe = 0.0;
  double nu_raw = 0.0, nu_safe = 0.0;
};

SigmaNu sigma_nu_estimate(const BFunction& bfun, const Point& x1, const Point& x3, double s1,
                          double s3, const Eigen::Vector2d& xi, int m = 65);

/// max_ij sup over segment samples of |grad alpha^{ij}|, the measured
/// counterpart of the frozen-gradient coefficient variation.
double epsilon_of_xi(const CoefficientSet& coeffs, const BFunction& bfun, const Point& x1,
                     const Point& x3, const Eigen::Vector2d& xi, int m = 257);

/// n^2 max_ij max_k |v_ij(x_k)| diam(Omega), Hessians at the nearest nodes.
double c_const(const ScalarField& v, const Point& x1, const Point& x3,
               const ConvexDomain& domain);

/// Gradient of a field at an off-node point, bilinearly interpolated from
/// node-wise central-difference gradients.
Eigen::Vector2d interpolated_gradient(const ScalarField& v, const Point& x);

struct TheoremAudit {
  int theorem = 1;
  std::string status = "pass";  // pass|fail|vacuous|hypothesis-failure|
                                // boundary-maximum|undefined-harmonic-concavity
  bool pass = true;
  Triple triple;
  Eigen::Vector2d xi = Eigen::Vector2d::Zero();
  double s1 = 0, s3 = 0;
  SigmaNu sn;
  double eps_xi = 0, c_val = 0;
  double jc = 0, hc = 0;
  bool hc_defined = false;
  double lhs = 0, rhs_raw = 0, rhs_safe = 0;
  double margin_raw = 0, margin_safe = 0;
  double floor = 0;
  double slack = 0.05;

  nlohmann::json to_json() const;
};

/// Theorem with the sigma hypothesis only:
///   C_v <= (-JC_b + C eps(xi)) / sigma.
TheoremAudit audit_theorem1(const ScalarField& v, const BFunction& bfun,
                            const DeficitReport& report, double slack = 0.05);

/// Two-branch theorem with sigma, nu > 0 and b > 0:
///   JC >= 0:  C_v <= (C eps + C^2 eps^2 / nu) / sigma
///   else:     C_v <= (-HC + C eps (1 - JC/nu) + C^2 eps^2 / nu) / sigma.
TheoremAudit audit_theorem2(const ScalarField& v, const BFunction& bfun,
                            const DeficitReport& report, double slack = 0.05);

struct RemarkWitness {
  bool found = false;
  double value = 0.0;  // most negative harmonic-concavity value encountered
  double x1 = 0, x3 = 0, s1 = 0, s3 = 0, lambda = 0.5;
};

/// Searches b(x,s) = 1/(s g0(x)) for a negative harmonic-concavity value on
/// [lo,hi] x [0.5,2]; such a witness exists whenever g0 is non-constant.
RemarkWitness audit_remark_noconc(const Expr& g0, double lo, double hi);

struct PropositionRecord {
  double eps_meas = 0.0;
  double deficit = 0.0;
  double ratio = 0.0;
  bool ratio_defined = false;
  /// "domain-not-strongly-convex" when the audited domain has flat sides;
  /// the almost-concavity statements assume strong convexity.
  std::string warning;
};

/// Records the (measured coefficient variation, deficit) pair feeding the
/// sweep-level slope fit of the almost-concavity propositions.
PropositionRecord audit_propositions(const ProblemSpec& spec, const ScalarField& u,
                                     const DeficitReport& report);

}  // namespace concavlab
