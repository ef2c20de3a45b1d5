#pragma once

#include <Eigen/Dense>

#include "concavlab/field.hpp"

namespace concavlab {

struct EnvelopeResult {
  ScalarField envelope;       // least concave majorant sampled at the nodes
  double distance = 0.0;      // max node-wise (envelope - f)
  double delta = 0.0;         // deficit supplied by the caller (0 if none)
  double ratio = 0.0;         // distance / delta
  bool ratio_defined = false; // false when delta == 0
  int facet_count = 0;        // upper-hull facets over the node cloud
  bool consistent = true;     // distance <= K * delta (Hyers-Ulam audit)
};

/// Least concave majorant of the node samples: the upper convex hull of the
/// lifted cloud {(x, y, f(x,y))}, evaluated back at every node as the
/// minimum over upper-facet planes.
EnvelopeResult concave_envelope(const ScalarField& f);

/// Envelope with the Hyers-Ulam consistency audit: flags whether the witness
/// distance stays within audit_k times the supplied deficit delta.
EnvelopeResult hyers_ulam_witness(const ScalarField& f, double delta, double audit_k = 10.0);

struct Envelope1D {
  Eigen::VectorXd envelope;
  double distance = 0.0;
};

/// Monotone-chain upper hull of (x_k, f_k); xs must be strictly increasing
/// with at least 2 nodes (degenerate-hull otherwise).
Envelope1D concave_envelope_1d(const Eigen::VectorXd& xs, const Eigen::VectorXd& fs);

}  // namespace concavlab
