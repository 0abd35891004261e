#pragma once

#include <optional>
#include <vector>

#include "qbp/graph_model.hpp"

namespace qbp {

/// V_th = −(1/β)·log Tr_{V′}[e^{−βH′}/Z′] − H′_out on endpoints(E′) − V′.
/// H′ sums the terms of E′; H′_out those with both endpoints outside V′.
/// Throws DomainError if V′ is not contained in endpoints(E′) or nothing is
/// left after the trace, SingularOperatorError if the reduced state is singular.
DenseOperator thermal_potential(const GraphModel& model, const std::vector<SiteId>& v_prime,
                                const std::vector<Edge>& e_prime);

struct CumulantEntry {
  int j = 0;
  DenseOperator op;
  double norm = 0.0;  // operator norm
};

struct CumulantSeries {
  std::vector<SiteId> anchor;
  std::vector<CumulantEntry> entries;
  double reconstruction_residual = 0.0;  // ‖Σ_j O^(j) − O‖
};

/// O^(j) = CE(O − Σ_{k<j} O^(k), D_j) with D_j the sites of O's layout at graph
/// distance > j from V′. Stops at the first j where D_j is empty.
CumulantSeries cumulants(const DenseOperator& O, const GraphModel& model, const std::vector<SiteId>& v_prime);

inline constexpr double kFitFloor = 1e-12;

struct ThermalFit {
  bool defined = false;
  double K = 0.0;
  double k = 0.0;
  double rms_residual = 0.0;
  int used_points = 0;
  int floored_points = 0;
};

/// Least squares of log‖O^(j)‖ against j over norms above 1e-12.
/// K = e^{intercept}, k = −slope; undefined with fewer than two usable points.
ThermalFit fit_thermal_bound(const CumulantSeries& series);
ThermalFit fit_thermal_bound(const std::vector<double>& norms);

struct BoundConstants {
  double c = 1.0;
  double alpha = 1.0;
  double C = 1.0;
  double a = 1.0;
  double v = 1.0;
  double K = 1.0;
  double k = 1.0;

  /// Throws DomainError unless every constant is strictly positive.
  void validate() const;
};

/// Derived: f = min{a′/2, πa′/(2avβ)}. Literal: f = min{1/2, π/(2βav)}.
enum class DecayExponent { Derived, Literal };

struct RhsBreakdown {
  double total = 0.0;
  double bound1 = 0.0;
  double bound2 = 0.0;
  double F = 0.0;
  double G = 0.0;
  double f = 0.0;
};

RhsBreakdown theorem_rhs(const BoundConstants& consts, double beta, double norm_v, int ell,
                         DecayExponent mode = DecayExponent::Derived);

/// ℓ* = max(0, 1/f − G/F): beyond it (ℓF + G)e^{−fℓ} decreases.
double rhs_turning_point(const RhsBreakdown& rhs);

struct SingleStepRecord {
  int ell = 0;
  double lhs_literal = 0.0;
  double lhs_normalized = 0.0;
  double norm_hb = 0.0;
  RhsBreakdown rhs;
};

/// Compares Tr_{v*}[e^{−βH}] with exp(−βH_far + log Tr_{v*}[e^{−βH_near}]).
/// Near = R ∪ (B edges touching v*), far = everything else. Both terms divided
/// by Tr e^{−βH} (literal) and each scaled to unit trace (normalized).
/// Throws GraphError unless v* is a leaf.
SingleStepRecord single_step_experiment(const GraphModel& model, SiteId v_star, int ell,
                                        const BoundConstants& consts,
                                        DecayExponent mode = DecayExponent::Derived);

}  // namespace qbp
