#pragma once

#include <vector>

#include "qbp/graph_model.hpp"

namespace qbp {

inline constexpr int kDefaultSSteps = 64;

struct FilterSpec {
  double beta = 1.0;
  int s_steps = kDefaultSSteps;
  // Time grid for quadrature cross-checks of Φ.
  double t_max = 40.0;
  int n_points = 4000;

  /// Throws DomainError unless β > 0, s_steps ≥ 1, t_max > 0 and n_points ≥ 1.
  void validate() const;
};

/// tanh(βω/2)/(βω/2), equal to 1 − (βω)²/12 for |βω| < 1e-8.
double filter_hat(double omega, double beta);

/// f_β(t) = (2/(βπ))·log coth(π|t|/(2β)). Throws DomainError at t = 0.
double filter_time(double t, double beta);

/// ∫₀^∞ log coth y dy, by quadrature (π²/8 analytically).
double log_coth_integral();
/// ∫₀^∞ y·log coth y dy, by quadrature (7ζ(3)/16 analytically).
double log_coth_first_moment();
/// ∫ |f_β(t)| dt over the real line: quadrature on (0, 50β] plus the analytic tail.
double filter_l1_norm(double beta);

/// Φ_β^H(V): in H's eigenbasis, [Φ]_jk = V_jk·filter_hat(E_j − E_k).
DenseOperator phi(const DenseOperator& H, const DenseOperator& V, double beta);

/// Midpoint-rule ordered exponential
///   O = Π_{k=n..1} exp(−(β/(2n))·Φ^{H + s_k V}(V)),  s_k = (k − ½)/n,
/// with larger s to the left.
DenseOperator hastings_operator(const DenseOperator& H, const DenseOperator& V, double beta, int s_steps);
DenseOperator hastings_operator(const DenseOperator& H, const DenseOperator& V, const FilterSpec& spec);

/// O for the model split as H = H_base + V, where V sums the terms on `v_edges`
/// and H_base the rest. Returned on the model layout.
DenseOperator model_hastings(const GraphModel& model, const std::vector<Edge>& v_edges, int s_steps);

/// O_ℓ: O computed with H_base restricted to edges whose endpoints both lie
/// within distance ℓ of supp(V). Supported on that ball, returned embedded on
/// the model layout.
DenseOperator truncated_hastings(const GraphModel& model, const std::vector<Edge>& v_edges, int ell,
                                 int s_steps);

/// ‖O e^{−βH} O† − e^{−β(H+V)}‖₁ / ‖e^{−β(H+V)}‖₁.
double conjugation_residual(const DenseOperator& H, const DenseOperator& V, double beta,
                            const DenseOperator& O);

}  // namespace qbp
