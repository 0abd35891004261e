#pragma once

#include <optional>
#include <vector>

#include "qbp/graph_model.hpp"

namespace qbp {

/// exp(log A + log B) after embedding both operands on the union of their
/// supports. Throws SingularOperatorError for non-positive-definite input.
DenseOperator circle_product(const DenseOperator& a, const DenseOperator& b);

/// Unit-trace positive message supported on `window`. `log_norm` accumulates
/// the logs of the normalizations discarded along the way.
struct WindowMessage {
  DenseOperator op;
  std::vector<SiteId> window;
  double log_norm = 0.0;
};

/// m_{u→v} = Tr_u[e^{−βh_uv} ⊙ (⊙ incoming)] / Z. Incoming messages must be
/// supported on {u}; throws LayoutError otherwise and GraphError if (u, v) is
/// not an edge.
WindowMessage message_update(const GraphModel& model, SiteId u, SiteId v,
                             const std::vector<WindowMessage>& incoming);

/// Synchronous BP rounds t = 0..ecc(target), then the normalized circle product
/// of all messages into `target`. Exact for Markov models.
DenseOperator run_exact_bp(const GraphModel& model, SiteId target);

/// Sliding-window BP along a chain towards endpoint `target`, window of ℓ edges.
/// ℓ is clamped to N−1. Throws GraphError for non-chains or non-endpoint
/// targets, DomainError for ℓ < 1.
DenseOperator run_sliding_window(const GraphModel& model, SiteId target, int ell);

struct WindowSweepPoint {
  int ell = 0;
  double trace_error = 0.0;
};

struct WindowSweep {
  std::vector<WindowSweepPoint> points;
  /// Slope of log10(error) against ℓ over errors above the noise floor;
  /// empty with fewer than two such points.
  std::optional<double> slope;
};

inline constexpr double kWindowNoiseFloor = 1e-10;

WindowSweep window_error_sweep(const GraphModel& model, SiteId target, const std::vector<int>& ells);

}  // namespace qbp
