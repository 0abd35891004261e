#include "qbp/belief_propagation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qbp/linear_fit.hpp"

namespace qbp {

namespace {

// Unit-trace exp(A) together with log Tr exp(A).
DenseOperator normalized_exp(const DenseOperator& a, double& log_trace) {
  double shift = 0.0;
  DenseOperator w = matrix_exp_h_shifted(a, shift);
  double lt = 0.0;
  DenseOperator out = normalized(w, &lt).hermitian_part();
  log_trace = shift + lt;
  return out;
}

}  // namespace

DenseOperator circle_product(const DenseOperator& a, const DenseOperator& b) {
  const SiteLayout full = a.layout().merged(b.layout());
  const DenseOperator la = matrix_log_pd(embed(a, full));
  const DenseOperator lb = matrix_log_pd(embed(b, full));
  return matrix_exp_h(la + lb).hermitian_part();
}

WindowMessage message_update(const GraphModel& model, SiteId u, SiteId v,
                             const std::vector<WindowMessage>& incoming) {
  const Edge edge(u, v);
  if (!model.graph().has_edge(edge))
    throw GraphError("message_update: (" + std::to_string(u) + "," + std::to_string(v) + ") is not an edge");

  // log of e^{−βh} is −βh exactly, so the circle product is a single exponential.
  const DenseOperator& h = model.term(edge);
  DenseOperator exponent = h * (-model.beta());
  double log_norm = 0.0;
  for (const WindowMessage& m : incoming) {
    if (m.window.size() != 1 || m.window.front() != u)
      throw LayoutError("message_update: incoming message must be supported on {" + std::to_string(u) + "}");
    exponent += embed(matrix_log_pd(m.op), exponent.layout());
    log_norm += m.log_norm;
  }
  double log_trace = 0.0;
  const DenseOperator joint = normalized_exp(exponent, log_trace);
  const SiteId out[] = {u};
  WindowMessage msg;
  msg.op = normalized(partial_trace(joint, out)).hermitian_part();
  msg.window = {v};
  msg.log_norm = log_norm + log_trace;
  return msg;
}

DenseOperator run_exact_bp(const GraphModel& model, SiteId target) {
  const TreeGraph& g = model.graph();
  if (!g.has_vertex(target)) throw GraphError("run_exact_bp: unknown target " + std::to_string(target));
  const SiteId keep[] = {target};
  if (g.neighbors(target).empty()) return normalized(DenseOperator::identity(model.layout().restricted_to(keep)));

  using Directed = std::pair<SiteId, SiteId>;
  std::map<Directed, WindowMessage> current;
  const int rounds = g.eccentricity(target);
  for (int t = 0; t <= rounds; ++t) {
    std::map<Directed, WindowMessage> next;
    for (const Edge& e : g.edges()) {
      for (const Directed& d : {Directed{e.u, e.v}, Directed{e.v, e.u}}) {
        const auto [from, to] = d;
        std::vector<WindowMessage> in;
        if (t > 0)
          for (SiteId w : g.neighbors(from))
            if (w != to) in.push_back(current.at({w, from}));
        next.emplace(d, message_update(model, from, to, in));
      }
    }
    current = std::move(next);
  }

  const SiteLayout site = model.layout().restricted_to(keep);
  DenseOperator exponent = DenseOperator::zero(site);
  for (SiteId w : g.neighbors(target)) exponent += matrix_log_pd(current.at({w, target}).op);
  double log_trace = 0.0;
  return normalized_exp(exponent, log_trace);
}

DenseOperator run_sliding_window(const GraphModel& model, SiteId target, int ell) {
  const TreeGraph& g = model.graph();
  if (!g.has_vertex(target)) throw GraphError("run_sliding_window: unknown target " + std::to_string(target));
  if (!g.is_path() || g.vertices().size() < 2) throw GraphError("run_sliding_window: model is not a chain");
  if (!g.is_leaf(target)) throw GraphError("run_sliding_window: target must be a chain endpoint");
  if (ell < 1) throw DomainError("run_sliding_window: window size must be at least 1");

  SiteId far = target;
  for (SiteId v : g.vertices())
    if (v != target && g.is_leaf(v)) far = v;
  const std::vector<SiteId> order = g.path_from(far);
  const int n_edges = static_cast<int>(order.size()) - 1;
  const int m = std::min(ell, n_edges);

  auto edge_at = [&](int k) { return Edge(order[k - 1], order[k]); };

  std::vector<SiteId> window(order.begin(), order.begin() + m + 1);
  std::sort(window.begin(), window.end());
  const SiteLayout initial = model.layout().restricted_to(window);
  std::vector<Edge> first;
  for (int k = 1; k <= m; ++k) first.push_back(edge_at(k));
  double log_trace = 0.0;
  DenseOperator M = normalized_exp(edge_sum(model, first, initial) * (-model.beta()), log_trace);

  for (int k = m + 1; k <= n_edges; ++k) {
    const SiteId lowest[] = {order[k - m - 1]};
    const DenseOperator traced = partial_trace(M, lowest);
    const Edge e = edge_at(k);
    const SiteLayout grown = traced.layout().merged(model.term(e).layout());
    DenseOperator exponent = embed(matrix_log_pd(traced), grown);
    exponent += embed(model.term(e), grown) * (-model.beta());
    M = normalized_exp(exponent, log_trace);
  }

  const SiteId keep[] = {target};
  return normalized(reduce_to(M, keep)).hermitian_part();
}

WindowSweep window_error_sweep(const GraphModel& model, SiteId target, const std::vector<int>& ells) {
  const SiteId keep[] = {target};
  const DenseOperator oracle = exact_reduced_density(model, keep);
  WindowSweep sweep;
  std::vector<double> xs, ys;
  for (int ell : ells) {
    const double err = trace_norm(run_sliding_window(model, target, ell) - oracle);
    sweep.points.push_back({ell, err});
    if (err > kWindowNoiseFloor) {
      xs.push_back(ell);
      ys.push_back(std::log10(err));
    }
  }
  if (xs.size() >= 2) sweep.slope = least_squares_line(xs, ys).slope;
  return sweep;
}

}  // namespace qbp
