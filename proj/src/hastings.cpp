#include "qbp/hastings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qbp {

namespace {

constexpr double kPi = std::numbers::pi;

// log coth y for y > 0 without cancellation at either end.
double log_coth(double y) { return std::log1p(std::exp(-2.0 * y)) - std::log(-std::expm1(-2.0 * y)); }

// ∫_Y^∞ log coth y dy = Σ_{k odd} e^{−2kY}/k².
double log_coth_tail(double Y) {
  double s = 0.0;
  for (int k = 1; k < 40; k += 2) s += std::exp(-2.0 * k * Y) / (double(k) * k);
  return s;
}

template <typename F>
double integrate(F&& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, 1e-13);
}

void require_same_layout(const DenseOperator& a, const DenseOperator& b, const char* what) {
  if (!(a.layout() == b.layout())) throw LayoutError(std::string(what) + ": operands must share a layout");
}

}  // namespace

void FilterSpec::validate() const {
  if (!(beta > 0.0)) throw DomainError("filter: beta must be positive");
  if (s_steps < 1) throw DomainError("filter: s_steps must be at least 1");
  if (!(t_max > 0.0)) throw DomainError("filter: t_max must be positive");
  if (n_points < 1) throw DomainError("filter: n_points must be at least 1");
}

double filter_hat(double omega, double beta) {
  const double x = beta * omega;
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 12.0;
  const double half = 0.5 * x;
  return std::tanh(half) / half;
}

double filter_time(double t, double beta) {
  if (t == 0.0) throw DomainError("filter_time: singular at t = 0");
  if (!(beta > 0.0)) throw DomainError("filter_time: beta must be positive");
  return 2.0 / (beta * kPi) * std::abs(log_coth(kPi * std::abs(t) / (2.0 * beta)));
}

double log_coth_integral() {
  constexpr double Y = 40.0;
  return integrate([](double y) { return log_coth(y); }, 0.0, Y) + log_coth_tail(Y);
}

double log_coth_first_moment() {
  constexpr double Y = 40.0;
  // Tail ∫_Y^∞ y·2e^{−2y} dy = (Y + ½)e^{−2Y} at leading order; negligible at Y = 40.
  return integrate([](double y) { return y * log_coth(y); }, 0.0, Y) + (Y + 0.5) * std::exp(-2.0 * Y);
}

double filter_l1_norm(double beta) {
  if (!(beta > 0.0)) throw DomainError("filter_l1_norm: beta must be positive");
  const double T = 50.0 * beta;
  const double body = integrate([beta](double t) { return filter_time(t, beta); }, 0.0, T);
  const double Y = kPi * T / (2.0 * beta);
  const double tail = 4.0 / (kPi * kPi) * log_coth_tail(Y);
  return 2.0 * (body + tail);
}

DenseOperator phi(const DenseOperator& H, const DenseOperator& V, double beta) {
  require_same_layout(H, V, "phi");
  require_hermitian(H);
  require_hermitian(V);
  const EigenSystem eig = hermitian_eig(H);
  Matrix v = eig.vectors.adjoint() * V.matrix() * eig.vectors;
  const Eigen::Index n = v.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) v(j, k) *= filter_hat(eig.values(j) - eig.values(k), beta);
  return DenseOperator(H.layout(), eig.vectors * v * eig.vectors.adjoint()).hermitian_part();
}

DenseOperator hastings_operator(const DenseOperator& H, const DenseOperator& V, double beta, int s_steps) {
  FilterSpec spec;
  spec.beta = beta;
  spec.s_steps = s_steps;
  return hastings_operator(H, V, spec);
}

DenseOperator hastings_operator(const DenseOperator& H, const DenseOperator& V, const FilterSpec& spec) {
  spec.validate();
  require_same_layout(H, V, "hastings_operator");
  const int n = spec.s_steps;
  const double step = spec.beta / (2.0 * n);
  DenseOperator O = DenseOperator::identity(H.layout());
  for (int k = 1; k <= n; ++k) {
    const double s = (k - 0.5) / n;
    const DenseOperator generator = phi(H + V * s, V, spec.beta) * (-step);
    O = matrix_exp_h(generator) * O;
  }
  return O;
}

namespace {

struct Split {
  std::vector<Edge> v_edges;
  std::vector<Edge> base;
  std::vector<SiteId> support;
};

Split split_model(const GraphModel& model, std::vector<Edge> v_edges) {
  Split s;
  std::sort(v_edges.begin(), v_edges.end());
  v_edges.erase(std::unique(v_edges.begin(), v_edges.end()), v_edges.end());
  if (v_edges.empty()) throw DomainError("hastings: the perturbation needs at least one edge");
  for (const Edge& e : v_edges) {
    if (!model.graph().has_edge(e))
      throw GraphError("hastings: (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not an edge");
    s.support.push_back(e.u);
    s.support.push_back(e.v);
  }
  std::sort(s.support.begin(), s.support.end());
  s.support.erase(std::unique(s.support.begin(), s.support.end()), s.support.end());
  for (const Edge& e : model.graph().edges())
    if (!std::binary_search(v_edges.begin(), v_edges.end(), e)) s.base.push_back(e);
  s.v_edges = std::move(v_edges);
  return s;
}

}  // namespace

DenseOperator model_hastings(const GraphModel& model, const std::vector<Edge>& v_edges, int s_steps) {
  const Split s = split_model(model, v_edges);
  const DenseOperator H = edge_sum(model, s.base, model.layout());
  const DenseOperator V = edge_sum(model, s.v_edges, model.layout());
  return hastings_operator(H, V, model.beta(), s_steps);
}

DenseOperator truncated_hastings(const GraphModel& model, const std::vector<Edge>& v_edges, int ell,
                                 int s_steps) {
  if (ell < 0) throw DomainError("truncated_hastings: ell must be non-negative");
  const Split s = split_model(model, v_edges);
  const std::vector<SiteId> ball = model.graph().ball(s.support, ell);
  std::vector<Edge> inner;
  for (const Edge& e : s.base)
    if (std::binary_search(ball.begin(), ball.end(), e.u) && std::binary_search(ball.begin(), ball.end(), e.v))
      inner.push_back(e);
  const SiteLayout local = model.layout().restricted_to(ball);
  const DenseOperator H = edge_sum(model, inner, local);
  const DenseOperator V = edge_sum(model, s.v_edges, local);
  return embed(hastings_operator(H, V, model.beta(), s_steps), model.layout());
}

double conjugation_residual(const DenseOperator& H, const DenseOperator& V, double beta,
                            const DenseOperator& O) {
  require_same_layout(H, V, "conjugation_residual");
  require_same_layout(H, O, "conjugation_residual");
  const DenseOperator a = H * (-beta);
  const DenseOperator b = (H + V) * (-beta);
  // Common shift keeps both exponentials finite; the ratio is scale invariant.
  const double shift = std::max(hermitian_eig(a).values.maxCoeff(), hermitian_eig(b).values.maxCoeff());
  const DenseOperator I = DenseOperator::identity(H.layout());
  const DenseOperator ea = matrix_exp_h(a - I * shift);
  const DenseOperator eb = matrix_exp_h(b - I * shift);
  const DenseOperator conj = O * ea * O.adjoint();
  return trace_norm(conj - eb) / trace_norm(eb);
}

}  // namespace qbp
