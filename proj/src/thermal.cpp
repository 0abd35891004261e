#include "qbp/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbp/linear_fit.hpp"

namespace qbp {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<SiteId> sorted_unique(std::vector<SiteId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(const std::vector<SiteId>& sorted, SiteId s) { return std::binary_search(sorted.begin(), sorted.end(), s); }

// log Tr exp(A), via a shifted exponential.
double log_trace_exp(const DenseOperator& a) {
  double shift = 0.0;
  const DenseOperator w = matrix_exp_h_shifted(a, shift);
  return shift + std::log(w.trace().real());
}

}  // namespace

DenseOperator thermal_potential(const GraphModel& model, const std::vector<SiteId>& v_prime,
                                const std::vector<Edge>& e_prime) {
  const std::vector<SiteId> vp = sorted_unique(v_prime);
  std::vector<Edge> edges = e_prime;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (edges.empty()) throw DomainError("thermal_potential: edge subset is empty");

  std::vector<SiteId> ends;
  for (const Edge& e : edges) {
    if (!model.graph().has_edge(e))
      throw GraphError("thermal_potential: (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not an edge");
    ends.push_back(e.u);
    ends.push_back(e.v);
  }
  ends = sorted_unique(std::move(ends));
  for (SiteId s : vp)
    if (!contains(ends, s))
      throw DomainError("thermal_potential: vertex " + std::to_string(s) + " of V' is not an endpoint of E'");
  if (vp.size() == ends.size()) throw DomainError("thermal_potential: nothing remains after tracing V'");

  const SiteLayout full = model.layout().restricted_to(ends);
  const DenseOperator h = edge_sum(model, edges, full);
  double shift = 0.0;
  const DenseOperator gibbs = normalized(matrix_exp_h_shifted(h * (-model.beta()), shift));
  const DenseOperator reduced = partial_trace(gibbs, vp).hermitian_part();

  std::vector<Edge> outside;
  for (const Edge& e : edges)
    if (!contains(vp, e.u) && !contains(vp, e.v)) outside.push_back(e);
  const DenseOperator h_out = edge_sum(model, outside, reduced.layout());
  return (matrix_log_pd(reduced) * (-1.0 / model.beta()) - h_out).hermitian_part();
}

CumulantSeries cumulants(const DenseOperator& O, const GraphModel& model, const std::vector<SiteId>& v_prime) {
  CumulantSeries series;
  series.anchor = sorted_unique(v_prime);
  if (series.anchor.empty()) throw DomainError("cumulants: anchor set is empty");
  const auto dist = model.graph().distances_from(series.anchor);

  DenseOperator remainder = O;
  for (int j = 1;; ++j) {
    std::vector<SiteId> far;
    for (SiteId s : O.layout().sites()) {
      auto it = dist.find(s);
      if (it == dist.end()) throw GraphError("cumulants: site " + std::to_string(s) + " is not in the model graph");
      if (it->second > j) far.push_back(s);
    }
    DenseOperator cj = conditional_expectation(remainder, far);
    remainder -= cj;
    const double norm = op_norm(cj);
    series.entries.push_back({j, std::move(cj), norm});
    if (far.empty()) break;
  }

  DenseOperator sum = DenseOperator::zero(O.layout());
  for (const auto& e : series.entries) sum += e.op;
  series.reconstruction_residual = op_norm(sum - O);
  return series;
}

ThermalFit fit_thermal_bound(const std::vector<double>& norms) {
  ThermalFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] > kFitFloor) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(std::log(norms[i]));
    } else {
      ++fit.floored_points;
    }
  }
  fit.used_points = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  const LinearFit line = least_squares_line(xs, ys);
  fit.defined = true;
  fit.K = std::exp(line.intercept);
  fit.k = -line.slope;
  fit.rms_residual = line.rms_residual;
  return fit;
}

ThermalFit fit_thermal_bound(const CumulantSeries& series) {
  std::vector<double> norms;
  for (const auto& e : series.entries) norms.push_back(e.norm);
  return fit_thermal_bound(norms);
}

void BoundConstants::validate() const {
  for (double x : {c, alpha, C, a, v, K, k})
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bound constants must be finite and strictly positive");
}

RhsBreakdown theorem_rhs(const BoundConstants& consts, double beta, double norm_v, int ell, DecayExponent mode) {
  consts.validate();
  if (!(beta > 0.0)) throw DomainError("theorem_rhs: beta must be positive");
  if (norm_v < 0.0) throw DomainError("theorem_rhs: norm of H_B must be non-negative");
  if (ell < 1) throw DomainError("theorem_rhs: ell must be at least 1");

  const double c = consts.c, a = consts.a, v = consts.v, K = consts.K, k = consts.k;
  const double l = static_cast<double>(ell);
  const double d = 1.0 + c * consts.alpha * beta / kPi;
  const double c_prime = c * std::exp(2.0 * c / d);

  RhsBreakdown r;
  r.bound1 = 2.0 * c_prime * beta * norm_v * std::exp((4.0 + c) * beta * norm_v / 2.0) * std::exp(-c * l / d);

  const double L = 2.0 * K / (1.0 - std::exp(-k));
  const double a_prime = std::min(k, a);
  const double M = 9.0 * L * beta * beta + (8.0 * beta / kPi) * std::exp(2.0 * beta * a * v / kPi) +
                   2.0 * std::sqrt(beta / (kPi * a * v));
  const double L1 = 2.0 * L * beta * a_prime / (a * v);
  const double L2 = 4.0 * L * beta * beta / (kPi * kPi);
  r.F = L1;
  r.G = M + L2;
  r.f = mode == DecayExponent::Derived ? std::min(a_prime / 2.0, kPi * a_prime / (2.0 * a * v * beta))
                                       : std::min(0.5, kPi / (2.0 * beta * a * v));
  r.bound2 = (beta / 2.0) * std::exp(2.0 * beta * norm_v) * (l * r.F + r.G) * std::exp(-r.f * l);
  r.total = r.bound1 + r.bound2;
  return r;
}

double rhs_turning_point(const RhsBreakdown& rhs) { return std::max(0.0, 1.0 / rhs.f - rhs.G / rhs.F); }

SingleStepRecord single_step_experiment(const GraphModel& model, SiteId v_star, int ell,
                                        const BoundConstants& consts, DecayExponent mode) {
  const TreeGraph& g = model.graph();
  if (!g.has_vertex(v_star) || !g.is_leaf(v_star))
    throw GraphError("single_step_experiment: vertex " + std::to_string(v_star) + " is not a leaf");
  if (ell < 1) throw DomainError("single_step_experiment: ell must be at least 1");

  const SiteId anchor[] = {v_star};
  const RegionPartition part = region_partition(model, anchor, ell);
  std::vector<Edge> near = part.right;
  std::vector<Edge> far = part.left;
  for (const Edge& e : part.boundary) (e.touches(v_star) ? near : far).push_back(e);

  const SiteLayout& full = model.layout();
  const double beta = model.beta();
  const double log_z = log_trace_exp(hamiltonian(model) * (-beta));

  // Tr_{v*}[e^{−βH}]/Z.
  double shift = 0.0;
  DenseOperator exact = matrix_exp_h_shifted(hamiltonian(model) * (-beta), shift);
  exact = partial_trace(exact, anchor) * std::exp(shift - log_z);
  const SiteLayout& reduced = exact.layout();

  // log Tr_{v*}[e^{−βH_near}] − log Z − βH_far, then exponentiate.
  double near_shift = 0.0;
  const DenseOperator near_gibbs = matrix_exp_h_shifted(edge_sum(model, near, full) * (-beta), near_shift);
  DenseOperator exponent = matrix_log_pd(partial_trace(near_gibbs, anchor).hermitian_part());
  exponent += DenseOperator::identity(reduced) * (near_shift - log_z);
  exponent -= edge_sum(model, far, reduced) * beta;
  const DenseOperator approx = matrix_exp_h(exponent.hermitian_part());

  SingleStepRecord rec;
  rec.ell = ell;
  rec.lhs_literal = trace_norm((exact - approx).hermitian_part());
  rec.lhs_normalized = trace_norm((normalized(exact) - normalized(approx)).hermitian_part());
  rec.norm_hb = part.boundary.empty() ? 0.0 : op_norm(edge_sum(model, part.boundary, full));
  rec.rhs = theorem_rhs(consts, beta, rec.norm_hb, ell, mode);
  return rec;
}

}  // namespace qbp
