#include "qbp/markov.hpp"

#include <algorithm>
#include <cmath>

namespace qbp {

namespace {

std::vector<SiteId> sorted_union(std::vector<SiteId> a, const std::vector<SiteId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

double entropy_unchecked(const DenseOperator& rho) {
  const EigenSystem eig = hermitian_eig(rho.hermitian_part());
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double p = eig.values(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double marginal_entropy(const DenseOperator& rho, const std::vector<SiteId>& keep) {
  if (keep.empty()) return 0.0;
  return entropy_unchecked(reduce_to(rho, keep));
}

}  // namespace

double von_neumann_entropy(const DenseOperator& rho) {
  require_density(rho);
  return entropy_unchecked(rho);
}

CmiResult cmi(const DenseOperator& rho, const TripartiteSplit& split) {
  const std::vector<SiteId> all = sorted_union(sorted_union(split.A, split.B), split.C);
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw DomainError("cmi: split sets overlap");
  if (all != rho.layout().sites()) throw DomainError("cmi: split does not cover the state's support");
  require_density(rho);

  const double s_ab = marginal_entropy(rho, sorted_union(split.A, split.B));
  const double s_bc = marginal_entropy(rho, sorted_union(split.B, split.C));
  const double s_b = marginal_entropy(rho, sorted_union(split.B, {}));
  const double s_abc = entropy_unchecked(rho);

  CmiResult r;
  r.raw = s_ab + s_bc - s_abc - s_b;
  r.value = (r.raw < 0.0 && r.raw >= -kCmiTolerance) ? 0.0 : r.raw;
  return r;
}

MarkovDeficiency state_markov_deficiency(const DenseOperator& rho, const TreeGraph& graph,
                                         std::span<const SiteId> U, int ell) {
  if (U.empty()) throw DomainError("markov_deficiency: U must be nonempty");
  if (ell < 0) throw DomainError("markov_deficiency: ell must be non-negative");
  for (SiteId u : U)
    if (!graph.has_vertex(u)) throw GraphError("markov_deficiency: unknown vertex " + std::to_string(u));

  std::vector<SiteId> a(U.begin(), U.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (a.size() == graph.vertices().size()) throw DomainError("markov_deficiency: U must be a proper subset");

  const std::vector<SiteId> ball = graph.ball(a, ell);
  TripartiteSplit split;
  split.A = a;
  std::set_difference(ball.begin(), ball.end(), a.begin(), a.end(), std::back_inserter(split.B));
  std::vector<SiteId> verts = graph.vertices();
  std::sort(verts.begin(), verts.end());
  std::set_difference(verts.begin(), verts.end(), ball.begin(), ball.end(), std::back_inserter(split.C));

  MarkovDeficiency d;
  if (split.C.empty()) {
    d.degenerate = true;
    return d;
  }
  const CmiResult r = cmi(rho, split);
  d.value = r.value;
  d.raw = r.raw;
  return d;
}

MarkovDeficiency markov_deficiency(const GraphModel& model, std::span<const SiteId> U, int ell) {
  return state_markov_deficiency(thermal_state(model), model.graph(), U, ell);
}

std::vector<std::vector<SiteId>> small_connected_subsets(const TreeGraph& graph) {
  std::vector<std::vector<SiteId>> out;
  const std::size_t n = graph.vertices().size();
  if (n > 1)
    for (SiteId v : graph.vertices()) out.push_back({v});
  if (n > 2)
    for (const Edge& e : graph.edges()) out.push_back({e.u, e.v});
  return out;
}

std::vector<DeficiencyRow> deficiency_table(const DenseOperator& rho, const TreeGraph& graph, int ell) {
  std::vector<DeficiencyRow> rows;
  for (const auto& U : small_connected_subsets(graph))
    rows.push_back({U, ell, state_markov_deficiency(rho, graph, U, ell).value});
  return rows;
}

LeafTraceReport leaf_trace_preserves_markov(const GraphModel& model, SiteId leaf, double tol) {
  const TreeGraph& g = model.graph();
  if (!g.has_vertex(leaf) || (g.vertices().size() > 1 && !g.is_leaf(leaf)))
    throw GraphError("leaf_trace_preserves_markov: vertex " + std::to_string(leaf) + " is not a leaf");

  LeafTraceReport report;
  report.leaf = leaf;
  report.tolerance = tol;
  report.note = "U enumerated over connected subsets with |U| <= 2, ell = 1";

  const DenseOperator rho = thermal_state(model);
  report.before = deficiency_table(rho, g, 1);
  for (const auto& row : report.before) report.max_before = std::max(report.max_before, row.deficiency);
  if (report.max_before > tol) {
    report.status = LeafTraceStatus::InputNotMarkov;
    report.note = "input not Markov; " + report.note;
    return report;
  }

  const SiteId out[] = {leaf};
  const DenseOperator reduced = partial_trace(rho, out);
  const TreeGraph rest = g.without_leaf(leaf);
  report.after = deficiency_table(reduced, rest, 1);
  for (const auto& row : report.after) report.max_after = std::max(report.max_after, row.deficiency);
  report.status = report.max_after <= tol ? LeafTraceStatus::Preserved : LeafTraceStatus::NotPreserved;
  return report;
}

std::string to_string(LeafTraceStatus status) {
  switch (status) {
    case LeafTraceStatus::Preserved: return "preserved";
    case LeafTraceStatus::NotPreserved: return "not_preserved";
    case LeafTraceStatus::InputNotMarkov: return "input_not_markov";
  }
  return "unknown";
}

nlohmann::json to_json(const DeficiencyRow& row) {
  return {{"U", row.U}, {"ell", row.ell}, {"deficiency", row.deficiency}};
}

nlohmann::json to_json(const LeafTraceReport& report) {
  nlohmann::json before = nlohmann::json::array();
  nlohmann::json after = nlohmann::json::array();
  for (const auto& r : report.before) before.push_back(to_json(r));
  for (const auto& r : report.after) after.push_back(to_json(r));
  return {{"leaf", report.leaf},       {"status", to_string(report.status)},
          {"tolerance", report.tolerance}, {"max_before", report.max_before},
          {"max_after", report.max_after}, {"before", before},
          {"after", after},              {"note", report.note}};
}

}  // namespace qbp
