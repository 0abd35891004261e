#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qbp/graph_model.hpp"

namespace qbp {

inline constexpr double kCmiTolerance = 1e-8;

/// Disjoint vertex sets covering the support of a state. B may be empty.
struct TripartiteSplit {
  std::vector<SiteId> A;
  std::vector<SiteId> B;
  std::vector<SiteId> C;
};

struct CmiResult {
  double value = 0.0;  // raw, with negatives in [−1e-8, 0) clamped to 0
  double raw = 0.0;
};

/// −Σ λ log λ (natural log), 0·log 0 = 0. Throws DomainError for non-density input.
double von_neumann_entropy(const DenseOperator& rho);

/// S(AB) + S(BC) − S(ABC) − S(B). Throws DomainError for overlapping or
/// non-covering splits.
CmiResult cmi(const DenseOperator& rho, const TripartiteSplit& split);

struct MarkovDeficiency {
  double value = 0.0;
  double raw = 0.0;
  bool degenerate = false;  // remainder C was empty
};

/// CMI of ρ with A = U, B = n_ℓ(U) − U, C = the rest, on a graph whose vertex set
/// equals ρ's support.
MarkovDeficiency state_markov_deficiency(const DenseOperator& rho, const TreeGraph& graph,
                                         std::span<const SiteId> U, int ell);
/// Same, on the model's thermal state.
MarkovDeficiency markov_deficiency(const GraphModel& model, std::span<const SiteId> U, int ell);

struct DeficiencyRow {
  std::vector<SiteId> U;
  int ell = 1;
  double deficiency = 0.0;
};

/// Connected proper subsets of size 1 and 2 (single vertices and edges).
std::vector<std::vector<SiteId>> small_connected_subsets(const TreeGraph& graph);

std::vector<DeficiencyRow> deficiency_table(const DenseOperator& rho, const TreeGraph& graph, int ell);

enum class LeafTraceStatus { Preserved, NotPreserved, InputNotMarkov };

struct LeafTraceReport {
  SiteId leaf = 0;
  LeafTraceStatus status = LeafTraceStatus::Preserved;
  double tolerance = kCmiTolerance;
  std::vector<DeficiencyRow> before;
  std::vector<DeficiencyRow> after;
  double max_before = 0.0;
  double max_after = 0.0;
  std::string note;
};

/// Checks that tracing out `leaf` keeps every ℓ=1 deficiency below `tol`.
/// U ranges over connected subsets with |U| ≤ 2. Throws GraphError if `leaf`
/// is not a leaf.
LeafTraceReport leaf_trace_preserves_markov(const GraphModel& model, SiteId leaf,
                                            double tol = kCmiTolerance);

std::string to_string(LeafTraceStatus status);
nlohmann::json to_json(const DeficiencyRow& row);
nlohmann::json to_json(const LeafTraceReport& report);

}  // namespace qbp
