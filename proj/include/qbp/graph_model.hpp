#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "qbp/operator.hpp"

namespace qbp {

/// Undirected edge, stored with u < v.
struct Edge {
  SiteId u = 0;
  SiteId v = 0;

  Edge() = default;
  Edge(SiteId a, SiteId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  bool touches(SiteId s) const { return u == s || v == s; }
  SiteId other(SiteId s) const { return s == u ? v : u; }
  auto operator<=>(const Edge&) const = default;
};

/// Connected acyclic graph over site ids.
class TreeGraph {
 public:
  TreeGraph() = default;
  /// Throws GraphError for duplicate/self edges, unknown endpoints, cycles or
  /// disconnected vertex sets.
  TreeGraph(std::vector<SiteId> vertices, std::vector<Edge> edges);

  const std::vector<SiteId>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_vertex(SiteId v) const;
  bool has_edge(const Edge& e) const;
  const std::vector<SiteId>& neighbors(SiteId v) const;
  int degree(SiteId v) const { return static_cast<int>(neighbors(v).size()); }
  bool is_leaf(SiteId v) const { return degree(v) == 1; }

  /// Breadth-first distances from the nearest vertex of `anchor`.
  std::map<SiteId, int> distances_from(std::span<const SiteId> anchor) const;
  int distance(SiteId v, std::span<const SiteId> anchor) const;
  int eccentricity(SiteId v) const;
  int diameter() const;

  /// Vertices within distance ℓ of `region` (region included).
  std::vector<SiteId> ball(std::span<const SiteId> region, int ell) const;

  bool is_path() const;
  /// Vertices of a path graph ordered from `start` (an endpoint) to the other end.
  std::vector<SiteId> path_from(SiteId start) const;

  /// The tree with leaf `leaf` removed.
  TreeGraph without_leaf(SiteId leaf) const;

 private:
  std::vector<SiteId> vertices_;
  std::vector<Edge> edges_;
  std::map<SiteId, std::vector<SiteId>> adjacency_;
};

/// Two-site Hamiltonian term attached to an edge, unembedded (layout = the two endpoints).
struct EdgeTerm {
  Edge edge;
  DenseOperator term;
};

/// Tree graph + local dimensions + edge Hamiltonians at inverse temperature β.
class GraphModel {
 public:
  GraphModel(SiteLayout layout, std::vector<EdgeTerm> terms, double beta);

  const SiteLayout& layout() const { return layout_; }
  const TreeGraph& graph() const { return graph_; }
  const std::vector<EdgeTerm>& terms() const { return terms_; }
  const DenseOperator& term(const Edge& e) const;
  double beta() const { return beta_; }
  GraphModel with_beta(double beta) const;

 private:
  SiteLayout layout_;
  TreeGraph graph_;
  std::vector<EdgeTerm> terms_;
  double beta_;
};

/// Edge sets B_ℓ, L_ℓ, R_ℓ around an anchor region.
struct RegionPartition {
  std::vector<Edge> boundary;  // B: an endpoint at distance exactly ℓ
  std::vector<Edge> left;      // L: both endpoints at distance > ℓ
  std::vector<Edge> right;     // R: both endpoints at distance < ℓ
  int ell = 0;
  std::vector<SiteId> anchor;
};

namespace factories {

/// What a factory knows about the edge it is building. `u < v`; the returned
/// matrix acts on (u, v) with u the most significant factor.
struct EdgeContext {
  SiteId u;
  SiteId v;
  int dim_u;
  int dim_v;
  int degree_u;
  int degree_v;
  std::size_t edge_index;
};

using EdgeFactory = std::function<Matrix(const EdgeContext&)>;

/// −J Z⊗Z − h_x(w_u X⊗I + w_v I⊗X). Default weights are 1/2 per endpoint, which
/// gives interior sites a full field and chain ends a half field. With
/// `full_boundary`, endpoint weights become 1/degree so every site gets h_x.
EdgeFactory tfim(double J, double hx, bool full_boundary = false);
/// J (X⊗X + Y⊗Y + Z⊗Z).
EdgeFactory heisenberg(double J);
/// −J Z⊗Z − (h_z/2)(Z⊗I + I⊗Z); diagonal in the computational basis.
EdgeFactory classical_ising(double J, double hz = 0.0);
/// Seeded random Hermitian two-site term with entries of scale `scale`.
EdgeFactory random_two_local(std::uint64_t seed, double scale = 1.0);

}  // namespace factories

struct TreeSpec {
  std::vector<std::pair<SiteId, int>> vertices;  // (id, local dim)
  std::vector<Edge> edges;
};

/// Chain with vertices 1..n and edges (k, k+1).
GraphModel build_chain(int n, int local_dim, const factories::EdgeFactory& factory, double beta);
GraphModel build_tree(const TreeSpec& spec, const factories::EdgeFactory& factory, double beta);
/// Random labelled tree on vertices 1..n (random attachment), deterministic in seed.
TreeSpec random_tree_spec(int n, std::uint64_t seed, int local_dim = 2);

/// Sum of the given edge terms embedded on `on`.
DenseOperator edge_sum(const GraphModel& model, std::span<const Edge> edges, const SiteLayout& on);
DenseOperator hamiltonian(const GraphModel& model);
/// exp(−βH)/Tr exp(−βH).
DenseOperator thermal_state(const GraphModel& model);
/// Tr over the complement of `keep` of the thermal state.
DenseOperator exact_reduced_density(const GraphModel& model, std::span<const SiteId> keep);

int distance(const GraphModel& model, SiteId v, std::span<const SiteId> anchor);
RegionPartition region_partition(const GraphModel& model, std::span<const SiteId> anchor, int ell);

}  // namespace qbp
