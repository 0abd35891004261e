#include "qbp/graph_model.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <string>

namespace qbp {

namespace {

const Matrix& pauli_x() {
  static const Matrix m = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  return m;
}
const Matrix& pauli_y() {
  static const Matrix m = (Matrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  return m;
}
const Matrix& pauli_z() {
  static const Matrix m = (Matrix(2, 2) << 1, 0, 0, -1).finished();
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void require_qubits(const factories::EdgeContext& ctx, const char* name) {
  if (ctx.dim_u != 2 || ctx.dim_v != 2)
    throw LayoutError(std::string(name) + " factory requires local dimension 2");
}

}  // namespace

// ---------------------------------------------------------------------------
// TreeGraph

TreeGraph::TreeGraph(std::vector<SiteId> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  std::sort(vertices_.begin(), vertices_.end());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
    throw GraphError("duplicate vertex id");
  if (vertices_.empty()) throw GraphError("graph has no vertices");
  for (SiteId v : vertices_) adjacency_[v];

  std::set<Edge> seen;
  for (const Edge& e : edges_) {
    if (e.u == e.v) throw GraphError("self-loop on vertex " + std::to_string(e.u));
    if (!has_vertex(e.u) || !has_vertex(e.v))
      throw GraphError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                       ") references an unknown vertex");
    if (!seen.insert(e).second)
      throw GraphError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& [v, nb] : adjacency_) std::sort(nb.begin(), nb.end());
  std::sort(edges_.begin(), edges_.end());

  if (edges_.size() + 1 > vertices_.size()) throw GraphError("graph contains a cycle");
  auto dist = distances_from(std::span<const SiteId>(vertices_.data(), 1));
  if (dist.size() != vertices_.size()) throw GraphError("graph is disconnected (dangling vertex)");
}

bool TreeGraph::has_vertex(SiteId v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool TreeGraph::has_edge(const Edge& e) const {
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

const std::vector<SiteId>& TreeGraph::neighbors(SiteId v) const {
  auto it = adjacency_.find(v);
  if (it == adjacency_.end()) throw GraphError("unknown vertex " + std::to_string(v));
  return it->second;
}

std::map<SiteId, int> TreeGraph::distances_from(std::span<const SiteId> anchor) const {
  if (anchor.empty()) throw GraphError("distance to an empty vertex set");
  std::map<SiteId, int> dist;
  std::deque<SiteId> queue;
  for (SiteId a : anchor) {
    if (!has_vertex(a)) throw GraphError("unknown vertex " + std::to_string(a));
    if (dist.emplace(a, 0).second) queue.push_back(a);
  }
  while (!queue.empty()) {
    SiteId x = queue.front();
    queue.pop_front();
    for (SiteId y : neighbors(x)) {
      if (dist.emplace(y, dist[x] + 1).second) queue.push_back(y);
    }
  }
  return dist;
}

int TreeGraph::distance(SiteId v, std::span<const SiteId> anchor) const {
  auto dist = distances_from(anchor);
  auto it = dist.find(v);
  if (it == dist.end()) throw GraphError("unknown vertex " + std::to_string(v));
  return it->second;
}

int TreeGraph::eccentricity(SiteId v) const {
  int ecc = 0;
  for (const auto& [w, d] : distances_from(std::span<const SiteId>(&v, 1))) ecc = std::max(ecc, d);
  return ecc;
}

int TreeGraph::diameter() const {
  int diam = 0;
  for (SiteId v : vertices_) diam = std::max(diam, eccentricity(v));
  return diam;
}

std::vector<SiteId> TreeGraph::ball(std::span<const SiteId> region, int ell) const {
  std::vector<SiteId> out;
  for (const auto& [v, d] : distances_from(region))
    if (d <= ell) out.push_back(v);
  return out;
}

bool TreeGraph::is_path() const {
  return std::all_of(vertices_.begin(), vertices_.end(), [&](SiteId v) { return degree(v) <= 2; });
}

std::vector<SiteId> TreeGraph::path_from(SiteId start) const {
  if (!is_path()) throw GraphError("graph is not a chain");
  if (vertices_.size() > 1 && degree(start) != 1)
    throw GraphError("vertex " + std::to_string(start) + " is not an endpoint of the chain");
  std::vector<SiteId> order{start};
  SiteId prev = start;
  SiteId cur = start;
  while (order.size() < vertices_.size()) {
    SiteId next = cur;
    for (SiteId y : neighbors(cur)) {
      if (y != prev) {
        next = y;
        break;
      }
    }
    prev = cur;
    cur = next;
    order.push_back(cur);
  }
  return order;
}

TreeGraph TreeGraph::without_leaf(SiteId leaf) const {
  if (!has_vertex(leaf)) throw GraphError("unknown vertex " + std::to_string(leaf));
  if (vertices_.size() > 1 && !is_leaf(leaf))
    throw GraphError("vertex " + std::to_string(leaf) + " is not a leaf");
  std::vector<SiteId> vs;
  for (SiteId v : vertices_)
    if (v != leaf) vs.push_back(v);
  std::vector<Edge> es;
  for (const Edge& e : edges_)
    if (!e.touches(leaf)) es.push_back(e);
  return TreeGraph(std::move(vs), std::move(es));
}

// ---------------------------------------------------------------------------
// GraphModel

GraphModel::GraphModel(SiteLayout layout, std::vector<EdgeTerm> terms, double beta)
    : layout_(std::move(layout)), terms_(std::move(terms)), beta_(beta) {
  if (!(beta_ > 0.0)) throw DomainError("inverse temperature must be positive");
  std::vector<Edge> edges;
  edges.reserve(terms_.size());
  for (const auto& t : terms_) edges.push_back(t.edge);
  graph_ = TreeGraph(layout_.sites(), std::move(edges));
  for (const auto& t : terms_) {
    const std::vector<SiteId> ends{t.edge.u, t.edge.v};
    if (!(t.term.layout() == layout_.restricted_to(ends)))
      throw LayoutError("edge term layout does not match its endpoints (" +
                        std::to_string(t.edge.u) + "," + std::to_string(t.edge.v) + ")");
    require_hermitian(t.term);
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const EdgeTerm& a, const EdgeTerm& b) { return a.edge < b.edge; });
}

const DenseOperator& GraphModel::term(const Edge& e) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                             [](const EdgeTerm& t, const Edge& x) { return t.edge < x; });
  if (it == terms_.end() || it->edge != e)
    throw GraphError("no term on edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
  return it->term;
}

GraphModel GraphModel::with_beta(double beta) const { return GraphModel(layout_, terms_, beta); }

// ---------------------------------------------------------------------------
// Factories

namespace factories {

EdgeFactory tfim(double J, double hx, bool full_boundary) {
  return [=](const EdgeContext& ctx) {
    require_qubits(ctx, "tfim");
    const Matrix id = Matrix::Identity(2, 2);
    const double wu = full_boundary ? 1.0 / ctx.degree_u : 0.5;
    const double wv = full_boundary ? 1.0 / ctx.degree_v : 0.5;
    Matrix h = -J * kron(pauli_z(), pauli_z()) - hx * (wu * kron(pauli_x(), id) + wv * kron(id, pauli_x()));
    return h;
  };
}

EdgeFactory heisenberg(double J) {
  return [=](const EdgeContext& ctx) {
    require_qubits(ctx, "heisenberg");
    Matrix h = J * (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) + kron(pauli_z(), pauli_z()));
    return h;
  };
}

EdgeFactory classical_ising(double J, double hz) {
  return [=](const EdgeContext& ctx) {
    require_qubits(ctx, "classical_ising");
    const Matrix id = Matrix::Identity(2, 2);
    Matrix h = -J * kron(pauli_z(), pauli_z()) - 0.5 * hz * (kron(pauli_z(), id) + kron(id, pauli_z()));
    return h;
  };
}

EdgeFactory random_two_local(std::uint64_t seed, double scale) {
  return [=](const EdgeContext& ctx) {
    SiteLayout pair({0, 1}, {ctx.dim_u, ctx.dim_v});
    Matrix h = scale * random_hermitian(derive_seed(seed, 0x2f0c, ctx.edge_index), pair).matrix();
    return h;
  };
}

}  // namespace factories

GraphModel build_tree(const TreeSpec& spec, const factories::EdgeFactory& factory, double beta) {
  std::vector<SiteId> ids;
  std::vector<int> dims;
  for (const auto& [id, d] : spec.vertices) {
    ids.push_back(id);
    dims.push_back(d);
  }
  SiteLayout layout(ids, dims);
  TreeGraph graph(ids, spec.edges);

  std::vector<EdgeTerm> terms;
  std::size_t index = 0;
  for (const Edge& e : graph.edges()) {
    factories::EdgeContext ctx{e.u, e.v, layout.dim_of(e.u), layout.dim_of(e.v),
                               graph.degree(e.u), graph.degree(e.v), index++};
    const std::vector<SiteId> ends{e.u, e.v};
    terms.push_back({e, DenseOperator(layout.restricted_to(ends), factory(ctx))});
  }
  return GraphModel(std::move(layout), std::move(terms), beta);
}

GraphModel build_chain(int n, int local_dim, const factories::EdgeFactory& factory, double beta) {
  if (n < 2) throw GraphError("a chain needs at least two vertices");
  TreeSpec spec;
  for (int k = 1; k <= n; ++k) spec.vertices.emplace_back(k, local_dim);
  for (int k = 1; k < n; ++k) spec.edges.emplace_back(k, k + 1);
  return build_tree(spec, factory, beta);
}

TreeSpec random_tree_spec(int n, std::uint64_t seed, int local_dim) {
  if (n < 1) throw GraphError("a tree needs at least one vertex");
  std::mt19937_64 rng(seed);
  TreeSpec spec;
  spec.vertices.emplace_back(1, local_dim);
  for (int k = 2; k <= n; ++k) {
    std::uniform_int_distribution<int> parent(1, k - 1);
    spec.vertices.emplace_back(k, local_dim);
    spec.edges.emplace_back(parent(rng), k);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Operators on the model

DenseOperator edge_sum(const GraphModel& model, std::span<const Edge> edges, const SiteLayout& on) {
  DenseOperator h = DenseOperator::zero(on);
  for (const Edge& e : edges) h += embed(model.term(e), on);
  return h;
}

DenseOperator hamiltonian(const GraphModel& model) {
  return edge_sum(model, model.graph().edges(), model.layout());
}

DenseOperator thermal_state(const GraphModel& model) {
  double shift = 0.0;
  DenseOperator w = matrix_exp_h_shifted(hamiltonian(model) * (-model.beta()), shift);
  return normalized(w).hermitian_part();
}

DenseOperator exact_reduced_density(const GraphModel& model, std::span<const SiteId> keep) {
  if (keep.empty()) throw DomainError("reduced density needs a nonempty vertex set");
  return reduce_to(thermal_state(model), keep);
}

int distance(const GraphModel& model, SiteId v, std::span<const SiteId> anchor) {
  return model.graph().distance(v, anchor);
}

RegionPartition region_partition(const GraphModel& model, std::span<const SiteId> anchor, int ell) {
  if (ell < 0) throw DomainError("region radius must be non-negative");
  auto dist = model.graph().distances_from(anchor);
  RegionPartition part;
  part.ell = ell;
  part.anchor.assign(anchor.begin(), anchor.end());
  std::sort(part.anchor.begin(), part.anchor.end());
  for (const Edge& e : model.graph().edges()) {
    const int du = dist.at(e.u);
    const int dv = dist.at(e.v);
    if (du == ell || dv == ell)
      part.boundary.push_back(e);
    else if (du > ell && dv > ell)
      part.left.push_back(e);
    else
      part.right.push_back(e);
  }
  return part;
}

}  // namespace qbp
