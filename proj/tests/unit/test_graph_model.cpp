#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "qbp/graph_model.hpp"
#include "test_support.hpp"

namespace qbp {
namespace {

using testing::kron;
using testing::pauli_x;
using testing::pauli_z;

std::vector<Edge> chain_edges(int n) {
  std::vector<Edge> e;
  for (int k = 1; k < n; ++k) e.emplace_back(k, k + 1);
  return e;
}

std::vector<SiteId> range(int lo, int hi) {
  std::vector<SiteId> v;
  for (int k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

TEST(TreeGraph, ValidatesStructure) {
  EXPECT_NO_THROW(TreeGraph(range(1, 4), chain_edges(4)));
  EXPECT_THROW(TreeGraph(range(1, 3), {{1, 2}, {2, 3}, {1, 3}}), GraphError);  // cycle
  EXPECT_THROW(TreeGraph(range(1, 4), {{1, 2}, {2, 3}}), GraphError);          // dangling vertex
  EXPECT_THROW(TreeGraph(range(1, 3), {{1, 2}, {2, 5}}), GraphError);          // unknown endpoint
  EXPECT_THROW(TreeGraph(range(1, 3), {{1, 1}, {2, 3}}), GraphError);          // self-loop
  EXPECT_THROW(TreeGraph(range(1, 3), {{1, 2}, {2, 1}}), GraphError);          // duplicate
  EXPECT_THROW(TreeGraph({}, {}), GraphError);
}

TEST(TreeGraph, DistancesOnChain) {
  TreeGraph g(range(1, 5), chain_edges(5));
  const SiteId anchor[] = {1};
  EXPECT_EQ(g.distance(5, anchor), 4);
  EXPECT_EQ(g.distance(1, anchor), 0);
  EXPECT_EQ(g.eccentricity(3), 2);
  EXPECT_EQ(g.diameter(), 4);
  EXPECT_THROW(g.distance(1, std::vector<SiteId>{}), GraphError);
  EXPECT_EQ(g.path_from(5), (std::vector<SiteId>{5, 4, 3, 2, 1}));
  EXPECT_THROW(g.path_from(3), GraphError);
}

// Independent BFS over an adjacency map built from the edge list.
std::map<SiteId, int> bfs(const TreeSpec& spec, SiteId src) {
  std::map<SiteId, std::vector<SiteId>> adj;
  for (const Edge& e : spec.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::map<SiteId, int> d{{src, 0}};
  std::deque<SiteId> q{src};
  while (!q.empty()) {
    SiteId x = q.front();
    q.pop_front();
    for (SiteId y : adj[x])
      if (!d.count(y)) {
        d[y] = d[x] + 1;
        q.push_back(y);
      }
  }
  return d;
}

TEST(TreeGraph, RandomTreeDistancesMatchBfs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TreeSpec spec = random_tree_spec(9, seed);
    std::vector<SiteId> ids;
    for (const auto& [id, d] : spec.vertices) ids.push_back(id);
    TreeGraph g(ids, spec.edges);
    EXPECT_EQ(g.edges().size(), 8u);
    for (SiteId src : ids) {
      const auto oracle = bfs(spec, src);
      const SiteId anchor[] = {src};
      for (SiteId v : ids) EXPECT_EQ(g.distance(v, anchor), oracle.at(v));
    }
  }
}

TEST(TreeGraph, RandomTreeWithSevenVertices) {
  const TreeSpec spec = random_tree_spec(7, 123);
  EXPECT_EQ(spec.edges.size(), 6u);
  EXPECT_NO_THROW(build_tree(spec, factories::classical_ising(1.0), 1.0));
}

TEST(TreeGraph, WithoutLeaf) {
  TreeGraph g(range(1, 4), chain_edges(4));
  const TreeGraph h = g.without_leaf(1);
  EXPECT_EQ(h.vertices(), range(2, 4));
  EXPECT_EQ(h.edges().size(), 2u);
  EXPECT_THROW(g.without_leaf(2), GraphError);
}

TEST(Factories, ChainOfClassicalIsingIsDiagonal) {
  const GraphModel m = build_chain(3, 2, factories::classical_ising(1.0), 1.0);
  EXPECT_EQ(m.terms().size(), 2u);
  for (const auto& t : m.terms()) {
    const Matrix& h = t.term.matrix();
    EXPECT_EQ((h - Matrix(h.diagonal().asDiagonal())).norm(), 0.0);
  }
}

TEST(Factories, TfimWithoutFieldCommutes) {
  const GraphModel m = build_chain(4, 2, factories::tfim(1.0, 0.0), 1.0);
  std::vector<DenseOperator> embedded;
  for (const auto& t : m.terms()) embedded.push_back(embed(t.term, m.layout()));
  for (const auto& a : embedded)
    for (const auto& b : embedded) EXPECT_LE(op_norm(a * b - b * a), 1e-14);
}

TEST(Factories, TfimHamiltonianMatchesConventionalChain) {
  // Half fields at the ends by default; full fields everywhere with full_boundary.
  const int n = 4;
  const auto build = [&](bool full) {
    Matrix h = Matrix::Zero(16, 16);
    auto site = [&](const Matrix& op, int k) {
      Matrix out = Matrix::Identity(1, 1);
      for (int s = 1; s <= n; ++s) out = kron(out, s == k ? op : Matrix::Identity(2, 2));
      return out;
    };
    for (int k = 1; k < n; ++k) h -= site(pauli_z(), k) * site(pauli_z(), k + 1);
    for (int k = 1; k <= n; ++k) h -= ((k == 1 || k == n) && !full ? 0.5 : 1.0) * site(pauli_x(), k);
    return h;
  };
  EXPECT_MATRIX_NEAR(hamiltonian(build_chain(n, 2, factories::tfim(1, 1), 1)).matrix(), build(false), 1e-14);
  EXPECT_MATRIX_NEAR(hamiltonian(build_chain(n, 2, factories::tfim(1, 1, true), 1)).matrix(), build(true), 1e-14);
}

TEST(Factories, HeisenbergAndRandom) {
  const GraphModel h = build_chain(2, 2, factories::heisenberg(1.0), 1.0);
  const auto eig = hermitian_eig(h.terms().front().term);
  EXPECT_NEAR(eig.values(0), -3.0, 1e-14);  // singlet
  EXPECT_NEAR(eig.values(3), 1.0, 1e-14);   // triplet
  const GraphModel r1 = build_chain(4, 3, factories::random_two_local(9), 1.0);
  const GraphModel r2 = build_chain(4, 3, factories::random_two_local(9), 1.0);
  EXPECT_TRUE(r1.terms()[1].term.matrix() == r2.terms()[1].term.matrix());
  EXPECT_FALSE(r1.terms()[0].term.matrix() == r1.terms()[1].term.matrix());
  EXPECT_THROW(build_chain(3, 3, factories::tfim(1, 1), 1.0), LayoutError);
}

TEST(GraphModel, RejectsBadInput) {
  EXPECT_THROW(build_chain(1, 2, factories::tfim(1, 1), 1.0), GraphError);
  EXPECT_THROW(build_chain(3, 2, factories::tfim(1, 1), 0.0), DomainError);
  Matrix bad = Matrix::Zero(4, 4);
  bad(0, 1) = 1.0;
  const auto pair = SiteLayout::uniform({1, 2}, 2);
  EXPECT_THROW(GraphModel(pair, {{Edge(1, 2), DenseOperator(pair, bad)}}, 1.0), NotHermitianError);
  EXPECT_THROW(build_chain(13, 2, factories::tfim(1, 1), 1.0), DimensionCapError);
}

TEST(ThermalState, InfiniteTemperatureLimit) {
  const GraphModel m = build_chain(4, 2, factories::tfim(1, 1), 1e-8);
  EXPECT_MATRIX_NEAR(thermal_state(m).matrix(), Matrix::Identity(16, 16) / 16.0, 1e-6);
}

TEST(ThermalState, SingleEdgeIsDirectGibbs) {
  const GraphModel m = build_chain(2, 2, factories::random_two_local(3), 0.7);
  const Matrix w = matrix_exp_h(m.terms().front().term * -0.7).matrix();
  EXPECT_MATRIX_NEAR(thermal_state(m).matrix(), w / w.trace().real(), 1e-13);
}

TEST(ThermalState, EnergyMatchesEigenbasisAverage) {
  const GraphModel m = build_chain(4, 2, factories::tfim(1, 1), 1.0);
  const DenseOperator H = hamiltonian(m);
  const double energy = (thermal_state(m) * H).trace().real();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H.matrix(), Eigen::EigenvaluesOnly);
  double num = 0, den = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = std::exp(-es.eigenvalues()(i));
    num += es.eigenvalues()(i) * w;
    den += w;
  }
  EXPECT_NEAR(energy, num / den, 1e-12);
}

TEST(ThermalState, UnitTraceAndPositive) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const GraphModel m = build_tree(random_tree_spec(6, s), factories::random_two_local(s), 2.0);
    const auto rho = thermal_state(m);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
    EXPECT_GE(hermitian_eig(rho).values(0), -1e-12);
  }
}

TEST(ReducedDensity, Examples) {
  const GraphModel m = build_chain(3, 2, factories::tfim(1, 1), 1.0);
  const auto all = range(1, 3);
  EXPECT_MATRIX_NEAR(exact_reduced_density(m, all).matrix(), thermal_state(m).matrix(), 1e-15);
  EXPECT_THROW(exact_reduced_density(m, std::vector<SiteId>{}), DomainError);
}

TEST(ReducedDensity, ProductHamiltonianFactorizes) {
  // Edge (2,3) carries only local fields on 2 and 3: no correlation across it.
  const SiteLayout layout = SiteLayout::uniform({1, 2, 3}, 2);
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix h12 = -kron(pauli_z(), pauli_z()) - 0.4 * kron(pauli_x(), id);
  const Matrix h23 = -0.8 * kron(id, pauli_x());
  const std::vector<SiteId> s12{1, 2}, s23{2, 3};
  GraphModel m(layout,
               {{Edge(1, 2), DenseOperator(layout.restricted_to(s12), h12)},
                {Edge(2, 3), DenseOperator(layout.restricted_to(s23), h23)}},
               1.3);
  const auto block = matrix_exp_h(DenseOperator(layout.restricted_to(s12), h12) * -1.3);
  EXPECT_MATRIX_NEAR(exact_reduced_density(m, s12).matrix(), normalized(block).matrix(), 1e-13);
}

TEST(ReducedDensity, SixSiteEndpointMatchesKroneckerConstruction) {
  const int n = 6;
  const GraphModel m = build_chain(n, 2, factories::tfim(1, 1), 1.0);
  Matrix h = Matrix::Zero(64, 64);
  auto site = [&](const Matrix& op, int k) {
    Matrix out = Matrix::Identity(1, 1);
    for (int s = 1; s <= n; ++s) out = kron(out, s == k ? op : Matrix::Identity(2, 2));
    return out;
  };
  for (int k = 1; k < n; ++k) h -= site(pauli_z(), k) * site(pauli_z(), k + 1);
  for (int k = 1; k <= n; ++k) h -= (k == 1 || k == n ? 0.5 : 1.0) * site(pauli_x(), k);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Matrix rho = es.eigenvectors() * (-es.eigenvalues().array()).exp().matrix().cast<Complex>().asDiagonal() *
               es.eigenvectors().adjoint();
  rho /= rho.trace().real();
  Matrix red = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 32; ++r) red(i, j) += rho(2 * r + i, 2 * r + j);
  const SiteId keep[] = {6};
  EXPECT_MATRIX_NEAR(exact_reduced_density(m, keep).matrix(), red, 1e-13);
}

TEST(RegionPartition, ChainHandEnumeration) {
  const GraphModel m = build_chain(6, 2, factories::tfim(1, 1), 1.0);
  const SiteId anchor[] = {1};
  const auto p = region_partition(m, anchor, 2);
  // Distances from 1 are 0..5; B holds every edge with an endpoint at distance 2.
  EXPECT_EQ(p.right, (std::vector<Edge>{{1, 2}}));
  EXPECT_EQ(p.boundary, (std::vector<Edge>{{2, 3}, {3, 4}}));
  EXPECT_EQ(p.left, (std::vector<Edge>{{4, 5}, {5, 6}}));

  const auto p0 = region_partition(m, anchor, 0);
  EXPECT_EQ(p0.boundary, (std::vector<Edge>{{1, 2}}));
  EXPECT_TRUE(p0.right.empty());

  const auto big = region_partition(m, anchor, 6);
  EXPECT_TRUE(big.left.empty());
  EXPECT_TRUE(big.boundary.empty());
  EXPECT_EQ(big.right.size(), 5u);
  EXPECT_THROW(region_partition(m, anchor, -1), DomainError);
}

TEST(RegionPartition, PartitionsEveryTreeAndSumsToH) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const GraphModel m = build_tree(random_tree_spec(6, s), factories::random_two_local(s), 1.0);
    const DenseOperator H = hamiltonian(m);
    for (SiteId a : m.graph().vertices()) {
      for (int ell = 0; ell <= 4; ++ell) {
        const SiteId anchor[] = {a};
        const auto p = region_partition(m, anchor, ell);
        std::vector<Edge> all;
        all.insert(all.end(), p.left.begin(), p.left.end());
        all.insert(all.end(), p.boundary.begin(), p.boundary.end());
        all.insert(all.end(), p.right.begin(), p.right.end());
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, m.graph().edges());
        const auto sum = edge_sum(m, p.left, m.layout()) + edge_sum(m, p.boundary, m.layout()) +
                         edge_sum(m, p.right, m.layout());
        EXPECT_MATRIX_NEAR(sum.matrix(), H.matrix(), 1e-14);
      }
    }
  }
}

}  // namespace
}  // namespace qbp
