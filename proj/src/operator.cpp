#include "qbp/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace qbp {

namespace {

// Full-space offsets of every multi-index over the layout positions `positions`,
// enumerated lexicographically (first position most significant).
std::vector<long> subspace_offsets(const SiteLayout& full, const std::vector<std::size_t>& positions) {
  const auto& dims = full.dims();
  std::vector<long> strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];

  std::vector<long> offsets{0};
  for (std::size_t p : positions) {
    std::vector<long> next;
    next.reserve(offsets.size() * dims[p]);
    for (long base : offsets)
      for (int d = 0; d < dims[p]; ++d) next.push_back(base + d * strides[p]);
    offsets = std::move(next);
  }
  return offsets;
}

std::vector<std::size_t> positions_of(const SiteLayout& full, const SiteLayout& part) {
  std::vector<std::size_t> pos;
  pos.reserve(part.size());
  for (SiteId s : part.sites()) pos.push_back(full.position(s));
  return pos;
}

std::vector<SiteId> sorted_unique(std::span<const SiteId> ids) {
  std::vector<SiteId> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// SiteLayout

SiteLayout::SiteLayout(std::vector<SiteId> sites, std::vector<int> dims, long dimension_cap) {
  if (sites.size() != dims.size())
    throw LayoutError("site and dimension lists differ in length");
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sites[a] < sites[b]; });
  sites_.reserve(sites.size());
  dims_.reserve(dims.size());
  for (auto i : order) {
    if (!sites_.empty() && sites_.back() == sites[i])
      throw LayoutError("duplicate site id " + std::to_string(sites[i]));
    if (dims[i] < 2)
      throw LayoutError("local dimension of site " + std::to_string(sites[i]) + " must be >= 2");
    sites_.push_back(sites[i]);
    dims_.push_back(dims[i]);
  }
  total_dim_ = 1;
  for (int d : dims_) {
    if (total_dim_ > dimension_cap / d) throw DimensionCapError(total_dim_ * d, dimension_cap);
    total_dim_ *= d;
  }
}

SiteLayout SiteLayout::uniform(std::vector<SiteId> sites, int dim, long dimension_cap) {
  std::vector<int> dims(sites.size(), dim);
  return SiteLayout(std::move(sites), std::move(dims), dimension_cap);
}

bool SiteLayout::contains(SiteId site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

std::size_t SiteLayout::position(SiteId site) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site)
    throw LayoutError("unknown site id " + std::to_string(site));
  return static_cast<std::size_t>(it - sites_.begin());
}

int SiteLayout::dim_of(SiteId site) const { return dims_[position(site)]; }

SiteLayout SiteLayout::without(std::span<const SiteId> removed) const {
  auto rm = sorted_unique(removed);
  for (SiteId s : rm) (void)position(s);
  std::vector<SiteId> s;
  std::vector<int> d;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (!std::binary_search(rm.begin(), rm.end(), sites_[i])) {
      s.push_back(sites_[i]);
      d.push_back(dims_[i]);
    }
  }
  return SiteLayout(std::move(s), std::move(d), std::max(total_dim_, kDefaultDimensionCap));
}

SiteLayout SiteLayout::restricted_to(std::span<const SiteId> kept) const {
  auto k = sorted_unique(kept);
  std::vector<int> d;
  d.reserve(k.size());
  for (SiteId s : k) d.push_back(dim_of(s));
  return SiteLayout(std::move(k), std::move(d), std::max(total_dim_, kDefaultDimensionCap));
}

SiteLayout SiteLayout::merged(const SiteLayout& other) const {
  std::vector<SiteId> s = sites_;
  std::vector<int> d = dims_;
  for (std::size_t i = 0; i < other.sites_.size(); ++i) {
    SiteId id = other.sites_[i];
    if (contains(id)) {
      if (dim_of(id) != other.dims_[i])
        throw LayoutError("site " + std::to_string(id) + " has conflicting dimensions");
      continue;
    }
    s.push_back(id);
    d.push_back(other.dims_[i]);
  }
  return SiteLayout(std::move(s), std::move(d));
}

bool SiteLayout::is_subset_of(const SiteLayout& other) const {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (!other.contains(sites_[i]) || other.dim_of(sites_[i]) != dims_[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// DenseOperator

DenseOperator::DenseOperator(SiteLayout layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw LayoutError("operator matrix is not square");
  if (matrix_.rows() != layout_.total_dim())
    throw LayoutError("matrix size " + std::to_string(matrix_.rows()) +
                      " does not match layout dimension " + std::to_string(layout_.total_dim()));
}

DenseOperator DenseOperator::identity(const SiteLayout& layout) {
  return {layout, Matrix::Identity(layout.total_dim(), layout.total_dim())};
}

DenseOperator DenseOperator::zero(const SiteLayout& layout) {
  return {layout, Matrix::Zero(layout.total_dim(), layout.total_dim())};
}

DenseOperator DenseOperator::hermitian_part() const {
  Matrix h = 0.5 * (matrix_ + matrix_.adjoint());
  return {layout_, std::move(h)};
}

bool DenseOperator::is_hermitian(double rel_tol) const {
  const double scale = matrix_.norm();
  return (matrix_ - matrix_.adjoint()).norm() <= rel_tol * std::max(scale, 1e-300);
}

DenseOperator& DenseOperator::operator+=(const DenseOperator& rhs) {
  if (!(layout_ == rhs.layout_)) throw LayoutError("operator sum over different layouts");
  matrix_ += rhs.matrix_;
  return *this;
}

DenseOperator& DenseOperator::operator-=(const DenseOperator& rhs) {
  if (!(layout_ == rhs.layout_)) throw LayoutError("operator difference over different layouts");
  matrix_ -= rhs.matrix_;
  return *this;
}

DenseOperator& DenseOperator::operator*=(Complex s) {
  matrix_ *= s;
  return *this;
}

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("operator product over different layouts");
  Matrix m = a.matrix() * b.matrix();
  return {a.layout(), std::move(m)};
}

// ---------------------------------------------------------------------------
// Tensor structure

DenseOperator embed(const DenseOperator& op, const SiteLayout& full) {
  if (!op.layout().is_subset_of(full)) {
    for (std::size_t i = 0; i < op.layout().size(); ++i) {
      SiteId s = op.layout().sites()[i];
      if (!full.contains(s)) throw LayoutError("cannot embed: unknown site id " + std::to_string(s));
    }
    throw LayoutError("cannot embed: local dimension mismatch");
  }
  if (op.layout() == full) return op;

  SiteLayout complement = full.without(op.layout().sites());
  auto op_off = subspace_offsets(full, positions_of(full, op.layout()));
  auto rest_off = subspace_offsets(full, positions_of(full, complement));

  const long n = full.total_dim();
  Matrix m = Matrix::Zero(n, n);
  const Matrix& src = op.matrix();
  for (long c : rest_off) {
    for (std::size_t a = 0; a < op_off.size(); ++a) {
      for (std::size_t b = 0; b < op_off.size(); ++b) {
        m(op_off[a] + c, op_off[b] + c) = src(a, b);
      }
    }
  }
  return {full, std::move(m)};
}

DenseOperator partial_trace(const DenseOperator& a, std::span<const SiteId> out) {
  const SiteLayout& full = a.layout();
  auto out_sorted = sorted_unique(out);
  SiteLayout kept = full.without(out_sorted);
  SiteLayout traced = full.restricted_to(out_sorted);

  auto keep_off = subspace_offsets(full, positions_of(full, kept));
  auto out_off = subspace_offsets(full, positions_of(full, traced));

  const long n = kept.total_dim();
  Matrix m = Matrix::Zero(n, n);
  const Matrix& src = a.matrix();
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      Complex acc{0.0, 0.0};
      for (long c : out_off) acc += src(keep_off[i] + c, keep_off[j] + c);
      m(i, j) = acc;
    }
  }
  return {kept, std::move(m)};
}

DenseOperator reduce_to(const DenseOperator& a, std::span<const SiteId> keep) {
  auto k = sorted_unique(keep);
  for (SiteId s : k) (void)a.layout().position(s);
  std::vector<SiteId> out;
  for (SiteId s : a.layout().sites())
    if (!std::binary_search(k.begin(), k.end(), s)) out.push_back(s);
  return partial_trace(a, out);
}

DenseOperator conditional_expectation(const DenseOperator& a, std::span<const SiteId> out) {
  if (out.empty()) return a;
  DenseOperator reduced = partial_trace(a, out);
  const double out_dim = static_cast<double>(a.dim()) / static_cast<double>(reduced.dim());
  return embed(reduced * (1.0 / out_dim), a.layout());
}

// ---------------------------------------------------------------------------
// Spectral functions

void require_hermitian(const DenseOperator& a, double rel_tol) {
  if (!a.is_hermitian(rel_tol)) throw NotHermitianError("operator is not Hermitian");
}

void require_density(const DenseOperator& a, double tol) {
  require_hermitian(a);
  const Complex tr = a.trace();
  if (std::abs(tr.real() - 1.0) > tol || std::abs(tr.imag()) > tol)
    throw DomainError("density operator must have unit trace (trace = " +
                      std::to_string(tr.real()) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol)
    throw DomainError("density operator has negative eigenvalue " +
                      std::to_string(es.eigenvalues()(0)));
}

EigenSystem hermitian_eig(const DenseOperator& a) {
  require_hermitian(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw QbpError("Hermitian eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

DenseOperator matrix_exp_h(const DenseOperator& a) {
  auto eig = hermitian_eig(a);
  return spectral_apply(eig, a.layout(), [](double x) { return Complex(std::exp(x)); });
}

DenseOperator matrix_exp_h_shifted(const DenseOperator& a, double& shift) {
  auto eig = hermitian_eig(a);
  shift = eig.values.size() > 0 ? eig.values.maxCoeff() : 0.0;
  const double s = shift;
  return spectral_apply(eig, a.layout(), [s](double x) { return Complex(std::exp(x - s)); });
}

DenseOperator matrix_log_pd(const DenseOperator& a, double floor) {
  auto eig = hermitian_eig(a);
  if (eig.values(0) <= floor) throw SingularOperatorError(eig.values(0));
  return spectral_apply(eig, a.layout(), [](double x) { return Complex(std::log(x)); });
}

double trace_norm(const DenseOperator& a) {
  if (a.is_hermitian()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.hermitian_part().matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(a.matrix());
  return svd.singularValues().sum();
}

double op_norm(const DenseOperator& a) {
  if (a.is_hermitian()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.hermitian_part().matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Matrix> svd(a.matrix());
  return svd.singularValues()(0);
}

DenseOperator normalized(const DenseOperator& a, double* log_trace) {
  const double tr = a.trace().real();
  if (!(tr > 0.0)) throw DomainError("cannot normalize operator with non-positive trace");
  if (log_trace != nullptr) *log_trace = std::log(tr);
  return a * (1.0 / tr);
}

// ---------------------------------------------------------------------------
// Seeded generators

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ stream) ^ index);
}

DenseOperator random_hermitian(std::uint64_t seed, const SiteLayout& layout) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long n = layout.total_dim();
  Matrix g(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Matrix h = 0.5 * (g + g.adjoint());
  return {layout, std::move(h)};
}

DenseOperator random_density(std::uint64_t seed, const SiteLayout& layout) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long n = layout.total_dim();
  Matrix g(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Matrix w = g * g.adjoint();
  w = 0.5 * (w + w.adjoint());
  w /= w.trace().real();
  return {layout, std::move(w)};
}

DenseOperator random_unitary(std::uint64_t seed, const SiteLayout& layout) {
  auto eig = hermitian_eig(random_hermitian(seed, layout));
  return spectral_apply(eig, layout, [](double x) { return std::exp(Complex(0.0, x)); });
}

}  // namespace qbp
