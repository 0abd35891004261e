#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qbp/errors.hpp"

namespace qbp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using SiteId = int;

inline constexpr long kDefaultDimensionCap = 1L << 12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kDensityTolerance = 1e-10;
inline constexpr double kDefaultLogFloor = 1e-30;

/// Ordered collection of sites with their local dimensions.
///
/// Sites are always stored in ascending id order; the first site is the most
/// significant tensor factor of the row-major basis index.
class SiteLayout {
 public:
  SiteLayout() = default;
  SiteLayout(std::vector<SiteId> sites, std::vector<int> dims,
             long dimension_cap = kDefaultDimensionCap);

  static SiteLayout uniform(std::vector<SiteId> sites, int dim,
                            long dimension_cap = kDefaultDimensionCap);

  const std::vector<SiteId>& sites() const { return sites_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  long total_dim() const { return total_dim_; }

  bool contains(SiteId site) const;
  /// Position of `site` in the ascending order; throws LayoutError if absent.
  std::size_t position(SiteId site) const;
  int dim_of(SiteId site) const;

  /// Layout with the listed sites removed (all must be present).
  SiteLayout without(std::span<const SiteId> removed) const;
  /// Layout restricted to the listed sites (all must be present).
  SiteLayout restricted_to(std::span<const SiteId> kept) const;
  /// Union of two layouts; shared sites must agree on dimension.
  SiteLayout merged(const SiteLayout& other) const;
  bool is_subset_of(const SiteLayout& other) const;

  friend bool operator==(const SiteLayout& a, const SiteLayout& b) {
    return a.sites_ == b.sites_ && a.dims_ == b.dims_;
  }

 private:
  std::vector<SiteId> sites_;
  std::vector<int> dims_;
  long total_dim_ = 1;
};

/// Square complex matrix acting on the Hilbert space of a SiteLayout.
class DenseOperator {
 public:
  DenseOperator() : matrix_(Matrix::Ones(1, 1)) {}
  DenseOperator(SiteLayout layout, Matrix matrix);

  static DenseOperator identity(const SiteLayout& layout);
  static DenseOperator zero(const SiteLayout& layout);

  const SiteLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  long dim() const { return layout_.total_dim(); }

  Complex trace() const { return matrix_.trace(); }
  DenseOperator adjoint() const { return {layout_, matrix_.adjoint()}; }
  /// Projects onto the Hermitian part, (A + A†)/2.
  DenseOperator hermitian_part() const;

  /// ‖A − A†‖_F ≤ tol·‖A‖_F (Frobenius norms stand in for the operator norm).
  bool is_hermitian(double rel_tol = kHermitianTolerance) const;

  DenseOperator& operator+=(const DenseOperator& rhs);
  DenseOperator& operator-=(const DenseOperator& rhs);
  DenseOperator& operator*=(Complex s);

  friend DenseOperator operator+(DenseOperator a, const DenseOperator& b) { return a += b; }
  friend DenseOperator operator-(DenseOperator a, const DenseOperator& b) { return a -= b; }
  friend DenseOperator operator*(DenseOperator a, Complex s) { return a *= s; }
  friend DenseOperator operator*(Complex s, DenseOperator a) { return a *= s; }
  friend DenseOperator operator*(DenseOperator a, double s) { return a *= Complex(s); }
  friend DenseOperator operator*(double s, DenseOperator a) { return a *= Complex(s); }
  /// Matrix product; both operands must share a layout.
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);

 private:
  SiteLayout layout_;
  Matrix matrix_;
};

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

/// op ⊗ identity on the complement of op's sites inside `full`.
DenseOperator embed(const DenseOperator& op, const SiteLayout& full);

/// Throws NotHermitianError unless A is Hermitian at the given tolerance.
void require_hermitian(const DenseOperator& a, double rel_tol = kHermitianTolerance);
/// Throws DomainError unless A is a density operator (Hermitian, unit trace, PSD).
void require_density(const DenseOperator& a, double tol = kDensityTolerance);

EigenSystem hermitian_eig(const DenseOperator& a);

/// U f(Λ) U† for a Hermitian A = U Λ U†.
template <typename F>
DenseOperator spectral_apply(const EigenSystem& eig, const SiteLayout& layout, F&& f) {
  const Eigen::Index n = eig.values.size();
  Eigen::VectorXcd fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = f(eig.values(i));
  Matrix m = eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
  return {layout, m};
}

DenseOperator matrix_exp_h(const DenseOperator& a);
/// exp(A − λ_max·I); returns the shift λ_max via `shift` so that exp(A) = e^{shift}·result.
DenseOperator matrix_exp_h_shifted(const DenseOperator& a, double& shift);
DenseOperator matrix_log_pd(const DenseOperator& a, double floor = kDefaultLogFloor);

DenseOperator partial_trace(const DenseOperator& a, std::span<const SiteId> out);
/// Reduced operator on `keep` (the complement is traced out).
DenseOperator reduce_to(const DenseOperator& a, std::span<const SiteId> keep);
/// (Tr_out A / dim(out)) ⊗ I_out, re-embedded on A's layout.
DenseOperator conditional_expectation(const DenseOperator& a, std::span<const SiteId> out);

/// Σ|λ_i| for Hermitian input, sum of singular values otherwise.
double trace_norm(const DenseOperator& a);
/// max|λ_i| for Hermitian input, largest singular value otherwise.
double op_norm(const DenseOperator& a);

/// Unit-trace copy; `log_trace` receives log Tr[A] when non-null.
DenseOperator normalized(const DenseOperator& a, double* log_trace = nullptr);

// Seeded generators. Identical (seed, layout) gives bitwise-identical output.
DenseOperator random_hermitian(std::uint64_t seed, const SiteLayout& layout);
DenseOperator random_density(std::uint64_t seed, const SiteLayout& layout);
/// exp(i·H) for H = random_hermitian(seed, layout).
DenseOperator random_unitary(std::uint64_t seed, const SiteLayout& layout);

/// splitmix64 mixing of (master, stream, index) into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

}  // namespace qbp
