#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbp/thermal.hpp"

namespace qbp {

inline constexpr double kCheckSlack = 1e-9;

/// Both sides of an inequality lhs ≤ rhs. margin = rhs − lhs; pass when
/// margin ≥ −1e-9·max(1, |rhs|).
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = true;
  std::string detail;
};

CheckResult make_check(std::string name, double lhs, double rhs, std::string detail = {});

/// Tr e^{A+B} ≤ Tr e^A e^B.
CheckResult check_golden_thompson(const DenseOperator& A, const DenseOperator& B);
/// λ_i(N) + λ_min(R) ≤ λ_i(N+R) ≤ λ_i(N) + λ_max(R); reports the tightest index and side.
CheckResult check_weyl(const DenseOperator& N, const DenseOperator& R);
/// λ_min(A⊙B / Tr[A⊙B]) ≥ λ_min(A)λ_min(B)/λ_max(A); lhs is the bound.
CheckResult check_circle_eig_lower_bound(const DenseOperator& A, const DenseOperator& B);
/// ‖[A, Bⁿ]‖ ≤ n‖B‖^{n−1}‖[A, B]‖.
CheckResult check_commutator_power(const DenseOperator& A, const DenseOperator& B, int n);
/// ‖VᵏOV†ᵏ − (UV)ᵏO(V†U†)ᵏ‖ ≤ Σ_{j=1..k} ‖VʲOV†ʲ − UVʲOV†ʲU†‖.
/// Throws DomainError if U or V is not unitary to 1e-9.
CheckResult check_telescoping(const DenseOperator& U, const DenseOperator& V, const DenseOperator& O, int k);
/// ‖e^A − e^B‖ ≤ e^M‖A − B‖ with M = max(‖A‖, ‖B‖); A, B Hermitian.
CheckResult check_exp_bound(const DenseOperator& A, const DenseOperator& B);
/// ‖Tr_out A‖₁ ≤ ‖A‖₁.
CheckResult check_trace_norm_monotone(const DenseOperator& A, const std::vector<SiteId>& out);
/// Perturbs H_A, H_B by random Hermitian δ with ‖δ‖ = ε exactly and compares the
/// normalized exponentials of the sums in operator norm against 2(ε_A + ε_B).
CheckResult check_circle_perturbation(const DenseOperator& HA, const DenseOperator& HB, double eps_a,
                                      double eps_b, std::uint64_t seed);

struct CheckSummary {
  std::string name;
  int count = 0;
  double min_margin = 0.0;
  int failures = 0;
};

struct SuiteReport {
  std::uint64_t master_seed = 0;
  std::vector<CheckSummary> summaries;
  std::vector<CheckResult> results;  // every instance, check-major order
  int total_failures() const;
};

inline constexpr int kSuiteInstances = 500;

/// The eight checks over seeded random instances of 1 to 4 qubits.
/// Instance i of check c uses derive_seed(master, c, i).
SuiteReport run_lemma_suite(std::uint64_t master_seed, int instances = kSuiteInstances);

/// Runs one named check over its ensemble; throws DomainError for unknown names.
std::vector<CheckResult> run_check_ensemble(const std::string& name, std::uint64_t master_seed, int instances);
const std::vector<std::string>& lemma_check_names();

nlohmann::json to_json(const SuiteReport& report);

struct LocalizationRow {
  double t = 0.0;
  int ell = 0;
  double deviation = 0.0;
  double reported_bound = 0.0;
};

struct LocalizationReport {
  std::vector<LocalizationRow> rows;  // t-major, ℓ ascending
  ThermalFit fit;
  bool non_increasing = true;
  bool within_two_norm = true;
};

/// Effective Hamiltonian H′ = H + V_th on a TFIM chain of n sites after tracing
/// site 1, against H = the chain terms on sites 2..n. Observable Z at distance
/// ℓ from the traced site. Deviation ‖e^{iH′t}Oe^{−iH′t} − e^{iHt}Oe^{−iHt}‖.
LocalizationReport check_localization(const BoundConstants& consts, double beta = 1.0, int n = 7,
                                      const std::vector<double>& times = {0.5, 1.0, 2.0});

}  // namespace qbp
