#include "qbp/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qbp/belief_propagation.hpp"

namespace qbp {

namespace {

double lambda_min(const DenseOperator& a) { return hermitian_eig(a).values.minCoeff(); }
double lambda_max(const DenseOperator& a) { return hermitian_eig(a).values.maxCoeff(); }

DenseOperator power(const DenseOperator& b, int n) {
  DenseOperator out = DenseOperator::identity(b.layout());
  for (int i = 0; i < n; ++i) out = out * b;
  return out;
}

void require_unitary(const DenseOperator& u, const char* what) {
  const Matrix defect = u.matrix().adjoint() * u.matrix() - Matrix::Identity(u.dim(), u.dim());
  if (defect.norm() > 1e-9) throw DomainError(std::string("check_telescoping: ") + what + " is not unitary");
}

DenseOperator conj(const DenseOperator& u, const DenseOperator& o) { return u * o * u.adjoint(); }

DenseOperator unitary_evolution(const EigenSystem& eig, const SiteLayout& layout, double t) {
  return spectral_apply(eig, layout, [t](double x) { return std::exp(Complex(0.0, x * t)); });
}

SiteLayout qubit_layout(int n) {
  std::vector<SiteId> sites(n);
  for (int i = 0; i < n; ++i) sites[i] = i + 1;
  return SiteLayout::uniform(sites, 2);
}

// Random Hermitian scaled to exactly the given operator norm.
DenseOperator perturbation(std::uint64_t seed, const SiteLayout& layout, double eps) {
  if (eps == 0.0) return DenseOperator::zero(layout);
  const DenseOperator r = random_hermitian(seed, layout);
  return r * (eps / op_norm(r));
}

}  // namespace

CheckResult make_check(std::string name, double lhs, double rhs, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = r.margin >= -kCheckSlack * std::max(1.0, std::abs(rhs));
  r.detail = std::move(detail);
  return r;
}

CheckResult check_golden_thompson(const DenseOperator& A, const DenseOperator& B) {
  require_hermitian(A);
  require_hermitian(B);
  const double lhs = matrix_exp_h(A + B).trace().real();
  const double rhs = (matrix_exp_h(A) * matrix_exp_h(B)).trace().real();
  return make_check("golden_thompson", lhs, rhs);
}

CheckResult check_weyl(const DenseOperator& N, const DenseOperator& R) {
  require_hermitian(N);
  require_hermitian(R);
  const RealVector ln = hermitian_eig(N).values;
  const RealVector lm = hermitian_eig(N + R).values;
  const RealVector lr = hermitian_eig(R).values;
  const double rmin = lr.minCoeff();
  const double rmax = lr.maxCoeff();
  CheckResult worst;
  bool first = true;
  for (Eigen::Index i = 0; i < ln.size(); ++i) {
    CheckResult lower = make_check("weyl", ln(i) + rmin, lm(i), "index " + std::to_string(i) + " lower");
    CheckResult upper = make_check("weyl", lm(i), ln(i) + rmax, "index " + std::to_string(i) + " upper");
    for (CheckResult* c : {&lower, &upper}) {
      if (first || c->margin < worst.margin) worst = *c;
      first = false;
    }
  }
  return worst;
}

CheckResult check_circle_eig_lower_bound(const DenseOperator& A, const DenseOperator& B) {
  require_density(A);
  require_density(B);
  const double bound = lambda_min(A) * lambda_min(B) / lambda_max(A);
  const double actual = lambda_min(normalized(circle_product(A, B)));
  return make_check("circle_eig_lower_bound", bound, actual);
}

CheckResult check_commutator_power(const DenseOperator& A, const DenseOperator& B, int n) {
  if (n < 1) throw DomainError("check_commutator_power: n must be at least 1");
  const DenseOperator bn = power(B, n);
  const double lhs = op_norm(A * bn - bn * A);
  const double rhs = n * std::pow(op_norm(B), n - 1) * op_norm(A * B - B * A);
  return make_check("commutator_power", lhs, rhs, "n = " + std::to_string(n));
}

CheckResult check_telescoping(const DenseOperator& U, const DenseOperator& V, const DenseOperator& O, int k) {
  if (k < 1) throw DomainError("check_telescoping: k must be at least 1");
  require_unitary(U, "U");
  require_unitary(V, "V");
  require_hermitian(O);
  const double lhs = op_norm(conj(power(V, k), O) - conj(power(U * V, k), O));
  double rhs = 0.0;
  for (int j = 1; j <= k; ++j) {
    const DenseOperator inner = conj(power(V, j), O);
    rhs += op_norm(inner - conj(U, inner));
  }
  return make_check("telescoping", lhs, rhs, "k = " + std::to_string(k));
}

CheckResult check_exp_bound(const DenseOperator& A, const DenseOperator& B) {
  require_hermitian(A);
  require_hermitian(B);
  const double M = std::max(op_norm(A), op_norm(B));
  const double lhs = op_norm(matrix_exp_h(A) - matrix_exp_h(B));
  const double rhs = std::exp(M) * op_norm(A - B);
  return make_check("exp_bound", lhs, rhs);
}

CheckResult check_trace_norm_monotone(const DenseOperator& A, const std::vector<SiteId>& out) {
  require_hermitian(A);
  const double lhs = trace_norm(partial_trace(A, out).hermitian_part());
  const double rhs = trace_norm(A);
  return make_check("trace_norm_monotone", lhs, rhs);
}

CheckResult check_circle_perturbation(const DenseOperator& HA, const DenseOperator& HB, double eps_a,
                                      double eps_b, std::uint64_t seed) {
  require_hermitian(HA);
  require_hermitian(HB);
  if (eps_a < 0.0 || eps_b < 0.0) throw DomainError("check_circle_perturbation: eps must be non-negative");
  const SiteLayout full = HA.layout().merged(HB.layout());
  const DenseOperator dA = perturbation(derive_seed(seed, 0, 0), HA.layout(), eps_a);
  const DenseOperator dB = perturbation(derive_seed(seed, 0, 1), HB.layout(), eps_b);
  double s = 0.0;
  const DenseOperator base = normalized(matrix_exp_h_shifted(embed(HA, full) + embed(HB, full), s));
  const DenseOperator pert = normalized(matrix_exp_h_shifted(embed(HA + dA, full) + embed(HB + dB, full), s));
  const double lhs = op_norm((base - pert).hermitian_part());
  return make_check("circle_perturbation", lhs, 2.0 * (eps_a + eps_b));
}

int SuiteReport::total_failures() const {
  int n = 0;
  for (const auto& s : summaries) n += s.failures;
  return n;
}

const std::vector<std::string>& lemma_check_names() {
  static const std::vector<std::string> names{
      "golden_thompson", "weyl",     "circle_eig_lower_bound", "commutator_power",
      "telescoping",     "exp_bound", "trace_norm_monotone",   "circle_perturbation"};
  return names;
}

namespace {

CheckResult run_instance(std::size_t check, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto sub = [&](int stream) { return derive_seed(seed, 1, static_cast<std::uint64_t>(stream)); };
  const int qubits = draw(1, 4);
  const SiteLayout layout = qubit_layout(qubits);

  switch (check) {
    case 0:
      return check_golden_thompson(random_hermitian(sub(0), layout), random_hermitian(sub(1), layout));
    case 1:
      return check_weyl(random_hermitian(sub(0), layout), random_hermitian(sub(1), layout));
    case 2:
      return check_circle_eig_lower_bound(random_density(sub(0), layout), random_density(sub(1), layout));
    case 3: {
      static constexpr int powers[] = {1, 2, 3, 5};
      return check_commutator_power(random_hermitian(sub(0), layout), random_hermitian(sub(1), layout),
                                    powers[draw(0, 3)]);
    }
    case 4:
      return check_telescoping(random_unitary(sub(0), layout), random_unitary(sub(1), layout),
                               random_hermitian(sub(2), layout), draw(1, 4));
    case 5:
      return check_exp_bound(random_hermitian(sub(0), layout), random_hermitian(sub(1), layout));
    case 6: {
      std::vector<SiteId> out;
      if (qubits > 1) {
        for (SiteId s : layout.sites())
          if (draw(0, 1)) out.push_back(s);
        if (out.empty() || static_cast<int>(out.size()) == qubits) out = {layout.sites().front()};
      } else {
        out = layout.sites();
      }
      return check_trace_norm_monotone(random_hermitian(sub(0), layout), out);
    }
    case 7: {
      // H_A on a prefix, H_B on a suffix of the qubit chain; they may overlap.
      const int a_end = draw(1, qubits);
      const int b_start = draw(1, qubits);
      std::vector<SiteId> sa, sb;
      for (int s = 1; s <= a_end; ++s) sa.push_back(s);
      for (int s = b_start; s <= qubits; ++s) sb.push_back(s);
      const double eps = draw(0, 1) ? 1e-1 : 1e-3;
      return check_circle_perturbation(random_hermitian(sub(0), layout.restricted_to(sa)),
                                       random_hermitian(sub(1), layout.restricted_to(sb)), eps, eps, sub(2));
    }
    default:
      throw DomainError("unknown check index");
  }
}

}  // namespace

std::vector<CheckResult> run_check_ensemble(const std::string& name, std::uint64_t master_seed, int instances) {
  const auto& names = lemma_check_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("unknown lemma check '" + name + "'");
  const auto c = static_cast<std::size_t>(it - names.begin());
  std::vector<CheckResult> out;
  out.reserve(instances);
  for (int i = 0; i < instances; ++i) out.push_back(run_instance(c, derive_seed(master_seed, c, i)));
  return out;
}

SuiteReport run_lemma_suite(std::uint64_t master_seed, int instances) {
  SuiteReport report;
  report.master_seed = master_seed;
  for (const auto& name : lemma_check_names()) {
    CheckSummary s;
    s.name = name;
    for (auto& r : run_check_ensemble(name, master_seed, instances)) {
      s.min_margin = s.count == 0 ? r.margin : std::min(s.min_margin, r.margin);
      ++s.count;
      if (!r.pass) ++s.failures;
      report.results.push_back(std::move(r));
    }
    report.summaries.push_back(s);
  }
  return report;
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& s : report.summaries)
    checks[s.name] = {{"count", s.count}, {"min_margin", s.min_margin}, {"failures", s.failures}};
  return {{"master_seed", report.master_seed}, {"checks", checks}, {"total_failures", report.total_failures()}};
}

LocalizationReport check_localization(const BoundConstants& consts, double beta, int n,
                                      const std::vector<double>& times) {
  consts.validate();
  if (n < 3) throw DomainError("check_localization: chain needs at least 3 sites");
  const GraphModel model = build_chain(n, 2, factories::tfim(1.0, 1.0), beta);
  const std::vector<SiteId> traced{1};
  const DenseOperator v_th = thermal_potential(model, traced, model.graph().edges());
  const SiteLayout& reduced = v_th.layout();

  std::vector<Edge> rest;
  for (const Edge& e : model.graph().edges())
    if (!e.touches(1)) rest.push_back(e);
  const DenseOperator H = edge_sum(model, rest, reduced);
  const DenseOperator H_eff = H + v_th;

  LocalizationReport report;
  report.fit = fit_thermal_bound(cumulants(v_th, model, traced));
  const double K = report.fit.defined ? report.fit.K : consts.K;
  const double k = report.fit.defined ? report.fit.k : consts.k;
  const double L = 2.0 * K / (1.0 - std::exp(-k));
  const double a_prime = std::min(k, consts.a);
  const double av = consts.a * consts.v;

  const EigenSystem eig = hermitian_eig(H);
  const EigenSystem eig_eff = hermitian_eig(H_eff);
  Matrix z(2, 2);
  z << 1, 0, 0, -1;

  for (double t : times) {
    const DenseOperator U = unitary_evolution(eig, reduced, t);
    const DenseOperator U_eff = unitary_evolution(eig_eff, reduced, t);
    double previous = 0.0;
    for (int ell = 1; ell < n; ++ell) {
      const SiteId site = 1 + ell;
      const DenseOperator O = embed(DenseOperator(SiteLayout::uniform({site}, 2), z), reduced);
      const double dev = op_norm(conj(U_eff, O) - conj(U, O));
      const double at = std::abs(t);
      const double bound =
          std::min((at * L + consts.C * K * std::exp(av * at) / av) * std::exp(-a_prime * ell), at * L);
      report.rows.push_back({t, ell, dev, bound});
      if (ell > 1 && dev > previous * (1.0 + 1e-9) + 1e-12) report.non_increasing = false;
      if (dev > 2.0 * op_norm(O) * (1.0 + 1e-12)) report.within_two_norm = false;
      previous = dev;
    }
  }
  return report;
}

}  // namespace qbp
