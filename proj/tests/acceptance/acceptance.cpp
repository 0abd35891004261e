// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "qbp/belief_propagation.hpp"
#include "qbp/cli/commands.hpp"
#include "qbp/hastings.hpp"
#include "qbp/inequalities.hpp"
#include "qbp/linear_fit.hpp"
#include "qbp/markov.hpp"
#include "qbp/model_io.hpp"
#include "qbp/thermal.hpp"

namespace {

using namespace qbp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome exact_bp_on_markov_models() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0;
  for (int n = 4; n <= 8; ++n)
    for (double beta : {0.5, 1.0, 2.0}) {
      const GraphModel m = build_chain(n, 2, factories::classical_ising(1.0, 0.3), beta);
      for (SiteId t : {1, n}) {
        const SiteId keep[] = {t};
        worst = std::max(worst, trace_norm(run_exact_bp(m, t) - exact_reduced_density(m, keep)));
      }
    }
  const double secs = seconds_since(t0);
  o.require(worst <= 1e-9, "max error " + fmt("%.3e", worst));
  o.require(secs < 10.0, "runtime " + fmt("%.2f", secs) + " s");
  o.detail = "max error " + fmt("%.3e", worst) + ", " + fmt("%.2f", secs) + " s" + (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome full_window_exactness() {
  Outcome o;
  double worst = 0;
  const std::vector<nlohmann::json> stocks{{{"stock", "classical_ising"}, {"params", {{"hz", 0.3}}}},
                                           {{"stock", "tfim"}},
                                           {{"stock", "heisenberg"}},
                                           {{"stock", "random"}, {"params", {{"seed", 2}}}}};
  for (auto desc : stocks)
    for (int n = 2; n <= 8; ++n) {
      desc["n"] = n;
      const GraphModel m = stock_model(desc);
      const SiteId keep[] = {n};
      const double err = trace_norm(run_sliding_window(m, n, n - 1) - exact_reduced_density(m, keep));
      worst = std::max(worst, err);
      o.require(err <= 1e-9, desc.dump() + " error " + fmt("%.3e", err));
    }
  o.detail = "max error " + fmt("%.3e", worst) + (o.pass ? "" : " | " + o.detail);
  return o;
}

struct DecayData {
  std::vector<SingleStepRecord> records;
  ThermalFit fit;
};

DecayData tfim8_single_step(const BoundConstants& consts) {
  const GraphModel m = build_chain(8, 2, factories::tfim(1.0, 1.0), 1.0);
  DecayData d;
  const DenseOperator vth = thermal_potential(m, {8}, m.graph().edges());
  d.fit = fit_thermal_bound(cumulants(vth, m, {8}));
  BoundConstants c = consts;
  if (d.fit.defined) {
    c.K = d.fit.K;
    c.k = d.fit.k;
  }
  for (int ell = 1; ell <= 6; ++ell) d.records.push_back(single_step_experiment(m, 8, ell, c));
  return d;
}

Outcome exponential_decay_signature() {
  Outcome o;
  const auto t0 = Clock::now();
  const DecayData d = tfim8_single_step(BoundConstants{});
  std::vector<double> x, y;
  for (const auto& r : d.records) {
    x.push_back(r.ell);
    y.push_back(std::log10(r.lhs_normalized));
  }
  const double slope = least_squares_line(x, y).slope;
  const double ratio = d.records[0].lhs_normalized / d.records[4].lhs_normalized;
  const double secs = seconds_since(t0);
  o.require(slope < 0.0, "slope not negative");
  o.require(ratio >= 10.0, "lhs(1)/lhs(5) below 10");
  o.require(secs < 60.0, "runtime " + fmt("%.2f", secs) + " s");
  o.detail = "slope " + fmt("%.4f", slope) + ", lhs(1)/lhs(5) " + fmt("%.1f", ratio) + ", " + fmt("%.2f", secs) +
             " s" + (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome single_step_bound_consistency() {
  Outcome o;
  const std::vector<BoundConstants> sets{{1, 1, 1, 1, 1, 1, 1}, {2, 2, 2, 2, 2, 1, 1}, {1, 3, 1.5, 2, 1.2, 1, 1}};
  bool first = true;
  for (const BoundConstants& base : sets) {
    const DecayData d = tfim8_single_step(base);
    o.require(d.fit.defined, "thermal fit undefined");
    BoundConstants c = base;
    c.K = d.fit.K;
    c.k = d.fit.k;
    const double norm_v = d.records.front().norm_hb;
    const double turn = rhs_turning_point(theorem_rhs(c, 1.0, norm_v, 1));
    const int start = std::max(1, static_cast<int>(std::ceil(turn)));
    double prev = INFINITY;
    for (int ell = 1; ell <= start + 40; ++ell) {
      const double total = theorem_rhs(c, 1.0, norm_v, ell).total;
      o.require(total > 0.0 && std::isfinite(total), "rhs not positive at ell " + std::to_string(ell));
      if (ell >= start) {
        o.require(total < prev, "rhs not decreasing at ell " + std::to_string(ell));
        prev = total;
      }
    }
    if (first) {
      std::printf("  ell  lhs_normalized          rhs_total               dominated\n");
      for (const auto& r : d.records)
        std::printf("  %-4d %-23.17g %-23.17g %s\n", r.ell, r.lhs_normalized, r.rhs.total,
                    r.lhs_normalized <= r.rhs.total ? "yes" : "no");
      first = false;
    }
  }
  o.detail = std::to_string(sets.size()) + " constant sets, rhs positive and eventually decreasing" +
             (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome hastings_conjugation() {
  Outcome o;
  const SiteLayout pair = SiteLayout::uniform({1, 2}, 2);
  int halving_misses = 0, norm_violations = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const DenseOperator H = random_hermitian(derive_seed(5, 0, i), pair);
    const DenseOperator V = random_hermitian(derive_seed(5, 1, i), pair);
    const DenseOperator O64 = hastings_operator(H, V, 1.0, 64);
    const DenseOperator O128 = hastings_operator(H, V, 1.0, 128);
    if (conjugation_residual(H, V, 1.0, O128) > 0.5 * conjugation_residual(H, V, 1.0, O64)) ++halving_misses;
    for (const DenseOperator* O : {&O64, &O128})
      if (op_norm(*O) > std::exp(0.5 * op_norm(V)) * (1 + 1e-12)) ++norm_violations;
  }
  o.require(halving_misses == 0, std::to_string(halving_misses) + " instances without halving");
  o.require(norm_violations == 0, std::to_string(norm_violations) + " norm violations");
  o.detail = "100 instances, residual halving misses " + std::to_string(halving_misses) + ", norm violations " +
             std::to_string(norm_violations);
  return o;
}

Outcome filter_identities() {
  Outcome o;
  const double l1 = filter_l1_norm(1.0);
  const double moment = log_coth_first_moment();
  const double zeta3 = 1.2020569031595942854;
  o.require(std::abs(l1 - 1.0) <= 1e-6, "L1 norm " + fmt("%.10f", l1));
  o.require(std::abs(moment - 7 * zeta3 / 16) <= 1e-6, "first moment " + fmt("%.10f", moment));
  o.require(moment < 9.0 / 16.0, "first moment above 9/16");
  boost::math::quadrature::ooura_fourier_cos<double> cosine;
  double worst = 0;
  for (double beta : {0.5, 1.0, 2.0})
    for (double t : {0.3, 1.0, 2.5}) {
      const double fourier = cosine.integrate([beta](double w) { return filter_hat(w, beta); }, t).first / kPi;
      worst = std::max(worst, std::abs(filter_time(t, beta) - fourier));
    }
  o.require(worst <= 1e-4, "Fourier mismatch " + fmt("%.3e", worst));
  o.detail = "L1 " + fmt("%.12f", l1) + ", moment " + fmt("%.12f", moment) + ", Fourier max diff " +
             fmt("%.2e", worst) + (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome cumulant_algebra() {
  Outcome o;
  const GraphModel chain = build_chain(5, 2, factories::tfim(1.0, 1.0), 1.0);
  double worst = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const DenseOperator O = random_hermitian(derive_seed(6, 0, i), chain.layout());
    worst = std::max(worst, cumulants(O, chain, {1}).reconstruction_residual);
  }
  o.require(worst <= 1e-10, "reconstruction residual " + fmt("%.3e", worst));
  double classical = 0;
  for (double beta : {0.5, 1.0, 2.0}) {
    const GraphModel m = build_chain(6, 2, factories::classical_ising(1.0, 0.4), beta);
    for (const auto& e : cumulants(thermal_potential(m, {1}, m.graph().edges()), m, {1}).entries)
      if (e.j >= 2) classical = std::max(classical, e.norm);
  }
  o.require(classical <= 1e-10, "classical j>=2 cumulant " + fmt("%.3e", classical));
  o.detail = "reconstruction " + fmt("%.2e", worst) + ", classical j>=2 max " + fmt("%.2e", classical) +
             (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome lemma_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  const SuiteReport r = run_lemma_suite(20240601, kSuiteInstances);
  const double secs = seconds_since(t0);
  for (const auto& s : r.summaries)
    o.require(s.count == kSuiteInstances && s.failures == 0, s.name + " failures " + std::to_string(s.failures));
  o.require(secs < 120.0, "runtime " + fmt("%.2f", secs) + " s");
  o.detail = "8 checks x " + std::to_string(kSuiteInstances) + ", failures " + std::to_string(r.total_failures()) +
             ", " + fmt("%.2f", secs) + " s" + (o.pass ? "" : " | " + o.detail);
  return o;
}

Outcome markov_diagnostics() {
  Outcome o;
  double min_cmi = INFINITY;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const DenseOperator rho = random_density(derive_seed(8, 0, i), SiteLayout::uniform({1, 2, 3}, 2));
    min_cmi = std::min(min_cmi, cmi(rho, {{1}, {2}, {3}}).raw);
  }
  o.require(min_cmi >= -kCmiTolerance, "min CMI " + fmt("%.3e", min_cmi));
  double max_def = 0;
  for (int n = 3; n <= 6; ++n) {
    const GraphModel m = build_chain(n, 2, factories::classical_ising(1.0, 0.3), 1.0);
    for (const auto& U : small_connected_subsets(m.graph()))
      max_def = std::max(max_def, std::abs(markov_deficiency(m, U, 1).raw));
    for (SiteId leaf : {1, n}) {
      const auto rep = leaf_trace_preserves_markov(m, leaf);
      o.require(rep.status == LeafTraceStatus::Preserved,
                "leaf trace n=" + std::to_string(n) + " leaf " + std::to_string(leaf) + ": " + rep.note);
    }
  }
  o.require(max_def <= 1e-8, "classical deficiency " + fmt("%.3e", max_def));
  o.detail = "min CMI " + fmt("%.2e", min_cmi) + ", classical deficiency max " + fmt("%.2e", max_def) +
             (o.pass ? "" : " | " + o.detail);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "qbp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"model": {"stock": "tfim", "n": 6}, "model_id": "tfim6", "ell": [1, 2, 3],
    "beta": [0.5, 1.0], "seed": 42, "instances": 50, "s_steps": [16, 64]})";
  std::ostringstream log;
  int files = 0;
  for (const auto& cmd : cli::command_names()) {
    cli::RunOptions a{cfg, std::nullopt, dir / (cmd + "_a"), 1};
    cli::RunOptions b{cfg, std::nullopt, dir / (cmd + "_b"), 2};
    const int ca = cli::run_command(cmd, a, log);
    const int cb = cli::run_command(cmd, b, log);
    o.require(ca == cli::kExitOk && cb == cli::kExitOk, cmd + " exited " + std::to_string(ca));
    if (ca != cli::kExitOk) continue;
    for (const auto& entry : fs::directory_iterator(*a.out)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      o.require(slurp(entry.path()) == slurp(*b.out / entry.path().filename()),
                cmd + "/" + entry.path().filename().string() + " differs");
    }
  }
  fs::remove_all(dir);
  o.detail = std::to_string(cli::command_names().size()) + " commands, " + std::to_string(files) +
             " CSV files byte-identical across reruns" + (o.pass ? "" : " | " + o.detail + " | " + log.str());
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact BP on classical chains", exact_bp_on_markov_models},
      {"sliding window exact at full width", full_window_exactness},
      {"exponential decay in window size", exponential_decay_signature},
      {"single-step bound consistency", single_step_bound_consistency},
      {"Hastings conjugation", hastings_conjugation},
      {"filter identities", filter_identities},
      {"cumulant algebra", cumulant_algebra},
      {"lemma suite", lemma_suite},
      {"Markov diagnostics", markov_diagnostics},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
