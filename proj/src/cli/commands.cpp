#include "qbp/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <boost/version.hpp>

#include "qbp/belief_propagation.hpp"
#include "qbp/cli/config.hpp"
#include "qbp/hastings.hpp"
#include "qbp/inequalities.hpp"
#include "qbp/markov.hpp"
#include "qbp/thermal.hpp"

namespace qbp::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    line(cells);
  }
  const std::string& text() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }
  std::size_t width_;
  std::string text_;
};

std::string num(double x) { return format_double(x); }
std::string num(int x) { return std::to_string(x); }
std::string optional_num(const std::optional<double>& x) { return x ? format_double(*x) : "NA"; }

std::string join_sites(const std::vector<SiteId>& sites) {
  std::string s;
  for (std::size_t i = 0; i < sites.size(); ++i) s += (i ? ";" : "") + std::to_string(sites[i]);
  return s;
}

struct Output {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  int exit_code = kExitOk;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw QbpError("cannot write " + path.string());
  out << content;
}

std::pair<SiteId, SiteId> chain_ends(const GraphModel& model, const ExperimentConfig& cfg) {
  const TreeGraph& g = model.graph();
  std::vector<SiteId> leaves;
  for (SiteId v : g.vertices())
    if (g.vertices().size() > 1 && g.is_leaf(v)) leaves.push_back(v);
  if (leaves.empty()) throw ConfigError("model has no leaves");
  const SiteId target = cfg.target.value_or(leaves.back());
  SiteId v_star = leaves.front() == target && leaves.size() > 1 ? leaves[1] : leaves.front();
  if (cfg.v_star) v_star = *cfg.v_star;
  return {target, v_star};
}

// (K, k) fitted from the thermal-potential cumulants around `anchor`; when the
// fit is undefined the envelope falls back to K = e·‖O^(1)‖, k = 1.
struct ConstantFit {
  ThermalFit fit;
  BoundConstants constants;
};

ConstantFit fit_constants(const GraphModel& model, const std::vector<SiteId>& anchor, const BoundConstants& base) {
  ConstantFit out;
  out.constants = base;
  const DenseOperator v_th = thermal_potential(model, anchor, model.graph().edges());
  const CumulantSeries series = cumulants(v_th, model, anchor);
  out.fit = fit_thermal_bound(series);
  if (out.fit.defined && out.fit.K > 0.0 && out.fit.k > 0.0) {
    out.constants.K = out.fit.K;
    out.constants.k = out.fit.k;
  } else {
    out.constants.K = std::exp(1.0) * std::max(series.entries.front().norm, kFitFloor);
    out.constants.k = 1.0;
  }
  return out;
}

Output cmd_window_sweep(const ExperimentConfig& cfg, unsigned jobs) {
  struct Result {
    std::vector<std::vector<std::string>> sweep_rows;
    std::vector<std::vector<std::string>> step_rows;
  };
  std::vector<Result> results(cfg.betas.size());
  parallel_for(cfg.betas.size(), jobs, [&](std::size_t i) {
    const double beta = cfg.betas[i];
    const GraphModel model = build_model(cfg, beta);
    if (!model.graph().is_path()) throw ConfigError("window-sweep needs a chain model");
    const auto [target, v_star] = chain_ends(model, cfg);
    const int n = static_cast<int>(model.graph().vertices().size());
    const WindowSweep sweep = window_error_sweep(model, target, cfg.ells);
    for (const auto& p : sweep.points)
      results[i].sweep_rows.push_back(
          {cfg.model_id, num(n), num(beta), num(p.ell), num(p.trace_error), optional_num(sweep.slope)});

    const ConstantFit cf = fit_constants(model, {v_star}, cfg.constants);
    const std::string K = cf.fit.defined ? num(cf.fit.K) : "NA";
    const std::string k = cf.fit.defined ? num(cf.fit.k) : "NA";
    for (int ell : cfg.ells) {
      const SingleStepRecord r = single_step_experiment(model, v_star, ell, cf.constants);
      results[i].step_rows.push_back({cfg.model_id, num(beta), num(ell), num(r.lhs_literal),
                                      num(r.lhs_normalized), num(r.rhs.total), num(r.rhs.bound1),
                                      num(r.rhs.bound2), K, k});
    }
  });

  Csv sweep({"model_id", "N", "beta", "ell", "trace_error", "slope"});
  Csv steps({"model_id", "beta", "ell", "lhs_literal", "lhs_normalized", "rhs_total", "rhs_bound1", "rhs_bound2",
             "K_fit", "k_fit"});
  for (const auto& r : results) {
    for (const auto& row : r.sweep_rows) sweep.row(row);
    for (const auto& row : r.step_rows) steps.row(row);
  }
  return {{{"window_sweep.csv", sweep.text()}, {"single_step.csv", steps.text()}}, kExitOk};
}

Output cmd_cumulant_decay(const ExperimentConfig& cfg, unsigned jobs) {
  std::vector<std::vector<std::vector<std::string>>> rows(cfg.betas.size());
  parallel_for(cfg.betas.size(), jobs, [&](std::size_t i) {
    const double beta = cfg.betas[i];
    const GraphModel model = build_model(cfg, beta);
    std::vector<SiteId> anchor = cfg.anchor;
    if (anchor.empty()) anchor = {model.graph().vertices().front()};
    const DenseOperator v_th = thermal_potential(model, anchor, model.graph().edges());
    const CumulantSeries series = cumulants(v_th, model, anchor);
    const ThermalFit fit = fit_thermal_bound(series);
    const std::string K = fit.defined ? num(fit.K) : "NA";
    const std::string k = fit.defined ? num(fit.k) : "NA";
    for (const auto& e : series.entries) rows[i].push_back({num(beta), num(e.j), num(e.norm), K, k});
  });
  Csv csv({"beta", "j", "norm", "K", "k"});
  for (const auto& block : rows)
    for (const auto& row : block) csv.row(row);
  return {{{"cumulant_decay.csv", csv.text()}}, kExitOk};
}

Output cmd_hastings_verify(const ExperimentConfig& cfg, unsigned jobs) {
  // Random two-qubit instances: one task per (β, instance).
  const int instances = cfg.instances;
  const std::size_t tasks = cfg.betas.size() * static_cast<std::size_t>(instances);
  std::vector<std::vector<std::vector<std::string>>> rows(tasks);
  const SiteLayout pair = SiteLayout::uniform({1, 2}, 2);
  parallel_for(tasks, jobs, [&](std::size_t t) {
    const double beta = cfg.betas[t / instances];
    const int inst = static_cast<int>(t % instances);
    const DenseOperator H = random_hermitian(derive_seed(*cfg.seed, 100, 2 * inst), pair);
    const DenseOperator V = random_hermitian(derive_seed(*cfg.seed, 100, 2 * inst + 1), pair);
    const double bound = std::exp(beta * op_norm(V) / 2.0);
    for (int s : cfg.s_steps) {
      const DenseOperator O = hastings_operator(H, V, beta, s);
      rows[t].push_back({num(beta), num(inst), num(s), num(conjugation_residual(H, V, beta, O)), num(op_norm(O)),
                         num(bound)});
    }
  });
  Csv csv({"beta", "instance", "s_steps", "residual", "norm_O", "norm_bound"});
  for (const auto& block : rows)
    for (const auto& row : block) csv.row(row);
  Output out{{{"hastings_residual.csv", csv.text()}}, kExitOk};

  if (cfg.model) {
    std::vector<int> ells{0};
    for (int l : cfg.ells) ells.push_back(l);
    const int steps = *std::max_element(cfg.s_steps.begin(), cfg.s_steps.end());
    std::vector<std::vector<std::vector<std::string>>> trows(cfg.betas.size());
    parallel_for(cfg.betas.size(), jobs, [&](std::size_t i) {
      const double beta = cfg.betas[i];
      const GraphModel model = build_model(cfg, beta);
      const auto& edges = model.graph().edges();
      if (edges.empty()) throw ConfigError("hastings-verify needs a model with at least one edge");
      const Edge v_edge = cfg.v_edge.value_or(edges[edges.size() / 2]);
      const DenseOperator O = model_hastings(model, {v_edge}, steps);
      for (int ell : ells) {
        const double err = op_norm(O - truncated_hastings(model, {v_edge}, ell, steps));
        trows[i].push_back({num(beta), num(ell), num(steps), num(err)});
      }
    });
    Csv tcsv({"beta", "ell", "s_steps", "truncation_error"});
    for (const auto& block : trows)
      for (const auto& row : block) tcsv.row(row);
    out.files.emplace_back("hastings_truncation.csv", tcsv.text());
  }
  return out;
}

Output cmd_lemma_suite(const ExperimentConfig& cfg, unsigned jobs) {
  const auto& names = lemma_check_names();
  std::vector<std::vector<CheckResult>> results(names.size());
  parallel_for(names.size(), jobs,
               [&](std::size_t c) { results[c] = run_check_ensemble(names[c], *cfg.seed, cfg.instances); });

  SuiteReport report;
  report.master_seed = *cfg.seed;
  Csv csv({"check", "instance", "lhs", "rhs", "margin", "pass"});
  for (std::size_t c = 0; c < names.size(); ++c) {
    CheckSummary s;
    s.name = names[c];
    for (std::size_t i = 0; i < results[c].size(); ++i) {
      const CheckResult& r = results[c][i];
      s.min_margin = i == 0 ? r.margin : std::min(s.min_margin, r.margin);
      ++s.count;
      if (!r.pass) ++s.failures;
      csv.row({r.name, num(static_cast<int>(i)), num(r.lhs), num(r.rhs), num(r.margin), r.pass ? "1" : "0"});
    }
    report.summaries.push_back(s);
  }

  const LocalizationReport loc = check_localization(cfg.constants, cfg.betas.front());
  Csv lcsv({"t", "ell", "deviation", "reported_bound"});
  for (const auto& r : loc.rows) lcsv.row({num(r.t), num(r.ell), num(r.deviation), num(r.reported_bound)});

  json summary = to_json(report);
  summary["localization"] = {{"non_increasing", loc.non_increasing}, {"within_two_norm", loc.within_two_norm}};
  const int code = report.total_failures() > 0 ? kExitLemma : kExitOk;
  return {{{"lemma_suite.csv", csv.text()},
           {"lemma_suite.json", summary.dump(2) + "\n"},
           {"localization.csv", lcsv.text()}},
          code};
}

Output cmd_markov_audit(const ExperimentConfig& cfg, unsigned jobs) {
  struct Result {
    std::vector<std::vector<std::string>> rows;
    json json_rows = json::array();
    json leaves = json::array();
  };
  std::vector<Result> results(cfg.betas.size());
  parallel_for(cfg.betas.size(), jobs, [&](std::size_t i) {
    const double beta = cfg.betas[i];
    const GraphModel model = build_model(cfg, beta);
    const DenseOperator rho = thermal_state(model);
    for (int ell : cfg.ells) {
      for (const DeficiencyRow& row : deficiency_table(rho, model.graph(), ell)) {
        results[i].rows.push_back({num(beta), join_sites(row.U), num(row.ell), num(row.deficiency)});
        json j = to_json(row);
        j["beta"] = beta;
        results[i].json_rows.push_back(std::move(j));
      }
    }
    const TreeGraph& g = model.graph();
    for (SiteId v : g.vertices()) {
      if (g.vertices().size() < 2 || !g.is_leaf(v)) continue;
      json rep = to_json(leaf_trace_preserves_markov(model, v));
      rep["beta"] = beta;
      results[i].leaves.push_back(std::move(rep));
    }
  });
  Csv csv({"beta", "U", "ell", "deficiency"});
  json doc = {{"rows", json::array()}, {"leaf_reports", json::array()},
              {"note", "U ranges over connected subsets with |U| <= 2"}};
  for (auto& r : results) {
    for (const auto& row : r.rows) csv.row(row);
    for (auto& j : r.json_rows) doc["rows"].push_back(std::move(j));
    for (auto& j : r.leaves) doc["leaf_reports"].push_back(std::move(j));
  }
  return {{{"markov_audit.csv", csv.text()}, {"markov_audit.json", doc.dump(2) + "\n"}}, kExitOk};
}

using Handler = Output (*)(const ExperimentConfig&, unsigned);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"window-sweep", cmd_window_sweep},       {"cumulant-decay", cmd_cumulant_decay},
      {"hastings-verify", cmd_hastings_verify}, {"lemma-suite", cmd_lemma_suite},
      {"markov-audit", cmd_markov_audit},
  };
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"window-sweep", "cumulant-decay", "hastings-verify", "lemma-suite",
                                              "markov-audit"};
  return names;
}

int run_command(const std::string& command, const RunOptions& options, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const auto it = handlers().find(command);
  if (it == handlers().end()) {
    log << "qbp: unknown command '" << command << "'\n";
    return kExitConfig;
  }
  try {
    ExperimentConfig cfg = load_config(options.config, options.seed);
    if (options.out) cfg.out = *options.out;
    Output out = it->second(cfg, options.jobs);

    std::filesystem::create_directories(cfg.out);
    json manifest;
    manifest["command"] = command;
    manifest["model_id"] = cfg.model_id;
    manifest["config"] = options.config.string();
    manifest["config_hash"] = hex64(cfg.config_hash);
    manifest["seed"] = *cfg.seed;
    manifest["versions"] = {
        {"qbp", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"compiler", __VERSION__},
    };
    json files = json::array();
    for (const auto& [name, content] : out.files) {
      write_file(cfg.out / name, content);
      files.push_back(name);
    }
    manifest["outputs"] = files;
    manifest["exit_code"] = out.exit_code;
    manifest["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(cfg.out / "run_manifest.json", manifest.dump(2) + "\n");
    if (out.exit_code == kExitLemma) log << "qbp: lemma suite reported failures\n";
    return out.exit_code;
  } catch (const ConfigError& ex) {
    log << "qbp: config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const DimensionCapError& ex) {
    log << "qbp: dimension cap exceeded: " << ex.what() << "\n";
    return kExitDimension;
  } catch (const std::exception& ex) {
    log << "qbp: " << ex.what() << "\n";
    return kExitFailure;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Quantum belief-propagation numerical lab"};
  app.require_subcommand(1);
  RunOptions options;
  std::uint64_t seed = 0;
  std::string out;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out, "output directory, overrides the config");
    sub->add_option("--jobs", options.jobs, "worker threads (default: number of cores)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) options.seed = seed;
  if (chosen->count("--out")) options.out = out;
  return run_command(chosen->get_name(), options, std::cerr);
}

}  // namespace qbp::cli
