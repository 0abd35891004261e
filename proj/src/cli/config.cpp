#include "qbp/cli/config.hpp"

#include <fstream>
#include <sstream>

#include "qbp/model_io.hpp"

namespace qbp::cli {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <typename T>
std::vector<T> scalar_or_list(const json& v, const char* key) {
  if (v.is_array()) return v.get<std::vector<T>>();
  if (v.is_number()) return {v.get<T>()};
  throw ConfigError(std::string("'") + key + "' must be a number or a list of numbers");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.config_hash = fnv1a64(text);
  try {
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (!m.is_object() || (!m.contains("file") && !m.contains("stock")))
        throw ConfigError("'model' needs either 'file' or 'stock'");
      cfg.model = m;
    }
    cfg.model_id = doc.value("model_id", cfg.model_id);
    if (!doc.contains("ell")) throw ConfigError("'ell' list is required");
    cfg.ells = scalar_or_list<int>(doc.at("ell"), "ell");
    if (!doc.contains("beta")) throw ConfigError("'beta' list is required");
    cfg.betas = scalar_or_list<double>(doc.at("beta"), "beta");
    if (doc.contains("constants")) {
      const json& c = doc.at("constants");
      cfg.constants.c = c.value("c", cfg.constants.c);
      cfg.constants.alpha = c.value("alpha", cfg.constants.alpha);
      cfg.constants.C = c.value("C", cfg.constants.C);
      cfg.constants.a = c.value("a", cfg.constants.a);
      cfg.constants.v = c.value("v", cfg.constants.v);
    }
    if (doc.contains("s_steps")) cfg.s_steps = scalar_or_list<int>(doc.at("s_steps"), "s_steps");
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
    cfg.instances = doc.value("instances", cfg.instances);
    if (doc.contains("target")) cfg.target = doc.at("target").get<SiteId>();
    if (doc.contains("v_star")) cfg.v_star = doc.at("v_star").get<SiteId>();
    if (doc.contains("anchor")) cfg.anchor = doc.at("anchor").get<std::vector<SiteId>>();
    if (doc.contains("v_edge")) {
      const auto e = doc.at("v_edge").get<std::vector<SiteId>>();
      if (e.size() != 2) throw ConfigError("'v_edge' must list two vertices");
      cfg.v_edge = Edge(e[0], e[1]);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }

  if (seed_override) cfg.seed = seed_override;
  if (!cfg.seed) throw ConfigError("'seed' is required (no wall-clock default)");
  if (cfg.ells.empty()) throw ConfigError("'ell' list is empty");
  if (cfg.betas.empty()) throw ConfigError("'beta' list is empty");
  if (cfg.s_steps.empty()) throw ConfigError("'s_steps' list is empty");
  for (int l : cfg.ells)
    if (l < 1) throw ConfigError("'ell' values must be at least 1");
  for (double b : cfg.betas)
    if (!(b > 0.0)) throw ConfigError("'beta' values must be positive");
  for (int s : cfg.s_steps)
    if (s < 1) throw ConfigError("'s_steps' values must be at least 1");
  if (cfg.instances < 1) throw ConfigError("'instances' must be at least 1");
  const BoundConstants& k = cfg.constants;
  for (double x : {k.c, k.alpha, k.C, k.a, k.v})
    if (!(x > 0.0)) throw ConfigError("'constants' must be strictly positive");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), seed_override);
}

GraphModel build_model(const ExperimentConfig& cfg, double beta) {
  if (!cfg.model) throw ConfigError("this command needs a 'model' section");
  const json& m = *cfg.model;
  try {
    if (m.contains("file")) {
      std::filesystem::path p = m.at("file").get<std::string>();
      if (p.is_relative()) p = cfg.base_dir / p;
      return load_model(p).with_beta(beta);
    }
    json desc = m;
    desc["beta"] = beta;
    return stock_model(desc);
  } catch (const DimensionCapError&) {
    throw;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed model section: ") + ex.what());
  } catch (const QbpError& ex) {
    throw ConfigError(std::string("invalid model: ") + ex.what());
  }
}

}  // namespace qbp::cli
