#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbp/graph_model.hpp"
#include "qbp/thermal.hpp"

namespace qbp::cli {

class ConfigError : public QbpError {
 public:
  using QbpError::QbpError;
};

/// Experiment description read from a JSON file:
///   {"model": {"file": "chain.json"} | {"stock": "tfim", "n": 8, "params": {...}},
///    "model_id": "tfim8", "ell": [1, 2, 3], "beta": [1.0],
///    "constants": {"c": 1, "alpha": 1, "C": 1, "a": 1, "v": 1},
///    "s_steps": [16, 32, 64, 128], "seed": 42, "out": "results",
///    "instances": 500, "target": 8, "v_star": 1, "anchor": [1], "v_edge": [3, 4]}
/// Model file paths are resolved against the config file's directory.
struct ExperimentConfig {
  std::optional<nlohmann::json> model;
  std::filesystem::path base_dir;
  std::string model_id = "model";
  std::vector<int> ells;
  std::vector<double> betas;
  BoundConstants constants;
  std::vector<int> s_steps{16, 32, 64, 128};
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "qbp_out";
  int instances = 500;
  std::optional<SiteId> target;
  std::optional<SiteId> v_star;
  std::vector<SiteId> anchor;
  std::optional<Edge> v_edge;
  std::uint64_t config_hash = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Parses and validates. Throws ConfigError on malformed JSON, empty sweep axes,
/// non-positive values or a missing seed (unless `seed_override` is set).
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// Builds the configured model at inverse temperature β. Throws ConfigError if
/// the config has no model; model-format problems surface as ConfigError too.
GraphModel build_model(const ExperimentConfig& cfg, double beta);

}  // namespace qbp::cli
