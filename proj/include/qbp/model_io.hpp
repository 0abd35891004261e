#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qbp/graph_model.hpp"

namespace qbp {

/// Parses a model document:
///   {"vertices": [{"id": 1, "dim": 2}, ...],
///    "edges": [{"u": 1, "v": 2, "term": {"factory": "tfim", "params": {...}}}
///              | {"u": 1, "v": 2, "term": {"matrix": [[[re, im], ...], ...]}}],
///    "beta": 1.0}
/// Matrices are row-major with u as the most significant factor, in the order
/// the endpoints are listed. Throws ModelFormatError on malformed input.
GraphModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const GraphModel& model);
GraphModel load_model(const std::filesystem::path& path);

/// Stock chain/tree description used by experiment configs:
///   {"stock": "tfim"|"heisenberg"|"classical_ising"|"random", "n": 8, "dim": 2,
///    "params": {...}, "beta": 1.0, "tree_seed": 3 (optional: random tree instead of chain)}
GraphModel stock_model(const nlohmann::json& desc);

factories::EdgeFactory factory_from_json(const std::string& name, const nlohmann::json& params);

class ModelFormatError : public QbpError {
 public:
  using QbpError::QbpError;
};

}  // namespace qbp
