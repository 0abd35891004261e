#include "qbp/model_io.hpp"

#include <fstream>

namespace qbp {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& rows, long dim) {
  if (!rows.is_array() || static_cast<long>(rows.size()) != dim)
    throw ModelFormatError("edge matrix must have " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (long i = 0; i < dim; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<long>(row.size()) != dim)
      throw ModelFormatError("edge matrix row " + std::to_string(i) + " has wrong length");
    for (long j = 0; j < dim; ++j) {
      const json& z = row[j];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw ModelFormatError("matrix entries must be [re, im] pairs");
      m(i, j) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

// Reorders a two-site matrix given on (a, b) into (b, a) order.
Matrix swap_factors(const Matrix& m, int da, int db) {
  Matrix out(m.rows(), m.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b2 = 0; b2 < db; ++b2) out(b * da + a, b2 * da + a2) = m(a * db + b, a2 * db + b2);
  return out;
}

template <typename T>
T param_or(const json& params, const char* key, T fallback) {
  if (params.is_object() && params.contains(key)) return params.at(key).get<T>();
  return fallback;
}

}  // namespace

factories::EdgeFactory factory_from_json(const std::string& name, const json& params) {
  if (name == "tfim")
    return factories::tfim(param_or(params, "J", 1.0), param_or(params, "hx", 1.0),
                           param_or(params, "full_boundary", false));
  if (name == "heisenberg") return factories::heisenberg(param_or(params, "J", 1.0));
  if (name == "classical_ising")
    return factories::classical_ising(param_or(params, "J", 1.0), param_or(params, "hz", 0.0));
  if (name == "random")
    return factories::random_two_local(param_or<std::uint64_t>(params, "seed", 0),
                                       param_or(params, "scale", 1.0));
  throw ModelFormatError("unknown edge factory '" + name + "'");
}

GraphModel model_from_json(const json& doc) {
  try {
    if (!doc.contains("vertices") || !doc.contains("edges") || !doc.contains("beta"))
      throw ModelFormatError("model requires 'vertices', 'edges' and 'beta'");
    std::vector<SiteId> ids;
    std::vector<int> dims;
    for (const json& v : doc.at("vertices")) {
      ids.push_back(v.at("id").get<SiteId>());
      dims.push_back(v.value("dim", 2));
    }
    SiteLayout layout(ids, dims);

    std::vector<Edge> edges;
    for (const json& e : doc.at("edges")) edges.emplace_back(e.at("u").get<SiteId>(), e.at("v").get<SiteId>());
    TreeGraph graph(ids, edges);

    std::vector<EdgeTerm> terms;
    for (const json& e : doc.at("edges")) {
      const SiteId u = e.at("u").get<SiteId>();
      const SiteId v = e.at("v").get<SiteId>();
      const Edge edge(u, v);
      const std::vector<SiteId> ends{edge.u, edge.v};
      SiteLayout pair = layout.restricted_to(ends);
      const json& term = e.at("term");
      Matrix m;
      if (term.contains("matrix")) {
        m = matrix_from_json(term.at("matrix"), pair.total_dim());
        if (u > v) m = swap_factors(m, layout.dim_of(u), layout.dim_of(v));
      } else if (term.contains("factory")) {
        const auto pos = std::lower_bound(graph.edges().begin(), graph.edges().end(), edge) -
                         graph.edges().begin();
        factories::EdgeContext ctx{edge.u, edge.v, layout.dim_of(edge.u), layout.dim_of(edge.v),
                                   graph.degree(edge.u), graph.degree(edge.v),
                                   static_cast<std::size_t>(pos)};
        m = factory_from_json(term.at("factory").get<std::string>(), term.value("params", json::object()))(ctx);
      } else {
        throw ModelFormatError("edge term needs either 'matrix' or 'factory'");
      }
      terms.push_back({edge, DenseOperator(std::move(pair), std::move(m))});
    }
    return GraphModel(std::move(layout), std::move(terms), doc.at("beta").get<double>());
  } catch (const json::exception& ex) {
    throw ModelFormatError(std::string("malformed model document: ") + ex.what());
  }
}

json model_to_json(const GraphModel& model) {
  json doc;
  doc["beta"] = model.beta();
  json vertices = json::array();
  for (std::size_t i = 0; i < model.layout().size(); ++i)
    vertices.push_back({{"id", model.layout().sites()[i]}, {"dim", model.layout().dims()[i]}});
  doc["vertices"] = std::move(vertices);
  json edges = json::array();
  for (const auto& t : model.terms())
    edges.push_back({{"u", t.edge.u}, {"v", t.edge.v}, {"term", {{"matrix", matrix_to_json(t.term.matrix())}}}});
  doc["edges"] = std::move(edges);
  return doc;
}

GraphModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& ex) {
    throw ModelFormatError("cannot parse " + path.string() + ": " + ex.what());
  }
  return model_from_json(doc);
}

GraphModel stock_model(const json& desc) {
  try {
    const std::string name = desc.at("stock").get<std::string>();
    const int n = desc.at("n").get<int>();
    const int dim = desc.value("dim", 2);
    const double beta = desc.value("beta", 1.0);
    auto factory = factory_from_json(name, desc.value("params", json::object()));
    if (desc.contains("tree_seed"))
      return build_tree(random_tree_spec(n, desc.at("tree_seed").get<std::uint64_t>(), dim), factory, beta);
    return build_chain(n, dim, factory, beta);
  } catch (const json::exception& ex) {
    throw ModelFormatError(std::string("malformed stock model: ") + ex.what());
  }
}

}  // namespace qbp
