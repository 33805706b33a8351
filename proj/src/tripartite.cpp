#include "ipmgnn/tripartite.hpp"

#include <cmath>
#include <string>

#include "ipmgnn/errors.hpp"

namespace ipmgnn {

std::string node_class_name(NodeClass c) {
  switch (c) {
    case NodeClass::kVariable: return "variable";
    case NodeClass::kConstraint: return "constraint";
    case NodeClass::kObjective: return "objective";
  }
  return "unknown";
}

char node_class_tag(NodeClass c) {
  switch (c) {
    case NodeClass::kVariable: return 'v';
    case NodeClass::kConstraint: return 'c';
    case NodeClass::kObjective: return 'o';
  }
  return '?';
}

int TripartiteGraph::node_count(NodeClass cls) const {
  switch (cls) {
    case NodeClass::kVariable: return n_vars;
    case NodeClass::kConstraint: return n_cons;
    case NodeClass::kObjective: return 1;
  }
  return 0;
}

namespace {

// Mean and population standard deviation of `count` values of which only the
// listed ones are nonzero.
Eigen::Vector2d sparse_stats(std::span<const double> nonzeros, int count) {
  if (count == 0) return Eigen::Vector2d::Zero();
  double sum = 0.0;
  for (double v : nonzeros) sum += v;
  const double mean = sum / count;
  double ss = 0.0;
  for (double v : nonzeros) ss += (v - mean) * (v - mean);
  ss += static_cast<double>(count - static_cast<int>(nonzeros.size())) * mean * mean;
  return {mean, std::sqrt(ss / count)};
}

}  // namespace

NodeFeatures compute_features(const LpInstance& inst) {
  require_valid(inst);
  const int n = inst.n();
  const int m = inst.m();
  NodeFeatures f;
  f.var.resize(n, 2);
  f.cons.resize(m, 2);
  for (int i = 0; i < n; ++i) f.var.row(i) = sparse_stats(inst.A.col_values(i), m).transpose();
  for (int j = 0; j < m; ++j) f.cons.row(j) = sparse_stats(inst.A.row_values(j), n).transpose();
  const std::span<const double> cs(inst.c.data(), static_cast<std::size_t>(n));
  f.obj = sparse_stats(cs, n);
  return f;
}

TripartiteGraph build_graph(const LpInstance& inst) {
  require_valid(inst);
  TripartiteGraph g;
  g.n_vars = inst.n();
  g.n_cons = inst.m();
  g.edges_vc.reserve(inst.A.nnz());
  for (int i = 0; i < g.n_vars; ++i) {
    const auto rows = inst.A.col_indices(i);
    const auto vals = inst.A.col_values(i);
    for (std::size_t k = 0; k < rows.size(); ++k) g.edges_vc.push_back({i, rows[k], vals[k]});
  }
  for (int i = 0; i < g.n_vars; ++i) g.edges_vo.push_back({i, inst.c[i]});
  for (int j = 0; j < g.n_cons; ++j) g.edges_co.push_back({j, inst.b[j]});
  NodeFeatures f = compute_features(inst);
  g.var_features = std::move(f.var);
  g.cons_features = std::move(f.cons);
  g.obj_features = f.obj;
  g.adjacency = inst.A;
  g.c = inst.c;
  g.b = inst.b;
  return g;
}

int degree(const TripartiteGraph& g, NodeClass cls, int index) {
  switch (cls) {
    case NodeClass::kVariable:
      if (index < 0 || index >= g.n_vars) break;
      return g.adjacency.col_count(index) + 1;
    case NodeClass::kConstraint:
      if (index < 0 || index >= g.n_cons) break;
      return g.adjacency.row_count(index) + 1;
    case NodeClass::kObjective:
      if (index != 0) break;
      return g.n_vars + g.n_cons;
  }
  throw DimensionError("degree: no " + node_class_name(cls) + " node " + std::to_string(index));
}

SparseMatrix matrix_from_edges(const TripartiteGraph& g) {
  std::vector<Triplet> t;
  t.reserve(g.edges_vc.size());
  for (const auto& e : g.edges_vc) t.push_back({e.cons, e.var, e.weight});
  return SparseMatrix(g.n_cons, g.n_vars, std::move(t));
}

nlohmann::json graph_to_json(const TripartiteGraph& g) {
  using nlohmann::json;
  json vc = json::array();
  for (const auto& e : g.edges_vc) vc.push_back(json::array({e.var, e.cons, e.weight}));
  json vo = json::array();
  for (const auto& e : g.edges_vo) vo.push_back(json::array({e.var, e.weight}));
  json co = json::array();
  for (const auto& e : g.edges_co) co.push_back(json::array({e.cons, e.weight}));
  auto rows = [](const Eigen::MatrixXd& mat) {
    json out = json::array();
    for (Eigen::Index r = 0; r < mat.rows(); ++r) out.push_back(json::array({mat(r, 0), mat(r, 1)}));
    return out;
  };
  return json{{"n_vars", g.n_vars},
              {"n_cons", g.n_cons},
              {"edges_vc", std::move(vc)},
              {"edges_vo", std::move(vo)},
              {"edges_co", std::move(co)},
              {"var_features", rows(g.var_features)},
              {"cons_features", rows(g.cons_features)},
              {"obj_features", json::array({g.obj_features[0], g.obj_features[1]})}};
}

TripartiteGraph graph_from_json(const nlohmann::json& j) {
  try {
    TripartiteGraph g;
    g.n_vars = j.at("n_vars").get<int>();
    g.n_cons = j.at("n_cons").get<int>();
    if (g.n_vars < 0 || g.n_cons < 0) throw FormatError("graph: negative node count");
    for (const auto& e : j.at("edges_vc")) {
      g.edges_vc.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    }
    for (const auto& e : j.at("edges_vo")) g.edges_vo.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
    for (const auto& e : j.at("edges_co")) g.edges_co.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
    if (static_cast<int>(g.edges_vo.size()) != g.n_vars || static_cast<int>(g.edges_co.size()) != g.n_cons) {
      throw FormatError("graph: objective edge lists do not match node counts");
    }
    auto read_rows = [](const nlohmann::json& arr, int count, const char* what) {
      if (!arr.is_array() || static_cast<int>(arr.size()) != count) {
        throw FormatError(std::string("graph: ") + what + " has the wrong number of rows");
      }
      Eigen::MatrixXd mat(count, 2);
      for (int r = 0; r < count; ++r) {
        mat(r, 0) = arr[static_cast<std::size_t>(r)].at(0).get<double>();
        mat(r, 1) = arr[static_cast<std::size_t>(r)].at(1).get<double>();
      }
      return mat;
    };
    g.var_features = read_rows(j.at("var_features"), g.n_vars, "var_features");
    g.cons_features = read_rows(j.at("cons_features"), g.n_cons, "cons_features");
    g.obj_features = Eigen::Vector2d(j.at("obj_features").at(0).get<double>(), j.at("obj_features").at(1).get<double>());
    g.c.resize(g.n_vars);
    g.b.resize(g.n_cons);
    for (const auto& e : g.edges_vo) {
      if (e.var < 0 || e.var >= g.n_vars) throw FormatError("graph: objective-variable edge out of range");
      g.c[e.var] = e.weight;
    }
    for (const auto& e : g.edges_co) {
      if (e.cons < 0 || e.cons >= g.n_cons) throw FormatError("graph: objective-constraint edge out of range");
      g.b[e.cons] = e.weight;
    }
    g.adjacency = matrix_from_edges(g);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("graph: ") + e.what());
  } catch (const InvalidInstance& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
}

}  // namespace ipmgnn
