#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmgnn/lp.hpp"
#include "ipmgnn/sparse.hpp"

namespace ipmgnn {

enum class NodeClass { kVariable, kConstraint, kObjective };

std::string node_class_name(NodeClass c);  // variable, constraint, objective
// Short tag used in program listings: v, c, o.
char node_class_tag(NodeClass c);

struct VcEdge {
  int var = 0;
  int cons = 0;
  double weight = 0.0;  // A[cons, var]
};

struct VoEdge {
  int var = 0;
  double weight = 0.0;  // c[var]
};

struct CoEdge {
  int cons = 0;
  double weight = 0.0;  // b[cons]
};

struct NodeFeatures {
  Eigen::MatrixXd var;   // n x 2: mean, population std of column A[:, i]
  Eigen::MatrixXd cons;  // m x 2: mean, population std of row A[j, :]
  Eigen::Vector2d obj = Eigen::Vector2d::Zero();  // mean, population std of c
};

// Variables, constraints and one objective node. Edges: variable-constraint
// for every nonzero of A (sorted by variable, then constraint), objective to
// every variable (weight c_i) and to every constraint (weight b_j).
struct TripartiteGraph {
  int n_vars = 0;
  int n_cons = 0;
  std::vector<VcEdge> edges_vc;
  std::vector<VoEdge> edges_vo;
  std::vector<CoEdge> edges_co;
  Eigen::MatrixXd var_features;
  Eigen::MatrixXd cons_features;
  Eigen::Vector2d obj_features = Eigen::Vector2d::Zero();

  // Same weights as edges_vc, with row (constraint) and column (variable)
  // adjacency for neighbourhood iteration.
  SparseMatrix adjacency;
  Eigen::VectorXd c;
  Eigen::VectorXd b;

  int node_count(NodeClass cls) const;
};

TripartiteGraph build_graph(const LpInstance& inst);
NodeFeatures compute_features(const LpInstance& inst);

// Total neighbour count over all edge types; the objective link counts once.
int degree(const TripartiteGraph& g, NodeClass cls, int index);

// Rebuilds A from edges_vc.
SparseMatrix matrix_from_edges(const TripartiteGraph& g);

nlohmann::json graph_to_json(const TripartiteGraph& g);
TripartiteGraph graph_from_json(const nlohmann::json& j);

}  // namespace ipmgnn
