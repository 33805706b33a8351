#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipmgnn/tripartite.hpp"
#include "ipmgnn/weights.hpp"

namespace ipmgnn {

enum class LayerKind { kGcn, kGin, kGen };
std::string layer_kind_name(LayerKind k);  // GCN, GIN, GEN
LayerKind parse_layer_kind(const std::string& s);

struct Linear {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

// Affine layers with ReLU between them and a linear last layer.
struct Mlp {
  std::vector<Linear> layers;

  int in_dim() const;
  int out_dim() const;
  void check(const std::string& what) const;  // throws DimensionError
};

Eigen::VectorXd mlp_forward(const Mlp& p, const Eigen::VectorXd& x);
// Column-wise: every column of X is one input.
Eigen::MatrixXd mlp_forward_columns(const Mlp& p, const Eigen::MatrixXd& X);

// Per-coordinate softmax-weighted mean (temperature 1), stabilised by
// subtracting the per-coordinate max. Throws DomainError when empty.
Eigen::VectorXd softmax_aggregate(const std::vector<Eigen::VectorXd>& xs);

// Role names inside one layer. Self maps h -> h, cross maps carry messages
// between classes, update maps produce the new state, edge maps embed a
// scalar edge weight into R^d.
inline constexpr std::array<const char*, 3> kSelfRoles{"c2c", "o2o", "v2v"};
inline constexpr std::array<const char*, 6> kCrossRoles{"o2c", "v2c", "c2o", "v2o", "o2v", "c2v"};
inline constexpr std::array<const char*, 3> kUpdateRoles{"upd_c", "upd_o", "upd_v"};
inline constexpr std::array<const char*, 6> kEdgeRoles{"edge_oc", "edge_vc", "edge_co", "edge_vo", "edge_ov", "edge_cv"};
inline constexpr std::array<const char*, 3> kGinEps{"eps_c", "eps_o", "eps_v"};
inline constexpr std::array<const char*, 6> kGenEps{"eps_o2c", "eps_v2c", "eps_c2o", "eps_v2o", "eps_o2v", "eps_c2v"};

std::vector<std::string> eps_names(LayerKind k);  // empty for GCN

struct LayerParams {
  std::map<std::string, Mlp> mlps;
  std::map<std::string, double> eps;

  const Mlp& mlp(const std::string& role) const;
  double epsilon(const std::string& name) const;
};

struct MpnnWeights {
  LayerKind kind = LayerKind::kGcn;
  int depth = 1;   // T
  int hidden = 1;  // d
  Mlp init_v, init_c, init_o;
  std::vector<LayerParams> layers;  // layers[t - 1] is layer t
  Mlp head;                         // d -> 1, shared by all layers

  void check() const;  // throws DimensionError
};

// Tensor names: init.{v,c,o}.{w,b}{k}, layer{t}.{role}.{w,b}{k} (t from 1),
// layer{t}.{eps name} with shape [1], head.{w,b}{k}. Metadata carries
// layer_kind, T, d and format.
inline constexpr const char* kWeightFormat = "ipmgnn-mpnn-v1";
TensorFile weights_to_tensors(const MpnnWeights& w);
// Throws MissingTensor naming the first absent key, FormatError otherwise.
MpnnWeights weights_from_tensors(const TensorFile& f);

MpnnWeights load_weights(const std::filesystem::path& path);
void save_weights(const std::filesystem::path& path, const MpnnWeights& w);

// Two-layer MLPs everywhere; entries uniform in +-1/sqrt(fan_in), rounded to
// float so a save/load round trip is exact.
MpnnWeights random_weights(LayerKind kind, int depth, int hidden, std::uint64_t seed);
MpnnWeights zero_weights(LayerKind kind, int depth, int hidden);

// Hidden states with one column per node.
struct HiddenStates {
  Eigen::MatrixXd v;  // d x n
  Eigen::MatrixXd c;  // d x m
  Eigen::VectorXd o;  // d
};

// Counts of vector-level work, for checking that a forward pass stays
// linear in the graph size.
struct ForwardStats {
  std::int64_t mlp_applications = 0;  // one per input vector pushed through an MLP
  std::int64_t messages = 0;          // one per aggregated message term
};

HiddenStates init_embeddings(const TripartiteGraph& g, const MpnnWeights& w, ForwardStats* stats = nullptr);

// Constraints first (from the previous variable and objective states), then
// the objective (new constraints, previous variables), then variables (new
// constraints and objective).
HiddenStates layer_forward(const TripartiteGraph& g, const HiddenStates& h, const LayerParams& p, LayerKind kind,
                           ForwardStats* stats = nullptr);

// z^(1..T): the head applied to every variable state after each layer.
std::vector<Eigen::VectorXd> forward(const TripartiteGraph& g, const MpnnWeights& w, ForwardStats* stats = nullptr);

}  // namespace ipmgnn
