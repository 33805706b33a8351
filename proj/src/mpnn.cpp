#include "ipmgnn/mpnn.hpp"

#include <cmath>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/rng.hpp"

namespace ipmgnn {

std::string layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kGcn: return "GCN";
    case LayerKind::kGin: return "GIN";
    case LayerKind::kGen: return "GEN";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
  if (s == "GCN" || s == "gcn") return LayerKind::kGcn;
  if (s == "GIN" || s == "gin") return LayerKind::kGin;
  if (s == "GEN" || s == "gen") return LayerKind::kGen;
  throw FormatError("unknown layer kind '" + s + "' (expected GCN, GIN or GEN)");
}

int Mlp::in_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols()); }
int Mlp::out_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().w.rows()); }

void Mlp::check(const std::string& what) const {
  if (layers.empty()) throw DimensionError(what + ": MLP has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.b.size() != l.w.rows()) throw DimensionError(what + ": bias " + std::to_string(k) + " has the wrong length");
    if (k > 0 && l.w.cols() != layers[k - 1].w.rows()) {
      throw DimensionError(what + ": layer " + std::to_string(k) + " input does not match previous output");
    }
    if (!l.w.allFinite() || !l.b.allFinite()) throw DimensionError(what + ": non-finite parameter");
  }
}

Eigen::VectorXd mlp_forward(const Mlp& p, const Eigen::VectorXd& x) {
  if (p.layers.empty() || x.size() != p.in_dim()) {
    throw DimensionError("mlp_forward: input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(p.in_dim()));
  }
  Eigen::VectorXd h = x;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    h = p.layers[k].w * h + p.layers[k].b;
    if (k + 1 < p.layers.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Eigen::MatrixXd mlp_forward_columns(const Mlp& p, const Eigen::MatrixXd& X) {
  if (p.layers.empty() || X.rows() != p.in_dim()) {
    throw DimensionError("mlp_forward: input has " + std::to_string(X.rows()) + " rows, expected " +
                         std::to_string(p.in_dim()));
  }
  Eigen::MatrixXd h = X;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    Eigen::MatrixXd next = p.layers[k].w * h;
    next.colwise() += p.layers[k].b;
    if (k + 1 < p.layers.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

Eigen::VectorXd softmax_aggregate(const std::vector<Eigen::VectorXd>& xs) {
  if (xs.empty()) throw DomainError("softmax_aggregate: empty multiset");
  const Eigen::Index d = xs.front().size();
  Eigen::VectorXd mx = xs.front();
  for (const auto& x : xs) {
    if (x.size() != d) throw DimensionError("softmax_aggregate: vectors differ in length");
    mx = mx.cwiseMax(x);
  }
  Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(d);
  for (const auto& x : xs) {
    const Eigen::VectorXd e = (x - mx).array().exp().matrix();
    den += e;
    num += e.cwiseProduct(x);
  }
  return num.cwiseQuotient(den);
}

std::vector<std::string> eps_names(LayerKind k) {
  switch (k) {
    case LayerKind::kGcn: return {};
    case LayerKind::kGin: return {kGinEps.begin(), kGinEps.end()};
    case LayerKind::kGen: return {kGenEps.begin(), kGenEps.end()};
  }
  return {};
}

namespace {

std::vector<std::string> mlp_roles() {
  std::vector<std::string> r;
  for (auto* s : kSelfRoles) r.emplace_back(s);
  for (auto* s : kCrossRoles) r.emplace_back(s);
  for (auto* s : kUpdateRoles) r.emplace_back(s);
  for (auto* s : kEdgeRoles) r.emplace_back(s);
  return r;
}

int role_input_dim(const std::string& role, int d) { return role.rfind("edge_", 0) == 0 ? 1 : d; }

}  // namespace

const Mlp& LayerParams::mlp(const std::string& role) const {
  auto it = mlps.find(role);
  if (it == mlps.end()) throw DimensionError("layer has no MLP for role '" + role + "'");
  return it->second;
}

double LayerParams::epsilon(const std::string& name) const {
  auto it = eps.find(name);
  if (it == eps.end()) throw DimensionError("layer has no epsilon '" + name + "'");
  return it->second;
}

void MpnnWeights::check() const {
  if (depth < 1) throw DimensionError("weights: depth must be at least 1");
  if (hidden < 1) throw DimensionError("weights: hidden width must be at least 1");
  if (static_cast<int>(layers.size()) != depth) throw DimensionError("weights: layer count differs from depth");
  auto expect = [&](const Mlp& m, const std::string& what, int in, int out) {
    m.check(what);
    if (m.in_dim() != in || m.out_dim() != out) {
      throw DimensionError(what + ": maps " + std::to_string(m.in_dim()) + " -> " + std::to_string(m.out_dim()) +
                           ", expected " + std::to_string(in) + " -> " + std::to_string(out));
    }
  };
  expect(init_v, "init.v", 2, hidden);
  expect(init_c, "init.c", 2, hidden);
  expect(init_o, "init.o", 2, hidden);
  expect(head, "head", hidden, 1);
  for (int t = 0; t < depth; ++t) {
    const std::string prefix = "layer" + std::to_string(t + 1) + ".";
    for (const auto& role : mlp_roles()) {
      expect(layers[t].mlp(role), prefix + role, role_input_dim(role, hidden), hidden);
    }
    for (const auto& e : eps_names(kind)) {
      if (!std::isfinite(layers[t].epsilon(e))) throw DimensionError(prefix + e + ": not finite");
    }
  }
}

// ---------------------------------------------------------------------------
// Tensor file mapping

namespace {

Tensor to_tensor(const Eigen::MatrixXd& m) {
  Tensor t;
  t.shape = {m.rows(), m.cols()};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(static_cast<float>(m(r, c)));
  }
  return t;
}

Tensor to_tensor(const Eigen::VectorXd& v) {
  Tensor t;
  t.shape = {v.size()};
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data.push_back(static_cast<float>(v[i]));
  return t;
}

void put_mlp(TensorFile& f, const std::string& prefix, const Mlp& m) {
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    f.tensors[prefix + ".w" + std::to_string(k)] = to_tensor(m.layers[k].w);
    f.tensors[prefix + ".b" + std::to_string(k)] = to_tensor(m.layers[k].b);
  }
}

Mlp get_mlp(const TensorFile& f, const std::string& prefix) {
  Mlp m;
  for (int k = 0;; ++k) {
    const std::string wname = prefix + ".w" + std::to_string(k);
    const std::string bname = prefix + ".b" + std::to_string(k);
    if (!f.has(wname)) {
      if (k == 0) throw MissingTensor(wname);
      if (f.has(bname)) throw MissingTensor(wname);
      break;
    }
    const Tensor& w = f.at(wname);
    const Tensor& b = f.at(bname);
    if (w.shape.size() != 2) throw FormatError("tensor '" + wname + "' must be 2-D");
    if (b.shape.size() != 1 || b.shape[0] != w.shape[0]) {
      throw FormatError("tensor '" + bname + "' must be 1-D with length " + std::to_string(w.shape[0]));
    }
    Linear l;
    l.w.resize(w.shape[0], w.shape[1]);
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = w.data[static_cast<std::size_t>(r * l.w.cols() + c)];
    }
    l.b.resize(b.shape[0]);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = b.data[static_cast<std::size_t>(i)];
    m.layers.push_back(std::move(l));
  }
  return m;
}

int meta_int(const TensorFile& f, const std::string& key) {
  auto it = f.metadata.find(key);
  if (it == f.metadata.end()) throw FormatError("weight file: metadata is missing '" + key + "'");
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw FormatError("weight file: metadata '" + key + "' is not an integer");
  }
}

}  // namespace

TensorFile weights_to_tensors(const MpnnWeights& w) {
  w.check();
  TensorFile f;
  f.metadata = {{"format", kWeightFormat},
                {"layer_kind", layer_kind_name(w.kind)},
                {"T", std::to_string(w.depth)},
                {"d", std::to_string(w.hidden)}};
  put_mlp(f, "init.v", w.init_v);
  put_mlp(f, "init.c", w.init_c);
  put_mlp(f, "init.o", w.init_o);
  put_mlp(f, "head", w.head);
  for (int t = 0; t < w.depth; ++t) {
    const std::string prefix = "layer" + std::to_string(t + 1) + ".";
    for (const auto& [role, m] : w.layers[t].mlps) put_mlp(f, prefix + role, m);
    for (const auto& [name, v] : w.layers[t].eps) {
      f.tensors[prefix + name] = Tensor{{1}, {static_cast<float>(v)}};
    }
  }
  return f;
}

MpnnWeights weights_from_tensors(const TensorFile& f) {
  auto fmt = f.metadata.find("format");
  if (fmt != f.metadata.end() && fmt->second != kWeightFormat) {
    throw FormatError("weight file: unsupported format '" + fmt->second + "'");
  }
  auto kind = f.metadata.find("layer_kind");
  if (kind == f.metadata.end()) throw FormatError("weight file: metadata is missing 'layer_kind'");
  MpnnWeights w;
  w.kind = parse_layer_kind(kind->second);
  w.depth = meta_int(f, "T");
  w.hidden = meta_int(f, "d");
  if (w.depth < 1 || w.hidden < 1) throw FormatError("weight file: T and d must be positive");
  w.init_v = get_mlp(f, "init.v");
  w.init_c = get_mlp(f, "init.c");
  w.init_o = get_mlp(f, "init.o");
  w.head = get_mlp(f, "head");
  w.layers.resize(static_cast<std::size_t>(w.depth));
  for (int t = 0; t < w.depth; ++t) {
    const std::string prefix = "layer" + std::to_string(t + 1) + ".";
    for (const auto& role : mlp_roles()) w.layers[t].mlps[role] = get_mlp(f, prefix + role);
    for (const auto& e : eps_names(w.kind)) {
      const Tensor& te = f.at(prefix + e);
      if (te.numel() != 1) throw FormatError("tensor '" + prefix + e + "' must hold one value");
      w.layers[t].eps[e] = te.data[0];
    }
  }
  try {
    w.check();
  } catch (const DimensionError& e) {
    throw FormatError(std::string("weight file: ") + e.what());
  }
  return w;
}

MpnnWeights load_weights(const std::filesystem::path& path) { return weights_from_tensors(read_tensor_file(path)); }

void save_weights(const std::filesystem::path& path, const MpnnWeights& w) {
  write_tensor_file(path, weights_to_tensors(w));
}

namespace {

template <typename Fill>
Mlp make_mlp(int in, int hidden, int out, Fill fill) {
  Mlp m;
  m.layers.resize(2);
  m.layers[0].w = Eigen::MatrixXd(hidden, in);
  m.layers[0].b = Eigen::VectorXd(hidden);
  m.layers[1].w = Eigen::MatrixXd(out, hidden);
  m.layers[1].b = Eigen::VectorXd(out);
  for (auto& l : m.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.w.cols()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = fill(scale);
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b[r] = fill(scale);
  }
  return m;
}

template <typename Fill>
MpnnWeights make_weights(LayerKind kind, int depth, int hidden, Fill fill) {
  if (depth < 1 || hidden < 1) throw DimensionError("weights: depth and hidden width must be positive");
  MpnnWeights w;
  w.kind = kind;
  w.depth = depth;
  w.hidden = hidden;
  w.init_v = make_mlp(2, hidden, hidden, fill);
  w.init_c = make_mlp(2, hidden, hidden, fill);
  w.init_o = make_mlp(2, hidden, hidden, fill);
  w.layers.resize(static_cast<std::size_t>(depth));
  for (auto& layer : w.layers) {
    for (const auto& role : mlp_roles()) layer.mlps[role] = make_mlp(role_input_dim(role, hidden), hidden, hidden, fill);
    for (const auto& e : eps_names(kind)) layer.eps[e] = fill(0.1);
  }
  w.head = make_mlp(hidden, hidden, 1, fill);
  return w;
}

}  // namespace

MpnnWeights random_weights(LayerKind kind, int depth, int hidden, std::uint64_t seed) {
  Rng rng(seed);
  return make_weights(kind, depth, hidden, [&](double scale) {
    return static_cast<double>(static_cast<float>(rng.uniform(-scale, scale)));
  });
}

MpnnWeights zero_weights(LayerKind kind, int depth, int hidden) {
  return make_weights(kind, depth, hidden, [](double) { return 0.0; });
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

void count(ForwardStats* s, std::int64_t mlp, std::int64_t msg) {
  if (s == nullptr) return;
  s->mlp_applications += mlp;
  s->messages += msg;
}

Eigen::MatrixXd apply(const Mlp& m, const Eigen::MatrixXd& X, ForwardStats* s) {
  count(s, X.cols(), 0);
  return mlp_forward_columns(m, X);
}

Eigen::MatrixXd apply_scalars(const Mlp& m, const std::vector<double>& xs, ForwardStats* s) {
  Eigen::MatrixXd X(1, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) X(0, static_cast<Eigen::Index>(i)) = xs[i];
  return apply(m, X, s);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Edge weights of A in row-major (constraint, then variable) order.
std::vector<double> row_major_weights(const SparseMatrix& A) {
  std::vector<double> out;
  out.reserve(A.nnz());
  for (int j = 0; j < A.rows(); ++j) {
    for (double v : A.row_values(j)) out.push_back(v);
  }
  return out;
}

std::vector<double> col_major_weights(const SparseMatrix& A) {
  std::vector<double> out;
  out.reserve(A.nnz());
  for (int i = 0; i < A.cols(); ++i) {
    for (double v : A.col_values(i)) out.push_back(v);
  }
  return out;
}

// Aggregates the messages (h[:, src] + edge[:, k] + eps) over one
// neighbourhood. GCN scales each term by 1/sqrt(d_src d_dst) and sums, GIN
// sums, GEN takes the softmax aggregate.
class Aggregator {
 public:
  Aggregator(LayerKind kind, Eigen::Index d) : kind_(kind), d_(d) {}

  void reset() {
    sum_ = Eigen::VectorXd::Zero(d_);
    terms_.clear();
  }

  void add(const Eigen::VectorXd& term, double norm) {
    if (kind_ == LayerKind::kGen) {
      terms_.push_back(term);
    } else if (kind_ == LayerKind::kGcn) {
      sum_ += norm * term;
    } else {
      sum_ += term;
    }
  }

  Eigen::VectorXd result(const char* what) const {
    if (kind_ != LayerKind::kGen) return sum_;
    if (terms_.empty()) throw DimensionError(std::string(what) + ": empty neighbourhood");
    return softmax_aggregate(terms_);
  }

 private:
  LayerKind kind_;
  Eigen::Index d_;
  Eigen::VectorXd sum_;
  std::vector<Eigen::VectorXd> terms_;
};

double gcn_norm(int da, int db) { return 1.0 / std::sqrt(static_cast<double>(da) * static_cast<double>(db)); }

}  // namespace

HiddenStates init_embeddings(const TripartiteGraph& g, const MpnnWeights& w, ForwardStats* stats) {
  if (g.var_features.cols() != 2 || g.cons_features.cols() != 2) {
    throw DimensionError("init_embeddings: raw features must have 2 columns");
  }
  HiddenStates h;
  h.v = apply(w.init_v, g.var_features.transpose(), stats);
  h.c = apply(w.init_c, g.cons_features.transpose(), stats);
  h.o = apply(w.init_o, Eigen::MatrixXd(g.obj_features), stats).col(0);
  return h;
}

HiddenStates layer_forward(const TripartiteGraph& g, const HiddenStates& h, const LayerParams& p, LayerKind kind,
                           ForwardStats* stats) {
  const int n = g.n_vars;
  const int m = g.n_cons;
  const Eigen::Index d = h.o.size();
  if (h.v.rows() != d || h.c.rows() != d || h.v.cols() != n || h.c.cols() != m) {
    throw DimensionError("layer_forward: hidden states do not match the graph");
  }
  const SparseMatrix& A = g.adjacency;
  const bool gcn = kind == LayerKind::kGcn;
  const bool gin = kind == LayerKind::kGin;
  const bool gen = kind == LayerKind::kGen;
  auto eps = [&](const char* name) { return gen || gin ? p.epsilon(name) : 0.0; };
  const int d_o = degree(g, NodeClass::kObjective, 0);
  std::vector<int> d_v(static_cast<std::size_t>(n));
  std::vector<int> d_c(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) d_v[i] = degree(g, NodeClass::kVariable, i);
  for (int j = 0; j < m; ++j) d_c[j] = degree(g, NodeClass::kConstraint, j);
  Aggregator agg(kind, d);
  HiddenStates out;

  // Constraints.
  {
    Eigen::MatrixXd self = apply(p.mlp("c2c"), h.c, stats);
    if (gin) self *= 1.0 + eps("eps_c");
    const Eigen::MatrixXd e_oc = apply_scalars(p.mlp("edge_oc"), to_std(g.b), stats);
    Eigen::MatrixXd from_o(d, m);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd t = h.o + e_oc.col(j);
      if (gen) t.array() += eps("eps_o2c");
      if (gcn) t *= gcn_norm(d_o, d_c[j]);
      from_o.col(j) = t;
    }
    const Eigen::MatrixXd e_vc = apply_scalars(p.mlp("edge_vc"), row_major_weights(A), stats);
    Eigen::MatrixXd from_v(d, m);
    Eigen::Index k = 0;
    for (int j = 0; j < m; ++j) {
      agg.reset();
      for (int i : A.row_indices(j)) {
        Eigen::VectorXd t = h.v.col(i) + e_vc.col(k++);
        if (gen) t.array() += eps("eps_v2c");
        agg.add(t, gcn_norm(d_v[i], d_c[j]));
      }
      count(stats, 0, A.row_count(j));
      from_v.col(j) = agg.result("constraint update");
    }
    const Eigen::MatrixXd sum = (self + apply(p.mlp("o2c"), from_o, stats)) + apply(p.mlp("v2c"), from_v, stats);
    out.c = apply(p.mlp("upd_c"), sum, stats);
  }

  // Objective.
  {
    Eigen::VectorXd self = apply(p.mlp("o2o"), Eigen::MatrixXd(h.o), stats).col(0);
    if (gin) self *= 1.0 + eps("eps_o");
    const Eigen::MatrixXd e_co = apply_scalars(p.mlp("edge_co"), to_std(g.b), stats);
    agg.reset();
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd t = out.c.col(j) + e_co.col(j);
      if (gen) t.array() += eps("eps_c2o");
      agg.add(t, gcn_norm(d_o, d_c[j]));
    }
    count(stats, 0, m);
    const Eigen::VectorXd from_c = agg.result("objective update");
    const Eigen::MatrixXd e_vo = apply_scalars(p.mlp("edge_vo"), to_std(g.c), stats);
    agg.reset();
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd t = h.v.col(i) + e_vo.col(i);
      if (gen) t.array() += eps("eps_v2o");
      agg.add(t, gcn_norm(d_o, d_v[i]));
    }
    count(stats, 0, n);
    const Eigen::VectorXd from_v = agg.result("objective update");
    const Eigen::VectorXd sum = (self + apply(p.mlp("c2o"), Eigen::MatrixXd(from_c), stats).col(0)) +
                                apply(p.mlp("v2o"), Eigen::MatrixXd(from_v), stats).col(0);
    out.o = apply(p.mlp("upd_o"), Eigen::MatrixXd(sum), stats).col(0);
  }

  // Variables.
  {
    Eigen::MatrixXd self = apply(p.mlp("v2v"), h.v, stats);
    if (gin) self *= 1.0 + eps("eps_v");
    const Eigen::MatrixXd e_ov = apply_scalars(p.mlp("edge_ov"), to_std(g.c), stats);
    Eigen::MatrixXd from_o(d, n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd t = out.o + e_ov.col(i);
      if (gen) t.array() += eps("eps_o2v");
      if (gcn) t *= gcn_norm(d_o, d_v[i]);
      from_o.col(i) = t;
    }
    const Eigen::MatrixXd e_cv = apply_scalars(p.mlp("edge_cv"), col_major_weights(A), stats);
    Eigen::MatrixXd from_c(d, n);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
      agg.reset();
      for (int j : A.col_indices(i)) {
        Eigen::VectorXd t = out.c.col(j) + e_cv.col(k++);
        if (gen) t.array() += eps("eps_c2v");
        agg.add(t, gcn_norm(d_c[j], d_v[i]));
      }
      count(stats, 0, A.col_count(i));
      from_c.col(i) = agg.result("variable update");
    }
    const Eigen::MatrixXd sum = (self + apply(p.mlp("o2v"), from_o, stats)) + apply(p.mlp("c2v"), from_c, stats);
    out.v = apply(p.mlp("upd_v"), sum, stats);
  }
  return out;
}

std::vector<Eigen::VectorXd> forward(const TripartiteGraph& g, const MpnnWeights& w, ForwardStats* stats) {
  w.check();
  HiddenStates h = init_embeddings(g, w, stats);
  std::vector<Eigen::VectorXd> z;
  z.reserve(static_cast<std::size_t>(w.depth));
  for (int t = 0; t < w.depth; ++t) {
    h = layer_forward(g, h, w.layers[t], w.kind, stats);
    z.push_back(apply(w.head, h.v, stats).row(0).transpose());
  }
  return z;
}

}  // namespace ipmgnn
