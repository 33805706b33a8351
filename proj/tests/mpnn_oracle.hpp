#pragma once

// Dense, loop-by-loop re-statement of one MPNN layer. Shares only the MLP
// evaluation with the library; aggregation, normalisation and neighbourhoods
// are recomputed from the dense matrix.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ipmgnn/mpnn.hpp"

namespace testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd naive_softmax(const std::vector<VectorXd>& xs) {
  VectorXd num = VectorXd::Zero(xs[0].size()), den = VectorXd::Zero(xs[0].size());
  for (const auto& x : xs) {
    for (int k = 0; k < x.size(); ++k) {
      num[k] += std::exp(x[k]) * x[k];
      den[k] += std::exp(x[k]);
    }
  }
  return num.cwiseQuotient(den);
}

inline ipmgnn::HiddenStates naive_layer(const ipmgnn::TripartiteGraph& g, const ipmgnn::HiddenStates& h,
                                        const ipmgnn::LayerParams& p, ipmgnn::LayerKind kind) {
  using ipmgnn::LayerKind;
  using ipmgnn::mlp_forward;
  const MatrixXd A = g.adjacency.to_dense();
  const int n = g.n_vars, m = g.n_cons;
  const double dego = n + m;
  std::vector<double> degv(n, 1.0), degc(m, 1.0);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      if (A(j, i) != 0.0) {
        degv[i] += 1;
        degc[j] += 1;
      }
    }
  }
  auto edge = [&](const char* role, double wgt) { return mlp_forward(p.mlp(role), VectorXd::Constant(1, wgt)); };
  auto eps = [&](const char* name) { return kind == LayerKind::kGcn ? 0.0 : p.epsilon(name); };
  auto self_scale = [&](const char* name) { return kind == LayerKind::kGin ? 1.0 + eps(name) : 1.0; };
  auto msg_shift = [&](const char* name) { return kind == LayerKind::kGen ? eps(name) : 0.0; };
  auto norm = [&](double a, double b) { return kind == LayerKind::kGcn ? 1.0 / std::sqrt(a * b) : 1.0; };
  auto reduce = [&](const std::vector<VectorXd>& terms) {
    if (kind == LayerKind::kGen) return naive_softmax(terms);
    VectorXd s = VectorXd::Zero(terms[0].size());
    for (const auto& t : terms) s += t;
    return s;
  };

  ipmgnn::HiddenStates out;
  const int d = static_cast<int>(h.o.size());
  out.c.resize(d, m);
  for (int j = 0; j < m; ++j) {
    const VectorXd oterm =
        norm(dego, degc[j]) * ((h.o + edge("edge_oc", g.b[j])).array() + msg_shift("eps_o2c")).matrix();
    std::vector<VectorXd> vterms;
    for (int i = 0; i < n; ++i) {
      if (A(j, i) == 0.0) continue;
      vterms.push_back(norm(degv[i], degc[j]) *
                       ((h.v.col(i) + edge("edge_vc", A(j, i))).array() + msg_shift("eps_v2c")).matrix());
    }
    const VectorXd sum = self_scale("eps_c") * mlp_forward(p.mlp("c2c"), h.c.col(j)) +
                         mlp_forward(p.mlp("o2c"), oterm) + mlp_forward(p.mlp("v2c"), reduce(vterms));
    out.c.col(j) = mlp_forward(p.mlp("upd_c"), sum);
  }
  {
    std::vector<VectorXd> cterms, vterms;
    for (int j = 0; j < m; ++j) {
      cterms.push_back(norm(dego, degc[j]) *
                       ((out.c.col(j) + edge("edge_co", g.b[j])).array() + msg_shift("eps_c2o")).matrix());
    }
    for (int i = 0; i < n; ++i) {
      vterms.push_back(norm(dego, degv[i]) *
                       ((h.v.col(i) + edge("edge_vo", g.c[i])).array() + msg_shift("eps_v2o")).matrix());
    }
    const VectorXd sum = self_scale("eps_o") * mlp_forward(p.mlp("o2o"), h.o) +
                         mlp_forward(p.mlp("c2o"), reduce(cterms)) + mlp_forward(p.mlp("v2o"), reduce(vterms));
    out.o = mlp_forward(p.mlp("upd_o"), sum);
  }
  out.v.resize(d, n);
  for (int i = 0; i < n; ++i) {
    const VectorXd oterm =
        norm(dego, degv[i]) * ((out.o + edge("edge_ov", g.c[i])).array() + msg_shift("eps_o2v")).matrix();
    std::vector<VectorXd> cterms;
    for (int j = 0; j < m; ++j) {
      if (A(j, i) == 0.0) continue;
      cterms.push_back(norm(degc[j], degv[i]) *
                       ((out.c.col(j) + edge("edge_cv", A(j, i))).array() + msg_shift("eps_c2v")).matrix());
    }
    const VectorXd sum = self_scale("eps_v") * mlp_forward(p.mlp("v2v"), h.v.col(i)) +
                         mlp_forward(p.mlp("o2v"), oterm) + mlp_forward(p.mlp("c2v"), reduce(cterms));
    out.v.col(i) = mlp_forward(p.mlp("upd_v"), sum);
  }
  return out;
}

}  // namespace testing
