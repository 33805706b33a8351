#pragma once

// Helpers shared by the test executables: small instance builders and
// oracles that do not go through the code under test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipmgnn/ipm.hpp"
#include "ipmgnn/lp.hpp"
#include "ipmgnn/rng.hpp"

namespace testing {

using ipmgnn::LpInstance;
using ipmgnn::Orientation;

inline LpInstance dense_instance(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                 Orientation o = Orientation::kGeq) {
  std::vector<ipmgnn::Triplet> t;
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) t.push_back({i, j, A(i, j)});
    }
  }
  LpInstance inst;
  inst.A = ipmgnn::SparseMatrix(static_cast<int>(A.rows()), static_cast<int>(A.cols()), std::move(t));
  inst.b = b;
  inst.c = c;
  inst.orientation = o;
  inst.name = "dense";
  return inst;
}

// Minimum of c'x over {x >= 0, Ax >= b} (or <= b) by enumerating every
// choice of n active constraints among the m rows and n bounds. Only for
// tiny problems with a bounded optimum.
inline std::optional<double> vertex_enumeration_min(const LpInstance& inst) {
  const int n = inst.n();
  const int m = inst.m();
  const Eigen::MatrixXd A = inst.A.to_dense();
  const double sign = inst.orientation == Orientation::kGeq ? 1.0 : -1.0;
  // Rows of G x >= h: sign*A x >= sign*b, then I x >= 0.
  Eigen::MatrixXd G(m + n, n);
  Eigen::VectorXd h(m + n);
  G.topRows(m) = sign * A;
  h.head(m) = sign * inst.b;
  G.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  h.tail(n).setZero();
  const int total = m + n;
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::vector<bool> mask(static_cast<std::size_t>(total), false);
  std::fill(mask.begin(), mask.begin() + n, true);
  do {
    int k = 0;
    for (int r = 0; r < total; ++r) {
      if (mask[r]) pick[k++] = r;
    }
    Eigen::MatrixXd S(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      S.row(i) = G.row(pick[i]);
      rhs[i] = h[pick[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    if (((G * x - h).array() < -1e-9).any()) continue;
    const double v = inst.c.dot(x);
    if (!best || v < *best) best = v;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

// Q = A D(s)^-1 D(x) A^T + D(w)^-1 D(r), formed densely.
inline Eigen::MatrixXd dense_Q(const LpInstance& inst, const ipmgnn::IpmState& st) {
  const Eigen::MatrixXd A = inst.A.to_dense();
  const Eigen::VectorXd d = st.x.cwiseQuotient(st.s);
  Eigen::MatrixXd Q = A * d.asDiagonal() * A.transpose();
  Q.diagonal() += st.r.cwiseQuotient(st.w);
  return Q;
}

inline ipmgnn::IpmState random_positive_state(int n, int m, ipmgnn::Rng& rng, double lo = 0.1, double hi = 10.0) {
  ipmgnn::IpmState st;
  auto fill = [&](int k) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v[i] = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    return v;
  };
  st.x = fill(n);
  st.s = fill(n);
  st.w = fill(m);
  st.r = fill(m);
  st.mu = ipmgnn::duality_measure(st.x, st.s, st.w, st.r);
  return st;
}

// Relabels variables by pv (new index of old variable i is pv[i]) and
// constraints by pc.
inline LpInstance permute_instance(const LpInstance& inst, const std::vector<int>& pv, const std::vector<int>& pc) {
  std::vector<ipmgnn::Triplet> t;
  for (const auto& e : inst.A.entries()) t.push_back({pc[e.row], pv[e.col], e.value});
  LpInstance out = inst;
  out.A = ipmgnn::SparseMatrix(inst.m(), inst.n(), std::move(t));
  for (int i = 0; i < inst.n(); ++i) out.c[pv[i]] = inst.c[i];
  for (int j = 0; j < inst.m(); ++j) out.b[pc[j]] = inst.b[j];
  return out;
}

inline std::vector<int> random_permutation(int n, ipmgnn::Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

// Random covering LP min c'x, Ax >= b, with positive data: bounded below,
// strictly feasible for large x, and with a strictly feasible dual.
inline LpInstance random_covering_lp(int n, int m, ipmgnn::Rng& rng) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform01() < 0.7) A(i, j) = rng.uniform(0.2, 2.0);
    }
    if (A.row(i).isZero()) A(i, rng.uniform_int(0, n - 1)) = rng.uniform(0.2, 2.0);
  }
  for (int j = 0; j < n; ++j) {
    if (A.col(j).isZero()) A(rng.uniform_int(0, m - 1), j) = rng.uniform(0.2, 2.0);
  }
  Eigen::VectorXd b(m), c(n);
  for (int i = 0; i < m; ++i) b[i] = rng.uniform(0.5, 2.0);
  for (int j = 0; j < n; ++j) c[j] = rng.uniform(0.5, 2.0);
  return dense_instance(A, b, c);
}

// Random packing LP: max v'x s.t. Ax <= b, stored as min -v'x.
inline LpInstance random_packing_lp(int n, int m, ipmgnn::Rng& rng) {
  LpInstance inst = random_covering_lp(n, m, rng);
  inst.orientation = Orientation::kLeq;
  inst.c = -inst.c;
  return inst;
}

// 20 covering and packing LPs with n, m <= 4.
inline std::vector<LpInstance> tiny_lps() {
  ipmgnn::Rng rng(2024);
  std::vector<LpInstance> out;
  for (int k = 0; k < 20; ++k) {
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    const int m = static_cast<int>(rng.uniform_int(1, 4));
    out.push_back(k % 2 == 0 ? random_covering_lp(n, m, rng) : random_packing_lp(n, m, rng));
    out.back().name = "tiny" + std::to_string(k);
  }
  return out;
}

}  // namespace testing
