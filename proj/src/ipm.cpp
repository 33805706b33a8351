#include "ipmgnn/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/quad.hpp"

namespace ipmgnn {

// Every elementwise formula below is written in the exact operation order used
// by the message-passing programs in mp_programs.cpp; changing one side means
// changing the other.

void IpmConfig::check() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
    throw std::invalid_argument("step_fraction must lie in (0, 1]");
  }
  if (!(tol_mu > 0.0) || !(tol_kkt > 0.0) || !(cg_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (max_iters < 0 || cg_max_iters < 0) throw std::invalid_argument("iteration limits must be >= 0");
  if (!(alpha_cap_practical > 0.0)) throw std::invalid_argument("alpha_cap_practical must be positive");
}

std::string variant_name(Variant v) { return v == Variant::kTheoretical ? "theoretical" : "practical"; }

Variant parse_variant(const std::string& s) {
  if (s == "theoretical") return Variant::kTheoretical;
  if (s == "practical") return Variant::kPractical;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected practical or theoretical)");
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIters: return "max_iters";
    case RunStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

RunStatus parse_status(const std::string& s) {
  if (s == "converged") return RunStatus::kConverged;
  if (s == "max_iters") return RunStatus::kMaxIters;
  if (s == "numerical_failure") return RunStatus::kNumericalFailure;
  throw FormatError("unknown run status '" + s + "'");
}

namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NumericalFailure(std::string("non-finite values in ") + what);
}

void check_shapes(const LpInstance& inst, const IpmState& st) {
  if (st.x.size() != inst.n() || st.s.size() != inst.n() || st.w.size() != inst.m() ||
      st.r.size() != inst.m()) {
    throw DimensionError("IPM state does not match instance dimensions");
  }
}

}  // namespace

bool strictly_positive(const IpmState& st) {
  return (st.x.array() > 0.0).all() && (st.s.array() > 0.0).all() && (st.w.array() > 0.0).all() &&
         (st.r.array() > 0.0).all() && st.mu > 0.0;
}

double duality_measure(const Eigen::VectorXd& x, const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& r) {
  const double xs = ordered_dot(x, s);
  const double wr = ordered_dot(w, r);
  return (xs + wr) / static_cast<double>(x.size() + w.size());
}

IpmState default_init(const LpInstance& inst, const IpmConfig&) {
  IpmState st;
  st.x = Eigen::VectorXd::Ones(inst.n());
  st.s = Eigen::VectorXd::Ones(inst.n());
  st.w = Eigen::VectorXd::Ones(inst.m());
  st.r = Eigen::VectorXd::Ones(inst.m());
  st.mu = duality_measure(st.x, st.s, st.w, st.r);
  return st;
}

IpmState feasible_init_theoretical(const LpInstance& inst, const IpmConfig& cfg) {
  if (inst.orientation != Orientation::kGeq) throw InvalidInstance("feasible_init_theoretical needs GEQ form");
  constexpr double kEps = 1e-3;
  constexpr int kSteps = 240;  // 2^(240/4) = 2^60 either way
  const int n = inst.n();
  const int m = inst.m();
  const Eigen::VectorXd row_sum = inst.A.multiply(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd col_sum = inst.A.multiply_transpose(Eigen::VectorXd::Ones(m));

  // Candidate scales on a 2^(1/4) grid, the natural direction first: x grows
  // to satisfy covering rows, w shrinks to keep reduced costs positive.
  auto grid = [&](bool upward_first) {
    std::vector<double> out;
    out.reserve(2 * kSteps + 1);
    const double sign = upward_first ? 1.0 : -1.0;
    for (int k = 0; k <= kSteps; ++k) out.push_back(std::exp2(sign * k / 4.0));
    for (int k = 1; k <= kSteps; ++k) out.push_back(std::exp2(-sign * k / 4.0));
    return out;
  };

  std::vector<double> lambdas;
  for (double lam : grid(true)) {
    if (((lam * row_sum - inst.b).array() >= kEps).all()) lambdas.push_back(lam);
  }
  std::vector<double> nus;
  for (double nu : grid(false)) {
    if (((inst.c - nu * col_sum).array() >= kEps).all()) nus.push_back(nu);
  }
  if (lambdas.empty()) throw InitNotFound("no x = lambda*1 on the search grid satisfies Ax - b > 0");
  if (nus.empty()) throw InitNotFound("no w = nu*1 on the search grid satisfies c - A^T w > 0");

  for (double lam : lambdas) {
    const Eigen::VectorXd r_scaled = lam * row_sum - inst.b;
    for (double nu : nus) {
      const Eigen::VectorXd s_scaled = inst.c - nu * col_sum;
      const double xs = lam * s_scaled.sum();
      const double wr = nu * r_scaled.sum();
      const double mu0 = (xs + wr) / static_cast<double>(n + m);
      const double worst = std::min(lam * s_scaled.minCoeff(), nu * r_scaled.minCoeff());
      if (worst < cfg.gamma * mu0) continue;

      IpmState st;
      st.x = Eigen::VectorXd::Constant(n, lam);
      st.w = Eigen::VectorXd::Constant(m, nu);
      st.r = inst.A.multiply(st.x) - inst.b;
      st.s = inst.c - inst.A.multiply_transpose(st.w);
      st.mu = duality_measure(st.x, st.s, st.w, st.r);
      const double prod_min = std::min((st.x.array() * st.s.array()).minCoeff(),
                                       (st.w.array() * st.r.array()).minCoeff());
      if (strictly_positive(st) && prod_min >= cfg.gamma * st.mu) return st;
    }
  }
  throw InitNotFound("strictly feasible points exist on the grid but none is central enough");
}

Eigen::VectorXd assemble_cg_rhs(const LpInstance& inst, const IpmState& st, double sigma, double mu) {
  check_shapes(inst, st);
  const double smu = sigma * mu;
  const Eigen::VectorXd h1 = inst.A.multiply_transpose(st.w);
  Eigen::VectorXd h4(inst.n());
  for (int i = 0; i < inst.n(); ++i) {
    h4[i] = -st.x[i] + (st.x[i] / st.s[i]) * ((inst.c[i] - h1[i]) - smu / st.x[i]);
  }
  const Eigen::VectorXd h5 = inst.A.multiply(h4);
  Eigen::VectorXd p(inst.m());
  for (int j = 0; j < inst.m(); ++j) p[j] = (inst.b[j] + h5[j]) + smu / st.w[j];
  check_finite(p, "normal-equations right-hand side");
  return p;
}

Eigen::VectorXd apply_Q(const LpInstance& inst, const IpmState& st, const Eigen::VectorXd& p) {
  check_shapes(inst, st);
  if (p.size() != inst.m()) throw DimensionError("apply_Q: p length != m");
  const Eigen::VectorXd a = inst.A.multiply_transpose(p);
  Eigen::VectorXd q(inst.n());
  for (int i = 0; i < inst.n(); ++i) q[i] = (st.x[i] / st.s[i]) * a[i];
  const Eigen::VectorXd bb = inst.A.multiply(q);
  Eigen::VectorXd u(inst.m());
  for (int j = 0; j < inst.m(); ++j) u[j] = bb[j] + (st.r[j] / st.w[j]) * p[j];
  check_finite(u, "Q p");
  return u;
}

CgResult conjugate_gradient(const LpInstance& inst, const IpmState& st, double sigma, double mu,
                            const IpmConfig& cfg) {
  const int m = inst.m();
  Eigen::VectorXd p = assemble_cg_rhs(inst, st, sigma, mu);
  Eigen::VectorXd v = -p;
  CgResult res;
  res.dw = Eigen::VectorXd::Zero(m);
  const double rhs2 = ordered_dot(p, p);
  if (rhs2 == 0.0) return res;
  const double tol2 = cfg.cg_tol * cfg.cg_tol;
  const int limit = cfg.cg_limit(m);
  double vnvn = rhs2;
  for (int k = 0; k < limit; ++k) {
    const Eigen::VectorXd u = apply_Q(inst, st, p);
    const double vv = ordered_dot(v, v);
    const double pu = ordered_dot(p, u);
    if (!(pu > 0.0)) throw BreakdownError("CG breakdown: p^T Q p <= 0 (state not strictly positive?)");
    const double alpha = vv / pu;
    Eigen::VectorXd vnew(m);
    for (int j = 0; j < m; ++j) {
      res.dw[j] = res.dw[j] + alpha * p[j];
      vnew[j] = v[j] + alpha * u[j];
    }
    vnvn = ordered_dot(vnew, vnew);
    const double beta = vnvn / vv;
    v = vnew;
    for (int j = 0; j < m; ++j) p[j] = -v[j] + beta * p[j];
    res.iterations = k + 1;
    if (vnvn <= tol2 * rhs2) break;
  }
  res.residual_norm = std::sqrt(vnvn);
  check_finite(res.dw, "CG solution");
  return res;
}

IpmDirections recover_directions(const LpInstance& inst, const IpmState& st, const Eigen::VectorXd& dw,
                                 double sigma, double mu) {
  check_shapes(inst, st);
  if (dw.size() != inst.m()) throw DimensionError("recover_directions: dw length != m");
  const double smu = sigma * mu;
  Eigen::VectorXd wd(inst.m());
  for (int j = 0; j < inst.m(); ++j) wd[j] = st.w[j] + dw[j];
  const Eigen::VectorXd g1 = inst.A.multiply_transpose(wd);
  IpmDirections d;
  d.dw = dw;
  d.dx.resize(inst.n());
  d.ds.resize(inst.n());
  d.dr.resize(inst.m());
  for (int i = 0; i < inst.n(); ++i) {
    d.dx[i] = (st.x[i] / st.s[i]) * ((g1[i] - inst.c[i]) + smu / st.x[i]);
    d.ds[i] = (smu / st.x[i] - st.s[i]) - (st.s[i] / st.x[i]) * d.dx[i];
  }
  for (int j = 0; j < inst.m(); ++j) d.dr[j] = (smu / st.w[j] - st.r[j]) - (st.r[j] / st.w[j]) * dw[j];
  check_finite(d.dx, "dx");
  check_finite(d.ds, "ds");
  check_finite(d.dr, "dr");
  return d;
}

double step_length_practical(const IpmState& st, const IpmDirections& d, double cap) {
  double alpha_v = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < st.x.size(); ++i) {
    const double a = d.dx[i] * d.ds[i];
    const double b = st.x[i] * d.ds[i] + d.dx[i] * st.s[i];
    const double c = st.x[i] * st.s[i];
    alpha_v = std::min(alpha_v, quad_root(a, b, c, cap));
  }
  double alpha_c = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < st.w.size(); ++j) {
    const double a = d.dw[j] * d.dr[j];
    const double b = st.w[j] * d.dr[j] + d.dw[j] * st.r[j];
    const double c = st.w[j] * st.r[j];
    alpha_c = std::min(alpha_c, quad_root(a, b, c, cap));
  }
  return std::min(alpha_v, alpha_c);
}

double step_length_theoretical(const IpmState& st, const IpmDirections& d, double gamma) {
  const double nm = static_cast<double>(st.x.size() + st.w.size());
  const double h1 = ordered_dot(d.dx, d.ds);
  const double h2 = ordered_dot(d.dx, st.s);
  const double h3 = ordered_dot(st.x, d.ds);
  const double h4 = ordered_dot(st.x, st.s);
  const double hb1 = ordered_dot(d.dw, d.dr);
  const double hb2 = ordered_dot(d.dw, st.r);
  const double hb3 = ordered_dot(st.w, d.dr);
  const double hb4 = ordered_dot(st.w, st.r);
  const double t1 = gamma * (h1 + hb1) / nm;
  const double t2 = gamma * (((h2 + h3) + hb2) + hb3) / nm;
  const double t3 = gamma * (h4 + hb4) / nm;
  const double slack_tol = 1e-10 * std::max(1.0, t3);

  double alpha_v = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < st.x.size(); ++i) {
    const double a = d.dx[i] * d.ds[i] - t1;
    const double b = (st.x[i] * d.ds[i] + d.dx[i] * st.s[i]) - t2;
    const double c = st.x[i] * st.s[i] - t3;
    if (c < -slack_tol) throw NeighborhoodViolation("iterate outside the central-path neighborhood");
    alpha_v = std::min(alpha_v, quad_root(a, b, c, 1.0));
  }
  double alpha_c = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < st.w.size(); ++j) {
    const double a = d.dw[j] * d.dr[j] - t1;
    const double b = (st.w[j] * d.dr[j] + d.dw[j] * st.r[j]) - t2;
    const double c = st.w[j] * st.r[j] - t3;
    if (c < -slack_tol) throw NeighborhoodViolation("iterate outside the central-path neighborhood");
    alpha_c = std::min(alpha_c, quad_root(a, b, c, 1.0));
  }
  return std::min(alpha_v, alpha_c);
}

KktResiduals kkt_residuals(const LpInstance& inst, const IpmState& st) {
  check_shapes(inst, st);
  KktResiduals k;
  k.primal = (inst.A.multiply(st.x) - st.r - inst.b).lpNorm<Eigen::Infinity>();
  k.dual = (inst.A.multiply_transpose(st.w) + st.s - inst.c).lpNorm<Eigen::Infinity>();
  double comp = 0.0;
  if (st.x.size() > 0) comp = std::max(comp, (st.x.array() * st.s.array()).maxCoeff());
  if (st.w.size() > 0) comp = std::max(comp, (st.w.array() * st.r.array()).maxCoeff());
  k.complementarity = comp;
  if (inst.n() == 0 && inst.m() == 0) k.complementarity = 0.0;
  return k;
}

bool is_converged(const LpInstance& inst, const IpmState& st, const IpmConfig& cfg) {
  if (!(st.mu <= cfg.tol_mu)) return false;
  const auto k = kkt_residuals(inst, st);
  return k.primal <= cfg.tol_kkt && k.dual <= cfg.tol_kkt && k.complementarity <= cfg.tol_kkt;
}

double barrier_objective(const LpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                         double mu) {
  if (x.size() != inst.n() || r.size() != inst.m()) throw DimensionError("barrier_objective: shape mismatch");
  if ((x.array() <= 0.0).any() || (r.array() <= 0.0).any()) {
    throw DomainError("barrier_objective: log of a non-positive argument");
  }
  return inst.c.dot(x) - mu * (r.array().log().sum() + x.array().log().sum());
}

StepInfo ipm_step(const LpInstance& inst, IpmState& st, const IpmConfig& cfg, Variant variant) {
  StepInfo info;
  if (variant == Variant::kTheoretical) st.mu = duality_measure(st.x, st.s, st.w, st.r);
  const double mu = st.mu;
  const CgResult cg = conjugate_gradient(inst, st, cfg.sigma, mu, cfg);
  info.cg_iterations = cg.iterations;
  const IpmDirections d = recover_directions(inst, st, cg.dw, cfg.sigma, mu);

  double step;
  if (variant == Variant::kTheoretical) {
    step = step_length_theoretical(st, d, cfg.gamma);
  } else {
    step = cfg.step_fraction * step_length_practical(st, d, cfg.alpha_cap_practical);
  }
  for (Eigen::Index i = 0; i < st.x.size(); ++i) {
    st.x[i] = st.x[i] + step * d.dx[i];
    st.s[i] = st.s[i] + step * d.ds[i];
  }
  for (Eigen::Index j = 0; j < st.w.size(); ++j) {
    st.w[j] = st.w[j] + step * d.dw[j];
    st.r[j] = st.r[j] + step * d.dr[j];
  }
  if (variant == Variant::kTheoretical) {
    st.mu = duality_measure(st.x, st.s, st.w, st.r);
  } else {
    // Held at tol_mu once reached; pushing the target further only amplifies
    // rounding in the normal equations.
    st.mu = std::max(cfg.sigma * mu, cfg.tol_mu);
  }
  check_finite(st.x, "x");
  check_finite(st.s, "s");
  check_finite(st.w, "w");
  check_finite(st.r, "r");
  if (!strictly_positive(st)) throw NumericalFailure("iterate lost strict positivity");
  info.alpha = step;
  return info;
}

Trajectory run_from(const LpInstance& geq, IpmState start, const IpmConfig& cfg, Variant variant) {
  if (geq.orientation != Orientation::kGeq) throw InvalidInstance("run_from expects a GEQ-form instance");
  cfg.check();
  Trajectory traj;
  traj.iterates.push_back(std::move(start));
  IpmState st = traj.iterates.back();
  for (;;) {
    if (is_converged(geq, st, cfg)) {
      traj.status = RunStatus::kConverged;
      break;
    }
    if (traj.iterations >= cfg.max_iters) {
      traj.status = RunStatus::kMaxIters;
      break;
    }
    try {
      const StepInfo info = ipm_step(geq, st, cfg, variant);
      traj.alphas.push_back(info.alpha);
      traj.cg_iterations.push_back(info.cg_iterations);
    } catch (const NumericalFailure& e) {
      traj.status = RunStatus::kNumericalFailure;
      traj.message = e.what();
      break;
    }
    traj.iterates.push_back(st);
    ++traj.iterations;
  }
  return traj;
}

Trajectory run_theoretical(const LpInstance& inst, const IpmConfig& cfg) {
  require_valid(inst);
  const LpInstance geq = to_geq_form(inst);
  return run_from(geq, feasible_init_theoretical(geq, cfg), cfg, Variant::kTheoretical);
}

Trajectory run_practical(const LpInstance& inst, const IpmConfig& cfg) {
  require_valid(inst);
  const LpInstance geq = to_geq_form(inst);
  return run_from(geq, default_init(geq, cfg), cfg, Variant::kPractical);
}

Trajectory run(const LpInstance& inst, const IpmConfig& cfg, Variant variant) {
  return variant == Variant::kTheoretical ? run_theoretical(inst, cfg) : run_practical(inst, cfg);
}

}  // namespace ipmgnn
