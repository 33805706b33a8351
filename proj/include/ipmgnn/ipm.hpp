#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipmgnn/lp.hpp"

namespace ipmgnn {

// Iterate of the primal-dual method: x, s over variables, w, r over
// constraints, and the duality measure mu. All solver routines expect the
// instance in GEQ form (Ax - r = b, A^T w + s = c).
struct IpmState {
  Eigen::VectorXd x, s, w, r;
  double mu = 1.0;
};

struct IpmDirections {
  Eigen::VectorXd dx, ds, dw, dr;
};

struct IpmConfig {
  double sigma = 0.1;
  double gamma = 0.1;
  double step_fraction = 0.99;
  double tol_mu = 1e-8;
  double tol_kkt = 1e-6;
  int max_iters = 200;
  double cg_tol = 1e-10;
  int cg_max_iters = 0;  // 0 means kCgItersPerConstraint * m
  double alpha_cap_practical = 1e10;

  static constexpr int kCgItersPerConstraint = 100;

  // Throws std::invalid_argument on out-of-range fields.
  void check() const;
  int cg_limit(int m) const { return cg_max_iters > 0 ? cg_max_iters : kCgItersPerConstraint * m; }
};

enum class Variant { kTheoretical, kPractical };
enum class RunStatus { kConverged, kMaxIters, kNumericalFailure };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);
std::string status_name(RunStatus s);
RunStatus parse_status(const std::string& s);

struct Trajectory {
  std::vector<IpmState> iterates;  // includes the initial state
  std::vector<double> alphas;      // effective step applied at each iteration
  std::vector<int> cg_iterations;
  RunStatus status = RunStatus::kMaxIters;
  int iterations = 0;
  std::string message;  // failure detail, empty otherwise

  const IpmState& final_state() const { return iterates.back(); }
};

struct CgResult {
  Eigen::VectorXd dw;
  int iterations = 0;
  double residual_norm = 0.0;
};

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

double duality_measure(const Eigen::VectorXd& x, const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& r);

IpmState default_init(const LpInstance& inst, const IpmConfig& cfg);
// Throws InitNotFound when the grid search yields no strictly feasible,
// sufficiently central start.
IpmState feasible_init_theoretical(const LpInstance& inst, const IpmConfig& cfg);

Eigen::VectorXd assemble_cg_rhs(const LpInstance& inst, const IpmState& st, double sigma, double mu);
// Q p with Q = A D(s)^-1 D(x) A^T + D(w)^-1 D(r), never formed explicitly.
Eigen::VectorXd apply_Q(const LpInstance& inst, const IpmState& st, const Eigen::VectorXd& p);
CgResult conjugate_gradient(const LpInstance& inst, const IpmState& st, double sigma, double mu,
                            const IpmConfig& cfg);
IpmDirections recover_directions(const LpInstance& inst, const IpmState& st, const Eigen::VectorXd& dw,
                                 double sigma, double mu);

double step_length_practical(const IpmState& st, const IpmDirections& d, double cap = 1e10);
double step_length_theoretical(const IpmState& st, const IpmDirections& d, double gamma);

KktResiduals kkt_residuals(const LpInstance& inst, const IpmState& st);
bool is_converged(const LpInstance& inst, const IpmState& st, const IpmConfig& cfg);
double barrier_objective(const LpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& r,
                         double mu);

struct StepInfo {
  double alpha = 0.0;  // effective step multiplier applied to the directions
  int cg_iterations = 0;
};

// One iteration of the selected algorithm, in place.
StepInfo ipm_step(const LpInstance& inst, IpmState& st, const IpmConfig& cfg, Variant variant);

// Runs from the given start; the instance must already be in GEQ form.
Trajectory run_from(const LpInstance& geq, IpmState start, const IpmConfig& cfg, Variant variant);
Trajectory run_theoretical(const LpInstance& inst, const IpmConfig& cfg);
Trajectory run_practical(const LpInstance& inst, const IpmConfig& cfg);
Trajectory run(const LpInstance& inst, const IpmConfig& cfg, Variant variant);

bool strictly_positive(const IpmState& st);

}  // namespace ipmgnn
