#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmgnn/ipm.hpp"
#include "ipmgnn/lp.hpp"

namespace ipmgnn {

// 1-based iterate indices round(k K / T), k = 1..T, rounding half up,
// clamped to [1, K]; a collision moves to the next unused index. The last
// index is always K. Throws DomainError unless 1 <= T <= K.
std::vector<int> equidistant_indices(int K, int T);

struct SupervisionTargets {
  int source_length = 0;     // K, iterates after the initial one
  std::vector<int> indices;  // 1-based into the post-initial iterates
  std::vector<Eigen::VectorXd> y;
};

SupervisionTargets sample_equidistant(const Trajectory& traj, int T);

// preds[i][t] / targets[i][t]: sample i, step t + 1.
using StepBatch = std::vector<std::vector<Eigen::VectorXd>>;

// (1/N) sum_i sum_t alpha^(T-t) ||y_i^t - z_i^t||^2
double loss_var(const StepBatch& preds, const StepBatch& targets, double alpha);
// (1/N) sum_i sum_t alpha^(T-t) (c_i' (y_i^t - z_i^t))^2
double loss_obj(const std::vector<Eigen::VectorXd>& costs, const StepBatch& preds, const StepBatch& targets,
                double alpha);
// (1/N) sum_i sum_t alpha^(T-t) ||violation(I_i, z_i^t)||^2
double loss_cons(const std::vector<LpInstance>& instances, const StepBatch& preds, double alpha);

struct LossParts {
  double var = 0.0;
  double obj = 0.0;
  double cons = 0.0;
};

struct LossWeights {
  double w_var = 1.0;
  double w_obj = 0.0;
  double w_cons = 0.0;
  double alpha = 1.0;

  void check() const;  // throws DomainError
};

double loss_total(const LossParts& parts, const LossWeights& weights);

// |c'(y - z) / c'y| * 100. Throws DivisionByZero when c'y = 0.
double rel_obj_gap(const Eigen::VectorXd& c, const Eigen::VectorXd& z, const Eigen::VectorXd& y);
// ||violation(I, z)||_1 / m
double mean_cons_violation(const LpInstance& inst, const Eigen::VectorXd& z);

struct InstanceMetrics {
  std::string name;
  std::optional<double> rel_obj_gap;  // empty when c'y = 0
  double cons_violation = 0.0;
};

struct MetricsReport {
  std::vector<InstanceMetrics> instances;
  double mean_rel_obj_gap = 0.0;  // over instances with a defined gap
  int gap_excluded = 0;
  double mean_cons_violation = 0.0;
};

// z_final / y_final per instance, in the same order as `instances`.
MetricsReport evaluate_metrics(const std::vector<LpInstance>& instances, const std::vector<Eigen::VectorXd>& z_final,
                               const std::vector<Eigen::VectorXd>& y_final);
nlohmann::json metrics_to_json(const MetricsReport& r);

}  // namespace ipmgnn
