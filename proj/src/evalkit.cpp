#include "ipmgnn/evalkit.hpp"

#include <algorithm>
#include <cmath>

#include "ipmgnn/errors.hpp"

namespace ipmgnn {

std::vector<int> equidistant_indices(int K, int T) {
  if (T < 1) throw DomainError("equidistant sampling: T must be at least 1");
  if (T > K) {
    throw DomainError("equidistant sampling: T = " + std::to_string(T) + " exceeds trajectory length " +
                      std::to_string(K));
  }
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(T));
  for (long long k = 1; k <= T; ++k) {
    // floor(k K / T + 1/2) in integers
    int i = static_cast<int>((2 * k * K + T) / (2LL * T));
    i = std::clamp(i, 1, K);
    if (!idx.empty() && i <= idx.back()) i = idx.back() + 1;
    idx.push_back(i);
  }
  if (idx.back() != K) throw DomainError("equidistant sampling: could not place all indices");
  return idx;
}

SupervisionTargets sample_equidistant(const Trajectory& traj, int T) {
  const int K = static_cast<int>(traj.iterates.size()) - 1;
  if (K < 1) throw DomainError("equidistant sampling: trajectory has no iterates past the initial point");
  SupervisionTargets out;
  out.source_length = K;
  out.indices = equidistant_indices(K, T);
  for (int i : out.indices) out.y.push_back(traj.iterates[static_cast<std::size_t>(i)].x);
  return out;
}

namespace {

void check_batch(const StepBatch& a, const StepBatch& b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": sample counts differ");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw DimensionError(std::string(what) + ": step counts differ");
    for (std::size_t t = 0; t < a[i].size(); ++t) {
      if (a[i][t].size() != b[i][t].size()) throw DimensionError(std::string(what) + ": vector lengths differ");
    }
  }
}

// (1/N) sum_i sum_t alpha^(T-t) term(i, t)
template <typename Term>
double decayed_mean(std::size_t N, const StepBatch& preds, double alpha, Term term) {
  if (N == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto T = static_cast<int>(preds[i].size());
    for (int t = 1; t <= T; ++t) total += std::pow(alpha, T - t) * term(i, static_cast<std::size_t>(t - 1));
  }
  return total / static_cast<double>(N);
}

}  // namespace

double loss_var(const StepBatch& preds, const StepBatch& targets, double alpha) {
  check_batch(preds, targets, "loss_var");
  return decayed_mean(preds.size(), preds, alpha,
                      [&](std::size_t i, std::size_t t) { return (targets[i][t] - preds[i][t]).squaredNorm(); });
}

double loss_obj(const std::vector<Eigen::VectorXd>& costs, const StepBatch& preds, const StepBatch& targets,
                double alpha) {
  check_batch(preds, targets, "loss_obj");
  if (costs.size() != preds.size()) throw DimensionError("loss_obj: one cost vector per sample expected");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& z : preds[i]) {
      if (z.size() != costs[i].size()) throw DimensionError("loss_obj: cost length differs from prediction");
    }
  }
  return decayed_mean(preds.size(), preds, alpha, [&](std::size_t i, std::size_t t) {
    const double g = costs[i].dot(targets[i][t] - preds[i][t]);
    return g * g;
  });
}

double loss_cons(const std::vector<LpInstance>& instances, const StepBatch& preds, double alpha) {
  if (instances.size() != preds.size()) throw DimensionError("loss_cons: one instance per sample expected");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& z : preds[i]) {
      if (z.size() != instances[i].n()) throw DimensionError("loss_cons: prediction length differs from n");
    }
  }
  return decayed_mean(preds.size(), preds, alpha, [&](std::size_t i, std::size_t t) {
    return violation(instances[i], preds[i][t]).squaredNorm();
  });
}

void LossWeights::check() const {
  if (!(w_var >= 0.0) || !(w_obj >= 0.0) || !(w_cons >= 0.0)) throw DomainError("loss weights must be nonnegative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
}

double loss_total(const LossParts& parts, const LossWeights& weights) {
  return weights.w_var * parts.var + weights.w_obj * parts.obj + weights.w_cons * parts.cons;
}

double rel_obj_gap(const Eigen::VectorXd& c, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  if (c.size() != z.size() || c.size() != y.size()) throw DimensionError("rel_obj_gap: length mismatch");
  const double cy = c.dot(y);
  if (cy == 0.0) throw DivisionByZero("rel_obj_gap: reference objective is zero");
  return std::abs(c.dot(y - z) / cy) * 100.0;
}

double mean_cons_violation(const LpInstance& inst, const Eigen::VectorXd& z) {
  if (z.size() != inst.n()) throw DimensionError("mean_cons_violation: prediction length differs from n");
  if (inst.m() == 0) return 0.0;
  return violation(inst, z).lpNorm<1>() / inst.m();
}

MetricsReport evaluate_metrics(const std::vector<LpInstance>& instances, const std::vector<Eigen::VectorXd>& z_final,
                               const std::vector<Eigen::VectorXd>& y_final) {
  if (instances.size() != z_final.size() || instances.size() != y_final.size()) {
    throw DimensionError("evaluate_metrics: instance and prediction counts differ");
  }
  MetricsReport r;
  double gap_sum = 0.0;
  int gap_count = 0;
  double viol_sum = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    InstanceMetrics im;
    im.name = instances[i].name;
    try {
      im.rel_obj_gap = rel_obj_gap(instances[i].c, z_final[i], y_final[i]);
      gap_sum += *im.rel_obj_gap;
      ++gap_count;
    } catch (const DivisionByZero&) {
      ++r.gap_excluded;
    }
    im.cons_violation = mean_cons_violation(instances[i], z_final[i]);
    viol_sum += im.cons_violation;
    r.instances.push_back(std::move(im));
  }
  if (gap_count > 0) r.mean_rel_obj_gap = gap_sum / gap_count;
  if (!instances.empty()) r.mean_cons_violation = viol_sum / static_cast<double>(instances.size());
  return r;
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& im : r.instances) {
    per.push_back({{"name", im.name},
                   {"rel_obj_gap", im.rel_obj_gap ? nlohmann::json(*im.rel_obj_gap) : nlohmann::json(nullptr)},
                   {"cons_violation", im.cons_violation}});
  }
  return {{"instances", std::move(per)},
          {"mean_rel_obj_gap", r.mean_rel_obj_gap},
          {"gap_excluded", r.gap_excluded},
          {"mean_cons_violation", r.mean_cons_violation}};
}

}  // namespace ipmgnn
