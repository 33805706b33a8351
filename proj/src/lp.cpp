#include "ipmgnn/lp.hpp"

#include <cmath>

#include "ipmgnn/errors.hpp"

namespace ipmgnn {

std::vector<Finding> validate(const LpInstance& inst) {
  std::vector<Finding> out;
  const int m = inst.m();
  const int n = inst.n();
  if (m < 1 || n < 1) {
    out.push_back({"empty", "instance needs m >= 1 and n >= 1, got m=" + std::to_string(m) +
                                ", n=" + std::to_string(n)});
  }
  if (inst.b.size() != m) {
    out.push_back({"dimension", "b has length " + std::to_string(inst.b.size()) +
                                    ", expected m=" + std::to_string(m)});
  }
  if (inst.c.size() != n) {
    out.push_back({"dimension", "c has length " + std::to_string(inst.c.size()) +
                                    ", expected n=" + std::to_string(n)});
  }
  if (!inst.b.allFinite()) out.push_back({"nonfinite", "b contains a non-finite value"});
  if (!inst.c.allFinite()) out.push_back({"nonfinite", "c contains a non-finite value"});
  for (int j = 0; j < m; ++j) {
    if (inst.A.row_count(j) == 0) out.push_back({"empty_row", "row " + std::to_string(j) + " has no nonzero"});
  }
  for (int i = 0; i < n; ++i) {
    if (inst.A.col_count(i) == 0) {
      out.push_back({"empty_column", "column " + std::to_string(i) + " has no nonzero"});
    }
  }
  return out;
}

void require_valid(const LpInstance& inst) {
  const auto findings = validate(inst);
  if (!findings.empty()) {
    std::string msg = "invalid instance";
    if (!inst.name.empty()) msg += " '" + inst.name + "'";
    msg += ": " + findings.front().detail;
    if (findings.size() > 1) msg += " (+" + std::to_string(findings.size() - 1) + " more)";
    throw InvalidInstance(msg);
  }
}

double evaluate_objective(const LpInstance& inst, const Eigen::VectorXd& x) {
  if (x.size() != inst.c.size()) throw DimensionError("evaluate_objective: x length != n");
  return inst.c.dot(x);
}

Eigen::VectorXd constraint_residuals(const LpInstance& inst, const Eigen::VectorXd& x) {
  if (x.size() != inst.n()) throw DimensionError("constraint_residuals: x length != n");
  if (inst.b.size() != inst.m()) throw DimensionError("constraint_residuals: b length != m");
  return inst.A.multiply(x) - inst.b;
}

Eigen::VectorXd violation(const LpInstance& inst, const Eigen::VectorXd& x) {
  Eigen::VectorXd res = constraint_residuals(inst, x);
  if (inst.orientation == Orientation::kGeq) res = -res;
  return res.cwiseMax(0.0);
}

LpInstance to_geq_form(const LpInstance& inst) {
  if (inst.orientation == Orientation::kGeq) return inst;
  LpInstance out = inst;
  out.A = inst.A.negated();
  out.b = -inst.b;
  out.orientation = Orientation::kGeq;
  return out;
}

std::string orientation_name(Orientation o) { return o == Orientation::kLeq ? "leq" : "geq"; }

Orientation parse_orientation(const std::string& s) {
  if (s == "leq") return Orientation::kLeq;
  if (s == "geq") return Orientation::kGeq;
  throw FormatError("unknown orientation '" + s + "' (expected leq or geq)");
}

}  // namespace ipmgnn
