#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmgnn/sparse.hpp"

namespace ipmgnn {

// Row sense: kLeq means A_j x <= b_j, kGeq means A_j x >= b_j. Variables are
// always x >= 0.
enum class Orientation { kLeq, kGeq };

struct LpInstance {
  SparseMatrix A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Orientation orientation = Orientation::kGeq;
  std::string name;
  nlohmann::json provenance = nlohmann::json::object();

  int m() const { return A.rows(); }
  int n() const { return A.cols(); }
};

struct Finding {
  std::string kind;  // "dimension", "nonfinite", "empty_row", "empty_column", "empty"
  std::string detail;
};

std::vector<Finding> validate(const LpInstance& inst);
// Throws InvalidInstance carrying the first finding when validate is not empty.
void require_valid(const LpInstance& inst);

double evaluate_objective(const LpInstance& inst, const Eigen::VectorXd& x);
// Ax - b, independent of orientation.
Eigen::VectorXd constraint_residuals(const LpInstance& inst, const Eigen::VectorXd& x);
// Oriented ReLU of the residual; always elementwise >= 0.
Eigen::VectorXd violation(const LpInstance& inst, const Eigen::VectorXd& x);
LpInstance to_geq_form(const LpInstance& inst);

std::string orientation_name(Orientation o);
Orientation parse_orientation(const std::string& s);

}  // namespace ipmgnn
