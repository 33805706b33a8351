#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmgnn/ipm.hpp"
#include "ipmgnn/lp.hpp"
#include "ipmgnn/tripartite.hpp"

namespace ipmgnn {

// Closed-form expressions evaluated per node (local steps, fused updates) or
// per edge (message maps). Channel references name their node class so the
// interpreter can reject reads that are not local to the evaluating node.
class Expr {
 public:
  enum class Op {
    kChannel,
    kConstant,
    kEdgeWeight,  // weight of the edge carrying the message
    kDegree,      // degree of the evaluating node
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kRecip,
    kSqrt,
    kMin,
    kMax,
    kRatioOrZero,     // b > 0 ? a / b : 0
    kLessEqual,       // a <= b ? 1 : 0
    kIfFirst,         // first loop iteration ? a : b, only one side evaluated
    kQuadRoot,        // quad_root(a, b, c, cap)
    kRequireAtLeast,  // a, or NeighborhoodViolation when a < b
  };

  struct Node {
    Op op = Op::kConstant;
    double value = 0.0;
    NodeClass cls = NodeClass::kVariable;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;
  };

  Expr(double constant);  // NOLINT: implicit on purpose, lets constants mix with expressions
  static Expr channel(NodeClass cls, std::string name);
  static Expr edge_weight();
  static Expr degree();
  static Expr make(Op op, std::vector<Expr> args);

  const Node& node() const { return *node_; }
  std::string to_string() const;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr expr_recip(const Expr& a);
Expr expr_sqrt(const Expr& a);
Expr expr_min(const Expr& a, const Expr& b);
Expr expr_max(const Expr& a, const Expr& b);
Expr ratio_or_zero(const Expr& num, const Expr& den);
Expr less_equal(const Expr& a, const Expr& b);
Expr if_first(const Expr& first, const Expr& otherwise);
Expr quad_root_expr(const Expr& a, const Expr& b, const Expr& c, const Expr& cap);
Expr require_at_least(const Expr& value, const Expr& floor);

inline Expr V(const std::string& name) { return Expr::channel(NodeClass::kVariable, name); }
inline Expr C(const std::string& name) { return Expr::channel(NodeClass::kConstraint, name); }
inline Expr O(const std::string& name) { return Expr::channel(NodeClass::kObjective, name); }

enum class Aggregation { kSum, kMin };

struct Assign {
  std::string target;
  Expr value;
};

// One step of a program. A message step evaluates `map` on every edge of the
// src-dst relation, aggregates per destination into `target`, then runs the
// optional fused updates on the destination nodes. A local step runs its
// assignments on every node of one class. Either kind counts as one step.
struct MpStep {
  enum class Kind { kMessage, kLocal };
  Kind kind = Kind::kLocal;
  std::string phase;  // accounting label, e.g. "cg.prologue"

  NodeClass src = NodeClass::kVariable;  // message: source class; local: node class
  NodeClass dst = NodeClass::kVariable;
  Expr map = 0.0;
  Aggregation aggregation = Aggregation::kSum;
  std::string target;
  std::vector<Assign> updates;

  static MpStep message(std::string phase, NodeClass src, NodeClass dst, Expr map, std::string target,
                        std::vector<Assign> then = {}, Aggregation agg = Aggregation::kSum);
  static MpStep local(std::string phase, NodeClass cls, std::vector<Assign> assigns);
  std::string to_string() const;
};

// Repeats `body` until `exit_when` (an objective-node expression) is nonzero
// after an iteration, or the limit is reached. The limit is
// limit_fixed + limit_per_constraint * (number of constraint nodes).
struct MpLoop {
  std::string name;
  std::vector<MpStep> body;
  Expr exit_when = 0.0;
  int limit_fixed = 0;
  int limit_per_constraint = 0;

  int limit(int n_cons) const { return limit_fixed + limit_per_constraint * n_cons; }
};

struct ChannelRef {
  NodeClass cls = NodeClass::kVariable;
  std::string name;
};

struct MpProgram {
  std::string name;
  std::vector<std::variant<MpStep, MpLoop>> items;
  std::vector<ChannelRef> inputs;
  std::vector<ChannelRef> outputs;
};

// Per-class channel storage. Objective channels have length 1.
struct NodeChannels {
  std::map<std::string, Eigen::VectorXd> var, cons, obj;

  std::map<std::string, Eigen::VectorXd>& of(NodeClass cls);
  const std::map<std::string, Eigen::VectorXd>& of(NodeClass cls) const;
  bool has(NodeClass cls, const std::string& name) const;
  // Throws UndeclaredChannel.
  const Eigen::VectorXd& get(NodeClass cls, const std::string& name) const;
  void set(NodeClass cls, const std::string& name, Eigen::VectorXd value);
  double scalar(const std::string& name) const { return get(NodeClass::kObjective, name)[0]; }
};

NodeChannels channels_from_state(const IpmState& st);
// mu is read from the objective channel when present, else recomputed.
IpmState state_from_channels(const NodeChannels& ch);

struct RunStats {
  long steps = 0;
  std::map<std::string, long> steps_by_phase;
  std::vector<int> loop_iterations;  // one entry per loop execution
};

// Static check: every read is local and was written before (or is an input).
// Throws LocalityViolation / UndeclaredChannel.
void validate_program(const MpProgram& program);

// Static step counts per phase; loop bodies are counted once.
std::map<std::string, int> count_steps(const MpProgram& program);

void run_step(const TripartiteGraph& g, NodeChannels& ch, const MpStep& step);
// Applies the program `repeat` times in place; outputs feed the next
// application under the same channel names.
void run_program(const TripartiteGraph& g, NodeChannels& ch, const MpProgram& program, int repeat = 1,
                 RunStats* stats = nullptr);

// Solves the normal equations; reads x, s / w, r / mu, writes dw on constraints.
MpProgram program_cg(const IpmConfig& cfg);
// One iteration of the theoretical algorithm; reads and writes x, s / w, r.
MpProgram program_ipm1_iteration(const IpmConfig& cfg);
// One iteration of the practical algorithm; reads and writes x, s / w, r / mu.
// mu is updated as max(sigma * mu, cfg.tol_mu), matching ipm_step.
MpProgram program_ipm2_iteration(const IpmConfig& cfg);

// The full solve loop with each iteration executed by the interpreter;
// convergence is checked outside the program.
Trajectory run_message_passing(const LpInstance& inst, const IpmConfig& cfg, Variant variant,
                               RunStats* stats = nullptr);

struct IterationDiff {
  int iteration = 0;
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  int cg_iterations_direct = 0;
  int cg_iterations_mp = 0;
};

struct EquivalenceReport {
  Variant variant = Variant::kPractical;
  std::string instance;
  int iterations_requested = 0;
  int iterations_compared = 0;
  std::vector<IterationDiff> per_iteration;
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  double tolerance = 1e-9;
  bool pass = true;
  std::string note;  // why the comparison stopped early, if it did
};

struct VerifyOptions {
  double tolerance = 1e-9;
  // Test hook: multiplies the MP x channel by (1 + perturb) after every
  // application, so the checker has something to catch.
  double perturb = 0.0;
};

EquivalenceReport verify_equivalence(const LpInstance& inst, const IpmConfig& cfg, int iters, Variant variant,
                                     const VerifyOptions& opts = {});
nlohmann::json report_to_json(const EquivalenceReport& r);

}  // namespace ipmgnn
