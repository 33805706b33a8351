#include "ipmgnn/mp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/quad.hpp"

namespace ipmgnn {

// ---------------------------------------------------------------- expressions

Expr::Expr(double constant) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConstant;
  n->value = constant;
  node_ = std::move(n);
}

Expr Expr::channel(NodeClass cls, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::kChannel;
  n->cls = cls;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::edge_weight() {
  auto n = std::make_shared<Node>();
  n->op = Op::kEdgeWeight;
  return Expr(std::move(n));
}

Expr Expr::degree() {
  auto n = std::make_shared<Node>();
  n->op = Op::kDegree;
  return Expr(std::move(n));
}

Expr Expr::make(Op op, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  for (auto& a : args) n->args.push_back(a.node_);
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kAdd, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kSub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kMul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kDiv, {a, b}); }
Expr operator-(const Expr& a) { return Expr::make(Expr::Op::kNeg, {a}); }
Expr expr_recip(const Expr& a) { return Expr::make(Expr::Op::kRecip, {a}); }
Expr expr_sqrt(const Expr& a) { return Expr::make(Expr::Op::kSqrt, {a}); }
Expr expr_min(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kMin, {a, b}); }
Expr expr_max(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kMax, {a, b}); }
Expr ratio_or_zero(const Expr& num, const Expr& den) { return Expr::make(Expr::Op::kRatioOrZero, {num, den}); }
Expr less_equal(const Expr& a, const Expr& b) { return Expr::make(Expr::Op::kLessEqual, {a, b}); }
Expr if_first(const Expr& first, const Expr& otherwise) {
  return Expr::make(Expr::Op::kIfFirst, {first, otherwise});
}
Expr quad_root_expr(const Expr& a, const Expr& b, const Expr& c, const Expr& cap) {
  return Expr::make(Expr::Op::kQuadRoot, {a, b, c, cap});
}
Expr require_at_least(const Expr& value, const Expr& floor) {
  return Expr::make(Expr::Op::kRequireAtLeast, {value, floor});
}

namespace {

void print(std::ostream& os, const Expr::Node& n) {
  using Op = Expr::Op;
  auto arg = [&](std::size_t i) -> const Expr::Node& { return *n.args[i]; };
  auto call = [&](const char* f) {
    os << f << '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) os << ", ";
      print(os, arg(i));
    }
    os << ')';
  };
  auto infix = [&](const char* sym) {
    os << '(';
    print(os, arg(0));
    os << ' ' << sym << ' ';
    print(os, arg(1));
    os << ')';
  };
  switch (n.op) {
    case Op::kChannel: os << node_class_tag(n.cls) << '.' << n.name; break;
    case Op::kConstant: os << n.value; break;
    case Op::kEdgeWeight: os << "edge"; break;
    case Op::kDegree: os << "deg"; break;
    case Op::kAdd: infix("+"); break;
    case Op::kSub: infix("-"); break;
    case Op::kMul: infix("*"); break;
    case Op::kDiv: infix("/"); break;
    case Op::kNeg:
      os << '-';
      print(os, arg(0));
      break;
    case Op::kRecip: call("recip"); break;
    case Op::kSqrt: call("sqrt"); break;
    case Op::kMin: call("min"); break;
    case Op::kMax: call("max"); break;
    case Op::kRatioOrZero: call("ratio_or_zero"); break;
    case Op::kLessEqual: infix("<="); break;
    case Op::kIfFirst: call("if_first"); break;
    case Op::kQuadRoot: call("quad_root"); break;
    case Op::kRequireAtLeast: call("require_at_least"); break;
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(os, *node_);
  return os.str();
}

// ---------------------------------------------------------------- steps

MpStep MpStep::message(std::string phase, NodeClass src, NodeClass dst, Expr map, std::string target,
                       std::vector<Assign> then, Aggregation agg) {
  MpStep s;
  s.kind = Kind::kMessage;
  s.phase = std::move(phase);
  s.src = src;
  s.dst = dst;
  s.map = std::move(map);
  s.aggregation = agg;
  s.target = std::move(target);
  s.updates = std::move(then);
  return s;
}

MpStep MpStep::local(std::string phase, NodeClass cls, std::vector<Assign> assigns) {
  MpStep s;
  s.kind = Kind::kLocal;
  s.phase = std::move(phase);
  s.src = cls;
  s.dst = cls;
  s.updates = std::move(assigns);
  return s;
}

std::string MpStep::to_string() const {
  std::ostringstream os;
  if (kind == Kind::kMessage) {
    os << node_class_tag(src) << "->" << node_class_tag(dst) << ' ' << target << " = "
       << (aggregation == Aggregation::kSum ? "sum" : "min") << '(' << map.to_string() << ')';
    if (!updates.empty()) os << "; then";
  } else {
    os << "local " << node_class_tag(src) << ':';
  }
  for (const auto& a : updates) os << ' ' << a.target << " = " << a.value.to_string() << ';';
  return os.str();
}

// ---------------------------------------------------------------- channels

std::map<std::string, Eigen::VectorXd>& NodeChannels::of(NodeClass cls) {
  switch (cls) {
    case NodeClass::kVariable: return var;
    case NodeClass::kConstraint: return cons;
    case NodeClass::kObjective: return obj;
  }
  return obj;
}

const std::map<std::string, Eigen::VectorXd>& NodeChannels::of(NodeClass cls) const {
  return const_cast<NodeChannels*>(this)->of(cls);
}

bool NodeChannels::has(NodeClass cls, const std::string& name) const { return of(cls).count(name) > 0; }

const Eigen::VectorXd& NodeChannels::get(NodeClass cls, const std::string& name) const {
  const auto& m = of(cls);
  const auto it = m.find(name);
  if (it == m.end()) {
    throw UndeclaredChannel("read of undeclared " + node_class_name(cls) + " channel '" + name + "'");
  }
  return it->second;
}

void NodeChannels::set(NodeClass cls, const std::string& name, Eigen::VectorXd value) {
  of(cls)[name] = std::move(value);
}

NodeChannels channels_from_state(const IpmState& st) {
  NodeChannels ch;
  ch.set(NodeClass::kVariable, "x", st.x);
  ch.set(NodeClass::kVariable, "s", st.s);
  ch.set(NodeClass::kConstraint, "w", st.w);
  ch.set(NodeClass::kConstraint, "r", st.r);
  ch.set(NodeClass::kObjective, "mu", Eigen::VectorXd::Constant(1, st.mu));
  return ch;
}

IpmState state_from_channels(const NodeChannels& ch) {
  IpmState st;
  st.x = ch.get(NodeClass::kVariable, "x");
  st.s = ch.get(NodeClass::kVariable, "s");
  st.w = ch.get(NodeClass::kConstraint, "w");
  st.r = ch.get(NodeClass::kConstraint, "r");
  st.mu = ch.has(NodeClass::kObjective, "mu") ? ch.scalar("mu") : duality_measure(st.x, st.s, st.w, st.r);
  return st;
}

// ---------------------------------------------------------------- static checks

namespace {

bool connected(NodeClass a, NodeClass b) { return a != b; }

struct Avail {
  std::set<std::string> sets[3];
  std::set<std::string>& of(NodeClass c) { return sets[static_cast<int>(c)]; }
};

void check_expr(const Expr::Node& n, NodeClass cls, bool in_map, bool first, Avail& avail, const std::string& where) {
  using Op = Expr::Op;
  switch (n.op) {
    case Op::kChannel:
      if (n.cls != cls) {
        throw LocalityViolation(where + ": reads " + node_class_name(n.cls) + " channel '" + n.name + "' on " +
                                node_class_name(cls) + " nodes");
      }
      if (!avail.of(cls).count(n.name)) {
        throw UndeclaredChannel(where + ": " + node_class_name(cls) + " channel '" + n.name +
                                "' is read before it is written");
      }
      return;
    case Op::kEdgeWeight:
      if (!in_map) throw LocalityViolation(where + ": edge weight used outside a message map");
      return;
    case Op::kIfFirst:
      check_expr(*n.args[first ? 0 : 1], cls, in_map, first, avail, where);
      return;
    default:
      for (const auto& a : n.args) check_expr(*a, cls, in_map, first, avail, where);
  }
}

void check_step(const MpStep& s, bool first, Avail& avail) {
  const std::string where = "step '" + s.to_string() + "'";
  if (s.kind == MpStep::Kind::kMessage) {
    if (!connected(s.src, s.dst)) {
      throw LocalityViolation(where + ": no edges between " + node_class_name(s.src) + " and " +
                              node_class_name(s.dst) + " nodes");
    }
    check_expr(s.map.node(), s.src, true, first, avail, where);
    avail.of(s.dst).insert(s.target);
  }
  for (const auto& a : s.updates) {
    check_expr(a.value.node(), s.dst, false, first, avail, where);
    avail.of(s.dst).insert(a.target);
  }
}

}  // namespace

void validate_program(const MpProgram& program) {
  Avail avail;
  for (const auto& in : program.inputs) avail.of(in.cls).insert(in.name);
  for (const auto& item : program.items) {
    if (const auto* s = std::get_if<MpStep>(&item)) {
      check_step(*s, true, avail);
      continue;
    }
    const auto& loop = std::get<MpLoop>(item);
    for (const auto& s : loop.body) check_step(s, true, avail);
    check_expr(loop.exit_when.node(), NodeClass::kObjective, false, true, avail, "exit test of " + loop.name);
    for (const auto& s : loop.body) check_step(s, false, avail);
    check_expr(loop.exit_when.node(), NodeClass::kObjective, false, false, avail, "exit test of " + loop.name);
  }
  for (const auto& out : program.outputs) {
    if (!avail.of(out.cls).count(out.name)) {
      throw UndeclaredChannel("program " + program.name + " never writes output " + node_class_name(out.cls) +
                              " channel '" + out.name + "'");
    }
  }
}

std::map<std::string, int> count_steps(const MpProgram& program) {
  std::map<std::string, int> out;
  for (const auto& item : program.items) {
    if (const auto* s = std::get_if<MpStep>(&item)) {
      ++out[s->phase];
    } else {
      for (const auto& s2 : std::get<MpLoop>(item).body) ++out[s2.phase];
    }
  }
  return out;
}

// ---------------------------------------------------------------- interpreter

namespace {

using Vec = std::vector<double>;

// Edges of one relation grouped by destination; within a destination the
// sources are in ascending index order, which fixes the summation order.
struct EdgeList {
  std::vector<int> src;
  std::vector<double> weight;
  std::vector<int> seg{0};
};

EdgeList build_edges(const TripartiteGraph& g, NodeClass src, NodeClass dst) {
  EdgeList e;
  const SparseMatrix& A = g.adjacency;
  auto close = [&] { e.seg.push_back(static_cast<int>(e.src.size())); };
  if (src == NodeClass::kConstraint && dst == NodeClass::kVariable) {
    for (int i = 0; i < g.n_vars; ++i) {
      const auto rows = A.col_indices(i);
      const auto vals = A.col_values(i);
      e.src.insert(e.src.end(), rows.begin(), rows.end());
      e.weight.insert(e.weight.end(), vals.begin(), vals.end());
      close();
    }
  } else if (src == NodeClass::kVariable && dst == NodeClass::kConstraint) {
    for (int j = 0; j < g.n_cons; ++j) {
      const auto cols = A.row_indices(j);
      const auto vals = A.row_values(j);
      e.src.insert(e.src.end(), cols.begin(), cols.end());
      e.weight.insert(e.weight.end(), vals.begin(), vals.end());
      close();
    }
  } else if (src == NodeClass::kObjective) {
    const Eigen::VectorXd& w = dst == NodeClass::kVariable ? g.c : g.b;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      e.src.push_back(0);
      e.weight.push_back(w[k]);
      close();
    }
  } else if (dst == NodeClass::kObjective) {
    const Eigen::VectorXd& w = src == NodeClass::kVariable ? g.c : g.b;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      e.src.push_back(static_cast<int>(k));
      e.weight.push_back(w[k]);
    }
    close();
  } else {
    throw LocalityViolation("no edges between " + node_class_name(src) + " and " + node_class_name(dst) + " nodes");
  }
  return e;
}

struct EvalCtx {
  const TripartiteGraph& g;
  const NodeChannels& ch;
  NodeClass cls;
  std::size_t lanes;
  const std::vector<int>* gather;      // lane -> node of class cls; identity when null
  const std::vector<double>* weights;  // message maps only
  bool first;
  const MpStep* step;

  int node_of(std::size_t lane) const { return gather ? (*gather)[lane] : static_cast<int>(lane); }
  std::string where() const { return step ? "step '" + step->to_string() + "'" : "loop exit test"; }
};

Vec eval(const Expr::Node& n, const EvalCtx& c) {
  using Op = Expr::Op;
  const std::size_t L = c.lanes;
  auto unary = [&](auto f) {
    Vec a = eval(*n.args[0], c);
    for (double& v : a) v = f(v);
    return a;
  };
  auto binary = [&](auto f) {
    Vec a = eval(*n.args[0], c);
    const Vec b = eval(*n.args[1], c);
    for (std::size_t l = 0; l < L; ++l) a[l] = f(a[l], b[l]);
    return a;
  };
  switch (n.op) {
    case Op::kChannel: {
      if (n.cls != c.cls) {
        throw LocalityViolation(c.where() + ": reads " + node_class_name(n.cls) + " channel '" + n.name + "' on " +
                                node_class_name(c.cls) + " nodes");
      }
      const Eigen::VectorXd& src = c.ch.get(n.cls, n.name);
      if (src.size() != c.g.node_count(n.cls)) {
        throw DimensionError(c.where() + ": channel '" + n.name + "' has the wrong length");
      }
      Vec out(L);
      for (std::size_t l = 0; l < L; ++l) out[l] = src[c.node_of(l)];
      return out;
    }
    case Op::kConstant: return Vec(L, n.value);
    case Op::kEdgeWeight:
      if (!c.weights) throw LocalityViolation(c.where() + ": edge weight used outside a message map");
      return *c.weights;
    case Op::kDegree: {
      Vec out(L);
      for (std::size_t l = 0; l < L; ++l) out[l] = static_cast<double>(degree(c.g, c.cls, c.node_of(l)));
      return out;
    }
    case Op::kAdd: return binary([](double a, double b) { return a + b; });
    case Op::kSub: return binary([](double a, double b) { return a - b; });
    case Op::kMul: return binary([](double a, double b) { return a * b; });
    case Op::kDiv: return binary([](double a, double b) { return a / b; });
    case Op::kNeg: return unary([](double a) { return -a; });
    case Op::kRecip: return unary([](double a) { return 1.0 / a; });
    case Op::kSqrt: return unary([](double a) { return std::sqrt(a); });
    case Op::kMin: return binary([](double a, double b) { return std::min(a, b); });
    case Op::kMax: return binary([](double a, double b) { return std::max(a, b); });
    case Op::kRatioOrZero: return binary([](double a, double b) { return b > 0.0 ? a / b : 0.0; });
    case Op::kLessEqual: return binary([](double a, double b) { return a <= b ? 1.0 : 0.0; });
    case Op::kIfFirst: return eval(*n.args[c.first ? 0 : 1], c);
    case Op::kQuadRoot: {
      Vec a = eval(*n.args[0], c);
      const Vec b = eval(*n.args[1], c);
      const Vec cc = eval(*n.args[2], c);
      const Vec cap = eval(*n.args[3], c);
      for (std::size_t l = 0; l < L; ++l) a[l] = quad_root(a[l], b[l], cc[l], cap[l]);
      return a;
    }
    case Op::kRequireAtLeast: {
      Vec a = eval(*n.args[0], c);
      const Vec lo = eval(*n.args[1], c);
      for (std::size_t l = 0; l < L; ++l) {
        if (a[l] < lo[l]) throw NeighborhoodViolation("iterate outside the central-path neighborhood");
      }
      return a;
    }
  }
  return Vec(L, 0.0);
}

Eigen::VectorXd to_vector(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_finite(const Eigen::VectorXd& v, NodeClass cls, const std::string& name, const MpStep& step) {
  if (!v.allFinite()) {
    throw NumericalFailure("non-finite value in " + node_class_name(cls) + " channel '" + name + "' after step '" +
                           step.to_string() + "'");
  }
}

class Interpreter {
 public:
  explicit Interpreter(const TripartiteGraph& g) : g_(g) {}

  void step(NodeChannels& ch, const MpStep& s, bool first) {
    if (s.kind == MpStep::Kind::kMessage) {
      const EdgeList& e = edges(s.src, s.dst);
      const EvalCtx ctx{g_, ch, s.src, e.src.size(), &e.src, &e.weight, first, &s};
      const Vec vals = eval(s.map.node(), ctx);
      const int nd = g_.node_count(s.dst);
      Eigen::VectorXd agg(nd);
      for (int d = 0; d < nd; ++d) {
        double acc = s.aggregation == Aggregation::kSum ? 0.0 : std::numeric_limits<double>::infinity();
        for (int k = e.seg[static_cast<std::size_t>(d)]; k < e.seg[static_cast<std::size_t>(d) + 1]; ++k) {
          if (s.aggregation == Aggregation::kSum) {
            acc += vals[static_cast<std::size_t>(k)];
          } else {
            acc = std::min(acc, vals[static_cast<std::size_t>(k)]);
          }
        }
        agg[d] = acc;
      }
      require_finite(agg, s.dst, s.target, s);
      ch.set(s.dst, s.target, std::move(agg));
    }
    const auto lanes = static_cast<std::size_t>(g_.node_count(s.dst));
    for (const auto& a : s.updates) {
      const EvalCtx ctx{g_, ch, s.dst, lanes, nullptr, nullptr, first, &s};
      Eigen::VectorXd v = to_vector(eval(a.value.node(), ctx));
      require_finite(v, s.dst, a.target, s);
      ch.set(s.dst, a.target, std::move(v));
    }
  }

  void program(NodeChannels& ch, const MpProgram& p, RunStats* stats) {
    auto count = [&](const MpStep& s) {
      if (!stats) return;
      ++stats->steps;
      ++stats->steps_by_phase[s.phase];
    };
    for (const auto& item : p.items) {
      if (const auto* s = std::get_if<MpStep>(&item)) {
        step(ch, *s, true);
        count(*s);
        continue;
      }
      const auto& loop = std::get<MpLoop>(item);
      const int limit = loop.limit(g_.n_cons);
      int done = 0;
      for (int k = 0; k < limit; ++k) {
        for (const auto& s : loop.body) {
          step(ch, s, k == 0);
          count(s);
        }
        done = k + 1;
        const EvalCtx ctx{g_, ch, NodeClass::kObjective, 1, nullptr, nullptr, k == 0, nullptr};
        if (eval(loop.exit_when.node(), ctx)[0] != 0.0) break;
      }
      if (stats) stats->loop_iterations.push_back(done);
    }
  }

 private:
  const EdgeList& edges(NodeClass src, NodeClass dst) {
    const int key = static_cast<int>(src) * 3 + static_cast<int>(dst);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, build_edges(g_, src, dst)).first;
    return it->second;
  }

  const TripartiteGraph& g_;
  std::map<int, EdgeList> cache_;
};

}  // namespace

void run_step(const TripartiteGraph& g, NodeChannels& ch, const MpStep& step) {
  Interpreter(g).step(ch, step, true);
}

void run_program(const TripartiteGraph& g, NodeChannels& ch, const MpProgram& program, int repeat, RunStats* stats) {
  if (repeat < 0) throw std::invalid_argument("run_program: repeat must be >= 0");
  validate_program(program);
  for (const auto& in : program.inputs) {
    const Eigen::VectorXd& v = ch.get(in.cls, in.name);
    if (v.size() != g.node_count(in.cls)) {
      throw DimensionError("input " + node_class_name(in.cls) + " channel '" + in.name + "' has the wrong length");
    }
  }
  Interpreter interp(g);
  for (int k = 0; k < repeat; ++k) interp.program(ch, program, stats);
}

}  // namespace ipmgnn
