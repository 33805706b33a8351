#include <algorithm>
#include <cmath>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/mp.hpp"

namespace ipmgnn {

// The programs below mirror ipm.cpp operation for operation (same operand
// order, same association), so the interpreter reproduces the direct solver
// bit for bit on IEEE doubles compiled without contraction.

namespace {

constexpr NodeClass kV = NodeClass::kVariable;
constexpr NodeClass kC = NodeClass::kConstraint;
constexpr NodeClass kO = NodeClass::kObjective;

const char* const kPrologue = "cg.prologue";
const char* const kIteration = "cg.iteration";
const char* const kBody = "ipm.body";

using Items = std::vector<std::variant<MpStep, MpLoop>>;

MpStep msg(const char* phase, NodeClass src, NodeClass dst, Expr map, std::string target,
           std::vector<Assign> then = {}, Aggregation agg = Aggregation::kSum) {
  return MpStep::message(phase, src, dst, std::move(map), std::move(target), std::move(then), agg);
}

MpStep local(const char* phase, NodeClass cls, std::vector<Assign> assigns) {
  return MpStep::local(phase, cls, std::move(assigns));
}

const Expr kEdge = Expr::edge_weight();

void append_cg(Items& items, const IpmConfig& cfg) {
  const Expr sigma = cfg.sigma;

  // p = b - Ax + sigma mu / w + A D(s)^-1 D(x) (c - A^T w - sigma mu / x)
  items.push_back(msg(kPrologue, kC, kV, C("w") * kEdge, "h1"));
  items.push_back(msg(kPrologue, kO, kV, O("mu"), "h2"));
  items.push_back(msg(kPrologue, kO, kV, kEdge, "h3"));
  items.push_back(local(kPrologue, kV,
                        {{"h4", -V("x") + (V("x") / V("s")) * ((V("h3") - V("h1")) - (sigma * V("h2")) / V("x"))}}));
  items.push_back(msg(kPrologue, kV, kC, V("h4") * kEdge, "h5"));
  items.push_back(msg(kPrologue, kO, kC, O("mu"), "h6"));
  items.push_back(msg(kPrologue, kO, kC, kEdge, "h7"));
  items.push_back(local(kPrologue, kC,
                        {{"p", (C("h7") + C("h5")) + (sigma * C("h6")) / C("w")},
                         {"v", -C("p")},
                         {"dw", 0.0}}));

  MpLoop loop;
  loop.name = "cg";
  auto& body = loop.body;
  // u = Q p
  body.push_back(msg(kIteration, kC, kV, C("p") * kEdge, "a", {{"q", (V("x") / V("s")) * V("a")}}));
  body.push_back(msg(kIteration, kV, kC, V("q") * kEdge, "bb", {{"u", C("bb") + (C("r") / C("w")) * C("p")}}));
  // alpha = v'v / p'u; the first v'v is also ||p_0||^2 for the exit test
  body.push_back(msg(kIteration, kC, kO, C("v") * C("v"), "vv", {{"rhs2", if_first(O("vv"), O("rhs2"))}}));
  body.push_back(msg(kIteration, kC, kO, C("p") * C("u"), "pu", {{"alpha", ratio_or_zero(O("vv"), O("pu"))}}));
  body.push_back(msg(kIteration, kO, kC, O("alpha"), "ha", {{"dw", C("dw") + C("ha") * C("p")}}));
  body.push_back(msg(kIteration, kO, kC, O("alpha"), "ha", {{"vnew", C("v") + C("ha") * C("u")}}));
  body.push_back(msg(kIteration, kC, kO, C("vnew") * C("vnew"), "vnvn"));
  body.push_back(msg(kIteration, kC, kO, C("v") * C("v"), "vv2", {{"beta", ratio_or_zero(O("vnvn"), O("vv2"))}}));
  body.push_back(msg(kIteration, kO, kC, O("beta"), "hb", {{"v", C("vnew")}, {"p", -C("v") + C("hb") * C("p")}}));
  loop.exit_when = less_equal(O("vnvn"), Expr(cfg.cg_tol * cfg.cg_tol) * O("rhs2"));
  if (cfg.cg_max_iters > 0) {
    loop.limit_fixed = cfg.cg_max_iters;
  } else {
    loop.limit_per_constraint = IpmConfig::kCgItersPerConstraint;
  }
  items.push_back(std::move(loop));
}

// dx, ds on variables and dr on constraints from dw; reuses h2 / h6 (mu)
// broadcast by the CG prologue.
void append_directions(Items& items, const IpmConfig& cfg) {
  const Expr sigma = cfg.sigma;
  items.push_back(msg(kBody, kC, kV, (C("w") + C("dw")) * kEdge, "g1"));
  items.push_back(msg(kBody, kO, kV, kEdge, "g3",
                      {{"dx", (V("x") / V("s")) * ((V("g1") - V("g3")) + (sigma * V("h2")) / V("x"))},
                       {"ds", ((sigma * V("h2")) / V("x") - V("s")) - (V("s") / V("x")) * V("dx")}}));
  items.push_back(local(kBody, kC, {{"dr", ((sigma * C("h6")) / C("w") - C("r")) - (C("r") / C("w")) * C("dw")}}));
}

std::vector<ChannelRef> state_channels(bool with_mu) {
  std::vector<ChannelRef> out{{kV, "x"}, {kV, "s"}, {kC, "w"}, {kC, "r"}};
  if (with_mu) out.push_back({kO, "mu"});
  return out;
}

}  // namespace

MpProgram program_cg(const IpmConfig& cfg) {
  cfg.check();
  MpProgram p;
  p.name = "cg";
  p.inputs = state_channels(true);
  p.outputs = {{kC, "dw"}};
  append_cg(p.items, cfg);
  return p;
}

MpProgram program_ipm1_iteration(const IpmConfig& cfg) {
  cfg.check();
  const Expr gamma = cfg.gamma;
  MpProgram p;
  p.name = "ipm1";
  p.inputs = state_channels(false);
  p.outputs = state_channels(false);
  auto& it = p.items;

  it.push_back(msg(kBody, kV, kO, V("x") * V("s"), "xs"));
  it.push_back(msg(kBody, kC, kO, C("w") * C("r"), "wr", {{"mu", (O("xs") + O("wr")) / Expr::degree()}}));
  append_cg(it, cfg);
  append_directions(it, cfg);

  // Largest alpha <= 1 keeping every pair inside the gamma-neighbourhood of
  // the duality measure at the new point.
  it.push_back(msg(kBody, kV, kO, V("dx") * V("ds"), "th1"));
  it.push_back(msg(kBody, kV, kO, V("dx") * V("s"), "th2"));
  it.push_back(msg(kBody, kV, kO, V("x") * V("ds"), "th3"));
  it.push_back(msg(kBody, kV, kO, V("x") * V("s"), "th4"));
  it.push_back(msg(kBody, kC, kO, C("dw") * C("dr"), "tb1"));
  it.push_back(msg(kBody, kC, kO, C("dw") * C("r"), "tb2"));
  it.push_back(msg(kBody, kC, kO, C("w") * C("dr"), "tb3"));
  it.push_back(msg(kBody, kC, kO, C("w") * C("r"), "tb4",
                   {{"t1", (gamma * (O("th1") + O("tb1"))) / Expr::degree()},
                    {"t2", (gamma * (((O("th2") + O("th3")) + O("tb2")) + O("tb3"))) / Expr::degree()},
                    {"t3", (gamma * (O("th4") + O("tb4"))) / Expr::degree()}}));

  auto pair_root = [](const Expr& a, const Expr& da, const Expr& b, const Expr& db, const Expr& t1, const Expr& t2,
                      const Expr& t3) {
    const Expr slack = require_at_least(a * b - t3, -(Expr(1e-10) * expr_max(1.0, t3)));
    return quad_root_expr(da * db - t1, (a * db + da * b) - t2, slack, 1.0);
  };
  it.push_back(msg(kBody, kO, kV, O("t1"), "t1"));
  it.push_back(msg(kBody, kO, kV, O("t2"), "t2"));
  it.push_back(msg(kBody, kO, kV, O("t3"), "t3",
                   {{"alpha_i", pair_root(V("x"), V("dx"), V("s"), V("ds"), V("t1"), V("t2"), V("t3"))}}));
  it.push_back(msg(kBody, kO, kC, O("t1"), "t1"));
  it.push_back(msg(kBody, kO, kC, O("t2"), "t2"));
  it.push_back(msg(kBody, kO, kC, O("t3"), "t3",
                   {{"alpha_j", pair_root(C("w"), C("dw"), C("r"), C("dr"), C("t1"), C("t2"), C("t3"))}}));
  it.push_back(msg(kBody, kV, kO, V("alpha_i"), "av", {}, Aggregation::kMin));
  it.push_back(msg(kBody, kC, kO, C("alpha_j"), "ac", {{"step", expr_min(O("av"), O("ac"))}}, Aggregation::kMin));

  it.push_back(msg(kBody, kO, kV, O("step"), "hs",
                   {{"x", V("x") + V("hs") * V("dx")}, {"s", V("s") + V("hs") * V("ds")}}));
  it.push_back(msg(kBody, kO, kC, O("step"), "hs",
                   {{"w", C("w") + C("hs") * C("dw")}, {"r", C("r") + C("hs") * C("dr")}}));
  return p;
}

MpProgram program_ipm2_iteration(const IpmConfig& cfg) {
  cfg.check();
  const Expr cap = cfg.alpha_cap_practical;
  const Expr fraction = cfg.step_fraction;
  MpProgram p;
  p.name = "ipm2";
  p.inputs = state_channels(true);
  p.outputs = state_channels(true);
  auto& it = p.items;

  append_cg(it, cfg);
  append_directions(it, cfg);
  it.push_back(local(kBody, kV,
                     {{"alpha_i", quad_root_expr(V("dx") * V("ds"), V("x") * V("ds") + V("dx") * V("s"),
                                                 V("x") * V("s"), cap)}}));
  it.push_back(local(kBody, kC,
                     {{"alpha_j", quad_root_expr(C("dw") * C("dr"), C("w") * C("dr") + C("dw") * C("r"),
                                                 C("w") * C("r"), cap)}}));
  it.push_back(msg(kBody, kV, kO, V("alpha_i"), "av", {}, Aggregation::kMin));
  it.push_back(msg(kBody, kC, kO, C("alpha_j"), "ac", {{"step", expr_min(O("av"), O("ac"))}}, Aggregation::kMin));
  it.push_back(msg(kBody, kO, kV, O("step"), "hs",
                   {{"x", V("x") + (fraction * V("hs")) * V("dx")}, {"s", V("s") + (fraction * V("hs")) * V("ds")}}));
  it.push_back(msg(kBody, kO, kC, O("step"), "hs",
                   {{"w", C("w") + (fraction * C("hs")) * C("dw")}, {"r", C("r") + (fraction * C("hs")) * C("dr")}}));
  it.push_back(local(kBody, kO, {{"mu", expr_max(Expr(cfg.sigma) * O("mu"), cfg.tol_mu)}}));
  return p;
}

// ---------------------------------------------------------------- verification

namespace {

double inf_norm(const IpmState& st, bool with_mu) {
  double n = 0.0;
  for (const Eigen::VectorXd* v : {&st.x, &st.s, &st.w, &st.r}) {
    if (v->size() > 0) n = std::max(n, v->cwiseAbs().maxCoeff());
  }
  if (with_mu) n = std::max(n, std::abs(st.mu));
  return n;
}

double max_abs_diff(const IpmState& a, const IpmState& b, bool with_mu) {
  double d = 0.0;
  auto upd = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw DimensionError("verify: state shapes differ");
    if (u.size() > 0) d = std::max(d, (u - v).cwiseAbs().maxCoeff());
  };
  upd(a.x, b.x);
  upd(a.s, b.s);
  upd(a.w, b.w);
  upd(a.r, b.r);
  if (with_mu) d = std::max(d, std::abs(a.mu - b.mu));
  return d;
}

}  // namespace

EquivalenceReport verify_equivalence(const LpInstance& inst, const IpmConfig& cfg, int iters, Variant variant,
                                     const VerifyOptions& opts) {
  if (iters < 0) throw std::invalid_argument("verify: iteration count must be >= 0");
  cfg.check();
  require_valid(inst);
  const LpInstance geq = to_geq_form(inst);
  const bool theoretical = variant == Variant::kTheoretical;
  const IpmState start = theoretical ? feasible_init_theoretical(geq, cfg) : default_init(geq, cfg);
  const TripartiteGraph g = build_graph(geq);
  const MpProgram prog = theoretical ? program_ipm1_iteration(cfg) : program_ipm2_iteration(cfg);

  EquivalenceReport rep;
  rep.variant = variant;
  rep.instance = inst.name;
  rep.iterations_requested = iters;
  rep.tolerance = opts.tolerance;

  IpmState direct = start;
  NodeChannels ch = channels_from_state(start);
  for (int t = 1; t <= iters; ++t) {
    std::string direct_err, mp_err;
    StepInfo info;
    try {
      info = ipm_step(geq, direct, cfg, variant);
    } catch (const NumericalFailure& e) {
      direct_err = e.what();
    }
    RunStats stats;
    try {
      run_program(g, ch, prog, 1, &stats);
      if (!strictly_positive(state_from_channels(ch))) throw NumericalFailure("iterate lost strict positivity");
    } catch (const NumericalFailure& e) {
      mp_err = e.what();
    }
    if (!direct_err.empty() || !mp_err.empty()) {
      rep.note = "stopped at iteration " + std::to_string(t) + ": direct: " +
                 (direct_err.empty() ? "ok" : direct_err) + "; message passing: " + (mp_err.empty() ? "ok" : mp_err);
      if (direct_err.empty() || mp_err.empty()) rep.pass = false;
      break;
    }
    if (opts.perturb != 0.0) ch.var["x"] *= 1.0 + opts.perturb;

    IpmState mp = state_from_channels(ch);
    IterationDiff d;
    d.iteration = t;
    d.max_abs_diff = max_abs_diff(direct, mp, !theoretical);
    d.max_rel_diff = d.max_abs_diff / (1.0 + inf_norm(direct, !theoretical));
    d.cg_iterations_direct = info.cg_iterations;
    d.cg_iterations_mp = stats.loop_iterations.empty() ? 0 : stats.loop_iterations.front();
    rep.per_iteration.push_back(d);
    rep.iterations_compared = t;
    rep.max_abs_diff = std::max(rep.max_abs_diff, d.max_abs_diff);
    rep.max_rel_diff = std::max(rep.max_rel_diff, d.max_rel_diff);
    if (!(d.max_rel_diff <= opts.tolerance)) rep.pass = false;
  }
  return rep;
}

nlohmann::json report_to_json(const EquivalenceReport& r) {
  using nlohmann::json;
  json per = json::array();
  for (const auto& d : r.per_iteration) {
    per.push_back({{"iteration", d.iteration},
                   {"max_abs_diff", d.max_abs_diff},
                   {"max_rel_diff", d.max_rel_diff},
                   {"cg_iterations_direct", d.cg_iterations_direct},
                   {"cg_iterations_mp", d.cg_iterations_mp}});
  }
  json j{{"instance", r.instance},
         {"variant", variant_name(r.variant)},
         {"iterations_requested", r.iterations_requested},
         {"iterations_compared", r.iterations_compared},
         {"max_abs_diff", r.max_abs_diff},
         {"max_rel_diff", r.max_rel_diff},
         {"tolerance", r.tolerance},
         {"pass", r.pass},
         {"per_iteration", std::move(per)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace ipmgnn

namespace ipmgnn {

Trajectory run_message_passing(const LpInstance& inst, const IpmConfig& cfg, Variant variant, RunStats* stats) {
  cfg.check();
  require_valid(inst);
  const LpInstance geq = to_geq_form(inst);
  const bool theoretical = variant == Variant::kTheoretical;
  const TripartiteGraph g = build_graph(geq);
  const MpProgram prog = theoretical ? program_ipm1_iteration(cfg) : program_ipm2_iteration(cfg);
  Trajectory traj;
  traj.iterates.push_back(theoretical ? feasible_init_theoretical(geq, cfg) : default_init(geq, cfg));
  NodeChannels ch = channels_from_state(traj.iterates.back());
  for (;;) {
    if (is_converged(geq, traj.iterates.back(), cfg)) {
      traj.status = RunStatus::kConverged;
      break;
    }
    if (traj.iterations >= cfg.max_iters) {
      traj.status = RunStatus::kMaxIters;
      break;
    }
    RunStats local;
    IpmState next;
    try {
      run_program(g, ch, prog, 1, &local);
      next = state_from_channels(ch);
      // The program leaves the mu it started from on the objective node.
      if (theoretical) next.mu = duality_measure(next.x, next.s, next.w, next.r);
      if (!strictly_positive(next)) throw NumericalFailure("iterate lost strict positivity");
    } catch (const NumericalFailure& e) {
      traj.status = RunStatus::kNumericalFailure;
      traj.message = e.what();
      break;
    }
    traj.alphas.push_back(theoretical ? ch.scalar("step") : cfg.step_fraction * ch.scalar("step"));
    traj.cg_iterations.push_back(local.loop_iterations.empty() ? 0 : local.loop_iterations.front());
    if (stats != nullptr) {
      stats->steps += local.steps;
      for (const auto& [k, v] : local.steps_by_phase) stats->steps_by_phase[k] += v;
      stats->loop_iterations.insert(stats->loop_iterations.end(), local.loop_iterations.begin(),
                                    local.loop_iterations.end());
    }
    traj.iterates.push_back(std::move(next));
    ++traj.iterations;
  }
  return traj;
}

}  // namespace ipmgnn
