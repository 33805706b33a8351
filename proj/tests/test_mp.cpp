#include <doctest.h>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/gen.hpp"
#include "ipmgnn/mp.hpp"
#include "support.hpp"

using namespace ipmgnn;

namespace {

MpProgram single(MpStep s, std::vector<ChannelRef> inputs) {
  MpProgram p;
  p.name = "t";
  p.items.emplace_back(std::move(s));
  p.inputs = std::move(inputs);
  return p;
}

double max_rel(const IpmState& a, const IpmState& b) {
  double out = 0.0;
  auto upd = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    for (int i = 0; i < u.size(); ++i) out = std::max(out, std::abs(u[i] - v[i]) / std::max(1.0, std::abs(u[i])));
  };
  upd(a.x, b.x);
  upd(a.s, b.s);
  upd(a.w, b.w);
  upd(a.r, b.r);
  return out;
}

}  // namespace

TEST_CASE("message steps sum over neighbours with edge weights") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 0, 2, 0, -3, 4;
  const auto inst = testing::dense_instance(A, Eigen::Vector2d(5, 6), Eigen::Vector3d(7, 8, 9));
  const TripartiteGraph g = build_graph(inst);
  NodeChannels ch;
  ch.set(NodeClass::kVariable, "x", Eigen::Vector3d(1, 2, 3));
  ch.set(NodeClass::kConstraint, "y", Eigen::Vector2d(10, 20));
  run_step(g, ch, MpStep::message("t", NodeClass::kVariable, NodeClass::kConstraint, Expr::edge_weight() * V("x"), "Ax"));
  CHECK(ch.get(NodeClass::kConstraint, "Ax") == Eigen::Vector2d(7, 6));
  run_step(g, ch, MpStep::message("t", NodeClass::kVariable, NodeClass::kObjective, Expr::edge_weight() * V("x"), "cx"));
  CHECK(ch.scalar("cx") == 7 + 16 + 27);
  run_step(g, ch,
           MpStep::message("t", NodeClass::kConstraint, NodeClass::kVariable, C("y"), "m", {}, Aggregation::kMin));
  CHECK(ch.get(NodeClass::kVariable, "m") == Eigen::Vector3d(10, 20, 10));
  run_step(g, ch, MpStep::local("t", NodeClass::kConstraint, {{"z", C("Ax") * Expr::degree()}}));
  CHECK(ch.get(NodeClass::kConstraint, "z") == Eigen::Vector2d(21, 18));
}

TEST_CASE("non-local reads and undeclared channels are rejected") {
  const ChannelRef vx{NodeClass::kVariable, "x"};
  // variable map reading a constraint channel
  CHECK_THROWS_AS(validate_program(single(
                      MpStep::message("t", NodeClass::kVariable, NodeClass::kConstraint, C("x"), "y"), {vx})),
                  LocalityViolation);
  // no variable-variable edges
  CHECK_THROWS_AS(
      validate_program(single(MpStep::message("t", NodeClass::kVariable, NodeClass::kVariable, V("x"), "y"), {vx})),
      LocalityViolation);
  // edge weights only inside message maps
  CHECK_THROWS_AS(
      validate_program(single(MpStep::local("t", NodeClass::kVariable, {{"y", Expr::edge_weight()}}), {vx})),
      LocalityViolation);
  CHECK_THROWS_AS(validate_program(single(MpStep::local("t", NodeClass::kVariable, {{"y", V("q")}}), {vx})),
                  UndeclaredChannel);
  CHECK_NOTHROW(validate_program(single(MpStep::local("t", NodeClass::kVariable, {{"y", V("x")}}), {vx})));

  const TripartiteGraph g = build_graph(generate_instance(Problem::kSetCover, SizeClass::kMini, 1, 0));
  NodeChannels ch;
  CHECK_THROWS_AS(run_step(g, ch, MpStep::local("t", NodeClass::kVariable, {{"y", V("nope")}})), UndeclaredChannel);
}

TEST_CASE("all built-in programs pass the static check") {
  const IpmConfig cfg;
  CHECK_NOTHROW(validate_program(program_cg(cfg)));
  CHECK_NOTHROW(validate_program(program_ipm1_iteration(cfg)));
  CHECK_NOTHROW(validate_program(program_ipm2_iteration(cfg)));
}

TEST_CASE("static step counts") {
  const IpmConfig cfg;
  const auto cg = count_steps(program_cg(cfg));
  CHECK(cg.at("cg.prologue") == 8);
  CHECK(cg.at("cg.iteration") == 9);
  CHECK(count_steps(program_ipm1_iteration(cfg)).at("ipm.body") == 23);
  CHECK(count_steps(program_ipm2_iteration(cfg)).at("ipm.body") == 10);
}

TEST_CASE("dynamic step count is prologue + 9 per CG iteration + body") {
  const IpmConfig cfg;
  const LpInstance inst = to_geq_form(generate_instance(Problem::kIndSet, SizeClass::kMini, 4, 0));
  const TripartiteGraph g = build_graph(inst);
  for (Variant v : {Variant::kPractical, Variant::kTheoretical}) {
    const MpProgram prog = v == Variant::kPractical ? program_ipm2_iteration(cfg) : program_ipm1_iteration(cfg);
    const int body = v == Variant::kPractical ? 10 : 23;
    const IpmState start = v == Variant::kPractical ? default_init(inst, cfg) : feasible_init_theoretical(inst, cfg);
    NodeChannels ch = channels_from_state(start);
    RunStats stats;
    run_program(g, ch, prog, 1, &stats);
    REQUIRE(stats.loop_iterations.size() == 1);
    CHECK(stats.steps == 8 + 9L * stats.loop_iterations[0] + body);
  }
}

TEST_CASE("program_cg matches conjugate_gradient") {
  Rng rng(21);
  IpmConfig cfg;
  for (Problem p : kAllProblems) {
    const LpInstance inst = to_geq_form(generate_instance(p, SizeClass::kMini, 5, 0));
    const TripartiteGraph g = build_graph(inst);
    const IpmState st = testing::random_positive_state(inst.n(), inst.m(), rng);
    NodeChannels ch = channels_from_state(st);
    RunStats stats;
    run_program(g, ch, program_cg(cfg), 1, &stats);
    const CgResult direct = conjugate_gradient(inst, st, cfg.sigma, st.mu, cfg);
    const Eigen::VectorXd& dw = ch.get(NodeClass::kConstraint, "dw");
    CHECK(stats.loop_iterations.at(0) == direct.iterations);
    CHECK((dw - direct.dw).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, direct.dw.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("message-passing solve reproduces the direct solve") {
  const IpmConfig cfg;
  for (Problem p : kAllProblems) {
    for (Variant v : {Variant::kPractical, Variant::kTheoretical}) {
      const LpInstance inst = generate_instance(p, SizeClass::kMini, 12, 0);
      CAPTURE(inst.name);
      CAPTURE(variant_name(v));
      Trajectory direct;
      try {
        direct = run(inst, cfg, v);
      } catch (const InitNotFound&) {
        CHECK_THROWS_AS(run_message_passing(inst, cfg, v), InitNotFound);
        continue;
      }
      const Trajectory mp = run_message_passing(inst, cfg, v);
      CHECK(mp.status == direct.status);
      REQUIRE(mp.iterates.size() == direct.iterates.size());
      for (std::size_t t = 0; t < mp.iterates.size(); ++t) CHECK(max_rel(direct.iterates[t], mp.iterates[t]) <= 1e-9);
      CHECK(mp.cg_iterations == direct.cg_iterations);
    }
  }
}

TEST_CASE("equivalence checker passes on clean runs and catches a perturbation") {
  const IpmConfig cfg;
  const LpInstance inst = generate_instance(Problem::kCombAuction, SizeClass::kMini, 3, 1);
  const EquivalenceReport ok = verify_equivalence(inst, cfg, 20, Variant::kPractical);
  CHECK(ok.pass);
  CHECK(ok.iterations_compared == 20);
  CHECK(ok.max_rel_diff <= 1e-9);
  VerifyOptions bad;
  bad.perturb = 1e-6;
  const EquivalenceReport caught = verify_equivalence(inst, cfg, 20, Variant::kPractical, bad);
  CHECK_FALSE(caught.pass);
  CHECK(caught.max_rel_diff > 1e-9);
  CHECK(report_to_json(caught).at("pass") == false);
}

TEST_CASE("channels round-trip an IPM state") {
  Rng rng(2);
  const IpmState st = testing::random_positive_state(4, 3, rng);
  const IpmState back = state_from_channels(channels_from_state(st));
  CHECK(back.x == st.x);
  CHECK(back.w == st.w);
  CHECK(back.mu == st.mu);
}
