#include <doctest.h>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/gen.hpp"
#include "ipmgnn/ipm.hpp"
#include "support.hpp"

using namespace ipmgnn;

TEST_CASE("duality measure and default start") {
  const Eigen::Vector2d x(1, 2), s(3, 4);
  const Eigen::Vector3d w(1, 1, 1), r(2, 2, 2);
  CHECK(duality_measure(x, s, w, r) == doctest::Approx((3.0 + 8.0 + 6.0) / 5.0));
  Rng rng(1);
  const auto inst = testing::random_covering_lp(3, 2, rng);
  const IpmState st = default_init(inst, IpmConfig{});
  CHECK(st.x == Eigen::VectorXd::Ones(3));
  CHECK(st.mu == 1.0);
}

TEST_CASE("apply_Q matches the dense normal-equations matrix") {
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const auto inst = to_geq_form(generate_instance(Problem::kSetCover, SizeClass::kMini, 1, k));
    const IpmState st = testing::random_positive_state(inst.n(), inst.m(), rng);
    const Eigen::MatrixXd Q = testing::dense_Q(inst, st);
    const Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(inst.m(), [&] { return rng.uniform(-1, 1); });
    CHECK((apply_Q(inst, st, p) - Q * p).norm() <= 1e-10 * (1.0 + (Q * p).norm()));
  }
}

TEST_CASE("conjugate gradient solves the normal equations (dense LDLT oracle)") {
  Rng rng(8);
  IpmConfig cfg;
  int k = 0;
  for (Problem p : kAllProblems) {
    for (int i = 0; i < 5; ++i, ++k) {
      const auto inst = to_geq_form(generate_instance(p, SizeClass::kMini, 3, i));
      const IpmState st = testing::random_positive_state(inst.n(), inst.m(), rng);
      const Eigen::VectorXd rhs = assemble_cg_rhs(inst, st, cfg.sigma, st.mu);
      const CgResult cg = conjugate_gradient(inst, st, cfg.sigma, st.mu, cfg);
      const Eigen::MatrixXd Q = testing::dense_Q(inst, st);
      const Eigen::VectorXd oracle = Q.ldlt().solve(rhs);
      CHECK((Q * cg.dw - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm()));
      CHECK((cg.dw - oracle).norm() <= 1e-6 * std::max(1e-12, oracle.norm()));
    }
  }
}

TEST_CASE("recovered directions satisfy the linearized system") {
  Rng rng(12);
  IpmConfig cfg;
  const auto inst = to_geq_form(generate_instance(Problem::kIndSet, SizeClass::kMini, 2, 0));
  const IpmState st = testing::random_positive_state(inst.n(), inst.m(), rng);
  const CgResult cg = conjugate_gradient(inst, st, cfg.sigma, st.mu, cfg);
  const IpmDirections d = recover_directions(inst, st, cg.dw, cfg.sigma, st.mu);
  const double smu = cfg.sigma * st.mu;
  // A dx - dr = b - Ax + r
  const Eigen::VectorXd primal = inst.A.multiply(d.dx) - d.dr - (inst.b - inst.A.multiply(st.x) + st.r);
  // A^T dw + ds = c - A^T w - s
  const Eigen::VectorXd dual = inst.A.multiply_transpose(d.dw) + d.ds - (inst.c - inst.A.multiply_transpose(st.w) - st.s);
  // S dx + X ds = smu - XS, R dw + W dr = smu - WR
  const Eigen::VectorXd comp_v =
      st.s.cwiseProduct(d.dx) + st.x.cwiseProduct(d.ds) - (Eigen::VectorXd::Constant(inst.n(), smu) - st.x.cwiseProduct(st.s));
  const Eigen::VectorXd comp_c =
      st.r.cwiseProduct(d.dw) + st.w.cwiseProduct(d.dr) - (Eigen::VectorXd::Constant(inst.m(), smu) - st.w.cwiseProduct(st.r));
  CHECK(primal.lpNorm<Eigen::Infinity>() <= 1e-7);
  CHECK(dual.lpNorm<Eigen::Infinity>() <= 1e-7);
  CHECK(comp_v.lpNorm<Eigen::Infinity>() <= 1e-7);
  CHECK(comp_c.lpNorm<Eigen::Infinity>() <= 1e-7);
}

TEST_CASE("both variants reach the vertex-enumeration optimum on tiny LPs") {
  IpmConfig cfg;
  for (const auto& inst : testing::tiny_lps()) {
    CAPTURE(inst.name);
    const auto opt = testing::vertex_enumeration_min(inst);
    REQUIRE(opt.has_value());
    for (Variant v : {Variant::kPractical, Variant::kTheoretical}) {
      CAPTURE(variant_name(v));
      const Trajectory tr = run(inst, cfg, v);
      CHECK(tr.status == RunStatus::kConverged);
      const double obj = evaluate_objective(inst, tr.final_state().x);
      CHECK(std::abs(obj - *opt) <= 1e-4 * std::max(1.0, std::abs(*opt)));
    }
  }
}

TEST_CASE("theoretical iterates stay in the gamma neighbourhood") {
  IpmConfig cfg;
  for (const auto& inst : testing::tiny_lps()) {
    const Trajectory tr = run_theoretical(inst, cfg);
    for (const auto& st : tr.iterates) {
      const double mu = duality_measure(st.x, st.s, st.w, st.r);
      const double lo = std::min(st.x.cwiseProduct(st.s).minCoeff(), st.w.cwiseProduct(st.r).minCoeff());
      CHECK(lo >= cfg.gamma * mu * (1 - 1e-9));
    }
    // mu decreases monotonically
    for (std::size_t t = 1; t < tr.iterates.size(); ++t) CHECK(tr.iterates[t].mu <= tr.iterates[t - 1].mu);
  }
}

TEST_CASE("practical iterates stay strictly positive and mu follows the schedule") {
  IpmConfig cfg;
  const auto inst = generate_instance(Problem::kCombAuction, SizeClass::kMini, 4, 1);
  const Trajectory tr = run_practical(inst, cfg);
  CHECK(tr.status == RunStatus::kConverged);
  for (std::size_t t = 0; t < tr.iterates.size(); ++t) {
    CHECK(strictly_positive(tr.iterates[t]));
    if (t > 0) CHECK(tr.iterates[t].mu == std::max(cfg.sigma * tr.iterates[t - 1].mu, cfg.tol_mu));
  }
  const auto kkt = kkt_residuals(to_geq_form(inst), tr.final_state());
  CHECK(kkt.primal <= cfg.tol_kkt);
  CHECK(kkt.dual <= cfg.tol_kkt);
}

TEST_CASE("theoretical start is refused when no strict interior exists") {
  // x1 >= 1 and -x1 >= -1 force x1 = 1.
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  const auto inst = testing::dense_instance(A, Eigen::Vector2d(1, -1), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(run_theoretical(inst, IpmConfig{}), InitNotFound);
}

TEST_CASE("config validation") {
  IpmConfig cfg;
  cfg.sigma = 1.5;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  IpmConfig c2;
  CHECK(c2.cg_limit(7) == 700);
  c2.cg_max_iters = 5;
  CHECK(c2.cg_limit(7) == 5);
}

TEST_CASE("barrier objective") {
  Eigen::MatrixXd A(1, 1);
  A << 1;
  const auto inst = testing::dense_instance(A, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 2.0));
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, std::exp(1.0));
  const Eigen::VectorXd r = Eigen::VectorXd::Ones(1);
  CHECK(barrier_objective(inst, x, r, 0.5) == doctest::Approx(2 * std::exp(1.0) - 0.5));
  CHECK_THROWS_AS(barrier_objective(inst, -x, r, 0.5), DomainError);
}
