#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ipmgnn/commands.hpp"

using namespace ipmgnn;

namespace {

void add_solver_flags(CLI::App* cmd, IpmConfig& cfg) {
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-mu", cfg.tol_mu, "Duality measure tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-kkt", cfg.tol_kkt, "KKT residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", cfg.sigma, "Centering parameter");
  cmd->add_option("--cg-tol", cfg.cg_tol, "Relative CG tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--cg-max-iters", cfg.cg_max_iters, "CG iteration cap (0: 100 per constraint)")
      ->check(CLI::NonNegativeNumber);
}

const std::map<std::string, Problem> kProblems{{"setcover", Problem::kSetCover},
                                               {"indset", Problem::kIndSet},
                                               {"cauc", Problem::kCombAuction},
                                               {"facility", Problem::kFacility}};
const std::map<std::string, SizeClass> kSizes{
    {"mini", SizeClass::kMini}, {"small", SizeClass::kSmall}, {"large", SizeClass::kLarge}};
const std::map<std::string, Variant> kVariants{{"practical", Variant::kPractical},
                                               {"theoretical", Variant::kTheoretical}};
const std::map<std::string, SolveMode> kModes{{"direct", SolveMode::kDirect},
                                              {"message-passing", SolveMode::kMessagePassing}};
const std::map<std::string, LayerKind> kKinds{
    {"GCN", LayerKind::kGcn}, {"GIN", LayerKind::kGin}, {"GEN", LayerKind::kGen}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LP interior-point solver, message-passing simulator and MPNN inference"};
  app.require_subcommand(1);
  const int jobs_default = default_jobs();

  GenerateOptions gen;
  gen.jobs = jobs_default;
  auto* c_gen = app.add_subcommand("generate", "Generate LP relaxations of combinatorial problems");
  c_gen->add_option("--problem", gen.problem, "setcover, indset, cauc or facility")
      ->required()
      ->transform(CLI::CheckedTransformer(kProblems));
  c_gen->add_option("--size", gen.size, "mini, small or large")->required()->transform(CLI::CheckedTransformer(kSizes));
  c_gen->add_option("--count", gen.count, "Number of instances")->required();
  c_gen->add_option("--seed", gen.seed, "Base seed")->required();
  c_gen->add_option("--out", gen.out_dir, "Output directory")->required();
  c_gen->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SolveOptions solve;
  std::string trace, solution;
  auto* c_solve = app.add_subcommand("solve", "Solve one instance");
  c_solve->add_option("instance", solve.instance, "Instance JSON file")->required();
  c_solve->add_option("--algorithm", solve.algorithm, "practical or theoretical")
      ->transform(CLI::CheckedTransformer(kVariants));
  c_solve->add_option("--mode", solve.mode, "direct or message-passing")->transform(CLI::CheckedTransformer(kModes));
  c_solve->add_option("--trace", trace, "Write the trajectory as JSONL");
  c_solve->add_option("--solution", solution, "Write the final iterate as JSON");
  add_solver_flags(c_solve, solve.config);

  VerifyCommandOptions verify;
  verify.jobs = jobs_default;
  std::string verify_algorithm = "both";
  std::string verify_report;
  auto* c_verify = app.add_subcommand("verify", "Check the message-passing programs against the direct solver");
  c_verify->add_option("dir", verify.dir, "Directory of instance files")->required();
  c_verify->add_option("--algorithm", verify_algorithm, "practical, theoretical or both")
      ->check(CLI::IsMember({"practical", "theoretical", "both"}));
  c_verify->add_option("--iterations", verify.iterations, "Iterations compared per instance");
  c_verify->add_option("--tolerance", verify.tolerance, "Largest accepted relative difference");
  c_verify->add_option("--report", verify_report, "Write the JSON report here instead of stdout");
  c_verify->add_option("--jobs", verify.jobs, "Worker threads")->check(CLI::PositiveNumber);
  // Negative control for tests; hidden from --help.
  c_verify->add_option("--perturb", verify.perturb)->group("");
  add_solver_flags(c_verify, verify.config);

  ExportOptions exp;
  exp.jobs = jobs_default;
  auto* c_export = app.add_subcommand("export-dataset", "Solve instances and write supervision targets as JSONL");
  c_export->add_option("dir", exp.dir, "Directory of instance files")->required();
  c_export->add_option("--out", exp.out, "Dataset JSONL file")->required();
  c_export->add_option("--layers", exp.layers, "Targets per instance (T)");
  c_export->add_option("--split-seed", exp.split_seed, "Seed of the train/val/test shuffle");
  c_export->add_option("--jobs", exp.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_solver_flags(c_export, exp.config);

  BenchmarkOptions bench;
  std::string bench_weights, bench_report;
  auto* c_bench = app.add_subcommand("benchmark", "Time the solvers and the learned forward pass");
  c_bench->add_option("dir", bench.dir, "Directory of instance files")->required();
  c_bench->add_option("--weights", bench_weights, "Weight file for the learned forward pass");
  c_bench->add_option("--repeats", bench.repeats, "Timed repetitions per instance and method");
  c_bench->add_option("--report", bench_report, "Write the JSON report here");
  add_solver_flags(c_bench, bench.config);

  InferOptions infer;
  infer.jobs = jobs_default;
  std::string infer_out;
  auto* c_infer = app.add_subcommand("infer", "Run the MPNN forward pass");
  c_infer->add_option("--weights", infer.weights, "Weight file")->required();
  c_infer->add_option("input", infer.input, "Instance file or directory")->required();
  c_infer->add_option("--out", infer_out, "Predictions JSON (default: stdout)");
  c_infer->add_option("--jobs", infer.jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvalOptions eval;
  eval.jobs = jobs_default;
  std::string eval_out;
  auto* c_eval = app.add_subcommand("eval", "Score predictions against solver solutions");
  c_eval->add_option("predictions", eval.predictions, "Predictions JSON from infer")->required();
  c_eval->add_option("dir", eval.dir, "Directory holding the instance files")->required();
  c_eval->add_option("--out", eval_out, "Metrics JSON (default: stdout)");
  c_eval->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_solver_flags(c_eval, eval.config);

  RandomWeightsOptions rw;
  auto* c_rw = app.add_subcommand("random-weights", "Write a seeded random (or zero) weight file");
  c_rw->add_option("--kind", rw.kind, "GCN, GIN or GEN")->transform(CLI::CheckedTransformer(kKinds, CLI::ignore_case));
  c_rw->add_option("--layers", rw.depth, "Number of layers (T)");
  c_rw->add_option("--hidden", rw.hidden, "Hidden width (d)");
  c_rw->add_option("--seed", rw.seed, "Seed");
  c_rw->add_flag("--zero", rw.zero, "All parameters zero");
  c_rw->add_option("--out", rw.out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_gen->parsed()) return cmd_generate(gen, std::cout);
    if (c_solve->parsed()) {
      if (!trace.empty()) solve.trace = trace;
      if (!solution.empty()) solve.solution = solution;
      return cmd_solve(solve, std::cout, std::cerr);
    }
    if (c_verify->parsed()) {
      verify.practical = verify_algorithm != "theoretical";
      verify.theoretical = verify_algorithm != "practical";
      if (!verify_report.empty()) verify.report = verify_report;
      return cmd_verify(verify, std::cout);
    }
    if (c_export->parsed()) return cmd_export_dataset(exp, std::cout);
    if (c_bench->parsed()) {
      if (!bench_weights.empty()) bench.weights = bench_weights;
      if (!bench_report.empty()) bench.report = bench_report;
      return cmd_benchmark(bench, std::cout);
    }
    if (c_infer->parsed()) {
      if (!infer_out.empty()) infer.out_file = infer_out;
      return cmd_infer(infer, std::cout);
    }
    if (c_eval->parsed()) {
      if (!eval_out.empty()) eval.out_file = eval_out;
      return cmd_eval(eval, std::cout);
    }
    if (c_rw->parsed()) return cmd_random_weights(rw, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}
