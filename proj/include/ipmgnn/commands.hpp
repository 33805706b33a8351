#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/gen.hpp"
#include "ipmgnn/ipm.hpp"
#include "ipmgnn/mpnn.hpp"

namespace ipmgnn {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,  // verification failed, solve did not converge
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Maps an exception thrown by a command to its exit code.
int exit_code_for(const std::exception& e);

// Default for --jobs: $IPMGNN_JOBS when set to a positive integer, else 1.
int default_jobs();
// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions are
// rethrown (the one with the lowest index) after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

struct GenerateOptions {
  Problem problem = Problem::kSetCover;
  SizeClass size = SizeClass::kMini;
  int count = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  int jobs = 1;
};
// Writes <name>.json per instance and manifest.json with seeds and checksums.
int cmd_generate(const GenerateOptions& opt, std::ostream& out);

enum class SolveMode { kDirect, kMessagePassing };

struct SolveOptions {
  std::filesystem::path instance;
  Variant algorithm = Variant::kPractical;
  SolveMode mode = SolveMode::kDirect;
  std::optional<std::filesystem::path> trace;
  std::optional<std::filesystem::path> solution;
  IpmConfig config;
};
// Prints a JSON summary. Exit 0 when converged, 1 at the iteration limit,
// 4 on numerical failure or when no feasible start exists.
int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);

struct VerifyCommandOptions {
  std::filesystem::path dir;
  bool practical = true;
  bool theoretical = true;
  int iterations = 20;
  double tolerance = 1e-9;
  double perturb = 0.0;  // test hook, see VerifyOptions
  std::optional<std::filesystem::path> report;
  IpmConfig config;
  int jobs = 1;
};
// Exit 1 iff some compared instance exceeds the tolerance. Theoretical runs
// without a feasible start are listed as skipped.
int cmd_verify(const VerifyCommandOptions& opt, std::ostream& out);

struct ExportOptions {
  std::filesystem::path dir;
  std::filesystem::path out;  // dataset JSONL
  int layers = 8;
  std::uint64_t split_seed = 0;
  IpmConfig config;
  int jobs = 1;
};
// Trajectories go to <out>.traj/<sha256>.jsonl.
int cmd_export_dataset(const ExportOptions& opt, std::ostream& out);

struct BenchmarkOptions {
  std::filesystem::path dir;
  std::optional<std::filesystem::path> weights;
  int repeats = 3;
  std::optional<std::filesystem::path> report;
  IpmConfig config;
};
int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out);

struct InferOptions {
  std::filesystem::path weights;
  std::filesystem::path input;  // an instance file or a directory of them
  std::optional<std::filesystem::path> out_file;
  int jobs = 1;
};
// Predictions JSON: {"layer_kind","T","d","weights_sha256","predictions":
// [{"instance","file","z":[[...] per layer]}]}.
int cmd_infer(const InferOptions& opt, std::ostream& out);

struct EvalOptions {
  std::filesystem::path predictions;
  std::filesystem::path dir;
  std::optional<std::filesystem::path> out_file;
  IpmConfig config;
  int jobs = 1;
};
// Reference solutions come from the practical solver; the last layer of
// each prediction is scored.
int cmd_eval(const EvalOptions& opt, std::ostream& out);

struct RandomWeightsOptions {
  LayerKind kind = LayerKind::kGcn;
  int depth = 8;
  int hidden = 16;
  std::uint64_t seed = 0;
  bool zero = false;
  std::filesystem::path out;
};
int cmd_random_weights(const RandomWeightsOptions& opt, std::ostream& out);

}  // namespace ipmgnn
