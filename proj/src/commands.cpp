#include "ipmgnn/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <thread>

#include "ipmgnn/dataset.hpp"
#include "ipmgnn/evalkit.hpp"
#include "ipmgnn/io.hpp"
#include "ipmgnn/mp.hpp"
#include "ipmgnn/rng.hpp"

namespace ipmgnn {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) != nullptr) return kExitUsage;
  if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  if (dynamic_cast<const FormatError*>(&e) != nullptr) return kExitIo;
  if (dynamic_cast<const InvalidInstance*>(&e) != nullptr) return kExitIo;
  if (dynamic_cast<const InitNotFound*>(&e) != nullptr) return kExitNumerical;
  if (dynamic_cast<const NumericalFailure*>(&e) != nullptr) return kExitNumerical;
  return kExitFailed;
}

int default_jobs() {
  const char* env = std::getenv("IPMGNN_JOBS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min(v, 256L));
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

void write_json_output(const json& j, const std::optional<fs::path>& file, std::ostream& out) {
  if (file) {
    write_file_atomic(*file, dump_json(j, 2) + "\n");
  } else {
    out << dump_json(j, 2) << "\n";
  }
}

std::vector<fs::path> require_instances(const fs::path& dir) {
  auto files = list_instance_files(dir);
  if (files.empty()) throw UsageError("no instance files in '" + dir.string() + "'");
  return files;
}

std::string family_of(const LpInstance& inst) {
  auto it = inst.provenance.find("generator");
  return it != inst.provenance.end() && it->is_string() ? it->get<std::string>() : "unknown";
}

std::string size_of(const LpInstance& inst) {
  auto it = inst.provenance.find("size");
  return it != inst.provenance.end() && it->is_string() ? it->get<std::string>() : "unknown";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  if (opt.count < 1) throw UsageError("--count must be at least 1");
  if (opt.out_dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw IoError("cannot create '" + opt.out_dir.string() + "': " + ec.message());

  std::vector<json> entries(static_cast<std::size_t>(opt.count));
  parallel_for(opt.count, opt.jobs, [&](int i) {
    const LpInstance inst = generate_instance(opt.problem, opt.size, opt.seed, i);
    const std::string bytes = dump_json(instance_to_json(inst)) + "\n";
    const std::string file = inst.name + ".json";
    write_file_atomic(opt.out_dir / file, bytes);
    entries[i] = {{"file", file},     {"name", inst.name},         {"index", i},
                  {"n", inst.n()},    {"m", inst.m()},             {"nnz", inst.A.nnz()},
                  {"sha256", sha256_hex(bytes)}, {"stream_seed", inst.provenance.at("stream_seed")}};
  });
  const json manifest = {{"problem", problem_name(opt.problem)},
                         {"size", size_name(opt.size)},
                         {"count", opt.count},
                         {"seed", opt.seed},
                         {"rng", Rng::kName},
                         {"instances", entries}};
  write_file_atomic(opt.out_dir / "manifest.json", dump_json(manifest, 2) + "\n");
  out << "wrote " << opt.count << " instances and manifest.json to " << opt.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  opt.config.check();
  const LpInstance inst = read_instance(opt.instance);
  Trajectory traj;
  RunStats stats;
  try {
    traj = opt.mode == SolveMode::kDirect ? run(inst, opt.config, opt.algorithm)
                                          : run_message_passing(inst, opt.config, opt.algorithm, &stats);
  } catch (const InitNotFound& e) {
    err << "error: " << e.what() << "\n"
        << "hint: the theoretical algorithm needs a strictly feasible, central start; "
           "use --algorithm practical for this instance\n";
    return kExitNumerical;
  }
  if (opt.trace) write_file_atomic(*opt.trace, trajectory_to_jsonl(traj));
  const IpmState& fin = traj.final_state();
  if (opt.solution) write_file_atomic(*opt.solution, dump_json(state_to_json(fin), 2) + "\n");

  const KktResiduals kkt = kkt_residuals(to_geq_form(inst), fin);
  long cg_total = 0;
  for (int k : traj.cg_iterations) cg_total += k;
  json summary = {{"instance", inst.name},
                  {"algorithm", variant_name(opt.algorithm)},
                  {"mode", opt.mode == SolveMode::kDirect ? "direct" : "message-passing"},
                  {"status", status_name(traj.status)},
                  {"iterations", traj.iterations},
                  {"objective", evaluate_objective(inst, fin.x)},
                  {"mu", fin.mu},
                  {"kkt", {{"primal", kkt.primal}, {"dual", kkt.dual}, {"complementarity", kkt.complementarity}}},
                  {"cg_iterations", cg_total}};
  if (opt.mode == SolveMode::kMessagePassing) summary["mp_steps"] = stats.steps;
  if (!traj.message.empty()) summary["message"] = traj.message;
  out << dump_json(summary, 2) << "\n";
  switch (traj.status) {
    case RunStatus::kConverged: return kExitOk;
    case RunStatus::kMaxIters: return kExitFailed;
    case RunStatus::kNumericalFailure: return kExitNumerical;
  }
  return kExitFailed;
}

// ---------------------------------------------------------------------------

int cmd_verify(const VerifyCommandOptions& opt, std::ostream& out) {
  opt.config.check();
  if (!opt.practical && !opt.theoretical) throw UsageError("nothing to verify: no algorithm selected");
  if (opt.iterations < 1) throw UsageError("--iterations must be at least 1");
  const auto files = require_instances(opt.dir);
  std::vector<Variant> variants;
  if (opt.practical) variants.push_back(Variant::kPractical);
  if (opt.theoretical) variants.push_back(Variant::kTheoretical);

  struct Slot {
    std::string name;
    std::optional<EquivalenceReport> report;
    std::string skipped;
  };
  const int total = static_cast<int>(files.size() * variants.size());
  std::vector<Slot> slots(static_cast<std::size_t>(total));
  VerifyOptions vo;
  vo.tolerance = opt.tolerance;
  vo.perturb = opt.perturb;
  parallel_for(total, opt.jobs, [&](int k) {
    const auto fi = static_cast<std::size_t>(k) / variants.size();
    const Variant v = variants[static_cast<std::size_t>(k) % variants.size()];
    const LpInstance inst = read_instance(files[fi]);
    slots[k].name = inst.name;
    try {
      slots[k].report = verify_equivalence(inst, opt.config, opt.iterations, v, vo);
    } catch (const InitNotFound& e) {
      slots[k].skipped = e.what();
    }
  });

  json reports = json::array();
  json skipped = json::array();
  int compared = 0;
  int failures = 0;
  double worst = 0.0;
  for (int k = 0; k < total; ++k) {
    const auto fi = static_cast<std::size_t>(k) / variants.size();
    const Variant v = variants[static_cast<std::size_t>(k) % variants.size()];
    if (slots[k].report) {
      json r = report_to_json(*slots[k].report);
      r["file"] = files[fi].filename().string();
      reports.push_back(std::move(r));
      ++compared;
      if (!slots[k].report->pass) ++failures;
      worst = std::max(worst, slots[k].report->max_rel_diff);
    } else {
      skipped.push_back({{"instance", slots[k].name}, {"variant", variant_name(v)}, {"reason", slots[k].skipped}});
    }
  }
  const bool pass = failures == 0;
  const json summary = {{"pass", pass},
                        {"tolerance", opt.tolerance},
                        {"iterations", opt.iterations},
                        {"compared", compared},
                        {"failures", failures},
                        {"max_rel_diff", worst},
                        {"skipped", skipped},
                        {"reports", reports}};
  write_json_output(summary, opt.report, out);
  if (opt.report) {
    out << (pass ? "PASS" : "FAIL") << ": " << compared << " runs compared, " << failures << " failed, "
        << skipped.size() << " skipped, max relative difference " << worst << "\n";
  }
  return pass ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------

int cmd_export_dataset(const ExportOptions& opt, std::ostream& out) {
  opt.config.check();
  if (opt.layers < 1) throw UsageError("--layers must be at least 1");
  if (opt.out.empty()) throw UsageError("--out is required");
  const auto files = require_instances(opt.dir);
  const fs::path out_dir = opt.out.has_parent_path() ? opt.out.parent_path() : fs::path(".");
  const std::string traj_dir_name = opt.out.filename().string() + ".traj";
  std::error_code ec;
  fs::create_directories(out_dir / traj_dir_name, ec);
  if (ec) throw IoError("cannot create trajectory directory: " + ec.message());

  struct Slot {
    std::optional<DatasetRecord> record;
    std::string failure;
  };
  std::vector<Slot> slots(files.size());
  parallel_for(static_cast<int>(files.size()), opt.jobs, [&](int i) {
    const std::string bytes = read_file(files[i]);
    LpInstance inst;
    try {
      inst = instance_from_json(parse_json(bytes, files[i].string()));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(files[i].string() + ": " + e.what());
    }
    const Trajectory traj = run_practical(inst, opt.config);
    if (traj.status != RunStatus::kConverged) {
      slots[i].failure = "solver status " + status_name(traj.status) + (traj.message.empty() ? "" : ": " + traj.message);
      return;
    }
    if (traj.iterations < opt.layers) {
      slots[i].failure = "trajectory has " + std::to_string(traj.iterations) + " iterates, fewer than --layers";
      return;
    }
    DatasetRecord r;
    r.instance_path = fs::proximate(files[i], out_dir).generic_string();
    r.instance_sha256 = sha256_hex(bytes);
    const std::string traj_text = trajectory_to_jsonl(traj);
    r.trajectory_sha256 = sha256_hex(traj_text);
    r.trajectory_path = traj_dir_name + "/" + r.trajectory_sha256 + ".jsonl";
    write_file_atomic(out_dir / r.trajectory_path, traj_text);
    r.graph = build_graph(to_geq_form(inst));
    r.targets = sample_equidistant(traj, opt.layers);
    r.final_objective = inst.c.dot(r.targets.y.back());
    slots[i].record = std::move(r);
  });

  std::vector<DatasetRecord> records;
  json failures = json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (slots[i].record) {
      records.push_back(std::move(*slots[i].record));
    } else {
      failures.push_back({{"file", files[i].filename().string()}, {"reason", slots[i].failure}});
    }
  }
  const auto splits = assign_splits(static_cast<int>(records.size()), opt.split_seed);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].split = splits[i];
  write_file_atomic(opt.out, dataset_to_jsonl(records));
  const SplitSizes sz = split_sizes(static_cast<int>(records.size()));
  out << dump_json({{"dataset", opt.out.string()},
                    {"records", records.size()},
                    {"layers", opt.layers},
                    {"split_seed", opt.split_seed},
                    {"splits", {{"train", sz.train}, {"val", sz.val}, {"test", sz.test}}},
                    {"failures", failures}},
                   2)
      << "\n";
  return records.empty() ? kExitFailed : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out) {
  opt.config.check();
  if (opt.repeats < 1) throw UsageError("--repeats must be at least 1");
  const auto files = require_instances(opt.dir);
  std::optional<MpnnWeights> weights;
  if (opt.weights) weights = load_weights(*opt.weights);

  struct Key {
    std::string family, size, method;
    auto operator<=>(const Key&) const = default;
  };
  struct Cell {
    std::vector<double> means;
    std::vector<double> repeat_stds;
    int failures = 0;
  };
  std::map<Key, Cell> cells;
  json per_instance = json::array();

  auto time_it = [&](const std::function<std::string()>& f) {
    std::vector<double> t;
    std::string status;
    for (int k = 0; k < opt.repeats; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      status = f();
      t.push_back(seconds_since(t0));
    }
    return std::make_pair(mean_std(t), status);
  };

  for (const auto& file : files) {
    const LpInstance inst = read_instance(file);
    const std::string family = family_of(inst);
    const std::string size = size_of(inst);
    json row = {{"instance", inst.name}, {"family", family}, {"size", size}};
    auto record = [&](const std::string& method, const std::pair<MeanStd, std::string>& res) {
      Cell& c = cells[{family, size, method}];
      c.means.push_back(res.first.mean);
      c.repeat_stds.push_back(res.first.std);
      if (res.second != "converged" && res.second != "ok") ++c.failures;
      row[method] = {{"mean_s", res.first.mean}, {"std_s", res.first.std}, {"status", res.second}};
    };
    record("ipm_direct", time_it([&] { return status_name(run_practical(inst, opt.config).status); }));
    record("ipm_message_passing", time_it([&] {
             return status_name(run_message_passing(inst, opt.config, Variant::kPractical).status);
           }));
    if (weights) {
      const TripartiteGraph g = build_graph(to_geq_form(inst));
      record("mpnn_forward", time_it([&] {
               forward(g, *weights);
               return std::string("ok");
             }));
    }
    per_instance.push_back(std::move(row));
  }

  json rows = json::array();
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> by_size;
  for (const auto& [k, c] : cells) {
    const MeanStd ms = mean_std(c.means);
    const MeanStd rs = mean_std(c.repeat_stds);
    rows.push_back({{"family", k.family},
                    {"size", k.size},
                    {"method", k.method},
                    {"instances", c.means.size()},
                    {"mean_s", ms.mean},
                    {"std_s", ms.std},
                    {"mean_repeat_std_s", rs.mean},
                    {"failures", c.failures}});
    by_size[{k.family, k.method}][k.size] = ms.mean;
  }
  json ratios = json::array();
  for (const auto& [fm, sizes] : by_size) {
    if (sizes.count("small") && sizes.count("large") && sizes.at("small") > 0.0) {
      ratios.push_back({{"family", fm.first}, {"method", fm.second}, {"large_over_small", sizes.at("large") / sizes.at("small")}});
    }
  }
  const json report = {{"repeats", opt.repeats},
                       {"note", "mpnn_forward excludes graph construction"},
                       {"rows", rows},
                       {"size_ratios", ratios},
                       {"instances", per_instance}};
  if (opt.report) write_file_atomic(*opt.report, dump_json(report, 2) + "\n");

  out << std::left << std::setw(12) << "family" << std::setw(8) << "size" << std::setw(22) << "method" << std::right
      << std::setw(6) << "n" << std::setw(14) << "mean [ms]" << std::setw(14) << "std [ms]" << std::setw(10) << "fail"
      << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r["family"].get<std::string>() << std::setw(8) << r["size"].get<std::string>()
        << std::setw(22) << r["method"].get<std::string>() << std::right << std::setw(6) << r["instances"].get<int>()
        << std::setw(14) << std::fixed << std::setprecision(3) << 1e3 * r["mean_s"].get<double>() << std::setw(14)
        << 1e3 * r["std_s"].get<double>() << std::setw(10) << r["failures"].get<int>() << "\n";
  }
  out << std::defaultfloat;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_infer(const InferOptions& opt, std::ostream& out) {
  const std::string wbytes = read_file(opt.weights);
  const MpnnWeights w = weights_from_tensors(decode_tensor_file(wbytes));
  std::vector<fs::path> files;
  if (fs::is_directory(opt.input)) {
    files = require_instances(opt.input);
  } else {
    files.push_back(opt.input);
  }
  std::vector<json> preds(files.size());
  parallel_for(static_cast<int>(files.size()), opt.jobs, [&](int i) {
    const LpInstance inst = read_instance(files[i]);
    const auto z = forward(build_graph(to_geq_form(inst)), w);
    json layers = json::array();
    for (const auto& v : z) layers.push_back(vector_to_json(v));
    preds[i] = {{"instance", inst.name}, {"file", files[i].filename().string()}, {"z", std::move(layers)}};
  });
  const json j = {{"layer_kind", layer_kind_name(w.kind)},
                  {"T", w.depth},
                  {"d", w.hidden},
                  {"weights_sha256", sha256_hex(wbytes)},
                  {"predictions", preds}};
  write_json_output(j, opt.out_file, out);
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  opt.config.check();
  const json pj = parse_json(read_file(opt.predictions), opt.predictions.string());
  struct Item {
    fs::path file;
    Eigen::VectorXd z;
  };
  std::vector<Item> items;
  try {
    for (const auto& p : pj.at("predictions")) {
      const auto& layers = p.at("z");
      if (!layers.is_array() || layers.empty()) throw FormatError("prediction without layers");
      items.push_back({opt.dir / p.at("file").get<std::string>(), vector_from_json(layers.back(), "z")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(opt.predictions.string() + ": " + e.what());
  }
  if (items.empty()) throw UsageError("no predictions to evaluate");

  struct Slot {
    std::optional<LpInstance> inst;
    Eigen::VectorXd y;
    std::string failure;
  };
  std::vector<Slot> slots(items.size());
  parallel_for(static_cast<int>(items.size()), opt.jobs, [&](int i) {
    LpInstance inst = read_instance(items[i].file);
    if (items[i].z.size() != inst.n()) throw FormatError(items[i].file.string() + ": prediction length differs from n");
    const Trajectory traj = run_practical(inst, opt.config);
    if (traj.status != RunStatus::kConverged) {
      slots[i].failure = "reference solve ended with status " + status_name(traj.status);
      return;
    }
    slots[i].y = traj.final_state().x;
    slots[i].inst = std::move(inst);
  });
  std::vector<LpInstance> insts;
  std::vector<Eigen::VectorXd> zs, ys;
  json excluded = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!slots[i].inst) {
      excluded.push_back({{"file", items[i].file.filename().string()}, {"reason", slots[i].failure}});
      continue;
    }
    insts.push_back(std::move(*slots[i].inst));
    zs.push_back(items[i].z);
    ys.push_back(slots[i].y);
  }
  json report = metrics_to_json(evaluate_metrics(insts, zs, ys));
  report["excluded"] = excluded;
  write_json_output(report, opt.out_file, out);
  return kExitOk;
}

int cmd_random_weights(const RandomWeightsOptions& opt, std::ostream& out) {
  if (opt.depth < 1 || opt.hidden < 1) throw UsageError("--layers and --hidden must be at least 1");
  if (opt.out.empty()) throw UsageError("--out is required");
  const MpnnWeights w =
      opt.zero ? zero_weights(opt.kind, opt.depth, opt.hidden) : random_weights(opt.kind, opt.depth, opt.hidden, opt.seed);
  save_weights(opt.out, w);
  out << "wrote " << layer_kind_name(w.kind) << " weights (T=" << w.depth << ", d=" << w.hidden << ") to "
      << opt.out.string() << "\n";
  return kExitOk;
}

}  // namespace ipmgnn
