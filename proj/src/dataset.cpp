#include "ipmgnn/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/io.hpp"
#include "ipmgnn/rng.hpp"

namespace ipmgnn {

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw FormatError("unknown split '" + s + "'");
}

SplitSizes split_sizes(int n) {
  if (n < 0) throw DomainError("split_sizes: negative record count");
  SplitSizes s;
  s.val = n / 10;
  s.test = n / 10;
  s.train = n - s.val - s.test;
  return s;
}

std::vector<Split> assign_splits(int n, std::uint64_t seed) {
  const SplitSizes sz = split_sizes(n);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Split> out(static_cast<std::size_t>(n), Split::kTrain);
  for (int k = 0; k < sz.val; ++k) out[order[k]] = Split::kVal;
  for (int k = sz.val; k < sz.val + sz.test; ++k) out[order[k]] = Split::kTest;
  return out;
}

nlohmann::json record_to_json(const DatasetRecord& r) {
  nlohmann::json y = nlohmann::json::array();
  for (const auto& v : r.targets.y) y.push_back(vector_to_json(v));
  return {{"instance", {{"path", r.instance_path}, {"sha256", r.instance_sha256}}},
          {"trajectory", {{"path", r.trajectory_path}, {"sha256", r.trajectory_sha256}}},
          {"graph", graph_to_json(r.graph)},
          {"targets", {{"K", r.targets.source_length}, {"indices", r.targets.indices}, {"y", std::move(y)}}},
          {"final_objective", r.final_objective},
          {"split", split_name(r.split)}};
}

DatasetRecord record_from_json(const nlohmann::json& j) {
  try {
    DatasetRecord r;
    r.instance_path = j.at("instance").at("path").get<std::string>();
    r.instance_sha256 = j.at("instance").at("sha256").get<std::string>();
    r.trajectory_path = j.at("trajectory").at("path").get<std::string>();
    r.trajectory_sha256 = j.at("trajectory").at("sha256").get<std::string>();
    r.graph = graph_from_json(j.at("graph"));
    const auto& t = j.at("targets");
    r.targets.source_length = t.at("K").get<int>();
    r.targets.indices = t.at("indices").get<std::vector<int>>();
    for (const auto& y : t.at("y")) r.targets.y.push_back(vector_from_json(y, "targets.y"));
    if (r.targets.indices.size() != r.targets.y.size()) throw FormatError("record: targets and indices differ in count");
    for (const auto& y : r.targets.y) {
      if (y.size() != r.graph.n_vars) throw FormatError("record: target length differs from variable count");
    }
    r.final_objective = j.at("final_objective").get<double>();
    r.split = parse_split(j.at("split").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset record: ") + e.what());
  }
}

std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += dump_json(record_to_json(r));
    out += '\n';
  }
  return out;
}

std::vector<DatasetRecord> dataset_from_jsonl(std::string_view text) {
  std::vector<DatasetRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(record_from_json(parse_json(line, "dataset line " + std::to_string(lineno))));
  }
  return out;
}

std::vector<std::filesystem::path> list_instance_files(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto& p = e.path();
    if (p.extension() == ".json" && p.filename() != "manifest.json") out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ipmgnn
