#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipmgnn/evalkit.hpp"
#include "ipmgnn/tripartite.hpp"

namespace ipmgnn {

enum class Split { kTrain, kVal, kTest };
std::string split_name(Split s);  // train, val, test
Split parse_split(const std::string& s);

// Sizes for N records: val and test get floor(N / 10) each, train the rest.
struct SplitSizes {
  int train = 0;
  int val = 0;
  int test = 0;
};
SplitSizes split_sizes(int n);
// Seeded shuffle of 0..n-1; the first `val` shuffled positions go to val,
// the next `test` to test, the rest to train. Result is indexed by record.
std::vector<Split> assign_splits(int n, std::uint64_t seed);

struct DatasetRecord {
  std::string instance_path;
  std::string instance_sha256;  // of the instance file bytes
  std::string trajectory_sha256;
  std::string trajectory_path;  // relative to the dataset file
  TripartiteGraph graph;
  SupervisionTargets targets;
  double final_objective = 0.0;  // c' y^(T)
  Split split = Split::kTrain;
};

nlohmann::json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);

std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> dataset_from_jsonl(std::string_view text);

// Instance files in a directory (*.json except manifest.json), by name.
std::vector<std::filesystem::path> list_instance_files(const std::filesystem::path& dir);

}  // namespace ipmgnn
