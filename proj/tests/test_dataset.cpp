#include <doctest.h>

#include <fstream>

#include "ipmgnn/dataset.hpp"
#include "ipmgnn/errors.hpp"
#include "ipmgnn/gen.hpp"
#include "ipmgnn/io.hpp"
#include "support.hpp"

using namespace ipmgnn;

TEST_CASE("split sizes floor val and test, remainder to train") {
  const SplitSizes s10 = split_sizes(10);
  CHECK(s10.train == 8);
  CHECK(s10.val == 1);
  CHECK(s10.test == 1);
  const SplitSizes s9 = split_sizes(9);
  CHECK(s9.train == 9);
  CHECK(s9.val == 0);
  const SplitSizes s1000 = split_sizes(1000);
  CHECK(s1000.train == 800);
  CHECK(s1000.test == 100);
  for (int n = 0; n < 200; ++n) {
    const SplitSizes s = split_sizes(n);
    CHECK(s.train + s.val + s.test == n);
  }
}

TEST_CASE("split assignment is seeded and matches the sizes") {
  const auto a = assign_splits(57, 4);
  CHECK(a == assign_splits(57, 4));
  CHECK(a != assign_splits(57, 5));
  const SplitSizes s = split_sizes(57);
  CHECK(std::count(a.begin(), a.end(), Split::kVal) == s.val);
  CHECK(std::count(a.begin(), a.end(), Split::kTest) == s.test);
  CHECK(std::count(a.begin(), a.end(), Split::kTrain) == s.train);
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest}) CHECK(parse_split(split_name(sp)) == sp);
  CHECK_THROWS(parse_split("holdout"));
}

TEST_CASE("dataset records round trip through JSONL") {
  const LpInstance inst = generate_instance(Problem::kCombAuction, SizeClass::kMini, 1, 0);
  const Trajectory tr = run_practical(inst, IpmConfig{});
  DatasetRecord r;
  r.instance_path = "a/b.json";
  r.instance_sha256 = std::string(64, 'a');
  r.trajectory_sha256 = std::string(64, 'b');
  r.trajectory_path = "x.traj/bbb.jsonl";
  r.graph = build_graph(to_geq_form(inst));
  r.targets = sample_equidistant(tr, 4);
  r.final_objective = inst.c.dot(r.targets.y.back());
  r.split = Split::kVal;
  const std::string text = dataset_to_jsonl({r, r});
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const auto back = dataset_from_jsonl(text);
  REQUIRE(back.size() == 2);
  const DatasetRecord& b = back[1];
  CHECK(b.instance_path == r.instance_path);
  CHECK(b.trajectory_sha256 == r.trajectory_sha256);
  CHECK(b.targets.indices == r.targets.indices);
  CHECK(b.targets.source_length == r.targets.source_length);
  CHECK(b.targets.y.back() == r.targets.y.back());
  CHECK(b.final_objective == r.final_objective);
  CHECK(b.split == Split::kVal);
  CHECK(b.graph.adjacency == r.graph.adjacency);
  const auto j = record_to_json(r);
  CHECK(j.at("targets").at("K") == r.targets.source_length);
  CHECK(j.at("split") == "val");
  CHECK_THROWS_AS(dataset_from_jsonl("{\"split\": \"train\"}\n"), FormatError);
}

TEST_CASE("instance listing skips the manifest and sorts by name") {
  const auto dir = std::filesystem::temp_directory_path() / "ipmgnn_list_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const char* f : {"b.json", "a.json", "manifest.json", "notes.txt"}) std::ofstream(dir / f) << "{}";
  const auto files = list_instance_files(dir);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.json");
  CHECK(files[1].filename() == "b.json");
  CHECK_THROWS_AS(list_instance_files(dir / "missing"), IoError);
  std::filesystem::remove_all(dir);
}
