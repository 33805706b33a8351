#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipmgnn/lp.hpp"

namespace ipmgnn {

enum class Problem { kSetCover, kIndSet, kCombAuction, kFacility };
enum class SizeClass { kMini, kSmall, kLarge };

std::string problem_name(Problem p);  // setcover, indset, cauc, facility
Problem parse_problem(const std::string& s);
std::string size_name(SizeClass s);  // mini, small, large
SizeClass parse_size(const std::string& s);
inline constexpr Problem kAllProblems[] = {Problem::kSetCover, Problem::kIndSet, Problem::kCombAuction,
                                           Problem::kFacility};
inline constexpr SizeClass kAllSizes[] = {SizeClass::kMini, SizeClass::kSmall, SizeClass::kLarge};

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const { return lo <= v && v <= hi; }
};

// Size parameters of one (problem, size class) cell. first/second are
// rows/cols (set cover), nodes/- (independent set), items/bids (auction),
// customers/facilities (facility location).
struct SizeTable {
  IntRange first;
  IntRange second;
  double density = 0.0;   // set cover only
  int affinity = 0;       // independent set only
  double ratio = 0.0;     // facility location only
};
SizeTable size_table(Problem p, SizeClass s);

struct GenSpec {
  Problem problem = Problem::kSetCover;
  SizeClass size = SizeClass::kMini;
  int count = 1;
  std::uint64_t seed = 0;
};

// Mixed-integer model before relaxation: rows share one orientation, and
// variables flagged unit_upper carry an implicit x <= 1 bound.
struct MilpModel {
  int n = 0;
  bool maximize = false;
  std::vector<double> objective;
  Orientation orientation = Orientation::kLeq;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  std::vector<bool> integer;
  std::vector<bool> unit_upper;
};

// Drops integrality, turns max into min, appends the x <= 1 rows (as -x >= -1
// in GEQ models) in variable order.
LpInstance relax_and_pack(const MilpModel& milp, std::string name, nlohmann::json provenance);

// index selects the instance within a batch; the stream depends on
// (seed, index) only, so batches can be generated in any order.
LpInstance generate_instance(Problem p, SizeClass s, std::uint64_t seed, int index);
std::vector<LpInstance> generate(const GenSpec& batch);

std::vector<LpInstance> gen_setcover(GenSpec batch);
std::vector<LpInstance> gen_indset(GenSpec batch);
std::vector<LpInstance> gen_cauc(GenSpec batch);
std::vector<LpInstance> gen_facility(GenSpec batch);

}  // namespace ipmgnn
