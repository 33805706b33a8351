#include "ipmgnn/gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/rng.hpp"

namespace ipmgnn {

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::kSetCover: return "setcover";
    case Problem::kIndSet: return "indset";
    case Problem::kCombAuction: return "cauc";
    case Problem::kFacility: return "facility";
  }
  return "unknown";
}

Problem parse_problem(const std::string& s) {
  for (Problem p : kAllProblems) {
    if (problem_name(p) == s) return p;
  }
  throw std::invalid_argument("unknown problem '" + s + "' (expected setcover, indset, cauc or facility)");
}

std::string size_name(SizeClass s) {
  switch (s) {
    case SizeClass::kMini: return "mini";
    case SizeClass::kSmall: return "small";
    case SizeClass::kLarge: return "large";
  }
  return "unknown";
}

SizeClass parse_size(const std::string& s) {
  for (SizeClass c : kAllSizes) {
    if (size_name(c) == s) return c;
  }
  throw std::invalid_argument("unknown size class '" + s + "' (expected mini, small or large)");
}

SizeTable size_table(Problem p, SizeClass s) {
  const int k = static_cast<int>(s);
  switch (p) {
    case Problem::kSetCover: {
      static const SizeTable t[] = {{{15, 20}, {15, 20}, 0.15, 0, 0.0},
                                    {{30, 50}, {50, 70}, 0.05, 0, 0.0},
                                    {{300, 500}, {500, 700}, 0.01, 0, 0.0}};
      return t[k];
    }
    case Problem::kIndSet: {
      static const SizeTable t[] = {{{10, 20}, {0, 0}, 0.0, 2, 0.0},
                                    {{50, 70}, {0, 0}, 0.0, 2, 0.0},
                                    {{500, 700}, {0, 0}, 0.0, 2, 0.0}};
      return t[k];
    }
    case Problem::kCombAuction: {
      static const SizeTable t[] = {{{20, 20}, {20, 20}, 0.0, 0, 0.0},
                                    {{50, 80}, {50, 80}, 0.0, 0, 0.0},
                                    {{300, 500}, {300, 500}, 0.0, 0, 0.0}};
      return t[k];
    }
    case Problem::kFacility: {
      static const SizeTable t[] = {{{3, 5}, {3, 5}, 0.0, 0, 5.0},
                                    {{10, 10}, {10, 10}, 0.0, 0, 5.0},
                                    {{20, 30}, {20, 30}, 0.0, 0, 5.0}};
      return t[k];
    }
  }
  throw std::invalid_argument("unknown problem");
}

LpInstance relax_and_pack(const MilpModel& milp, std::string name, nlohmann::json provenance) {
  const int n = milp.n;
  if (static_cast<int>(milp.objective.size()) != n || static_cast<int>(milp.integer.size()) != n ||
      static_cast<int>(milp.unit_upper.size()) != n || milp.rows.size() != milp.rhs.size()) {
    throw DimensionError("relax_and_pack: inconsistent model sizes");
  }
  std::vector<Triplet> entries;
  std::vector<double> b;
  int row = 0;
  for (std::size_t k = 0; k < milp.rows.size(); ++k, ++row) {
    for (const auto& [col, val] : milp.rows[k]) entries.push_back({row, col, val});
    b.push_back(milp.rhs[k]);
  }
  const double bound_sign = milp.orientation == Orientation::kLeq ? 1.0 : -1.0;
  int bound_rows = 0;
  for (int i = 0; i < n; ++i) {
    if (!milp.unit_upper[static_cast<std::size_t>(i)]) continue;
    entries.push_back({row, i, bound_sign});
    b.push_back(bound_sign);
    ++row;
    ++bound_rows;
  }
  LpInstance inst;
  inst.A = SparseMatrix(row, n, std::move(entries));
  inst.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  inst.c.resize(n);
  for (int i = 0; i < n; ++i) inst.c[i] = milp.maximize ? -milp.objective[i] : milp.objective[i];
  inst.orientation = milp.orientation;
  inst.name = std::move(name);
  int n_integer = 0;
  for (bool f : milp.integer) n_integer += f ? 1 : 0;
  provenance["structural_rows"] = static_cast<int>(milp.rows.size());
  provenance["bound_rows"] = bound_rows;
  provenance["relaxed_integer_vars"] = n_integer;
  provenance["sense"] = milp.maximize ? "max (stored negated)" : "min";
  inst.provenance = std::move(provenance);
  return inst;
}

namespace {

MilpModel setcover_model(Rng& rng, const SizeTable& t, nlohmann::json& prov) {
  const int rows = static_cast<int>(rng.uniform_int(t.first.lo, t.first.hi));
  const int cols = static_cast<int>(rng.uniform_int(t.second.lo, t.second.hi));
  const int cells = rows * cols;
  const int target = std::clamp(static_cast<int>(std::lround(t.density * cells)), 1, cells);
  std::vector<char> member(static_cast<std::size_t>(cells), 0);
  for (int cell : rng.sample_without_replacement(cells, target)) member[static_cast<std::size_t>(cell)] = 1;
  // Every element must be coverable and every subset must cover something.
  for (int u = 0; u < rows; ++u) {
    bool any = false;
    for (int s = 0; s < cols && !any; ++s) any = member[static_cast<std::size_t>(u * cols + s)];
    if (!any) member[static_cast<std::size_t>(u * cols + rng.uniform_int(0, cols - 1))] = 1;
  }
  for (int s = 0; s < cols; ++s) {
    bool any = false;
    for (int u = 0; u < rows && !any; ++u) any = member[static_cast<std::size_t>(u * cols + s)];
    if (!any) member[static_cast<std::size_t>(rng.uniform_int(0, rows - 1) * cols + s)] = 1;
  }
  MilpModel milp;
  milp.n = cols;
  milp.orientation = Orientation::kGeq;
  int nnz = 0;
  for (int u = 0; u < rows; ++u) {
    std::vector<std::pair<int, double>> r;
    for (int s = 0; s < cols; ++s) {
      if (member[static_cast<std::size_t>(u * cols + s)]) r.emplace_back(s, 1.0);
    }
    nnz += static_cast<int>(r.size());
    milp.rows.push_back(std::move(r));
    milp.rhs.push_back(1.0);
  }
  for (int s = 0; s < cols; ++s) milp.objective.push_back(static_cast<double>(rng.uniform_int(1, 100)) / 100.0);
  milp.integer.assign(static_cast<std::size_t>(cols), true);
  milp.unit_upper.assign(static_cast<std::size_t>(cols), true);
  prov["rows"] = rows;
  prov["cols"] = cols;
  prov["density"] = t.density;
  prov["nnz_target"] = target;
  prov["nnz"] = nnz;
  prov["distributions"] = {{"membership", "round(density*rows*cols) cells uniformly without replacement, "
                                          "then one uniform cell added to each empty row and column"},
                           {"cost", "uniform integer [1, 100] / 100"}};
  return milp;
}

MilpModel indset_model(Rng& rng, const SizeTable& t, nlohmann::json& prov) {
  const int nodes = static_cast<int>(rng.uniform_int(t.first.lo, t.first.hi));
  const int aff = t.affinity;
  // Barabasi-Albert: node `aff` links to nodes 0..aff-1, then each new node
  // links to `aff` distinct earlier nodes chosen with probability ~ degree.
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<std::size_t>(nodes), 0);
  for (int u = 0; u < aff; ++u) {
    edges.emplace_back(u, aff);
    ++degree[static_cast<std::size_t>(u)];
    ++degree[static_cast<std::size_t>(aff)];
  }
  for (int v = aff + 1; v < nodes; ++v) {
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < aff) {
      long total = 0;
      for (int u = 0; u < v; ++u) {
        if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) total += degree[static_cast<std::size_t>(u)];
      }
      long pick = static_cast<long>(rng.uniform_int(0, total - 1));
      for (int u = 0; u < v; ++u) {
        if (std::find(chosen.begin(), chosen.end(), u) != chosen.end()) continue;
        pick -= degree[static_cast<std::size_t>(u)];
        if (pick < 0) {
          chosen.push_back(u);
          break;
        }
      }
    }
    std::sort(chosen.begin(), chosen.end());
    for (int u : chosen) {
      edges.emplace_back(u, v);
      ++degree[static_cast<std::size_t>(u)];
      ++degree[static_cast<std::size_t>(v)];
    }
  }
  MilpModel milp;
  milp.n = nodes;
  milp.maximize = true;
  milp.orientation = Orientation::kLeq;
  for (const auto& [u, v] : edges) {
    milp.rows.push_back({{u, 1.0}, {v, 1.0}});
    milp.rhs.push_back(1.0);
  }
  milp.objective.assign(static_cast<std::size_t>(nodes), 1.0);
  milp.integer.assign(static_cast<std::size_t>(nodes), true);
  milp.unit_upper.assign(static_cast<std::size_t>(nodes), true);
  prov["nodes"] = nodes;
  prov["edges"] = static_cast<int>(edges.size());
  prov["affinity"] = aff;
  prov["distributions"] = {{"graph", "Barabasi-Albert preferential attachment, affinity 2"},
                           {"weight", "all ones"}};
  return milp;
}

MilpModel cauc_model(Rng& rng, const SizeTable& t, nlohmann::json& prov) {
  const int items = static_cast<int>(rng.uniform_int(t.first.lo, t.first.hi));
  const int bids = static_cast<int>(rng.uniform_int(t.second.lo, t.second.hi));
  std::vector<std::vector<int>> bundle(static_cast<std::size_t>(bids));
  std::vector<char> used(static_cast<std::size_t>(items), 0);
  for (auto& b : bundle) {
    const int k = static_cast<int>(rng.uniform_int(2, std::min(6, items)));
    b = rng.sample_without_replacement(items, k);
    for (int it : b) used[static_cast<std::size_t>(it)] = 1;
  }
  for (int it = 0; it < items; ++it) {
    if (!used[static_cast<std::size_t>(it)]) bundle[static_cast<std::size_t>(rng.uniform_int(0, bids - 1))].push_back(it);
  }
  MilpModel milp;
  milp.n = bids;
  milp.maximize = true;
  milp.orientation = Orientation::kLeq;
  for (const auto& b : bundle) {
    milp.objective.push_back(static_cast<double>(b.size()) * rng.uniform(0.5, 1.5));
  }
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(items));
  for (int j = 0; j < bids; ++j) {
    for (int it : bundle[static_cast<std::size_t>(j)]) rows[static_cast<std::size_t>(it)].emplace_back(j, 1.0);
  }
  milp.rows = std::move(rows);
  milp.rhs.assign(static_cast<std::size_t>(items), 1.0);
  milp.integer.assign(static_cast<std::size_t>(bids), true);
  milp.unit_upper.assign(static_cast<std::size_t>(bids), true);
  prov["items"] = items;
  prov["bids"] = bids;
  prov["distributions"] = {{"bundle", "size uniform integer [2, min(6, items)], items uniform without "
                                      "replacement; unused items appended to a uniform bid"},
                           {"value", "bundle size * uniform(0.5, 1.5)"}};
  return milp;
}

MilpModel facility_model(Rng& rng, const SizeTable& t, nlohmann::json& prov) {
  const int nc = static_cast<int>(rng.uniform_int(t.first.lo, t.first.hi));
  const int nf = static_cast<int>(rng.uniform_int(t.second.lo, t.second.hi));
  std::vector<double> cx(nc), cy(nc), fx(nf), fy(nf), demand(nc), cap(nf);
  for (int i = 0; i < nc; ++i) {
    cx[i] = rng.uniform01();
    cy[i] = rng.uniform01();
  }
  for (int j = 0; j < nf; ++j) {
    fx[j] = rng.uniform01();
    fy[j] = rng.uniform01();
  }
  double total_demand = 0.0;
  for (int i = 0; i < nc; ++i) {
    demand[i] = static_cast<double>(rng.uniform_int(5, 35));
    total_demand += demand[i];
  }
  // Raw capacities in [10, 50] keep max/min <= 5 = ratio, so after scaling
  // every facility can take a 1/nf share of the total demand.
  double total_raw = 0.0;
  for (int j = 0; j < nf; ++j) {
    cap[j] = rng.uniform(10.0, 50.0);
    total_raw += cap[j];
  }
  for (int j = 0; j < nf; ++j) cap[j] = cap[j] * (t.ratio * total_demand / total_raw);

  MilpModel milp;
  milp.n = nf + nc * nf;
  milp.orientation = Orientation::kLeq;
  auto xvar = [&](int i, int j) { return nf + i * nf + j; };
  milp.objective.resize(static_cast<std::size_t>(milp.n));
  for (int j = 0; j < nf; ++j) {
    const double scale = rng.uniform(100.0, 110.0);
    const double offset = rng.uniform(0.0, 90.0);
    milp.objective[static_cast<std::size_t>(j)] = scale * std::sqrt(cap[j]) + offset;
  }
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nf; ++j) {
      const double dist = std::hypot(cx[i] - fx[j], cy[i] - fy[j]);
      milp.objective[static_cast<std::size_t>(xvar(i, j))] = 10.0 * demand[i] * dist;
    }
  }
  // Costs are divided by their maximum so objective coefficients lie in (0, 1].
  const double cost_max = *std::max_element(milp.objective.begin(), milp.objective.end());
  for (double& v : milp.objective) v /= cost_max;
  // Demand equality sum_j x_ij = 1 split into a <= row and a >= row (negated).
  for (int i = 0; i < nc; ++i) {
    std::vector<std::pair<int, double>> up, down;
    for (int j = 0; j < nf; ++j) {
      up.emplace_back(xvar(i, j), 1.0);
      down.emplace_back(xvar(i, j), -1.0);
    }
    milp.rows.push_back(std::move(up));
    milp.rhs.push_back(1.0);
    milp.rows.push_back(std::move(down));
    milp.rhs.push_back(-1.0);
  }
  // Capacity rows sum_i d_i x_ij <= v_j y_j, divided through by v_j.
  for (int j = 0; j < nf; ++j) {
    std::vector<std::pair<int, double>> r;
    r.emplace_back(j, -1.0);
    for (int i = 0; i < nc; ++i) r.emplace_back(xvar(i, j), demand[i] / cap[j]);
    milp.rows.push_back(std::move(r));
    milp.rhs.push_back(0.0);
  }
  milp.integer.assign(static_cast<std::size_t>(milp.n), false);
  for (int j = 0; j < nf; ++j) milp.integer[static_cast<std::size_t>(j)] = true;
  milp.unit_upper.assign(static_cast<std::size_t>(milp.n), true);
  prov["customers"] = nc;
  prov["facilities"] = nf;
  prov["ratio"] = t.ratio;
  prov["total_demand"] = total_demand;
  prov["distributions"] = {{"positions", "uniform in the unit square"},
                           {"demand", "uniform integer [5, 35]"},
                           {"capacity", "uniform(10, 50) scaled so total capacity = ratio * total demand"},
                           {"fixed_cost", "uniform(100, 110) * sqrt(capacity) + uniform(0, 90)"},
                           {"transport_cost", "10 * demand * euclidean distance"},
                           {"normalization", "all costs divided by the largest; capacity rows divided by v_j"}};
  prov["cost_scale"] = cost_max;
  return milp;
}

}  // namespace

LpInstance generate_instance(Problem p, SizeClass s, std::uint64_t seed, int index) {
  const std::uint64_t family_salt = splitmix64(0x5EEDULL + 3ULL * static_cast<std::uint64_t>(p) +
                                               static_cast<std::uint64_t>(s));
  const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(index)) ^ family_salt;
  Rng rng(stream);
  const SizeTable t = size_table(p, s);
  nlohmann::json prov = {{"generator", problem_name(p)},
                         {"size", size_name(s)},
                         {"seed", seed},
                         {"index", index},
                         {"rng", Rng::kName},
                         {"stream_seed", stream}};
  MilpModel milp;
  switch (p) {
    case Problem::kSetCover: milp = setcover_model(rng, t, prov); break;
    case Problem::kIndSet: milp = indset_model(rng, t, prov); break;
    case Problem::kCombAuction: milp = cauc_model(rng, t, prov); break;
    case Problem::kFacility: milp = facility_model(rng, t, prov); break;
  }
  char name[96];
  std::snprintf(name, sizeof name, "%s-%s-s%llu-%05d", problem_name(p).c_str(), size_name(s).c_str(),
                static_cast<unsigned long long>(seed), index);
  return relax_and_pack(milp, name, std::move(prov));
}

std::vector<LpInstance> generate(const GenSpec& batch) {
  if (batch.count < 1) throw std::invalid_argument("count must be >= 1");
  std::vector<LpInstance> out;
  out.reserve(static_cast<std::size_t>(batch.count));
  for (int i = 0; i < batch.count; ++i) out.push_back(generate_instance(batch.problem, batch.size, batch.seed, i));
  return out;
}

std::vector<LpInstance> gen_setcover(GenSpec batch) {
  batch.problem = Problem::kSetCover;
  return generate(batch);
}
std::vector<LpInstance> gen_indset(GenSpec batch) {
  batch.problem = Problem::kIndSet;
  return generate(batch);
}
std::vector<LpInstance> gen_cauc(GenSpec batch) {
  batch.problem = Problem::kCombAuction;
  return generate(batch);
}
std::vector<LpInstance> gen_facility(GenSpec batch) {
  batch.problem = Problem::kFacility;
  return generate(batch);
}

}  // namespace ipmgnn
