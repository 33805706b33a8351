#include "ipmgnn/io.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "ipmgnn/errors.hpp"

namespace ipmgnn {

namespace {

void dump_into(const nlohmann::json& j, int indent, int depth, std::string& out) {
  using value_t = nlohmann::json::value_t;
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw FormatError("cannot serialize non-finite number to JSON");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // Keep floats recognizable as floats on re-parse.
      if (std::string_view(buf).find_first_of(".eE") == std::string_view::npos) out += ".0";
      return;
    }
    case value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(e, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(key).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(value, indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  return out;
}

nlohmann::json parse_json(std::string_view text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  }
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(what + "[" + std::to_string(i) + "] is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

nlohmann::json instance_to_json(const LpInstance& inst) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& t : inst.A.entries()) a.push_back({t.row, t.col, t.value});
  return {{"name", inst.name},
          {"m", inst.m()},
          {"n", inst.n()},
          {"orientation", orientation_name(inst.orientation)},
          {"A", std::move(a)},
          {"b", vector_to_json(inst.b)},
          {"c", vector_to_json(inst.c)},
          {"provenance", inst.provenance}};
}

LpInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("instance must be a JSON object");
  for (const char* key : {"m", "n", "orientation", "A", "b", "c"}) {
    if (!j.contains(key)) throw FormatError(std::string("instance is missing field '") + key + "'");
  }
  LpInstance inst;
  inst.name = j.value("name", std::string{});
  const int m = j.at("m").get<int>();
  const int n = j.at("n").get<int>();
  inst.orientation = parse_orientation(j.at("orientation").get<std::string>());
  std::vector<Triplet> entries;
  const auto& a = j.at("A");
  if (!a.is_array()) throw FormatError("field 'A' must be an array of [row, col, value]");
  entries.reserve(a.size());
  for (const auto& e : a) {
    if (!e.is_array() || e.size() != 3) throw FormatError("matrix entry must be [row, col, value]");
    entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  inst.A = SparseMatrix(m, n, std::move(entries));
  inst.b = vector_from_json(j.at("b"), "b");
  inst.c = vector_from_json(j.at("c"), "c");
  if (j.contains("provenance")) inst.provenance = j.at("provenance");
  return inst;
}

void write_instance(const std::filesystem::path& path, const LpInstance& inst) {
  write_file_atomic(path, dump_json(instance_to_json(inst)) + "\n");
}

LpInstance read_instance(const std::filesystem::path& path) {
  try {
    return instance_from_json(parse_json(read_file(path), path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move temporary file onto '" + path.string() + "'");
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

nlohmann::json state_to_json(const IpmState& st) {
  return {{"x", vector_to_json(st.x)},
          {"s", vector_to_json(st.s)},
          {"w", vector_to_json(st.w)},
          {"r", vector_to_json(st.r)},
          {"mu", st.mu}};
}

IpmState state_from_json(const nlohmann::json& j) {
  IpmState st;
  st.x = vector_from_json(j.at("x"), "x");
  st.s = vector_from_json(j.at("s"), "s");
  st.w = vector_from_json(j.at("w"), "w");
  st.r = vector_from_json(j.at("r"), "r");
  st.mu = j.at("mu").get<double>();
  return st;
}

std::string trajectory_to_jsonl(const Trajectory& traj) {
  std::string out;
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    nlohmann::json line = state_to_json(traj.iterates[t]);
    line["t"] = t;
    line["alpha"] = t == 0 ? nlohmann::json(nullptr) : nlohmann::json(traj.alphas[t - 1]);
    if (t + 1 == traj.iterates.size()) {
      line["status"] = status_name(traj.status);
      if (!traj.message.empty()) line["message"] = traj.message;
    }
    out += dump_json(line);
    out += '\n';
  }
  return out;
}

Trajectory trajectory_from_jsonl(std::string_view text) {
  Trajectory traj;
  bool saw_status = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (saw_status) throw FormatError("trajectory has lines after the status line");
    const nlohmann::json j = parse_json(line, "trajectory line");
    try {
      if (j.at("t").get<std::size_t>() != traj.iterates.size()) throw FormatError("trajectory lines out of order");
      traj.iterates.push_back(state_from_json(j));
      if (traj.iterates.size() > 1) {
        if (j.at("alpha").is_null()) throw FormatError("missing alpha after the initial iterate");
        traj.alphas.push_back(j.at("alpha").get<double>());
      }
      if (j.contains("status")) {
        traj.status = parse_status(j.at("status").get<std::string>());
        traj.message = j.value("message", std::string{});
        saw_status = true;
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("trajectory line: ") + e.what());
    }
  }
  if (!saw_status) throw FormatError("trajectory has no status line");
  traj.iterations = static_cast<int>(traj.iterates.size()) - 1;
  return traj;
}

}  // namespace ipmgnn
