#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmgnn/ipm.hpp"
#include "ipmgnn/lp.hpp"

namespace ipmgnn {

// Serializes JSON with every floating-point number printed with 17 significant
// digits, so doubles survive a text round trip bit for bit. indent < 0 gives a
// single line.
std::string dump_json(const nlohmann::json& j, int indent = -1);
nlohmann::json parse_json(std::string_view text, const std::string& origin = "<string>");

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json instance_to_json(const LpInstance& inst);
LpInstance instance_from_json(const nlohmann::json& j);
void write_instance(const std::filesystem::path& path, const LpInstance& inst);
LpInstance read_instance(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

nlohmann::json state_to_json(const IpmState& st);
IpmState state_from_json(const nlohmann::json& j);

// One JSON object per line and iterate: {"t","x","s","w","r","mu","alpha"}.
// alpha is null on the initial line; the last line also carries "status".
std::string trajectory_to_jsonl(const Trajectory& traj);
Trajectory trajectory_from_jsonl(std::string_view text);

}  // namespace ipmgnn
