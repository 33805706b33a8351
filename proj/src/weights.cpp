#include "ipmgnn/weights.hpp"

#include <bit>

#include <json.hpp>

#include "ipmgnn/errors.hpp"
#include "ipmgnn/io.hpp"

namespace ipmgnn {

std::int64_t Tensor::numel() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const Tensor& TensorFile::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw MissingTensor(name);
  return it->second;
}

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

float get_f32(const char* p) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(u);
}

}  // namespace

std::string encode_tensor_file(const TensorFile& f) {
  nlohmann::json header = nlohmann::json::object();
  if (!f.metadata.empty()) header["__metadata__"] = f.metadata;
  std::uint64_t offset = 0;
  for (const auto& [name, t] : f.tensors) {
    if (t.numel() != static_cast<std::int64_t>(t.data.size())) {
      throw DimensionError("tensor '" + name + "': shape does not match data length");
    }
    const std::uint64_t bytes = 4 * t.data.size();
    header[name] = {{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  std::string h = header.dump();
  while (h.size() % 8 != 0) h.push_back(' ');
  std::string out;
  out.reserve(8 + h.size() + offset);
  put_u64(out, h.size());
  out += h;
  for (const auto& [name, t] : f.tensors) {
    for (float v : t.data) put_f32(out, v);
  }
  return out;
}

TensorFile decode_tensor_file(const std::string& bytes) {
  if (bytes.size() < 8) throw FormatError("weight file: truncated header length");
  const std::uint64_t hlen = get_u64(bytes, 0);
  if (hlen > bytes.size() - 8) throw FormatError("weight file: header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight file: bad header: ") + e.what());
  }
  if (!header.is_object()) throw FormatError("weight file: header is not an object");
  const std::size_t data_start = 8 + hlen;
  const std::size_t data_len = bytes.size() - data_start;
  TensorFile f;
  try {
    for (const auto& [name, entry] : header.items()) {
      if (name == "__metadata__") {
        for (const auto& [k, v] : entry.items()) f.metadata[k] = v.get<std::string>();
        continue;
      }
      if (entry.at("dtype").get<std::string>() != "F32") {
        throw FormatError("weight file: tensor '" + name + "' is not F32");
      }
      Tensor t;
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      for (auto d : t.shape) {
        if (d < 0) throw FormatError("weight file: tensor '" + name + "' has a negative dimension");
      }
      const auto off = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
      if (off.size() != 2 || off[0] > off[1] || off[1] > data_len) {
        throw FormatError("weight file: tensor '" + name + "' has bad data offsets");
      }
      if (off[1] - off[0] != 4 * static_cast<std::uint64_t>(t.numel())) {
        throw FormatError("weight file: tensor '" + name + "' size does not match its shape");
      }
      t.data.resize(static_cast<std::size_t>(t.numel()));
      const char* p = bytes.data() + data_start + off[0];
      for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = get_f32(p + 4 * i);
      f.tensors.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight file: ") + e.what());
  }
  return f;
}

TensorFile read_tensor_file(const std::filesystem::path& path) { return decode_tensor_file(read_file(path)); }

void write_tensor_file(const std::filesystem::path& path, const TensorFile& f) {
  write_file_atomic(path, encode_tensor_file(f));
}

}  // namespace ipmgnn
