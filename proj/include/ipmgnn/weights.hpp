#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ipmgnn {

// Named float32 tensors plus string metadata, laid out like a safetensors
// file: 8-byte little-endian header length, JSON header, raw data.
// Tensor data is row-major, little-endian float32.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t numel() const;
};

struct TensorFile {
  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> tensors;

  // Throws MissingTensor.
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return tensors.count(name) != 0; }
};

std::string encode_tensor_file(const TensorFile& f);
// Throws FormatError on anything malformed.
TensorFile decode_tensor_file(const std::string& bytes);

// Throws IoError / FormatError.
TensorFile read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const TensorFile& f);

}  // namespace ipmgnn
