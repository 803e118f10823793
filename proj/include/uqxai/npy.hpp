#pragma once

// NPY format version 1.0, little-endian, C order. Payloads are widened to
// double on read; float32 values survive a read/write round trip bit-exactly.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqxai/core.hpp"

namespace uqxai::npy {

enum class Dtype { kFloat32, kFloat64, kInt32, kInt64, kUint8 };

struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  Dtype dtype = Dtype::kFloat64;

  std::size_t rank() const { return shape.size(); }
};

std::string encode(std::span<const std::size_t> shape, std::span<const double> data,
                   Dtype dtype = Dtype::kFloat64);
Array decode(std::string_view bytes);

Array read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const double> data, Dtype dtype = Dtype::kFloat64);

Matrix read_matrix(const std::filesystem::path& path);
Tensor3 read_tensor3(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  Dtype dtype = Dtype::kFloat64);
void write_tensor3(const std::filesystem::path& path, const Tensor3& t,
                   Dtype dtype = Dtype::kFloat64);

}  // namespace uqxai::npy

namespace uqxai {

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace uqxai
