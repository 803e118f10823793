#include "uqxai/npy.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace uqxai::npy {

namespace {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string_view descr(Dtype d) {
  switch (d) {
    case Dtype::kFloat32:
      return "<f4";
    case Dtype::kFloat64:
      return "<f8";
    case Dtype::kInt32:
      return "<i4";
    case Dtype::kInt64:
      return "<i8";
    case Dtype::kUint8:
      return "|u1";
  }
  return "<f8";
}

std::size_t item_size(Dtype d) {
  switch (d) {
    case Dtype::kFloat32:
    case Dtype::kInt32:
      return 4;
    case Dtype::kFloat64:
    case Dtype::kInt64:
      return 8;
    case Dtype::kUint8:
      return 1;
  }
  return 8;
}

Dtype parse_descr(std::string_view s) {
  if (s == "<f4") return Dtype::kFloat32;
  if (s == "<f8") return Dtype::kFloat64;
  if (s == "<i4") return Dtype::kInt32;
  if (s == "<i8") return Dtype::kInt64;
  if (s == "|u1" || s == "<u1") return Dtype::kUint8;
  throw ValidationError("unsupported NPY dtype '" + std::string(s) + "'");
}

std::string_view header_value(std::string_view header, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  const auto pos = header.find(quoted);
  if (pos == std::string_view::npos) throw ValidationError("NPY header lacks " + quoted);
  auto rest = header.substr(pos + quoted.size());
  const auto colon = rest.find(':');
  if (colon == std::string_view::npos) throw ValidationError("malformed NPY header");
  rest = rest.substr(colon + 1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return rest;
}

template <typename T>
void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T load_raw(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

std::string encode(std::span<const std::size_t> shape, std::span<const double> data, Dtype dtype) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count != data.size()) throw ValidationError("NPY encode: shape does not match data size");

  std::ostringstream dict;
  dict << "{'descr': '" << descr(dtype) << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  // Pad with spaces so magic + version + length + header is a multiple of 64.
  const std::size_t preamble = kMagicLen + 2 + 2;
  std::size_t total = preamble + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  append_raw<std::uint16_t>(out, static_cast<std::uint16_t>(header.size()));
  out += header;
  out.reserve(out.size() + data.size() * item_size(dtype));
  for (double v : data) {
    switch (dtype) {
      case Dtype::kFloat32:
        append_raw<float>(out, static_cast<float>(v));
        break;
      case Dtype::kFloat64:
        append_raw<double>(out, v);
        break;
      case Dtype::kInt32:
        append_raw<std::int32_t>(out, static_cast<std::int32_t>(std::llround(v)));
        break;
      case Dtype::kInt64:
        append_raw<std::int64_t>(out, static_cast<std::int64_t>(std::llround(v)));
        break;
      case Dtype::kUint8:
        append_raw<std::uint8_t>(out, static_cast<std::uint8_t>(std::llround(v)));
        break;
    }
  }
  return out;
}

Array decode(std::string_view bytes) {
  if (bytes.size() < kMagicLen + 4 || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen)) {
    throw ValidationError("not an NPY file (bad magic)");
  }
  const auto major = static_cast<unsigned char>(bytes[kMagicLen]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = load_raw<std::uint16_t>(bytes.data() + kMagicLen + 2);
    offset = kMagicLen + 4;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < kMagicLen + 6) throw ValidationError("truncated NPY header");
    header_len = load_raw<std::uint32_t>(bytes.data() + kMagicLen + 2);
    offset = kMagicLen + 6;
  } else {
    throw ValidationError("unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw ValidationError("truncated NPY header");
  const std::string_view header = bytes.substr(offset, header_len);
  offset += header_len;

  Array arr;
  auto d = header_value(header, "descr");
  if (d.empty() || d.front() != '\'') throw ValidationError("malformed NPY descr");
  d.remove_prefix(1);
  arr.dtype = parse_descr(d.substr(0, d.find('\'')));

  if (header_value(header, "fortran_order").substr(0, 5) != "False") {
    throw ValidationError("Fortran-ordered NPY arrays are not supported");
  }

  auto s = header_value(header, "shape");
  if (s.empty() || s.front() != '(') throw ValidationError("malformed NPY shape");
  s = s.substr(1, s.find(')') - 1);
  std::size_t count = 1;
  while (!s.empty()) {
    while (!s.empty() && (s.front() == ' ' || s.front() == ',')) s.remove_prefix(1);
    if (s.empty()) break;
    std::size_t dim = 0;
    std::size_t used = 0;
    while (used < s.size() && s[used] >= '0' && s[used] <= '9') {
      dim = dim * 10 + static_cast<std::size_t>(s[used] - '0');
      ++used;
    }
    if (used == 0) throw ValidationError("malformed NPY shape");
    arr.shape.push_back(dim);
    count *= dim;
    s.remove_prefix(used);
  }

  const std::size_t width = item_size(arr.dtype);
  if (bytes.size() - offset != count * width) {
    throw ValidationError("NPY payload has " + std::to_string(bytes.size() - offset) +
                          " bytes, expected " + std::to_string(count * width));
  }
  arr.data.resize(count);
  const char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i, p += width) {
    switch (arr.dtype) {
      case Dtype::kFloat32:
        arr.data[i] = load_raw<float>(p);
        break;
      case Dtype::kFloat64:
        arr.data[i] = load_raw<double>(p);
        break;
      case Dtype::kInt32:
        arr.data[i] = load_raw<std::int32_t>(p);
        break;
      case Dtype::kInt64:
        arr.data[i] = static_cast<double>(load_raw<std::int64_t>(p));
        break;
      case Dtype::kUint8:
        arr.data[i] = load_raw<std::uint8_t>(p);
        break;
    }
  }
  return arr;
}

Array read(const std::filesystem::path& path) {
  try {
    return decode(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write(const std::filesystem::path& path, std::span<const std::size_t> shape,
           std::span<const double> data, Dtype dtype) {
  write_file_atomic(path, encode(shape, data, dtype));
}

Matrix read_matrix(const std::filesystem::path& path) {
  Array a = read(path);
  if (a.rank() != 2) {
    throw ValidationError(path.string() + ": expected a 2-D array, got rank " +
                          std::to_string(a.rank()));
  }
  return Matrix(a.shape[0], a.shape[1], std::move(a.data));
}

Tensor3 read_tensor3(const std::filesystem::path& path) {
  Array a = read(path);
  if (a.rank() != 3) {
    throw ValidationError(path.string() + ": expected a 3-D array, got rank " +
                          std::to_string(a.rank()));
  }
  return Tensor3(a.shape[0], a.shape[1], a.shape[2], std::move(a.data));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, Dtype dtype) {
  const std::size_t shape[] = {m.rows, m.cols};
  write(path, shape, m.data, dtype);
}

void write_tensor3(const std::filesystem::path& path, const Tensor3& t, Dtype dtype) {
  const std::size_t shape[] = {t.d0, t.d1, t.d2};
  write(path, shape, t.data, dtype);
}

}  // namespace uqxai::npy

namespace uqxai {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ComputationError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ComputationError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ComputationError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace uqxai
