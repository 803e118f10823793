// Test oracle for the subprocess protocol: reads a B x H x W tensor and
// writes B x K uniform rows. Behaviour is selected by the first argument
// when three arguments are given:
//   echo_oracle [mode] <input.npy> <output.npy>
// modes: uniform3 (default), uniform4, fail, malformed, mirror
#include <cstdio>
#include <string>
#include <vector>

#include "uqxai/npy.hpp"

int main(int argc, char** argv) {
  if (argc != 3 && argc != 4) {
    std::fprintf(stderr, "usage: echo_oracle [mode] <input.npy> <output.npy>\n");
    return 2;
  }
  const std::string mode = argc == 4 ? argv[1] : "uniform3";
  const std::string in = argv[argc - 2];
  const std::string out = argv[argc - 1];
  std::printf("echo_oracle mode=%s input=%s\n", mode.c_str(), in.c_str());
  if (mode == "fail") {
    std::fprintf(stderr, "echo_oracle: failing on purpose\n");
    return 3;
  }
  const uqxai::npy::Array a = uqxai::npy::read(in);
  if (a.rank() != 3) return 4;
  const std::size_t b = a.shape[0];
  if (mode == "malformed") {
    uqxai::write_file_atomic(out, "not an npy file");
    return 0;
  }
  if (mode == "mirror") {
    // Row b holds the first two pixels of image b, renormalized.
    std::vector<double> rows(b * 2);
    for (std::size_t i = 0; i < b; ++i) {
      const double x = a.data[i * a.shape[1] * a.shape[2]];
      rows[i * 2] = x;
      rows[i * 2 + 1] = 1.0 - x;
    }
    const std::size_t shape[] = {b, 2};
    uqxai::npy::write(out, shape, rows);
    return 0;
  }
  const std::size_t k = mode == "uniform4" ? 4 : 3;
  std::vector<double> rows(b * k, 1.0 / static_cast<double>(k));
  const std::size_t shape[] = {b, k};
  uqxai::npy::write(out, shape, rows, uqxai::npy::Dtype::kFloat32);
  return 0;
}
