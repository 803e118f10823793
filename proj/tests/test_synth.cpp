#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "uqxai/calibration.hpp"
#include "uqxai/metrics.hpp"
#include "uqxai/npy.hpp"
#include "uqxai/synth.hpp"
#include "uqxai/uncertainty.hpp"

using namespace uqxai;

namespace {

struct Halves {
  LogitsMatrix cal, test;
  LabelVector ycal, ytest;
};

Halves split(const SynthFixture& fx) {
  const auto& c = fx.config;
  const std::size_t k = c.num_classes;
  Matrix a(c.n_cal, k), b(c.n_test, k);
  std::copy(fx.observed_logits.data.begin(), fx.observed_logits.data.begin() + c.n_cal * k, a.data.begin());
  std::copy(fx.observed_logits.data.begin() + c.n_cal * k, fx.observed_logits.data.end(), b.data.begin());
  return {LogitsMatrix(a), LogitsMatrix(b),
          LabelVector({fx.labels.begin(), fx.labels.begin() + c.n_cal}, k),
          LabelVector({fx.labels.begin() + c.n_cal, fx.labels.end()}, k)};
}

}  // namespace

TEST_CASE("fixtures are deterministic in the seed") {
  SynthConfig c;
  c.seed = 5;
  c.n_cal = 50;
  c.n_test = 60;
  const auto a = generate_fixture(c);
  const auto b = generate_fixture(c);
  CHECK(a.observed_logits.data == b.observed_logits.data);
  CHECK(a.labels == b.labels);
  CHECK(a.passes == b.passes);
  CHECK(a.images == b.images);
  c.seed = 6;
  CHECK(generate_fixture(c).labels != a.labels);
}

TEST_CASE("observed logits are c times the base logits") {
  SynthConfig c;
  c.seed = 1;
  c.n_cal = 20;
  c.n_test = 20;
  c.miscalibration = 2.5;
  const auto fx = generate_fixture(c);
  for (std::size_t i = 0; i < fx.base_logits.data.size(); ++i) {
    CHECK(fx.observed_logits.data[i] == 2.5 * fx.base_logits.data[i]);
  }
}

TEST_CASE("zero pass noise gives zero mutual information") {
  SynthConfig c;
  c.seed = 2;
  c.n_cal = 30;
  c.n_test = 30;
  c.passes = 5;
  c.pass_noise = 0.0;
  const auto fx = generate_fixture(c);
  for (double mi : mutual_information(PassStack(fx.passes, PassKind::kLogits))) CHECK(std::fabs(mi) < 1e-12);
}

TEST_CASE("c = 1 fixtures fit a temperature near one") {
  SynthConfig c;
  c.seed = 3;
  c.n_cal = 5000;
  c.n_test = 10;
  c.passes = 1;
  const auto h = split(generate_fixture(c));
  CHECK(std::fabs(fit_temperature(h.cal, h.ycal).temperature - 1.0) < 0.1);
}

TEST_CASE("temperature scaling lowers evaluation ECE in most seeds") {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig c;
    c.seed = 100 + seed;
    c.passes = 1;
    c.miscalibration = 2.0;
    const auto h = split(generate_fixture(c));
    const double t = fit_temperature(h.cal, h.ycal).temperature;
    const double before = ece(apply_temperature(h.test, 1.0), h.ytest).ece;
    const double after = ece(apply_temperature(h.test, t), h.ytest).ece;
    ok += after <= before;
  }
  CHECK(ok >= 18);
}

TEST_CASE("planted superpixels are bright cells of the class image") {
  SynthConfig c;
  c.seed = 4;
  c.n_cal = 10;
  c.n_test = 10;
  const auto fx = generate_fixture(c);
  const std::size_t side = c.image_size;
  for (std::size_t k = 0; k < c.num_classes; ++k) {
    double in = 0.0, out = 0.0;
    std::size_t nin = 0, nout = 0;
    for (std::size_t p = 0; p < side * side; ++p) {
      const double v = fx.images.slice(k)[p];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (fx.segmentation[p] == fx.planted_superpixel[k]) {
        in += v;
        ++nin;
      } else {
        out += v;
        ++nout;
      }
    }
    CHECK(in / static_cast<double>(nin) > out / static_cast<double>(nout));
  }
}

TEST_CASE("fixture directories hold every artifact") {
  SynthConfig c;
  c.seed = 7;
  c.n_cal = 20;
  c.n_test = 20;
  const auto dir = std::filesystem::temp_directory_path() / "uqxai-test-synth";
  std::filesystem::remove_all(dir);
  write_fixture(generate_fixture(c), dir);
  for (const char* f : {"logits.npy", "passes.npy", "manifest.csv", "split.json", "images.npy",
                        "segmentation.npy", "planted.csv", "oracle_0.json", "synth.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  CHECK(npy::read_matrix(dir / "logits.npy").rows == 40);
  CHECK_THROWS_AS(generate_fixture(SynthConfig{.passes = 0}), ValidationError);
}
