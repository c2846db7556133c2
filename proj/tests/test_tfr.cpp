#include <doctest.h>

#include <twr/tfr.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace twr;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exhaustive gate search mirroring the documented tie rules
RangeGate reference_gate(const Eigen::MatrixXcd& data, double fraction) {
  const Eigen::VectorXd energy = data.cwiseAbs2().rowwise().sum();
  Index peak = 0;
  energy.maxCoeff(&peak);
  const double total = energy.sum();

  RangeGate best{0, data.rows() - 1};
  bool found = false;
  for (Index m1 = 0; m1 < data.rows(); ++m1) {
    for (Index m2 = m1; m2 < data.rows(); ++m2) {
      if (peak < m1 || peak > m2) continue;
      if (energy.segment(m1, m2 - m1 + 1).sum() < fraction * total) continue;
      const RangeGate candidate{m1, m2};
      if (!found) {
        best = candidate;
        found = true;
        continue;
      }
      const auto center_gap = [peak](const RangeGate& g) {
        return std::abs(2.0 * double(peak) - double(g.m1) - double(g.m2));
      };
      if (candidate.width() < best.width() ||
          (candidate.width() == best.width() && center_gap(candidate) < center_gap(best)) ||
          (candidate.width() == best.width() && center_gap(candidate) == center_gap(best) &&
           candidate.m1 < best.m1)) {
        best = candidate;
      }
    }
  }
  return best;
}

Eigen::VectorXcd tone(Index n, double freq_hz, double prf_hz) {
  Eigen::VectorXcd signal(n);
  for (Index t = 0; t < n; ++t) signal(t) = std::polar(1.0, kTwoPi * freq_hz * double(t) / prf_hz);
  return signal;
}

}  // namespace

TEST_CASE("window tapers match their closed forms") {
  const Eigen::VectorXd hann = make_window(WindowKind::hann, 32);
  REQUIRE(hann.size() == 32);
  for (Index i = 0; i < 32; ++i) {
    const double expected = 0.5 * (1.0 - std::cos(kTwoPi * double(i) / 32.0));
    CHECK(hann(i) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK(hann(16) == doctest::Approx(1.0).epsilon(1e-15));  // periodic form peaks mid-window
  CHECK(hann(0) == 0.0);

  const Eigen::VectorXd rect = make_window(WindowKind::rectangular, 7);
  CHECK(rect.isOnes(0.0));

  CHECK(window_kind_from_string("hann") == WindowKind::hann);
  CHECK(to_string(WindowKind::rectangular) == "rectangular");
  CHECK_THROWS(window_kind_from_string("kaiser"));
}

TEST_CASE("gate selection matches the exhaustive search") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    Eigen::MatrixXcd data(16, 5);
    for (Index i = 0; i < data.size(); ++i) data(i) = {unif(gen), unif(gen)};
    data(3 + trial % 9, 2) += std::complex<double>(4.0, 0.0);  // force a clear peak row
    for (const double f : {0.3, 0.6, 0.9, 0.95}) {
      const RangeGate got = select_range_gate(data, f);
      const RangeGate want = reference_gate(data, f);
      CHECK(got.m1 == want.m1);
      CHECK(got.m2 == want.m2);
    }
  }
}

TEST_CASE("gate selection edge behaviour") {
  Eigen::MatrixXcd data = Eigen::MatrixXcd::Zero(128, 4);
  for (Index m = 100; m <= 110; ++m)
    for (Index t = 0; t < 4; ++t) data(m, t) = {1.0, 0.0};
  const RangeGate gate = select_range_gate(data, 0.95);
  CHECK(gate.m1 >= 95);
  CHECK(gate.m2 <= 115);
  CHECK(gate.width() >= 10);

  const RangeGate full = select_range_gate(data, 1.0);
  CHECK(full.m1 <= 100);
  CHECK(full.m2 >= 110);

  CHECK_THROWS(select_range_gate(Eigen::MatrixXcd::Zero(8, 3), 0.9));
  CHECK_THROWS(select_range_gate(data, 0.0));
  CHECK_THROWS(select_range_gate(data, 1.5));
}

TEST_CASE("range stacking sums the gated bins") {
  Eigen::MatrixXcd data(6, 3);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Index i = 0; i < data.size(); ++i) data(i) = {unif(gen), unif(gen)};

  const Eigen::VectorXcd one = range_stack(data, RangeGate{2, 2});
  for (Index t = 0; t < 3; ++t) CHECK(one(t) == data(2, t));

  const Eigen::VectorXcd wide = range_stack(data, RangeGate{1, 4});
  for (Index t = 0; t < 3; ++t) {
    const std::complex<double> expected =
        data(1, t) + data(2, t) + data(3, t) + data(4, t);
    CHECK(std::abs(wide(t) - expected) <= 1e-14);
  }

  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(8, 2);
  const Eigen::VectorXcd summed = range_stack(ones, RangeGate{0, 4});
  CHECK(summed(0) == std::complex<double>(5.0, 0.0));

  CHECK_THROWS(range_stack(data, RangeGate{4, 1}));
  CHECK_THROWS(range_stack(data, RangeGate{0, 6}));
}

TEST_CASE("max stacking keeps the strongest gated bin") {
  Eigen::MatrixXcd data = Eigen::MatrixXcd::Zero(5, 2);
  data(1, 0) = {1.0, 0.0};
  data(2, 0) = {0.0, 5.0};
  data(3, 0) = {-2.0, 0.0};
  data(2, 1) = {0.3, 0.4};
  const Eigen::VectorXcd picked = range_max_stack(data, RangeGate{1, 3});
  CHECK(picked(0) == std::complex<double>(0.0, 5.0));
  CHECK(picked(1) == std::complex<double>(0.3, 0.4));

  // brute force over random data
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXcd noise(9, 6);
  for (Index i = 0; i < noise.size(); ++i) noise(i) = {unif(gen), unif(gen)};
  const RangeGate gate{2, 7};
  const Eigen::VectorXcd got = range_max_stack(noise, gate);
  for (Index t = 0; t < 6; ++t) {
    std::complex<double> best = noise(gate.m1, t);
    for (Index m = gate.m1; m <= gate.m2; ++m)
      if (std::abs(noise(m, t)) > std::abs(best)) best = noise(m, t);
    CHECK(got(t) == best);
  }
}

TEST_CASE("spectrogram of silence is silent and framing is exact") {
  const StftParams params;
  const Spectrogram spec = spectrogram(Eigen::VectorXcd::Zero(100), params, 113.0);
  CHECK(spec.doppler_bins() == 128);
  CHECK(spec.frames() == 100 - 31);
  CHECK(spec.data.isZero(0.0));

  REQUIRE(spec.frequency_hz.size() == 128);
  CHECK(spec.frequency_hz(0) == doctest::Approx(-113.0 / 2.0).epsilon(1e-12));
  CHECK(spec.frequency_hz(64) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spec.frequency_hz(1) - spec.frequency_hz(0) ==
        doctest::Approx(113.0 / 128.0).epsilon(1e-12));
  REQUIRE(spec.time_s.size() == 69);
  CHECK(spec.time_s(0) == doctest::Approx(15.5 / 113.0).epsilon(1e-12));
  CHECK(spec.time_s(1) - spec.time_s(0) == doctest::Approx(1.0 / 113.0).epsilon(1e-12));
}

TEST_CASE("a pure tone concentrates at its Doppler row") {
  const double prf = 113.0;
  const StftParams params;
  const Spectrogram spec = spectrogram(tone(120, 20.0, prf), params, prf);
  const double bin_hz = prf / 128.0;
  const auto expected_row = static_cast<Index>(std::lround(20.0 / bin_hz)) + 64;
  for (Index frame = 0; frame < spec.frames(); ++frame) {
    Index row = 0;
    spec.data.col(frame).maxCoeff(&row);
    CHECK(std::abs(row - expected_row) <= 1);
  }
  CHECK((spec.data.array() >= 0.0).all());
}

TEST_CASE("one frame agrees with the written-out windowed transform") {
  const double prf = 113.0;
  StftParams params;
  params.window_len = 16;
  params.overlap = 0;
  params.fft_size = 32;
  Eigen::VectorXcd signal(16);
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Index t = 0; t < 16; ++t) signal(t) = {unif(gen), unif(gen)};

  const Spectrogram spec = spectrogram(signal, params, prf);
  REQUIRE(spec.frames() == 1);
  const Eigen::VectorXd window = make_window(WindowKind::hann, 16);
  for (Index row = 0; row < 32; ++row) {
    const Index k = (row + 16) % 32;  // row 16 is bin 0 after the rotation
    std::complex<double> acc = 0.0;
    for (Index t = 0; t < 16; ++t) {
      acc += window(t) * signal(t) * std::polar(1.0, -kTwoPi * double(k) * double(t) / 32.0);
    }
    CHECK(spec.data(row, 0) == doctest::Approx(std::norm(acc)).epsilon(1e-10));
  }
}

TEST_CASE("power scales quadratically and delays shift frames") {
  const double prf = 113.0;
  const StftParams params;
  const Eigen::VectorXcd base = tone(90, 11.0, prf);
  const Spectrogram one = spectrogram(base, params, prf);
  const Spectrogram three = spectrogram((3.0 * base).eval(), params, prf);
  CHECK((three.data - 9.0 * one.data).norm() <= 1e-10 * three.data.norm());

  // prepending samples moves content later without changing it
  Eigen::VectorXcd padded(95);
  padded.head(5).setZero();
  padded.tail(90) = base;
  const Spectrogram delayed = spectrogram(padded, params, prf);
  CHECK((delayed.data.col(5 + 20) - one.data.col(20)).norm() <= 1e-10 * one.data.col(20).norm());
}

TEST_CASE("conjugating the signal mirrors the Doppler axis") {
  const double prf = 113.0;
  const StftParams params;
  const Eigen::VectorXcd base = tone(100, 17.0, prf);
  const Spectrogram fwd = spectrogram(base, params, prf);
  const Spectrogram rev = spectrogram(base.conjugate().eval(), params, prf);
  const Index k = 128;
  for (Index row = 0; row < k; ++row) {
    const Index mirrored = (k - (row + k / 2) % k) % k;       // negate the DFT bin
    const Index mirrored_row = (mirrored + k / 2) % k;        // back to display order
    CHECK(rev.data(mirrored_row, 10) == doctest::Approx(fwd.data(row, 10)).epsilon(1e-9));
  }
}

TEST_CASE("stft parameter validation") {
  StftParams p;
  p.validate();
  CHECK(p.hop() == 1);
  p.overlap = 32;
  CHECK_THROWS(p.validate());
  p = {};
  p.fft_size = 16;
  CHECK_THROWS(p.validate());
  p = {};
  p.window_len = 0;
  CHECK_THROWS(p.validate());

  // signals shorter than one window cannot be framed
  CHECK_THROWS(spectrogram(Eigen::VectorXcd::Zero(16), StftParams{}, 113.0));
  CHECK_THROWS(spectrogram(Eigen::VectorXcd::Zero(64), StftParams{}, 0.0));
}
