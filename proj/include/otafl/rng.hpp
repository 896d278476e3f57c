#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace otafl {

/// What a random stream is used for. Values are part of the stream key, so
/// reordering them changes every simulation output.
enum class StreamKind : std::uint32_t {
  Geometry = 1,
  Uplink = 2,
  CciToPs = 3,
  HarvestInband = 4,
  HarvestOutband = 5,
  Noise = 6,
  TaskDefinition = 7,
  DeviceData = 8,
  TestData = 9,
  DataPartition = 10,
  Subset = 11,
  Shuffle = 12,
  ModelInit = 13,
  MonteCarlo = 14,
};

struct StreamLabel {
  StreamKind kind;
  std::uint64_t entity = 0;
  std::uint64_t round = 0;
};

/// Counter-based generator: the i-th output is a pure function of (key, i).
///
/// The mixing function is the SplitMix64 finaliser applied to key + (i+1)*gamma,
/// i.e. a SplitMix64 sequence seeded with the stream key. Because every output
/// is addressable by index, kernels can draw element j of a noise vector from
/// any thread and still reproduce the serial result bit for bit.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return raw_at(counter_++); }

  [[nodiscard]] result_type raw_at(std::uint64_t index) const;

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal. Consumes two counters, so the k-th call on a fresh
  /// stream equals normal_at(k).
  double normal();
  [[nodiscard]] double normal_at(std::uint64_t index) const;

  /// CN(0, 1): real and imaginary parts each N(0, 1/2).
  std::complex<double> complex_gaussian();

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

RngStream substream(std::uint64_t root_seed, StreamLabel label);

inline std::complex<double> sample_complex_gaussian(RngStream& stream) {
  return stream.complex_gaussian();
}

}  // namespace otafl
