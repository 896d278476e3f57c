#include "otafl/rng.hpp"

#include <cmath>
#include <numbers>

namespace otafl {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + kGamma + (h << 6) + (h >> 2)));
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double to_unit_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::result_type RngStream::raw_at(std::uint64_t index) const {
  return mix64(key_ + (index + 1) * kGamma);
}

double RngStream::uniform() { return to_unit((*this)()); }

double RngStream::uniform_open() { return to_unit_open((*this)()); }

std::size_t RngStream::uniform_index(std::size_t n) {
  // Lemire's multiply-shift with rejection of the biased low region.
  const std::uint64_t range = n;
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double RngStream::normal_at(std::uint64_t index) const {
  const double u1 = to_unit_open(raw_at(2 * index));
  const double u2 = to_unit(raw_at(2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::normal() {
  // Keep counters even-aligned so normal() and normal_at() agree.
  const std::uint64_t index = (counter_ + 1) / 2;
  counter_ = 2 * index + 2;
  return normal_at(index);
}

std::complex<double> RngStream::complex_gaussian() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u) / sqrt(2)
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

RngStream substream(std::uint64_t root_seed, StreamLabel label) {
  std::uint64_t h = mix64(root_seed + kGamma);
  h = combine(h, static_cast<std::uint64_t>(label.kind));
  h = combine(h, label.entity);
  h = combine(h, label.round);
  return RngStream(h);
}

}  // namespace otafl
