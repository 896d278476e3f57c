#include <doctest.h>

#include <cmath>

#include "otafl/error.hpp"
#include "otafl/topology.hpp"

using namespace otafl;

TEST_CASE("distances from explicit positions") {
  const auto g = geometry_from_positions({{60, 80}, {20, 0}}, {{120, 0}}, {{0, 30}});
  CHECK(g.d_m[0] == 100.0);
  CHECK(g.d_m[1] == 20.0);
  CHECK(g.d_i_in[0] == 120.0);
  CHECK(g.d_mi_in(1, 0) == 100.0);
  CHECK(g.d_mk_out(1, 0) == doctest::Approx(std::sqrt(20.0 * 20.0 + 30.0 * 30.0)));
}

TEST_CASE("coincident nodes are rejected") {
  CHECK_THROWS_AS(geometry_from_positions({{0, 0}}, {}, {}), DomainError);
  CHECK_THROWS_AS(geometry_from_positions({{30, 30}}, {{30, 30}}, {}), DomainError);
}

TEST_CASE("band coordinates stay in the band") {
  auto s = substream(1, {StreamKind::Geometry});
  const Band band{20, 100};
  for (int i = 0; i < 10000; ++i) {
    const double x = sample_band_coordinate(band, s);
    REQUIRE(std::abs(x) >= 20.0);
    REQUIRE(std::abs(x) <= 100.0);
  }
}

TEST_CASE("invalid bands are configuration errors") {
  CHECK_THROWS_AS(validate_band({100, 20}, "device_band"), ConfigError);
  CHECK_THROWS_AS(validate_band({-1, 20}, "device_band"), ConfigError);
  Placement p;
  p.inband_band = {150, 140};
  CHECK_THROWS_AS(build_geometry(p, substream(1, {StreamKind::Geometry})), ConfigError);
}

TEST_CASE("sampled geometry is consistent with its positions") {
  const Placement p;
  const auto g = build_geometry(p, substream(4, {StreamKind::Geometry}));
  REQUIRE(g.devices() == p.devices);
  REQUIRE(g.interferers() == p.inband);
  REQUIRE(g.outband_sources() == p.outband);

  auto in_band = [](Point q, Band b) {
    return std::abs(q.x) >= b.inner && std::abs(q.x) <= b.outer && std::abs(q.y) >= b.inner &&
           std::abs(q.y) <= b.outer;
  };
  for (std::size_t m = 0; m < g.devices(); ++m) {
    CHECK(in_band(g.device_pos[m], p.device_band));
    CHECK(g.d_m[m] == distance(g.device_pos[m], {0, 0}));
    for (std::size_t i = 0; i < g.interferers(); ++i) {
      const double d = g.d_mi_in(m, i);
      CHECK(d > 0.0);
      CHECK(d == distance(g.inband_pos[i], g.device_pos[m]));
      // triangle through the PS
      CHECK(d <= g.d_m[m] + g.d_i_in[i] + 1e-9);
    }
    for (std::size_t k = 0; k < g.outband_sources(); ++k) {
      CHECK(g.d_mk_out(m, k) > 0.0);
      CHECK(g.d_mk_out(m, k) == distance(g.outband_pos[k], g.device_pos[m]));
    }
  }
  for (const auto& q : g.inband_pos) CHECK(in_band(q, p.inband_band));
  for (const auto& q : g.outband_pos) CHECK(in_band(q, p.outband_band));
}

TEST_CASE("geometry is reproducible and source positions ignore the device count") {
  Placement small;
  Placement large;
  large.devices = 50;
  const auto a = build_geometry(small, substream(8, {StreamKind::Geometry}));
  const auto b = build_geometry(small, substream(8, {StreamKind::Geometry}));
  const auto c = build_geometry(large, substream(8, {StreamKind::Geometry}));
  CHECK(a.device_pos == b.device_pos);
  CHECK(a.inband_pos == c.inband_pos);
  CHECK(a.outband_pos == c.outband_pos);
  for (std::size_t m = 0; m < small.devices; ++m) CHECK(a.device_pos[m] == c.device_pos[m]);
}
