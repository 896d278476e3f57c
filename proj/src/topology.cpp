#include "otafl/topology.hpp"

#include <cmath>
#include <string>

#include "otafl/error.hpp"

namespace otafl {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void validate_band(const Band& band, const char* name) {
  if (!(band.inner >= 0.0) || !(band.inner <= band.outer) || !std::isfinite(band.outer)) {
    throw ConfigError(std::string(name) + ": band requires 0 <= inner <= outer (got " +
                      std::to_string(band.inner) + ", " + std::to_string(band.outer) + ")");
  }
}

double sample_band_coordinate(const Band& band, RngStream& stream) {
  // Both intervals have the same length, so each side gets half the mass.
  const double magnitude = stream.uniform(band.inner, band.outer);
  return stream.uniform() < 0.5 ? -magnitude : magnitude;
}

namespace {

double checked_distance(Point a, Point b, const char* what) {
  const double d = distance(a, b);
  if (!(d > 0.0)) throw DomainError(std::string("zero distance between ") + what);
  return d;
}

std::vector<Point> place(std::size_t count, const Band& band, RngStream& stream) {
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    p.x = sample_band_coordinate(band, stream);
    p.y = sample_band_coordinate(band, stream);
  }
  return pts;
}

}  // namespace

Geometry geometry_from_positions(std::vector<Point> devices, std::vector<Point> inband,
                                 std::vector<Point> outband) {
  Geometry g;
  g.device_pos = std::move(devices);
  g.inband_pos = std::move(inband);
  g.outband_pos = std::move(outband);

  const Point ps{};
  g.d_m.reserve(g.device_pos.size());
  for (const auto& p : g.device_pos) g.d_m.push_back(checked_distance(p, ps, "device and PS"));
  g.d_i_in.reserve(g.inband_pos.size());
  for (const auto& p : g.inband_pos) {
    g.d_i_in.push_back(checked_distance(p, ps, "interferer and PS"));
  }

  g.d_mi_in = Grid(g.device_pos.size(), g.inband_pos.size());
  g.d_mk_out = Grid(g.device_pos.size(), g.outband_pos.size());
  for (std::size_t m = 0; m < g.device_pos.size(); ++m) {
    for (std::size_t i = 0; i < g.inband_pos.size(); ++i) {
      g.d_mi_in(m, i) = checked_distance(g.device_pos[m], g.inband_pos[i], "device and interferer");
    }
    for (std::size_t k = 0; k < g.outband_pos.size(); ++k) {
      g.d_mk_out(m, k) =
          checked_distance(g.device_pos[m], g.outband_pos[k], "device and outband source");
    }
  }
  return g;
}

Geometry build_geometry(const Placement& placement, RngStream stream) {
  validate_band(placement.device_band, "device_band");
  validate_band(placement.inband_band, "inband_band");
  validate_band(placement.outband_band, "outband_band");
  // One child stream per node group, so adding devices does not move the sources.
  RngStream device_stream(mix64(stream.key() ^ 0x1ULL));
  RngStream inband_stream(mix64(stream.key() ^ 0x2ULL));
  RngStream outband_stream(mix64(stream.key() ^ 0x3ULL));
  auto devices = place(placement.devices, placement.device_band, device_stream);
  auto inband = place(placement.inband, placement.inband_band, inband_stream);
  auto outband = place(placement.outband, placement.outband_band, outband_stream);
  return geometry_from_positions(std::move(devices), std::move(inband), std::move(outband));
}

}  // namespace otafl
