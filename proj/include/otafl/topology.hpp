#pragma once

#include <cstddef>
#include <vector>

#include "otafl/grid.hpp"
#include "otafl/rng.hpp"

namespace otafl {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

/// Symmetric placement band: each coordinate lies in [-outer, -inner] U [inner, outer].
struct Band {
  double inner = 0.0;
  double outer = 0.0;
  bool operator==(const Band&) const = default;
};

struct Placement {
  std::size_t devices = 10;
  std::size_t inband = 100;
  std::size_t outband = 100;
  Band device_band{20.0, 100.0};
  Band inband_band{120.0, 140.0};
  Band outband_band{25.0, 100.0};
};

/// Static node positions with the PS at the origin, plus every distance the
/// channel and harvesting models need.
struct Geometry {
  std::vector<Point> device_pos;
  std::vector<Point> inband_pos;
  std::vector<Point> outband_pos;
  std::vector<double> d_m;     // device -> PS
  std::vector<double> d_i_in;  // interferer -> PS
  Grid d_mi_in;                // device x interferer
  Grid d_mk_out;               // device x outband source

  [[nodiscard]] std::size_t devices() const { return device_pos.size(); }
  [[nodiscard]] std::size_t interferers() const { return inband_pos.size(); }
  [[nodiscard]] std::size_t outband_sources() const { return outband_pos.size(); }
};

/// Throws ConfigError when inner > outer or inner < 0.
void validate_band(const Band& band, const char* name);

/// One coordinate drawn uniformly over the two symmetric intervals of `band`.
double sample_band_coordinate(const Band& band, RngStream& stream);

/// Precomputes all distances; throws DomainError if any distance is zero.
Geometry geometry_from_positions(std::vector<Point> devices, std::vector<Point> inband,
                                 std::vector<Point> outband);

Geometry build_geometry(const Placement& placement, RngStream stream);

}  // namespace otafl
