#include "dmabf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dmabf {
namespace {

int floor_count(double ratio) {
  // Guard against ratios like 2.9999999999 that are exact integers in exact arithmetic.
  return static_cast<int>(std::floor(ratio + 1e-9));
}

double gain_from_cos(double cos_psi, double g) {
  if (cos_psi < 0.0) return 0.0;
  return 2.0 * (g + 1.0) * std::pow(cos_psi, g);
}

}  // namespace

ArrayGeometry ArrayGeometry::grid(int n_rows, int n_cols, double d_x, double d_y,
                                  double gain_exponent) {
  if (n_rows < 1 || n_cols < 1) {
    throw DomainError("ArrayGeometry: need at least one row and one column");
  }
  if (!(d_x > 0.0) || !(d_y > 0.0)) {
    throw DomainError("ArrayGeometry: spacings must be positive");
  }
  ArrayGeometry geo;
  geo.n_rows = n_rows;
  geo.n_cols = n_cols;
  geo.d_x = d_x;
  geo.d_y = d_y;
  geo.gain_exponent = gain_exponent;
  geo.aperture_side = std::max(n_rows * d_y, n_cols * d_x);
  geo.element_positions.reserve(static_cast<std::size_t>(n_rows) * n_cols);
  const double x0 = 0.5 * (n_cols - 1) * d_x;
  const double y0 = 0.5 * (n_rows - 1) * d_y;
  for (int i = 0; i < n_rows; ++i) {
    for (int l = 0; l < n_cols; ++l) {
      geo.element_positions.emplace_back(l * d_x - x0, i * d_y - y0, 0.0);
    }
  }
  return geo;
}

ArrayGeometry ArrayGeometry::from_aperture(double aperture, double d_x, double d_y,
                                           double gain_exponent) {
  if (!(aperture > 0.0)) throw DomainError("ArrayGeometry: aperture must be positive");
  if (!(d_x > 0.0) || !(d_y > 0.0)) {
    throw DomainError("ArrayGeometry: spacings must be positive");
  }
  const int n_rows = floor_count(aperture / d_y);
  const int n_cols = floor_count(aperture / d_x);
  if (n_rows < 1 || n_cols < 1) {
    throw DomainError("ArrayGeometry: aperture smaller than one element spacing");
  }
  ArrayGeometry geo = grid(n_rows, n_cols, d_x, d_y, gain_exponent);
  geo.aperture_side = aperture;
  return geo;
}

double element_gain(double psi, double g) {
  if (!(psi >= 0.0 && psi <= kPi)) {
    throw DomainError("element_gain: psi must lie in [0, pi]");
  }
  if (psi > kPi / 2) return 0.0;
  return gain_from_cos(psi == kPi / 2 ? 0.0 : std::cos(psi), g);
}

double fraunhofer_distance(double aperture_length, double wavelength) {
  if (!(aperture_length > 0.0) || !(wavelength > 0.0)) {
    throw DomainError("fraunhofer_distance: inputs must be positive");
  }
  return 2.0 * aperture_length * aperture_length / wavelength;
}

ChannelVector channel_vector(const ArrayGeometry& geometry, const Point3& user,
                             double wavelength, int user_index) {
  if (!(wavelength > 0.0)) throw DomainError("channel_vector: wavelength must be positive");
  const double wavenumber = 2.0 * kPi / wavelength;
  ChannelVector out;
  out.user_index = user_index;
  out.user_position = user;
  out.entries.resize(geometry.size());
  for (int n = 0; n < geometry.size(); ++n) {
    const Point3 delta = user - geometry.element_positions[static_cast<std::size_t>(n)];
    const double dist = delta.norm();
    if (!(dist > 0.0)) {
      throw DomainError("channel_vector: user coincides with element " + std::to_string(n));
    }
    const double gain = gain_from_cos(delta.z() / dist, geometry.gain_exponent);
    const double amplitude = std::sqrt(gain) * wavelength / (4.0 * kPi * dist);
    out.entries(n) = amplitude * std::exp(-kJ * (wavenumber * dist));
  }
  return out;
}

UserSampler::UserSampler(Zone zone, double fraunhofer_distance, std::uint64_t seed,
                         double min_radius)
    : UserSampler(zone, fraunhofer_distance, CounterRng(seed), min_radius) {}

UserSampler::UserSampler(Zone zone, double fraunhofer_distance, CounterRng rng,
                         double min_radius)
    : zone_(zone), rng_(rng) {
  if (!(fraunhofer_distance > 0.0)) {
    throw DomainError("UserSampler: Fraunhofer distance must be positive");
  }
  switch (zone) {
    case Zone::kNear:
      r_lo_ = 0.1 * fraunhofer_distance;
      r_hi_ = fraunhofer_distance;
      break;
    case Zone::kFar:
      r_lo_ = fraunhofer_distance;
      r_hi_ = 5.0 * fraunhofer_distance;
      break;
    case Zone::kCombined:
      r_lo_ = 0.1 * fraunhofer_distance;
      r_hi_ = 5.0 * fraunhofer_distance;
      break;
  }
  r_lo_ = std::max(r_lo_, min_radius);
  if (!(r_lo_ < r_hi_)) {
    throw DomainError("UserSampler: minimum radius leaves an empty sampling interval");
  }
}

std::vector<Point3> UserSampler::sample(int k) {
  if (k < 1) throw DomainError("UserSampler: need at least one user");
  std::vector<Point3> users;
  users.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double theta = rng_.uniform(-kPi / 2, kPi / 2);
    const double r = rng_.uniform(r_lo_, r_hi_);
    users.emplace_back(r * std::sin(theta), 0.0, r * std::cos(theta));
  }
  return users;
}

double reactive_zone_radius(double aperture_side) {
  return 1.2 * std::sqrt(2.0) * aperture_side;
}

}  // namespace dmabf
