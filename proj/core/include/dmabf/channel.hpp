#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dmabf/numerics.hpp"
#include "dmabf/rng.hpp"

namespace dmabf {

using Point3 = Eigen::Vector3d;

/// Uniform planar array in the xy-plane, boresight along +z, centered on the
/// origin. Rows (microstrips) are spaced by d_y along y, elements within a
/// row by d_x along x. Element (i, l) (zero-based) is stored at index
/// i * n_cols + l.
struct ArrayGeometry {
  int n_rows = 0;
  int n_cols = 0;
  double d_x = 0.0;
  double d_y = 0.0;
  double aperture_side = 0.0;
  double gain_exponent = 2.0;
  std::vector<Point3> element_positions;

  [[nodiscard]] int size() const { return n_rows * n_cols; }
  [[nodiscard]] int index(int row, int col) const { return row * n_cols + col; }
  /// Distance of element `col` from the feed along its microstrip.
  [[nodiscard]] double feed_offset(int col) const { return col * d_x; }

  /// Explicit grid. The aperture side is set to the larger grid extent.
  static ArrayGeometry grid(int n_rows, int n_cols, double d_x, double d_y,
                            double gain_exponent = 2.0);

  /// Fixed square aperture of side `aperture`: n_rows = floor(D / d_y),
  /// n_cols = floor(D / d_x). With d_y = lambda/2 this is floor(2D/lambda).
  static ArrayGeometry from_aperture(double aperture, double d_x, double d_y,
                                     double gain_exponent = 2.0);
};

struct ChannelVector {
  int user_index = 0;
  ComplexVector entries;
  Point3 user_position = Point3::Zero();
};

inline double wavelength_from_frequency(double frequency_hz) {
  return kSpeedOfLight / frequency_hz;
}

/// Element radiation pattern 2(g+1)cos^g(psi) on [0, pi/2], zero beyond.
double element_gain(double psi, double g);

/// 2 D^2 / lambda.
double fraunhofer_distance(double aperture_length, double wavelength);

/// Spherical-wave line-of-sight gains from every element to `user`.
/// psi is measured per element from the +z axis.
ChannelVector channel_vector(const ArrayGeometry& geometry, const Point3& user,
                             double wavelength, int user_index = 0);

enum class Zone { kNear, kFar, kCombined };

/// Draws users on half-circles in the xz-plane (z >= 0) with
/// theta ~ U(-pi/2, pi/2) and the radius uniform on the zone's interval
/// (near: 0.1..1 d_F, far: 1..5 d_F, combined: 0.1..5 d_F). The lower radius
/// is clipped to `min_radius`.
class UserSampler {
 public:
  UserSampler(Zone zone, double fraunhofer_distance, std::uint64_t seed,
              double min_radius = 0.0);
  UserSampler(Zone zone, double fraunhofer_distance, CounterRng rng,
              double min_radius = 0.0);

  [[nodiscard]] Zone zone() const { return zone_; }
  [[nodiscard]] double radius_min() const { return r_lo_; }
  [[nodiscard]] double radius_max() const { return r_hi_; }

  std::vector<Point3> sample(int k);

 private:
  Zone zone_;
  double r_lo_;
  double r_hi_;
  CounterRng rng_;
};

/// 1.2x the aperture diagonal; users closer than this sit in the reactive
/// zone of the aperture.
double reactive_zone_radius(double aperture_side);

}  // namespace dmabf
