#pragma once

#include <array>
#include <cmath>

namespace berwald {

// Coordinates (t, r, theta, phi) and velocities on the tangent bundle.
struct SamplePoint {
  double t = 0, r = 0, th = 0, ph = 0;
  double dt = 0, dr = 0, dth = 0, dph = 0;

  double w() const {
    const double s = std::sin(th);
    return std::sqrt(dth * dth + s * s * dph * dph);
  }
  std::array<double, 4> x() const { return {t, r, th, ph}; }
  std::array<double, 4> v() const { return {dt, dr, dth, dph}; }
  double speed() const { return std::sqrt(dt * dt + dr * dr + dth * dth + dph * dph); }

  static SamplePoint from(const std::array<double, 4>& x, const std::array<double, 4>& v) {
    return {x[0], x[1], x[2], x[3], v[0], v[1], v[2], v[3]};
  }
};

}  // namespace berwald
