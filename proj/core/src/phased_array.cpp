#include "leocx/phased_array.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "leocx/types.hpp"

namespace leocx {

namespace {

constexpr double kUnitNormTol = 1e-6;

void check_unit(const Vec3& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > kUnitNormTol) {
    throw std::invalid_argument(std::string("steered_gain: ") + what +
                                " must be a unit vector");
  }
}

// Magnitude pattern of n elements along one axis: sin(n*pi*x/2)/sin(pi*x/2)
// with x = 2 * spacing * (direction-cosine offset). The kernel is exactly
// periodic in x with period 2, so reduce first; x = 0 (and the grating
// edges x = +/-2 that reduce onto it) is the n-element peak.
double axis_factor(int n, double cosine_offset, double spacing) {
  double x = std::remainder(2.0 * spacing * cosine_offset, 2.0);
  if (x == 0.0) return static_cast<double>(n);
  return std::sin(0.5 * kPi * n * x) / std::sin(0.5 * kPi * x);
}

}  // namespace

void validate(const ArraySpec& spec) {
  if (spec.rows < 1) {
    throw std::invalid_argument("ArraySpec.rows: must be >= 1");
  }
  if (spec.cols < 1) {
    throw std::invalid_argument("ArraySpec.cols: must be >= 1");
  }
  if (!(spec.element_spacing_wavelengths > 0.0)) {
    throw std::invalid_argument(
        "ArraySpec.element_spacing_wavelengths: must be positive");
  }
}

double max_gain_dbi(const ArraySpec& spec) {
  validate(spec);
  return 10.0 * std::log10(static_cast<double>(spec.element_count()));
}

double steered_gain_linear(const ArraySpec& spec, const Vec3& steer_dir,
                           const Vec3& eval_dir) {
  validate(spec);
  check_unit(steer_dir, "steer_dir");
  check_unit(eval_dir, "eval_dir");
  // Back hemisphere is blanked on both sides so the pattern stays
  // reciprocal: a direction we cannot radiate into is also one we cannot
  // steer from.
  if (steer_dir.z < 0.0 || eval_dir.z < 0.0) return 0.0;
  // cols elements lie along x, rows along y.
  double fu = axis_factor(spec.cols, eval_dir.x - steer_dir.x,
                          spec.element_spacing_wavelengths);
  double fv = axis_factor(spec.rows, eval_dir.y - steer_dir.y,
                          spec.element_spacing_wavelengths);
  double amplitude = fu * fv;
  return amplitude * amplitude / static_cast<double>(spec.element_count());
}

double steered_gain_dbi(const ArraySpec& spec, const Vec3& steer_dir,
                        const Vec3& eval_dir) {
  double g = steered_gain_linear(spec, steer_dir, eval_dir);
  if (g <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(g);
}

ArrayFrame satellite_array_frame(const Vec3& sat_pos_m,
                                 const Vec3& sat_vel_m_s) {
  double r = sat_pos_m.norm();
  if (r == 0.0) {
    throw std::invalid_argument("satellite_array_frame: position is zero");
  }
  Vec3 z = -(sat_pos_m / r);  // nadir
  Vec3 along = sat_vel_m_s - sat_vel_m_s.dot(z) * z;
  double a = along.norm();
  if (a < 1e-9 * sat_vel_m_s.norm() || sat_vel_m_s.norm() == 0.0) {
    throw std::invalid_argument(
        "satellite_array_frame: velocity is radial, along-track axis "
        "undefined");
  }
  Vec3 x = along / a;
  return {x, z.cross(x), z};
}

ArrayFrame user_array_frame(const Vec3& user_pos_m) {
  double r = user_pos_m.norm();
  if (r == 0.0) {
    throw std::invalid_argument("user_array_frame: position is zero");
  }
  Vec3 z = user_pos_m / r;  // zenith
  Vec3 east{-z.y, z.x, 0.0};
  double e = east.norm();
  if (e < 1e-12) {
    throw std::invalid_argument(
        "user_array_frame: East is undefined at the poles");
  }
  Vec3 x = east / e;
  return {x, z.cross(x), z};
}

Vec3 direction_in_frame(const ArrayFrame& frame, const Vec3& from_pos_m,
                        const Vec3& to_pos_m) {
  Vec3 d = to_pos_m - from_pos_m;
  double n = d.norm();
  if (n == 0.0) {
    throw std::invalid_argument("direction_in_frame: coincident positions");
  }
  Vec3 u = d / n;
  return {u.dot(frame.x), u.dot(frame.y), u.dot(frame.z)};
}

}  // namespace leocx
