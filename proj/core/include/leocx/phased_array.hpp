#pragma once

#include "leocx/vec3.hpp"

namespace leocx {

// Uniform rectangular array, half-wavelength spacing by default. Boresight
// is the local +z of the array frame: nadir for satellites, zenith for
// ground users (the frame builders below take care of that).
struct ArraySpec {
  int rows = 1;
  int cols = 1;
  double element_spacing_wavelengths = 0.5;

  int element_count() const { return rows * cols; }
};

// Throws std::invalid_argument naming the offending field.
void validate(const ArraySpec& spec);

// Peak gain with matched-filter steering: 10log10(rows*cols).
double max_gain_dbi(const ArraySpec& spec);

// Array-factor gain of the array steered at steer_dir, evaluated at
// eval_dir. Both must be unit vectors in the array frame (z = boresight);
// non-unit input throws. Directions with a negative boresight component
// are in the back hemisphere and get zero gain (applied to both arguments
// so the gain stays reciprocal).
double steered_gain_linear(const ArraySpec& spec, const Vec3& steer_dir,
                           const Vec3& eval_dir);
double steered_gain_dbi(const ArraySpec& spec, const Vec3& steer_dir,
                        const Vec3& eval_dir);  // -inf in the back hemisphere

// Right-handed orthonormal basis; z is the boresight.
struct ArrayFrame {
  Vec3 x, y, z;
};

// Satellite panel: z = nadir, x = inertial velocity projected orthogonal
// to nadir (the along-track direction), y completes the triad. Requires a
// velocity not parallel to the radial direction.
ArrayFrame satellite_array_frame(const Vec3& sat_pos_m, const Vec3& sat_vel_m_s);

// Ground user panel: z = zenith (radially out on the spherical Earth),
// x = local East. Undefined at the poles, which throws.
ArrayFrame user_array_frame(const Vec3& user_pos_m);

// Unit direction from from_pos to to_pos expressed in the frame.
// Coincident positions throw.
Vec3 direction_in_frame(const ArrayFrame& frame, const Vec3& from_pos_m,
                        const Vec3& to_pos_m);

}  // namespace leocx
