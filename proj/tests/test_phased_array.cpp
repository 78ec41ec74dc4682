#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "leocx/phased_array.hpp"
#include "leocx/types.hpp"
#include "leocx/vec3.hpp"
#include "support/oracles.hpp"

using namespace leocx;

namespace {

// Unit vector in the upper hemisphere from elevation/azimuth in the frame.
Vec3 upper_dir(double elev_deg, double azim_deg) {
  double e = elev_deg * kRadPerDeg;
  double a = azim_deg * kRadPerDeg;
  return {std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e)};
}

}  // namespace

TEST_SUITE("phased_array") {

TEST_CASE("peak gains of the standard panels") {
  CHECK(max_gain_dbi({64, 64, 0.5}) ==
        doctest::Approx(36.12359947967774).epsilon(1e-12));
  CHECK(max_gain_dbi({32, 32, 0.5}) ==
        doctest::Approx(30.102999566398122).epsilon(1e-12));
  CHECK(max_gain_dbi({8, 8, 0.5}) ==
        doctest::Approx(18.061799739838872).epsilon(1e-12));
}

TEST_CASE("boresight steering hits the element-count peak exactly") {
  ArraySpec spec{64, 64, 0.5};
  Vec3 z{0.0, 0.0, 1.0};
  CHECK(steered_gain_linear(spec, z, z) == 4096.0);
  // Steered off boresight, the peak moves with the steering direction.
  Vec3 d = upper_dir(47.0, 123.0);
  CHECK(steered_gain_linear(spec, d, d) == 4096.0);
  CHECK(steered_gain_dbi(spec, d, d) ==
        doctest::Approx(36.12359947967774).epsilon(1e-12));
}

TEST_CASE("matches the direct phasor sum over random pairs") {
  std::mt19937 rng(8211);
  std::uniform_real_distribution<double> elev(0.5, 89.5);
  std::uniform_real_distribution<double> azim(0.0, 360.0);
  const ArraySpec specs[] = {{64, 64, 0.5}, {32, 32, 0.5}, {8, 8, 0.5},
                             {16, 4, 0.5},  {1, 7, 0.5},   {5, 5, 0.7}};
  for (const auto& spec : specs) {
    for (int i = 0; i < 40; ++i) {
      Vec3 steer = upper_dir(elev(rng), azim(rng));
      Vec3 eval = upper_dir(elev(rng), azim(rng));
      double got = steered_gain_linear(spec, steer, eval);
      double want = oracle::array_gain_direct(spec, steer, eval);
      // Absolute tolerance scaled by the peak; deep nulls land near zero
      // in both implementations.
      CHECK(got == doctest::Approx(want)
                       .epsilon(1e-9)
                       .scale(spec.element_count()));
    }
  }
}

TEST_CASE("gain is reciprocal in steer and eval") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> elev(1.0, 89.0);
  std::uniform_real_distribution<double> azim(0.0, 360.0);
  ArraySpec spec{32, 32, 0.5};
  for (int i = 0; i < 100; ++i) {
    Vec3 a = upper_dir(elev(rng), azim(rng));
    Vec3 b = upper_dir(elev(rng), azim(rng));
    CHECK(steered_gain_linear(spec, a, b) == steered_gain_linear(spec, b, a));
  }
}

TEST_CASE("back hemisphere gets zero gain from either side") {
  ArraySpec spec{32, 32, 0.5};
  Vec3 front = upper_dir(40.0, 10.0);
  Vec3 back{front.x, front.y, -front.z};
  CHECK(steered_gain_linear(spec, front, back) == 0.0);
  CHECK(steered_gain_linear(spec, back, front) == 0.0);
  CHECK(std::isinf(steered_gain_dbi(spec, front, back)));
  CHECK(steered_gain_dbi(spec, front, back) < 0.0);
}

TEST_CASE("gain never exceeds the peak and nulls land where expected") {
  ArraySpec spec{16, 16, 0.5};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> elev(0.0, 90.0);
  std::uniform_real_distribution<double> azim(0.0, 360.0);
  Vec3 steer{0.0, 0.0, 1.0};
  for (int i = 0; i < 300; ++i) {
    double g = steered_gain_linear(spec, steer, upper_dir(elev(rng), azim(rng)));
    CHECK(g >= 0.0);
    CHECK(g <= 256.0 + 1e-9);
  }
  // First null of a 16-element axis at boresight steering: the offset in
  // x satisfies spacing*16*cos_offset = 1, i.e. sin(elev span) = 1/8.
  double null_elev = 90.0 - std::asin(1.0 / 8.0) * kDegPerRad;
  double g_null = steered_gain_linear(spec, steer, upper_dir(null_elev, 0.0));
  CHECK(g_null == doctest::Approx(0.0).scale(256.0).epsilon(1e-18));
}

TEST_CASE("half-wavelength spacing leaves a single mainlobe") {
  // Steer at the minimum working elevation; the wrapped lobe toward the
  // opposite horizon must stay far below the peak for d = lambda/2.
  ArraySpec spec{32, 32, 0.5};
  Vec3 steer = upper_dir(35.0, 0.0);
  Vec3 opposite = upper_dir(35.0, 180.0);
  double peak = steered_gain_linear(spec, steer, steer);
  double lobe = steered_gain_linear(spec, steer, opposite);
  CHECK(peak == doctest::Approx(1024.0).epsilon(1e-12));
  CHECK(lobe < 0.05 * peak);
  // With 1.0-wavelength spacing a boresight beam aliases into a full
  // grating lobe at the horizon.
  ArraySpec wide{32, 32, 1.0};
  double alias = steered_gain_linear(wide, Vec3{0.0, 0.0, 1.0},
                                     Vec3{1.0, 0.0, 0.0});
  CHECK(alias == doctest::Approx(1024.0).epsilon(1e-9));
}

TEST_CASE("validation rejects degenerate specs and non-unit directions") {
  CHECK_THROWS_AS(max_gain_dbi({0, 8, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(max_gain_dbi({8, -1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(max_gain_dbi({8, 8, 0.0}), std::invalid_argument);
  ArraySpec spec{8, 8, 0.5};
  Vec3 ok{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(steered_gain_linear(spec, {0.0, 0.0, 2.0}, ok),
                  std::invalid_argument);
  CHECK_THROWS_AS(steered_gain_linear(spec, ok, {0.0, 0.0, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("satellite frame points z at nadir and x along track") {
  Vec3 pos{kEarthRadiusM + 550.0e3, 0.0, 0.0};
  Vec3 vel{0.0, 7590.0, 0.0};
  ArrayFrame f = satellite_array_frame(pos, vel);
  CHECK(f.z.x == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.z.y == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(f.x.y == doctest::Approx(1.0).epsilon(1e-12));
  // Right-handed orthonormal triad.
  CHECK(f.x.dot(f.y) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(f.x.dot(f.z) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(f.x.cross(f.y).dot(f.z) == doctest::Approx(1.0).epsilon(1e-12));
  // A velocity with a radial component still yields x orthogonal to z.
  ArrayFrame g = satellite_array_frame(pos, {2000.0, 7000.0, 1000.0});
  CHECK(g.x.dot(g.z) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(g.x.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Purely radial velocity leaves the along-track direction undefined.
  CHECK_THROWS_AS(satellite_array_frame(pos, {100.0, 0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("user frame is east-north-up in disguise") {
  Vec3 pos = user_ecef(30.2672, -97.7431);  // Austin
  ArrayFrame f = user_array_frame(pos);
  CHECK(f.z.dot(pos.normalized()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.x.z == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));  // East is horizontal
  CHECK(f.x.cross(f.y).dot(f.z) == doctest::Approx(1.0).epsilon(1e-12));
  // y has a positive component toward the north pole.
  CHECK(f.y.z > 0.0);
  CHECK_THROWS_AS(user_array_frame({0.0, 0.0, kEarthRadiusM}),
                  std::invalid_argument);
}

TEST_CASE("direction_in_frame round-trips a known geometry") {
  Vec3 user = user_ecef(0.0, 0.0);
  ArrayFrame f = user_array_frame(user);
  // Satellite at zenith: direction is exactly +z in the user frame.
  Vec3 sat = user * ((kEarthRadiusM + 550.0e3) / kEarthRadiusM);
  Vec3 d = direction_in_frame(f, user, sat);
  CHECK(d.z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(direction_in_frame(f, user, user), std::invalid_argument);
}

}  // TEST_SUITE
