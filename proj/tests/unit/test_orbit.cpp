#include <cmath>
#include <numbers>

#include "doctest.h"
#include "eosim/orbit.hpp"
#include "eosim/rng.hpp"

using namespace eosim;
using namespace eosim::orbit;

namespace {

constexpr double kPi = std::numbers::pi;

OrbitElements leo(double inc = 40.0, double raan = -75.0) {
  OrbitElements e;
  e.altitude_km = 500.0;
  e.inclination_deg = inc;
  e.raan_offset_deg = raan;
  return e;
}

// Independent elevation: rotate the Earth-fixed site by the sidereal angle,
// then measure the line of sight against the local vertical.
double oracle_elevation(const Vec3& sat, double lat_deg, double lon_deg, double t) {
  const double lat = lat_deg * kPi / 180.0;
  const double lon = lon_deg * kPi / 180.0 + 7.2921150e-5 * t;
  const double r = 6378.137;
  const double gx = r * std::cos(lat) * std::cos(lon), gy = r * std::cos(lat) * std::sin(lon), gz = r * std::sin(lat);
  const double lx = sat[0] - gx, ly = sat[1] - gy, lz = sat[2] - gz;
  const double up = (lx * gx + ly * gy + lz * gz) / r;
  const double horiz = std::sqrt(lx * lx + ly * ly + lz * lz - up * up);
  return std::atan2(up, horiz);
}

}  // namespace

TEST_CASE("circular orbit radius is constant") {
  const auto e = leo();
  for (double t : {0.0, 1.0, 123.4, 3000.0, 86400.0}) {
    const auto s = propagate_position(e, t);
    CHECK(std::abs(norm(s.position_km) - 6878.137) <= 1e-6);
  }
}

TEST_CASE("period matches closed form") {
  const double a = 6378.137 + 500.0;
  const double expected = 2.0 * kPi * std::sqrt(a * a * a / 398600.4418);
  CHECK(orbital_period_s(leo()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(orbital_period_s(leo()) == doctest::Approx(5676.98).epsilon(1e-5));
}

TEST_CASE("inertial position repeats after one period") {
  for (double inc : {0.0, 40.0, 97.4}) {
    const auto e = leo(inc, 30.0);
    const double T = orbital_period_s(e);
    for (double t0 : {0.0, 500.0, 2000.0}) {
      const Vec3 a = inertial_position(e, t0);
      const Vec3 b = inertial_position(e, t0 + T);
      CHECK(norm(a - b) <= 1e-6);
    }
  }
}

TEST_CASE("subsatellite point follows Earth rotation") {
  auto e = leo(0.0, 0.0);
  const double T = orbital_period_s(e);
  const auto s = propagate_position(e, T);
  // equatorial orbit returns to the same inertial point while the ground moved east
  const double drift = -7.2921150e-5 * T * 180.0 / kPi;
  CHECK(s.subsatellite.latitude_deg == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.subsatellite.longitude_deg == doctest::Approx(wrap_longitude_deg(drift)).epsilon(1e-9));
  CHECK(s.subsatellite.altitude_m == doctest::Approx(500e3));
}

TEST_CASE("elevation: overhead, antipode and vector oracle") {
  const GeoPoint site{20.0, 45.0, 0.0};
  const double t = 1234.0;
  const Vec3 g = ground_position_inertial(site, t);
  const Vec3 up = normalized(g);
  CHECK(elevation_angle(6878.137 * up, site, t) == doctest::Approx(90.0).epsilon(1e-9));
  CHECK(elevation_angle(-6878.137 * up, site, t) == doctest::Approx(-90.0).epsilon(1e-6));

  Rng rng(7);
  for (int k = 0; k < 200; ++k) {
    const double lat = rng.uniform(-80.0, 80.0), lon = rng.uniform(-180.0, 180.0), tt = rng.uniform(0.0, 6000.0);
    const Vec3 sat = inertial_position(leo(rng.uniform(0.0, 100.0), rng.uniform(-180.0, 180.0)), tt);
    const double got = elevation_angle(sat, GeoPoint{lat, lon, 0.0}, tt) * kPi / 180.0;
    CHECK(std::abs(got - oracle_elevation(sat, lat, lon, tt)) <= 1e-9);
  }
}

TEST_CASE("eclipse: sun side lit, cylinder behind Earth shadowed") {
  const Vec3 sun{1.0, 0.0, 0.0};
  CHECK_FALSE(eclipse_state({7000.0, 0.0, 0.0}, 0.0, sun).in_shadow);
  CHECK_FALSE(eclipse_state({1.0, 7000.0, 0.0}, 0.0, sun).in_shadow);
  CHECK(eclipse_state({-7000.0, 0.0, 0.0}, 0.0, sun).in_shadow);
  CHECK(eclipse_state({-7000.0, 3000.0, 2000.0}, 0.0, sun).in_shadow);
  CHECK_FALSE(eclipse_state({-7000.0, 6500.0, 2000.0}, 0.0, sun).in_shadow);
}

TEST_CASE("eclipse never reported on the sunward hemisphere") {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 sun{rng.normal(), rng.normal(), rng.normal()};
    const Vec3 p = inertial_position(leo(rng.uniform(0.0, 180.0), rng.uniform(-180.0, 180.0)), rng.uniform(0.0, 6000.0));
    if (dot(p, sun) > 0.0) CHECK_FALSE(eclipse_state(p, 0.0, sun).in_shadow);
  }
}

TEST_CASE("shadow fraction over one orbit matches analytic arc") {
  const auto e = leo(0.0, 0.0);  // sun in the orbit plane
  const double T = orbital_period_s(e);
  const double analytic = std::asin(6378.137 / 6878.137) / kPi;
  std::size_t dark = 0, n = 0;
  for (double t = 0.0; t < T; t += 0.5, ++n)
    if (eclipse_state(inertial_position(e, t), t).in_shadow) ++dark;
  const double frac = static_cast<double>(dark) / static_cast<double>(n);
  CHECK(std::abs(frac - analytic) / analytic <= 0.01);
}

TEST_CASE("access window at the starting subsatellite point contains t = 0") {
  const auto e = leo();
  auto start = propagate_position(e, 0.0).subsatellite;
  start.altitude_m = 0.0;
  const auto w = compute_access_windows(e, start, 600.0, 0.0);
  REQUIRE_FALSE(w.empty());
  CHECK(w.front().start_s == 0.0);
  CHECK(w.front().end_s > 0.0);
}

TEST_CASE("unreachable target has no windows") {
  CHECK(compute_access_windows(leo(), GeoPoint{89.0, 10.0, 0.0}, 86400.0, 10.0).empty());
}

TEST_CASE("access window bounds agree with a 1 s brute-force scan") {
  const auto e = leo();
  const double T = orbital_period_s(e);
  for (double lon : {-73.0, -60.0, 100.0, 110.0}) {
    const GeoPoint target{0.0, lon, 0.0};
    const double min_el = 10.0;
    const auto fast = compute_access_windows(e, target, T, min_el);

    std::vector<std::pair<double, double>> brute;
    bool open = false;
    double start = 0.0, last = 0.0;
    for (double t = 0.0; t <= T; t += 1.0) {
      const bool vis = elevation_angle(inertial_position(e, t), target, t) >= min_el;
      if (vis && !open) start = t;
      if (!vis && open) brute.emplace_back(start, last);
      open = vis;
      if (vis) last = t;
    }
    if (open) brute.emplace_back(start, T);

    REQUIRE(fast.size() == brute.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(std::abs(fast[i].start_s - brute[i].first) <= 2.0);
      CHECK(std::abs(fast[i].end_s - brute[i].second) <= 2.0);
    }
  }
}

TEST_CASE("access windows are sorted, disjoint and above threshold") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto e = leo(rng.uniform(20.0, 100.0), rng.uniform(-180.0, 180.0));
    const GeoPoint target{rng.uniform(-50.0, 50.0), rng.uniform(-180.0, 180.0), 0.0};
    const double min_el = rng.uniform(0.0, 60.0);
    const auto w = compute_access_windows(e, target, 20000.0, min_el);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w[i].start_s < w[i].end_s);
      if (i > 0) CHECK(w[i - 1].end_s < w[i].start_s);
      for (double t = std::ceil(w[i].start_s); t <= w[i].end_s; t += 1.0)
        CHECK(elevation_angle(inertial_position(e, t), target, t) >= min_el - 1e-6);
    }
  }
}

TEST_CASE("access window arguments are validated") {
  CHECK_THROWS_AS(compute_access_windows(leo(), GeoPoint{}, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_access_windows(leo(), GeoPoint{}, 100.0, 90.0), std::invalid_argument);
  OrbitElements bad;
  bad.altitude_km = -1.0;
  CHECK_THROWS(bad.validate());
}
