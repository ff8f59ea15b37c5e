#include <cmath>

#include "doctest.h"
#include "eosim/resources.hpp"

using namespace eosim;
using namespace eosim::resources;

namespace {

ResourceState at(double battery_Wh, double storage_GB = 0.0) {
  ResourceState s;
  s.battery_Wh = battery_Wh;
  s.storage_used_GB = storage_GB;
  return s;
}

constexpr ActionClass kAll[] = {ActionClass::kImage, ActionClass::kDownlink, ActionClass::kCharge,
                                ActionClass::kDesaturate};

}  // namespace

TEST_CASE("sunlit charging for an hour") {
  SatelliteSpec spec;
  const auto r = step_power(spec, at(100.0), ActionClass::kCharge, false, 0.3, 3600.0);
  const double gen = 1361.0 * 1.0 * 0.20;  // W over one hour
  CHECK(r.ledger.generated_Wh == doctest::Approx(gen).epsilon(1e-12));
  CHECK(r.ledger.generated_Wh == doctest::Approx(272.2));
  CHECK(r.ledger.base_Wh == doctest::Approx(10.0));
  CHECK(r.ledger.consumed_Wh == doctest::Approx(10.0));
  CHECK(r.state.battery_Wh - 100.0 == doctest::Approx(262.2));
}

TEST_CASE("no generation in shadow") {
  SatelliteSpec spec;
  for (auto a : kAll) {
    const auto r = step_power(spec, at(300.0), a, true, 1.0, 60.0);
    CHECK(r.ledger.generated_Wh == 0.0);
  }
}

TEST_CASE("imaging for an hour draws base plus instrument") {
  SatelliteSpec spec;
  const auto r = step_power(spec, at(300.0), ActionClass::kImage, true, 0.0, 3600.0);
  CHECK(r.ledger.consumed_Wh == doctest::Approx(40.0));
  CHECK(r.ledger.instrument_Wh == doctest::Approx(30.0));
  CHECK(r.ledger.thruster_Wh == 0.0);
  const auto d = step_power(spec, at(300.0), ActionClass::kDesaturate, true, 0.0, 3600.0);
  CHECK(d.ledger.consumed_Wh == doctest::Approx(90.0));
}

TEST_CASE("step_power rejects bad inputs") {
  SatelliteSpec spec;
  CHECK_THROWS_AS(step_power(spec, at(100.0), ActionClass::kCharge, false, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_power(spec, at(100.0), ActionClass::kCharge, false, 1.0, -5.0), std::invalid_argument);
  auto failed = at(100.0);
  failed.failed = true;
  CHECK_THROWS(step_power(spec, failed, ActionClass::kCharge, false, 1.0, 60.0));
}

TEST_CASE("energy bookkeeping and clamping") {
  SatelliteSpec spec;
  Rng rng(5);
  for (int k = 0; k < 2000; ++k) {
    const double b = rng.uniform(0.0, spec.battery_capacity_Wh);
    const auto a = kAll[rng.uniform_int(4)];
    const bool shadow = rng.uniform() < 0.4;
    const double dt = rng.uniform(1.0, 600.0);
    const auto r = step_power(spec, at(b), a, shadow, rng.uniform(), dt);
    CHECK(r.state.battery_Wh >= 0.0);
    CHECK(r.state.battery_Wh <= spec.battery_capacity_Wh);
    CHECK(r.ledger.generated_Wh >= 0.0);
    CHECK(r.ledger.consumed_Wh >= 0.0);
    const double unclamped = b + r.ledger.generated_Wh - r.ledger.consumed_Wh;
    if (unclamped >= 0.0 && unclamped <= spec.battery_capacity_Wh)
      CHECK(std::abs((r.state.battery_Wh - b) - (r.ledger.generated_Wh - r.ledger.consumed_Wh)) <= 1e-9);
  }
}

TEST_CASE("battery never rises without generation") {
  SatelliteSpec spec;
  Rng rng(6);
  ResourceState s = at(spec.battery_capacity_Wh);
  for (int k = 0; k < 5000; ++k) {
    const auto r = step_power(spec, s, kAll[rng.uniform_int(4)], true, 1.0, 60.0);
    CHECK(r.state.battery_Wh <= s.battery_Wh);
    s = r.state;
  }
  CHECK(s.battery_Wh == 0.0);
}

TEST_CASE("downlink through an open window") {
  SatelliteSpec spec;
  const auto r = step_storage(spec, at(400.0, 500.0), ActionClass::kDownlink, true, 60.0);
  const double oracle = 100e6 * 60.0 / 8.0 / 1e9;
  CHECK(oracle == doctest::Approx(0.75));
  CHECK(r.downlinked_GB == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(r.state.storage_used_GB == doctest::Approx(500.0 - oracle));

  const auto closed = step_storage(spec, at(400.0, 500.0), ActionClass::kDownlink, false, 60.0);
  CHECK(closed.downlinked_GB == 0.0);
  CHECK(closed.state.storage_used_GB == 500.0);

  const auto small = step_storage(spec, at(400.0, 0.1), ActionClass::kDownlink, true, 60.0);
  CHECK(small.downlinked_GB == doctest::Approx(0.1));
  CHECK(small.state.storage_used_GB == 0.0);
}

TEST_CASE("capture into full storage is infeasible") {
  SatelliteSpec spec;
  const auto r = step_storage(spec, at(400.0, spec.storage_capacity_GB), ActionClass::kImage, false, 60.0);
  CHECK(r.capture_infeasible);
  CHECK(r.state.storage_used_GB == spec.storage_capacity_GB);
  CHECK(r.captured_GB == 0.0);

  const auto ok = step_storage(spec, at(400.0, 0.0), ActionClass::kImage, false, 60.0);
  CHECK_FALSE(ok.capture_infeasible);
  CHECK(ok.captured_GB == doctest::Approx(500e3 * 30.0 / 8.0 / 1e9));
}

TEST_CASE("storage stays within bounds") {
  SatelliteSpec spec;
  Rng rng(8);
  ResourceState s = at(400.0, 499.999);
  for (int k = 0; k < 2000; ++k) {
    const auto r = step_storage(spec, s, kAll[rng.uniform_int(4)], rng.uniform() < 0.5, rng.uniform(1.0, 120.0));
    CHECK(r.state.storage_used_GB >= 0.0);
    CHECK(r.state.storage_used_GB <= spec.storage_capacity_GB);
    s = r.state;
  }
}

TEST_CASE("transmitter rate changes what a downlink moves") {
  SatelliteSpec fast, slow;
  slow.transmitter_baud_Mbps = 70.0;
  const auto a = step_storage(fast, at(400.0, 100.0), ActionClass::kDownlink, true, 60.0);
  const auto b = step_storage(slow, at(400.0, 100.0), ActionClass::kDownlink, true, 60.0);
  CHECK(a.downlinked_GB != b.downlinked_GB);
  CHECK(b.downlinked_GB == doctest::Approx(0.7 * a.downlinked_GB));
}

TEST_CASE("desaturation unloads the wheels") {
  SatelliteSpec spec;
  spec.desat_unload_rpm = 3000.0;
  ResourceState s = at(400.0);
  s.rw_speeds_rpm = {3000.0, -2000.0, 1000.0};
  Rng rng(1);
  const auto r = step_wheels(spec, s, ActionClass::kDesaturate, 0.0, 60.0, {}, rng);
  CHECK(r.rw_speeds_rpm == std::array<double, 3>{0.0, 0.0, 0.0});

  SatelliteSpec def;
  const auto p = step_wheels(def, s, ActionClass::kDesaturate, 0.0, 60.0, {}, rng);
  CHECK(p.rw_speeds_rpm == std::array<double, 3>{1500.0, -500.0, 0.0});
}

TEST_CASE("wheels hold still without torque or disturbance") {
  SatelliteSpec spec;
  ResourceState s = at(400.0);
  s.rw_speeds_rpm = {100.0, -200.0, 300.0};
  Rng rng(2);
  for (auto a : kAll) {
    if (a == ActionClass::kDesaturate) continue;
    CHECK(step_wheels(spec, s, a, 0.0, 60.0, {}, rng).rw_speeds_rpm == s.rw_speeds_rpm);
  }
}

TEST_CASE("wheel dynamics are seed-deterministic") {
  SatelliteSpec spec;
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    ResourceState s = at(400.0);
    for (int k = 0; k < 50; ++k)
      s = step_wheels(spec, s, k % 3 == 0 ? ActionClass::kImage : ActionClass::kDownlink, 2.5, 60.0, {1e-4}, rng);
    return s.rw_speeds_rpm;
  };
  CHECK(run(42) == run(42));
  CHECK(run(42) != run(43));
}

TEST_CASE("slews add momentum to one axis") {
  SatelliteSpec spec;
  Rng rng(9);
  const auto r = step_wheels(spec, at(400.0), ActionClass::kImage, 2.5, 60.0, {}, rng);
  double sum = 0.0;
  int nonzero = 0;
  for (double v : r.rw_speeds_rpm) {
    sum += v;
    nonzero += v != 0.0;
  }
  CHECK(sum == doctest::Approx(150.0));
  CHECK(nonzero == 1);
}

TEST_CASE("failure detection") {
  SatelliteSpec spec;
  CHECK_FALSE(check_failure(spec, at(200.0)));
  auto w = at(400.0);
  w.rw_speeds_rpm = {0.0, 6000.0, 0.0};
  CHECK(check_failure(spec, w));
  w.rw_speeds_rpm = {0.0, -6000.0, 0.0};
  CHECK(check_failure(spec, w));
  w.rw_speeds_rpm = {0.0, 5999.9, 0.0};
  CHECK_FALSE(check_failure(spec, w));
  CHECK(check_failure(spec, at(std::nextafter(160.0, 0.0))));
  CHECK_FALSE(check_failure(spec, at(160.0)));
}

TEST_CASE("failure latches") {
  SatelliteSpec spec;
  auto s = at(100.0);
  s.failed = check_failure(spec, s);
  REQUIRE(s.failed);
  s.battery_Wh = 400.0;
  CHECK(check_failure(spec, s));
}

TEST_CASE("satellite parameter validation") {
  SatelliteSpec s;
  CHECK_NOTHROW(s.validate());
  s.solar_efficiency = 1.5;
  CHECK_THROWS(s.validate());
  s = SatelliteSpec{};
  s.base_power_W = 5.0;
  CHECK_THROWS(s.validate());
  s = SatelliteSpec{};
  s.min_battery_fraction = 1.0;
  CHECK_THROWS(s.validate());
  CHECK(payload_from_string(to_string(Payload::kSar)) == Payload::kSar);
}
