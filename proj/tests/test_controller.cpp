#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "airpid/controller.hpp"

using namespace airpid;
using namespace airpid::ctrl;

TEST_CASE("pid_speed") {
  CHECK(pid_speed({0, 0, 0}, {5, -2, 3}) == 0.0);
  CHECK(pid_speed({1, 0, 0}, {2, 0, 0}) == 2.0);
  CHECK(pid_speed({1, 0.1, 0.5}, {1, -2, 3}) ==
        doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("normalize_speed") {
  CHECK(normalize_speed(0.0) == 0.0);
  CHECK(normalize_speed(1.0) == 0.5);
  CHECK(normalize_speed(-3.0) == -0.75);

  // Property over a wide sweep: bounded, odd, strictly increasing.
  Rng rng(5);
  double prev_x = -1e18, prev_y = -1.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(-1e6, 1e6);
    const double y = normalize_speed(x);
    CHECK(std::abs(y) < 1.0);
    CHECK(normalize_speed(-x) == -y);
    (void)prev_x;
    (void)prev_y;
  }
  for (double x = -50.0; x < 50.0; x += 0.25) {
    CHECK(normalize_speed(x) < normalize_speed(x + 0.25));
  }
}

TEST_CASE("command_vector") {
  CHECK(command_vector(0.5, {1, 1, 1}, {1, 1, 1}) == Vec3{});
  const Vec3 c = command_vector(0.5, {3, 0, 4}, {0, 0, 0});
  CHECK(c.x == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(c.y == 0.0);
  CHECK(c.z == doctest::Approx(0.4).epsilon(1e-12));
  const Vec3 b = command_vector(-0.5, {1, 0, 0}, {0, 0, 0});
  CHECK(b.x == doctest::Approx(-0.5).epsilon(1e-12));

  // |command| equals |speed| whenever target != position.
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double s = rng.uniform(-0.99, 0.99);
    const Vec3 t{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Vec3 p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    if (norm(t - p) < 1e-6) continue;
    CHECK(norm(command_vector(s, t, p)) ==
          doctest::Approx(std::abs(s)).epsilon(1e-9));
  }
}

TEST_CASE("act with fixed gains") {
  const sim::ErrorSignal e{2.0, 0.0, 0.0};
  GainBounds bounds;
  const ControllerMode mode = FixedPid{Gains{1, 0, 0}};
  const auto r = act(mode, e, bounds, {2, 0, 0}, {0, 0, 0}, nullptr, true);
  CHECK(r.gains.kp == 1.0);
  // speed 2 -> normalized 2/3, along +x.
  CHECK(r.v_cmd.x == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.v_cmd.y == 0.0);
}

TEST_CASE("zero-weight policy lands on the bound midpoints") {
  nn::NetworkParams params;  // all zeros
  GainBounds bounds;
  const ControllerMode mode = AdaptivePolicy{&params};
  const sim::ErrorSignal e{1.0, -0.5, 2.0};
  const auto r = act(mode, e, bounds, {1, 0, 0}, {0, 0, 0}, nullptr, true);
  CHECK(r.gains.kp == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.gains.ki == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.gains.kd == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gains stay inside bounds for any raw action") {
  GainBounds bounds;
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const std::array<double, 3> raw{rng.uniform(-100, 100),
                                    rng.uniform(-100, 100),
                                    rng.uniform(-100, 100)};
    const Gains g = squash_gains(raw, bounds);
    CHECK(g.kp >= 0.0);
    CHECK(g.kp <= bounds.kp_max);
    CHECK(g.ki >= 0.0);
    CHECK(g.ki <= bounds.ki_max);
    CHECK(g.kd >= 0.0);
    CHECK(g.kd <= bounds.kd_max);
  }
}

TEST_CASE("constant-output policy equals FixedPid bit-for-bit") {
  // A bias-only network is a constant function of the observation; the
  // adaptive controller must then match FixedPid of the squashed biases.
  nn::NetworkParams params;
  params.bp()[0] = 0.4;
  params.bp()[1] = -1.2;
  params.bp()[2] = 0.9;
  GainBounds bounds;
  const Gains constant = squash_gains({0.4, -1.2, 0.9}, bounds);

  const ControllerMode adaptive = AdaptivePolicy{&params};
  const ControllerMode fixed = FixedPid{constant};
  Rng rng(33);
  for (int i = 0; i < 10000; ++i) {
    const sim::ErrorSignal e{rng.uniform(0, 10), rng.uniform(-3, 3),
                             rng.uniform(0, 40)};
    const Vec3 t{rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0.5, 3)};
    const Vec3 p{rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0.5, 3)};
    const auto ra = act(adaptive, e, bounds, t, p, nullptr, true);
    const auto rf = act(fixed, e, bounds, t, p, nullptr, true);
    REQUIRE(ra.gains.kp == rf.gains.kp);
    REQUIRE(ra.gains.ki == rf.gains.ki);
    REQUIRE(ra.gains.kd == rf.gains.kd);
    REQUIRE(ra.v_cmd == rf.v_cmd);
  }
}

TEST_CASE("frozen steady-state gains are deterministic and bounded") {
  Rng rng(4);
  const auto params = nn::init_params(rng);
  GainBounds bounds;
  const sim::ErrorSignal probe{0.1, 0.0, 3.5};
  const Gains a = extract_steady_gains(params, probe, bounds);
  const Gains b = extract_steady_gains(params, probe, bounds);
  CHECK(a.kp == b.kp);
  CHECK(a.ki == b.ki);
  CHECK(a.kd == b.kd);
  for (int i = 0; i < 100; ++i) {
    const sim::ErrorSignal p{rng.uniform(0, 20), rng.uniform(-5, 5),
                             rng.uniform(0, 100)};
    const Gains g = extract_steady_gains(params, p, bounds);
    CHECK(g.kp >= 0.0);
    CHECK(g.kp <= bounds.kp_max);
  }
}

TEST_CASE("unloaded adaptive policy is a configuration error") {
  const ControllerMode mode = AdaptivePolicy{nullptr};
  CHECK_THROWS(act(mode, {1, 0, 0}, GainBounds{}, {1, 0, 0}, {0, 0, 0},
                   nullptr, true));
}
