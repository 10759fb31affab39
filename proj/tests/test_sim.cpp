#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "airpid/controller.hpp"
#include "airpid/sim_env.hpp"

using namespace airpid;
using namespace airpid::sim;

TEST_CASE("position_error") {
  CHECK(position_error({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(position_error({5, 5, 1.5}, {0, 0, 0}) ==
        doctest::Approx(std::sqrt(52.25)).epsilon(1e-12));
  CHECK(position_error({0, 1, 1}, {0, 0, 0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("observe error signal") {
  SimConfig cfg;
  DroneState s;
  s.position = {0, 0, 0};
  s.target = {2, 0, 0};

  SUBCASE("first step of a leg") {
    s.leg_first_step = true;
    const auto e = observe(s, cfg);
    CHECK(e.pe == 2.0);
    CHECK(e.dpe == 0.0);
    CHECK(e.ipe == doctest::Approx(2.0 * cfg.dt).epsilon(1e-15));
  }
  SUBCASE("constant pe gives zero derivative") {
    s.leg_first_step = false;
    s.prev_pe = 2.0;
    CHECK(observe(s, cfg).dpe == 0.0);
  }
  SUBCASE("backward difference") {
    s.target = {1.9, 0, 0};
    s.leg_first_step = false;
    s.prev_pe = 2.0;
    CHECK(observe(s, cfg).dpe == doctest::Approx(-2.5).epsilon(1e-12));
  }
}

TEST_CASE("step dynamics") {
  SimConfig cfg;
  Environment env(cfg, 1);

  SUBCASE("equilibrium") {
    const Vec3 p0 = env.state().position;
    env.step({0, 0, 0});
    CHECK(env.state().position == p0);
    CHECK(env.state().velocity == Vec3{});
  }
  SUBCASE("first-order lag, one step") {
    const Vec3 p0 = env.state().position;
    env.step({1, 0, 0});
    const double v_expect = 0.04 * (1.0 / 0.3);
    CHECK(env.state().velocity.x ==
          doctest::Approx(v_expect).epsilon(1e-14));
    CHECK(env.state().position.x - p0.x ==
          doctest::Approx(0.04 * v_expect).epsilon(1e-12));
    CHECK(env.state().velocity.y == 0.0);
  }
  SUBCASE("non-finite command faults the episode") {
    const auto out = env.step({std::nan(""), 0, 0});
    CHECK(out.fault);
    CHECK(out.episode_done);
    CHECK(out.reward == cfg.fault_penalty);
  }
  SUBCASE("command above the limit faults") {
    const auto out = env.step({2.0, 0, 0});
    CHECK(out.fault);
  }
}

TEST_CASE("hold counter and leg completion") {
  // Degenerate workspace: every target is the start point, so the drone
  // is permanently inside tolerance and legs complete on a fixed cadence.
  SimConfig cfg;
  cfg.workspace = Box{{1, 1, 1}, {1, 1, 1}};
  Environment env(cfg, 3);

  int completions = 0;
  double last_reward = 0.0;
  for (int i = 0; i < 150; ++i) {
    const auto out = env.step({0, 0, 0});
    if (out.leg_completed) {
      completions += 1;
      last_reward = out.reward;
      CHECK(out.leg_distance == 0.0);
    } else {
      CHECK(out.reward == cfg.step_penalty);
    }
  }
  // Zero distance: EffectiveSpeed 0, reward e^0 = 1, every hold_steps.
  CHECK(completions == 3);
  CHECK(last_reward == 1.0);
}

TEST_CASE("hold counter resets outside tolerance") {
  SimConfig cfg;
  Environment env(cfg, 5);
  // Far from the target, pe > tolerance: counter must stay at zero.
  for (int i = 0; i < 10; ++i) env.step({0, 0, 0});
  CHECK(env.state().hold_counter == 0);
}

TEST_CASE("compute_leg_reward") {
  SimConfig cfg;
  CHECK(compute_leg_reward(0.0, 150, cfg) == 1.0);
  CHECK(compute_leg_reward(4.0, 150, cfg) ==
        doctest::Approx(std::exp(10.0)).epsilon(1e-9));
  // Effective speed 0.92 m/s over a 100-step travel window.
  CHECK(compute_leg_reward(0.92 * 0.04 * 100, 150, cfg) ==
        doctest::Approx(std::exp(9.2)).epsilon(1e-9));
  // The exponent clamp binds for absurd speeds.
  CHECK(compute_leg_reward(1000.0, 51, cfg) == std::exp(cfg.reward_exp_cap));
}

TEST_CASE("sample_target stays inside the box and is seed-stable") {
  const Box box{{-6, -6, 0.5}, {6, 6, 3}};
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    CHECK(box.contains(sample_target(rng, box)));
  }
  const Box point{{2, 3, 4}, {2, 3, 4}};
  Rng rng2(1);
  CHECK(sample_target(rng2, point) == Vec3{2, 3, 4});

  // Golden sequence for seed 42 (frozen from the first run).
  Rng g(42);
  const Vec3 t0 = sample_target(g, box);
  const Vec3 t1 = sample_target(g, box);
  CHECK(t0.x == doctest::Approx(3.0618663954544676).epsilon(1e-15));
  CHECK(t0.y == doctest::Approx(1.6683767262563691).epsilon(1e-15));
  CHECK(t0.z == doctest::Approx(2.3803630018700668).epsilon(1e-15));
  CHECK(t1.x == doctest::Approx(-4.3647277964107554).epsilon(1e-15));
  CHECK(t1.y == doctest::Approx(4.839227597140539).epsilon(1e-15));
  CHECK(t1.z == doctest::Approx(0.73517077940709252).epsilon(1e-15));
}

TEST_CASE("determinism: identical seeds give bit-identical trajectories") {
  SimConfig cfg;
  Environment a(cfg, 123), b(cfg, 123);
  for (int i = 0; i < 300; ++i) {
    const Vec3 cmd{0.3 * std::sin(0.05 * i), 0.2, -0.1};
    a.step(cmd);
    b.step(cmd);
    REQUIRE(a.state().position == b.state().position);
    REQUIRE(a.state().velocity == b.state().velocity);
    REQUIRE(a.state().target == b.state().target);
  }
}

TEST_CASE("lag dynamics stay bounded under bounded commands") {
  SimConfig cfg;
  Environment env(cfg, 9);
  double vmax = 0.0;
  for (int i = 0; i < 999; ++i) {
    const auto e = env.observe();
    const Vec3 cmd = ctrl::command_vector(0.9, env.state().target,
                                          env.state().position);
    (void)e;
    env.step(cmd);
    vmax = std::max(vmax, norm(env.state().velocity));
  }
  CHECK(vmax <= 0.9 + 1e-9);
}

TEST_CASE("reward-time effective speed matches recomputation") {
  SimConfig cfg;
  Environment env(cfg, 21);
  const ctrl::Gains gains{2.0, 0.0, 0.6};

  int leg_steps = 0;
  double distance = norm(env.state().target - env.state().start_of_leg);
  for (int i = 0; i < cfg.episode_cap; ++i) {
    const auto e = env.observe();
    const Vec3 cmd = ctrl::command_vector(
        ctrl::normalize_speed(ctrl::pid_speed(gains, e)), env.state().target,
        env.state().position);
    const auto out = env.step(cmd);
    leg_steps += 1;
    if (out.leg_completed) {
      CHECK(out.leg_timesteps == leg_steps);
      CHECK(out.leg_distance == distance);
      const double es = distance / (cfg.dt * (leg_steps - cfg.hold_steps));
      CHECK(out.reward == std::exp(std::min(10.0 * es, cfg.reward_exp_cap)));
      return;
    }
  }
  FAIL("fixed-gain controller never completed a leg");
}
