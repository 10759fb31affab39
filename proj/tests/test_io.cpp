#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "airpid/config.hpp"
#include "airpid/csv.hpp"
#include "airpid/svg_plot.hpp"

using namespace airpid;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("fmt_double / parse_double") {
  CHECK(io::fmt_double(0.0) == "0");
  CHECK(io::fmt_double(1.5) == "1.5");
  CHECK(io::fmt_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::fmt_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::fmt_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

  CHECK(io::parse_double("inf") ==
        std::numeric_limits<double>::infinity());
  CHECK(std::isnan(io::parse_double("nan")));

  // Exact round trip through text for awkward doubles.
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-12, 12));
    CHECK(io::parse_double(io::fmt_double(v)) == v);
  }
  CHECK(io::parse_double(io::fmt_double(0.1)) == 0.1);
  CHECK(io::parse_double(io::fmt_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv round trip and schema enforcement") {
  TempDir dir("airpid_csv_test");
  const std::string path = dir.file("t.csv");

  {
    io::CsvWriter w(path, "airpid.test.v1", {"a", "b"});
    REQUIRE(w.good());
    w.row({io::fmt_double(1.25), io::fmt_double(-3.0)});
    w.row({"inf", "nan"});
  }

  io::CsvFile f;
  std::string err;
  REQUIRE(io::read_csv(path, "airpid.test.v1", f, &err));
  CHECK(f.schema == "airpid.test.v1");
  CHECK(f.columns == std::vector<std::string>{"a", "b"});
  REQUIRE(f.rows.size() == 2);
  CHECK(io::parse_double(f.rows[0][0]) == 1.25);
  CHECK(std::isinf(io::parse_double(f.rows[1][0])));
  CHECK(std::isnan(io::parse_double(f.rows[1][1])));

  // Wrong expected schema is rejected.
  CHECK_FALSE(io::read_csv(path, "airpid.test.v2", f, &err));
  CHECK(err.find("schema") != std::string::npos);

  // Missing schema line is rejected.
  const std::string bare = dir.file("bare.csv");
  {
    std::ofstream o(bare);
    o << "a,b\n1,2\n";
  }
  CHECK_FALSE(io::read_csv(bare, "airpid.test.v1", f, &err));

  // Ragged row is rejected with a line number.
  const std::string ragged = dir.file("ragged.csv");
  {
    std::ofstream o(ragged);
    o << "# schema: airpid.test.v1\na,b\n1,2\n3\n";
  }
  CHECK_FALSE(io::read_csv(ragged, "airpid.test.v1", f, &err));
  CHECK(err.find("4") != std::string::npos);

  CHECK_FALSE(io::read_csv(dir.file("missing.csv"), "airpid.test.v1", f,
                           &err));
}

TEST_CASE("config parsing") {
  cfg::RunConfig c;
  std::string err;

  SUBCASE("apply_key basic") {
    REQUIRE(cfg::apply_key(c, "seed", "42", &err));
    CHECK(c.seed == 42);
    REQUIRE(cfg::apply_key(c, "sim.dt", "0.02", &err));
    CHECK(c.sim.dt == 0.02);
    REQUIRE(cfg::apply_key(c, "ppo.total_timesteps", "4096", &err));
    CHECK(c.ppo.total_timesteps == 4096);
    REQUIRE(cfg::apply_key(c, "out_dir", "runs/x", &err));
    CHECK(c.out_dir == "runs/x");
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_FALSE(cfg::apply_key(c, "sim.nope", "1", &err));
    CHECK(err.find("sim.nope") != std::string::npos);
  }
  SUBCASE("non-numeric value for a numeric key is rejected") {
    CHECK_FALSE(cfg::apply_key(c, "sim.dt", "fast", &err));
  }
  SUBCASE("file parsing with comments and blanks") {
    TempDir dir("airpid_cfg_test");
    const std::string path = dir.file("run.cfg");
    {
      std::ofstream o(path);
      o << "# run config\n\nseed = 123\nbaseline.kp = 1.5\n";
    }
    REQUIRE(cfg::parse_config_file(path, c, &err));
    CHECK(c.seed == 123);
    CHECK(c.baseline.kp == 1.5);
  }
  SUBCASE("malformed line names the line") {
    TempDir dir("airpid_cfg_test2");
    const std::string path = dir.file("bad.cfg");
    {
      std::ofstream o(path);
      o << "seed = 1\nthis is not a key value pair\n";
    }
    CHECK_FALSE(cfg::parse_config_file(path, c, &err));
    CHECK(err.find("line 2") != std::string::npos);
  }
}

TEST_CASE("config snapshot round trip") {
  cfg::RunConfig c;
  c.seed = 987;
  c.sim.dt = 0.05;
  c.ppo.lr = 1e-3;
  c.baseline = {2.0, 0.1, 0.3};
  c.planner_mode = "paper-compat";

  TempDir dir("airpid_cfg_rt");
  const std::string path = dir.file("snap.cfg");
  REQUIRE(cfg::write_config_snapshot(c, path));

  cfg::RunConfig back;
  std::string err;
  REQUIRE(cfg::parse_config_file(path, back, &err));
  CHECK(back.seed == c.seed);
  CHECK(back.sim.dt == c.sim.dt);
  CHECK(back.ppo.lr == c.ppo.lr);
  CHECK(back.baseline.kp == c.baseline.kp);
  CHECK(back.baseline.ki == c.baseline.ki);
  CHECK(back.planner_mode == c.planner_mode);
  // Serialization is stable: snapshot of the parse equals the snapshot.
  CHECK(cfg::serialize_config(back) == cfg::serialize_config(c));
}

TEST_CASE("svg rendering") {
  svg::Series s;
  s.label = "speed";
  for (int i = 0; i < 32; ++i) {
    s.x.push_back(i);
    s.y.push_back(std::sin(0.3 * i));
  }

  SUBCASE("deterministic bytes") {
    const auto a = svg::render_chart("t", "x", "y", {s});
    const auto b = svg::render_chart("t", "x", "y", {s});
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("speed") != std::string::npos);
  }
  SUBCASE("non-finite samples are skipped, not drawn") {
    auto holey = s;
    holey.y[5] = std::numeric_limits<double>::quiet_NaN();
    holey.y[6] = std::numeric_limits<double>::infinity();
    const auto out = svg::render_chart("t", "x", "y", {holey});
    CHECK(out.find("nan") == std::string::npos);
    CHECK(out.find("inf") == std::string::npos);
  }
}

TEST_CASE("plot_csv") {
  TempDir dir("airpid_plot_test");
  std::string err;

  SUBCASE("training kind") {
    const std::string csv = dir.file("training.csv");
    {
      io::CsvWriter w(csv, "airpid.training.v1",
                      {"iteration", "timestep", "mean_reward_raw",
                       "mean_leg_effective_speed", "settling_time_s",
                       "overshoot_m", "surrogate", "value_loss", "entropy",
                       "clip_fraction"});
      for (int i = 0; i < 4; ++i) {
        w.row({io::fmt_double(i), io::fmt_double(i * 1024),
               io::fmt_double(100.0), io::fmt_double(0.5 + 0.1 * i),
               io::fmt_double(8.0 - i), io::fmt_double(0.2),
               io::fmt_double(0.0), io::fmt_double(0.2), io::fmt_double(4.2),
               io::fmt_double(0.05)});
      }
    }
    const std::string out = dir.file("training.svg");
    REQUIRE(svg::plot_csv(csv, "training", out, &err));
    CHECK(fs::exists(out));
    CHECK(fs::file_size(out) > 200);
  }
  SUBCASE("bad kind / missing file") {
    CHECK_FALSE(svg::plot_csv(dir.file("x.csv"), "nope", dir.file("x.svg"),
                              &err));
    CHECK_FALSE(svg::plot_csv(dir.file("missing.csv"), "training",
                              dir.file("x.svg"), &err));
  }
}
