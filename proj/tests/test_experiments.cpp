#include "nsuq/experiments.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace nsuq;
using doctest::Approx;

namespace {

ExperimentConfig small_config(ExperimentMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.ladder = {{8, 2}, {16, 4}};
  c.scheme.final_time = 0.02;
  c.scheme.output_intervals = 2;
  c.distribution.K = 2;
  c.distribution.bounds = {0.5, 0.01, 0.5, 2.0, 1.0};
  c.distribution.mu = ParameterTransform::uniform(0, 0.02, 0.04);
  c.distribution.a = ParameterTransform::truncated_normal(1, 0.8, 1.2, 1.0, 0.2);
  c.distribution.rho0 = {{1.0}, {RandomMode{{1, 0}, 0, 1, 0.0, 0.2, 0.0, 0.0}}};
  c.distribution.g = {{RandomMode{{1, 0}, 0, 0, 0.1, 0.2, 0.0, 0.0}}, {1.0, 0.5}, 1.0};
  c.statistics.barycenters = {{2.0, 2.0, Quantity::density}, {1.5, 3.0, Quantity::momentum}};
  c.statistics.functionals = {{"mean"}, {"hat", "fourier", Quantity::momentum, 0, {1, 0}, 1, 3, -1, 2.0}};
  c.seed = 99;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("config round trip") {
  for (auto mode : {ExperimentMode::weak, ExperimentMode::strong, ExperimentMode::convergence}) {
    const auto c = small_config(mode);
    const Json j = c;
    const auto back = Json::parse(j.dump()).get<ExperimentConfig>();
    CHECK(back == c);
    CHECK(Json(back).dump() == j.dump());
  }
  // defaults fill omitted keys; transforms may be given as bare numbers
  const auto d = Json::parse(R"({"distribution": {"mu": 2.5, "bounds": {"mu_lower": 1.0}}})").get<ExperimentConfig>();
  CHECK(d.distribution.mu == ParameterTransform::constant_value(2.5));
  CHECK(d.scheme == SchemeConfig{});
}

TEST_CASE("config validation") {
  auto c = small_config(ExperimentMode::weak);
  CHECK_NOTHROW(c.validate());
  c.ladder.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(ExperimentMode::weak);
  c.ladder = {{16, 2}, {8, 4}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.ladder = {{8, 4}, {16, 2}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.ladder = {{8, 4}, {12, 4}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(ExperimentMode::weak);
  c.distribution.mu = ParameterTransform::uniform(0, 0.001, 0.02);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(ExperimentMode::weak);
  c.statistics.barycenters = {{1.0, 2.0, Quantity::density}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(ExperimentMode::weak);
  c.statistics.functionals.push_back(c.statistics.functionals[0]);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(ExperimentMode::weak);
  c.distribution.rho0.modes[0].k = {5, 0};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_THROWS_AS(Json::parse(R"({"ladr": []})").get<ExperimentConfig>(), ConfigError);
  CHECK_THROWS_AS(Json::parse(R"({"scheme": {"cfl": "fast"}})").get<ExperimentConfig>(), ConfigError);
  CHECK_THROWS_AS(Json::parse(R"({"mode": "medium"})").get<ExperimentConfig>(), ConfigError);
}

TEST_CASE("thread count resolution") {
  ::unsetenv("NSUQ_THREADS");
  CHECK(resolve_thread_count(std::nullopt) == 1);
  ::setenv("NSUQ_THREADS", "3", 1);
  CHECK(resolve_thread_count(std::nullopt) == 3);
  CHECK(resolve_thread_count(5) == 5);
  ::setenv("NSUQ_THREADS", "many", 1);
  CHECK_THROWS_AS(resolve_thread_count(std::nullopt), ConfigError);
  CHECK(resolve_thread_count(2) == 2);
  CHECK_THROWS_AS(resolve_thread_count(0), ConfigError);
  ::unsetenv("NSUQ_THREADS");
}

TEST_CASE("weak run: determinism, thread invariance, artefacts") {
  auto c = small_config(ExperimentMode::weak);
  const auto dir = std::filesystem::temp_directory_path() / "nsuq_test_weak";
  std::filesystem::remove_all(dir);
  c.output_dir = (dir / "a").string();
  const auto r1 = run_weak(c, {1, true});
  c.output_dir = (dir / "b").string();
  const auto r2 = run_weak(c, {3, true});
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "level_1" / "members.csv") == slurp(dir / "b" / "level_1" / "members.csv"));
  CHECK(r1.json == r2.json);
  CHECK_FALSE(r1.any_tainted());
  for (const char* f : {"config.json", "convergence.csv", "level_0/summary.json", "level_0/boundedness.csv",
                        "level_0/functionals.csv", "level_0/barycenters.csv", "level_0/field_mean_density.csv",
                        "level_1/barycenter_1.csv"})
    CHECK(std::filesystem::exists(dir / "a" / f));
  const auto& lv = r1.json["levels"];
  REQUIRE(lv.size() == 2);
  CHECK(lv[1]["members"] == 4);
  CHECK(r1.json["cross_level"].size() == 1);
  CHECK(r1.json["provenance"]["config_hash"] == config_hash(c));

  auto other_seed = c;
  other_seed.seed = 100;
  CHECK(config_hash(other_seed) != config_hash(c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("degenerate spec reproduces the deterministic solve") {
  ExperimentConfig c;
  c.mode = ExperimentMode::weak;
  c.ladder = {{16, 1}, {16, 3}};
  c.scheme.final_time = 0.02;
  c.distribution.K = 1;
  c.distribution.bounds = {0.5, 0.01, 1.0, 1.0, 1.0};
  c.distribution.mu = ParameterTransform::constant_value(0.02);
  c.distribution.rho0 = {{1.0}, {RandomMode{{1, 0}, 0, -1, 0.1, 0.0, 0.0, 0.0}}};
  c.statistics.barycenters = {{2.0, 2.0, Quantity::density}, {3.0, 2.0, Quantity::density}};
  const auto rep = run_weak(c, {2, false});
  const DataRecord d = realize_data(c.distribution, LatentPoint{{0.3}}, GridSpec(1, 16));
  const auto single = solve(d, c.scheme);
  const auto& l0 = rep.json["levels"][0];
  CHECK(l0["member_reports"].size() == 1);
  CHECK(l0["member_reports"][0]["steps"] == single.steps);
  CHECK(l0["member_reports"][0]["final_energy"].get<double>() == single.final_energy());
  for (const auto& b : rep.json["levels"][1]["barycenters"]) CHECK(b["objective"].get<double>() <= 1e-12);
  for (const auto& b : rep.json["levels"][1]["barycenters"]) CHECK(b["residual"].get<double>() <= 1e-8);
  CHECK(rep.json["cross_level"][0]["field_mean_density_l1"].get<double>() <= 1e-14);
}

TEST_CASE("strong run: constant spec has zero data error, convergence table present") {
  ExperimentConfig c;
  c.mode = ExperimentMode::strong;
  c.ladder = {{8, 1}, {8, 2}, {16, 4}};
  c.scheme.final_time = 0.02;
  c.distribution.K = 1;
  c.distribution.bounds = {0.5, 0.5, 1.0, 1.0, 1.0};
  const auto rep = run_strong(c, {2, false});
  for (const auto& l : rep.json["levels"]) CHECK(l["data_sup_error"].get<double>() == 0.0);
  CHECK(rep.json["expectation_convergence"].size() == 2);

  auto s = small_config(ExperimentMode::strong);
  s.ladder = {{8, 2}, {16, 4}};
  const auto r = run_strong(s, {2, false});
  CHECK(r.json["levels"][1]["partition_cells"] == 16);
  CHECK(r.json["levels"][1]["data_sup_error"].get<double>() < r.json["levels"][0]["data_sup_error"].get<double>());
}

TEST_CASE("deterministic convergence runs") {
  ExperimentConfig c;
  c.mode = ExperimentMode::convergence;
  c.ladder = {{16, 1}, {32, 1}, {64, 1}};
  c.scheme.final_time = 0.1;
  c.distribution.bounds.mu_lower = 0.01;
  c.distribution.mu = ParameterTransform::constant_value(0.01);
  const auto m = run_deterministic_convergence(c, {1, false});
  const auto& rows = m.json["rows"];
  CHECK(rows.size() == 3);
  CHECK(rows[2]["order"].get<double>() >= 0.9);

  c.convergence.problem = "equilibrium";
  const auto e = run_deterministic_convergence(c, {1, false});
  for (const auto& r : e.json["rows"]) CHECK(r["error"].get<double>() <= 1e-14);

  c.convergence.problem = "self";
  c.distribution.bounds.rho_lower = 0.5;
  c.distribution.rho0.modes = {RandomMode{{1, 0}, 0, -1, 0.2, 0.0, 0.0, 0.0}};
  const auto s1 = run_deterministic_convergence(c, {1, false});
  const auto s2 = run_deterministic_convergence(c, {1, false});
  CHECK(s1.json.dump() == s2.json.dump());
  CHECK(s1.json["rows"][2]["error"].get<double>() < s1.json["rows"][0]["error"].get<double>());
}

TEST_CASE("trajectory checkpoints round trip") {
  SchemeConfig cfg;
  cfg.final_time = 0.01;
  cfg.output_intervals = 3;
  DataRecord d;
  d.rho0 = Field::scalar(GridSpec(2, 4), 1.0);
  d.u0 = Field::vector(GridSpec(2, 4), 0.1);
  d.mu = 0.1;
  const auto rep = solve(d, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "nsuq_test_traj";
  std::filesystem::remove_all(dir);
  write_trajectory(dir, rep.trajectory);
  const auto back = read_trajectory(dir);
  CHECK(back.times == rep.trajectory.times);
  for (std::size_t j = 0; j < back.size(); ++j) {
    CHECK(back.states[j].rho == rep.trajectory.states[j].rho);
    CHECK(back.states[j].momentum == rep.trajectory.states[j].momentum);
  }
  const Json s = report_summary(rep);
  CHECK(s["status"] == "completed");
  CHECK(s["steps"] == rep.steps);
  std::filesystem::remove_all(dir);
}
