#include "nsuq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#ifndef NSUQ_VERSION
#define NSUQ_VERSION "0.0.0"
#endif

namespace nsuq {

std::string to_string(ExperimentMode m) {
  switch (m) {
  case ExperimentMode::weak: return "weak";
  case ExperimentMode::strong: return "strong";
  case ExperimentMode::convergence: return "convergence";
  }
  return "weak";
}

ExperimentMode experiment_mode_from_string(const std::string& s) {
  if (s == "weak") return ExperimentMode::weak;
  if (s == "strong") return ExperimentMode::strong;
  if (s == "convergence") return ExperimentMode::convergence;
  throw ConfigError("unknown experiment mode: " + s);
}

TrajectoryFunctional FunctionalSpec::build() const {
  TrajectoryFunctional f;
  if (kind == "mean_density") f = functionals::mean_density(snapshot);
  else if (kind == "fourier") f = functionals::fourier_coefficient(quantity, component, k, part, snapshot);
  else if (kind == "neg_sobolev") f = functionals::neg_sobolev(quantity, m);
  else throw ConfigError("functional '" + name + "': unknown kind '" + kind + "'");
  if (tanh_scale > 0.0) f = functionals::tanh_of(std::move(f), tanh_scale);
  return f;
}

void ExperimentConfig::validate() const {
  if (ladder.empty()) throw ConfigError("ladder must have at least one level");
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    if (ladder[l].n < 2) throw ConfigError("ladder: n must be at least 2");
    if (ladder[l].samples < 1) throw ConfigError("ladder: samples must be at least 1");
    if (l == 0) continue;
    if (ladder[l].n < ladder[l - 1].n || ladder[l].n % ladder[l - 1].n != 0)
      throw ConfigError("ladder: each n must be a multiple of the previous one (h nonincreasing, nested grids)");
    if (ladder[l].samples < ladder[l - 1].samples) throw ConfigError("ladder: samples must be nondecreasing");
  }
  if (!(failure_budget >= 0.0 && failure_budget <= 1.0)) throw ConfigError("failure_budget must lie in [0, 1]");
  try {
    scheme.validate();
    distribution.validate();
    LatentPoint centre{std::vector<double>(static_cast<std::size_t>(distribution.K), 0.5)};
    (void)realize_data(distribution, centre, GridSpec{distribution.dim, ladder.front().n, distribution.period});
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto& st = statistics;
  for (double m : st.thresholds)
    if (!(m >= 0.0)) throw ConfigError("statistics: thresholds must be nonnegative");
  for (double e : st.eps)
    if (!(e > 0.0)) throw ConfigError("statistics: eps must be positive");
  for (const auto& b : st.barycenters)
    if (!(b.r > 1.0) || !(b.q >= 1.0) || std::isinf(b.q)) throw ConfigError("statistics: barycenter needs r > 1, finite q >= 1");
  std::set<std::string> names;
  for (const auto& f : st.functionals) {
    if (f.name.empty() || !names.insert(f.name).second)
      throw ConfigError("statistics: functional names must be nonempty and unique");
    (void)f.build();
  }
  if (!(st.distance_q >= 1.0)) throw ConfigError("statistics: distance_q must be >= 1");
  if (!(st.expectation_r > 0.0)) throw ConfigError("statistics: expectation_r must be positive");
  if (st.data_error_probes < 1) throw ConfigError("statistics: data_error_probes must be >= 1");
  const auto& cv = convergence;
  if (cv.problem != "manufactured" && cv.problem != "equilibrium" && cv.problem != "self")
    throw ConfigError("convergence: unknown problem '" + cv.problem + "'");
  if (mode == ExperimentMode::convergence && cv.problem == "manufactured" && distribution.dim != 1)
    throw ConfigError("convergence: the manufactured problem is one-dimensional");
  if (cv.reference_n != 0 && (cv.reference_n < ladder.back().n || cv.reference_n % ladder.back().n != 0))
    throw ConfigError("convergence: reference_n must be a multiple of the finest ladder n");
}

namespace {

void check_keys(const Json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
}

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
  }
}

Json functional_json(const FunctionalSpec& f) {
  return Json{{"name", f.name}, {"kind", f.kind},         {"quantity", to_string(f.quantity)},
              {"component", f.component}, {"k", f.k},     {"part", f.part},
              {"m", f.m},       {"snapshot", f.snapshot}, {"tanh_scale", f.tanh_scale}};
}

FunctionalSpec functional_from(const Json& j) {
  check_keys(j, "functional", {"name", "kind", "quantity", "component", "k", "part", "m", "snapshot", "tanh_scale"});
  FunctionalSpec f;
  read_opt(j, "name", f.name);
  read_opt(j, "kind", f.kind);
  std::string q = to_string(f.quantity);
  read_opt(j, "quantity", q);
  try {
    f.quantity = quantity_from_string(q);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read_opt(j, "component", f.component);
  read_opt(j, "k", f.k);
  read_opt(j, "part", f.part);
  read_opt(j, "m", f.m);
  read_opt(j, "snapshot", f.snapshot);
  read_opt(j, "tanh_scale", f.tanh_scale);
  if (f.name.empty()) f.name = f.kind;
  return f;
}

} // namespace

void to_json(Json& j, const ExperimentConfig& c) {
  Json ladder = Json::array();
  for (const auto& l : c.ladder) ladder.push_back(Json{{"n", l.n}, {"samples", l.samples}});
  Json bary = Json::array();
  for (const auto& b : c.statistics.barycenters)
    bary.push_back(Json{{"r", b.r}, {"q", b.q}, {"quantity", to_string(b.quantity)}});
  Json funcs = Json::array();
  for (const auto& f : c.statistics.functionals) funcs.push_back(functional_json(f));
  j = Json{{"mode", to_string(c.mode)},
           {"ladder", ladder},
           {"scheme", c.scheme},
           {"distribution", c.distribution},
           {"statistics",
            Json{{"thresholds", c.statistics.thresholds},
                 {"eps", c.statistics.eps},
                 {"barycenters", bary},
                 {"functionals", funcs},
                 {"distance_q", c.statistics.distance_q},
                 {"expectation_r", c.statistics.expectation_r},
                 {"data_error_probes", c.statistics.data_error_probes}}},
           {"convergence",
            Json{{"problem", c.convergence.problem},
                 {"amplitude", c.convergence.amplitude},
                 {"flux_offset", c.convergence.flux_offset},
                 {"reference_n", c.convergence.reference_n}}},
           {"point_rule", to_string(c.point_rule)},
           {"seed", c.seed},
           {"output_dir", c.output_dir},
           {"failure_budget", c.failure_budget},
           {"save_trajectories", c.save_trajectories}};
}

void from_json(const Json& j, ExperimentConfig& c) {
  check_keys(j, "experiment",
             {"mode", "ladder", "scheme", "distribution", "statistics", "convergence", "point_rule", "seed",
              "output_dir", "failure_budget", "save_trajectories"});
  ExperimentConfig out;
  std::string mode = to_string(out.mode);
  read_opt(j, "mode", mode);
  out.mode = experiment_mode_from_string(mode);
  if (auto it = j.find("ladder"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("ladder: expected an array");
    out.ladder.clear();
    for (const auto& l : *it) {
      check_keys(l, "ladder level", {"n", "samples"});
      LevelSpec spec;
      read_opt(l, "n", spec.n);
      read_opt(l, "samples", spec.samples);
      out.ladder.push_back(spec);
    }
  }
  if (j.contains("scheme")) from_json(j.at("scheme"), out.scheme);
  if (j.contains("distribution")) from_json(j.at("distribution"), out.distribution);
  if (auto it = j.find("statistics"); it != j.end()) {
    const Json& s = *it;
    check_keys(s, "statistics",
               {"thresholds", "eps", "barycenters", "functionals", "distance_q", "expectation_r", "data_error_probes"});
    auto& st = out.statistics;
    read_opt(s, "thresholds", st.thresholds);
    read_opt(s, "eps", st.eps);
    if (auto b = s.find("barycenters"); b != s.end()) {
      st.barycenters.clear();
      for (const auto& e : *b) {
        check_keys(e, "barycenter", {"r", "q", "quantity"});
        BarycenterRequest req;
        read_opt(e, "r", req.r);
        read_opt(e, "q", req.q);
        std::string q = to_string(req.quantity);
        read_opt(e, "quantity", q);
        try {
          req.quantity = quantity_from_string(q);
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(ex.what());
        }
        st.barycenters.push_back(req);
      }
    }
    if (auto f = s.find("functionals"); f != s.end()) {
      st.functionals.clear();
      for (const auto& e : *f) st.functionals.push_back(functional_from(e));
    }
    read_opt(s, "distance_q", st.distance_q);
    read_opt(s, "expectation_r", st.expectation_r);
    read_opt(s, "data_error_probes", st.data_error_probes);
  }
  if (auto it = j.find("convergence"); it != j.end()) {
    check_keys(*it, "convergence", {"problem", "amplitude", "flux_offset", "reference_n"});
    read_opt(*it, "problem", out.convergence.problem);
    read_opt(*it, "amplitude", out.convergence.amplitude);
    read_opt(*it, "flux_offset", out.convergence.flux_offset);
    read_opt(*it, "reference_n", out.convergence.reference_n);
  }
  if (j.contains("point_rule")) {
    try {
      out.point_rule = point_rule_from_string(j.at("point_rule").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("point_rule: ") + e.what());
    }
  }
  read_opt(j, "seed", out.seed);
  read_opt(j, "output_dir", out.output_dir);
  read_opt(j, "failure_budget", out.failure_budget);
  read_opt(j, "save_trajectories", out.save_trajectories);
  c = std::move(out);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  ExperimentConfig c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  Json j = c;
  j.erase("output_dir"); // where a report lands does not change its content
  return fnv1a_hex(j.dump());
}

std::string code_version() { return NSUQ_VERSION; }

bool ExperimentReport::any_tainted() const {
  return std::any_of(tainted.begin(), tainted.end(), [](bool t) { return t; });
}

int resolve_thread_count(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("NSUQ_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw ConfigError(std::string("NSUQ_THREADS is not a positive integer: ") + env);
    return static_cast<int>(v);
  }
  return 1;
}

namespace {

namespace fs = std::filesystem;

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string fmt(double v) { return format_double(v); }

fs::path make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
  return p;
}

void write_field_file(const fs::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string());
  write_field_csv(os, f);
  if (!os) throw IoError("write failed: " + path.string());
}

double relative_mass_drift(const SolveReport& r) {
  const auto& t = r.trajectory;
  if (t.size() < 2) return 0.0;
  const double m0 = t.states.front().mass();
  return std::abs(t.states.back().mass() - m0) / std::abs(m0);
}

std::size_t resolved_count(const Ensemble& e) {
  return static_cast<std::size_t>(
      std::count_if(e.members.begin(), e.members.end(), [](const EnsembleMember& m) { return m.report.completed(); }));
}

double unresolved_weight(const Ensemble& e) {
  double w = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (!e.members[i].report.completed()) w += e.weights[i];
  return w;
}

/// Per-level results retained for cross-level comparison.
struct LevelOutcome {
  Ensemble ensemble;
  std::vector<double> functional_values; ///< NaN when nothing resolved
  std::optional<Field> mean_density;     ///< final snapshot
  std::optional<Field> mean_momentum;
  std::vector<std::optional<Field>> barycenters;
};

double field_distance(const Field& a, const Field& b, double q) {
  const GridSpec& coarse = a.grid().n <= b.grid().n ? a.grid() : b.grid();
  return lq_norm(field_sub(restrict_or_prolong(a, coarse), restrict_or_prolong(b, coarse)), q);
}

/// Statistics common to both modes; fills `out` and returns the level JSON.
Json level_statistics(const ExperimentConfig& cfg, std::size_t level, const GridSpec& grid, LevelOutcome& out,
                      const fs::path* dir) {
  const Ensemble& ens = out.ensemble;
  const auto& st = cfg.statistics;
  Json j;
  j["level"] = level;
  j["n"] = grid.n;
  j["h"] = grid.dx();
  j["members"] = ens.size();
  j["resolved"] = resolved_count(ens);
  const double unresolved = unresolved_weight(ens);
  j["unresolved_weight"] = unresolved;
  j["tainted"] = unresolved > cfg.failure_budget;

  Json members = Json::array();
  std::vector<std::string> header{"index"};
  for (int k = 0; k < cfg.distribution.K; ++k) header.push_back("w" + std::to_string(k));
  for (const char* h : {"weight", "status", "steps", "picard_iterations", "max_linf", "final_energy", "mass_drift"})
    header.emplace_back(h);
  CsvTable member_csv(header);
  double max_drift = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& m = ens.members[i];
    const double drift = relative_mass_drift(m.report);
    if (m.report.completed()) max_drift = std::max(max_drift, drift);
    Json mj = report_summary(m.report);
    mj["index"] = i;
    mj["latent"] = m.latent.coords;
    mj["weight"] = ens.weights[i];
    mj["mass_drift"] = num(drift);
    members.push_back(mj);
    std::vector<std::string> row{std::to_string(i)};
    for (double w : m.latent.coords) row.push_back(fmt(w));
    row.insert(row.end(), {fmt(ens.weights[i]), to_string(m.report.status), std::to_string(m.report.steps),
                           std::to_string(m.report.picard_iterations), fmt(m.report.max_linf()),
                           fmt(m.report.final_energy()), fmt(drift)});
    member_csv.add_row(std::move(row));
  }
  j["member_reports"] = members;
  j["max_mass_drift"] = max_drift;

  const auto bound = boundedness_in_probability(ens, st.thresholds);
  j["boundedness"] = to_json_value(bound);
  CsvTable bound_csv({"threshold", "exceedance"});
  for (std::size_t k = 0; k < bound.thresholds.size(); ++k)
    bound_csv.add_row({fmt(bound.thresholds[k]), fmt(bound.exceedance[k])});

  const bool any = resolved_count(ens) > 0;
  Json fmeans = Json::array();
  CsvTable func_csv({"name", "value", "standard_error", "resolved_weight"});
  out.functional_values.clear();
  for (const auto& fs_spec : st.functionals) {
    const auto f = fs_spec.build();
    const auto mr = empirical_functional_mean(ens, f);
    const double value = any ? mr.value : std::nan("");
    out.functional_values.push_back(value);
    fmeans.push_back(Json{{"name", fs_spec.name},
                          {"value", num(value)},
                          {"standard_error", num(mr.standard_error)},
                          {"resolved_weight", mr.resolved_weight}});
    func_csv.add_row({fs_spec.name, fmt(value), fmt(mr.standard_error), fmt(mr.resolved_weight)});
  }
  j["functional_means"] = fmeans;

  Json bary = Json::array();
  CsvTable bary_csv({"index", "r", "q", "quantity", "objective", "residual", "iterations", "converged"});
  out.barycenters.assign(st.barycenters.size(), std::nullopt);
  if (any) {
    const auto rho_mean = empirical_field_mean(ens, Quantity::density);
    const auto m_mean = empirical_field_mean(ens, Quantity::momentum);
    out.mean_density = rho_mean.fields.back();
    out.mean_momentum = m_mean.fields.back();
    j["field_mean"] = Json{{"times", rho_mean.times},
                           {"density_integral", out.mean_density->integral()},
                           {"momentum_l2", lq_norm(*out.mean_momentum, 2.0)}};
    for (std::size_t b = 0; b < st.barycenters.size(); ++b) {
      const auto& req = st.barycenters[b];
      const auto res = r_barycenter(ens, req.quantity, req.r, req.q);
      out.barycenters[b] = res.minimizer;
      bary.push_back(Json{{"r", req.r},
                          {"q", req.q},
                          {"quantity", to_string(req.quantity)},
                          {"objective", num(res.objective)},
                          {"residual", num(res.first_order_residual)},
                          {"iterations", res.iterations},
                          {"converged", res.converged}});
      bary_csv.add_row({std::to_string(b), fmt(req.r), fmt(req.q), to_string(req.quantity), fmt(res.objective),
                        fmt(res.first_order_residual), std::to_string(res.iterations),
                        res.converged ? "true" : "false"});
    }
    const auto em = energy_moment_bound(ens);
    j["energy_moment"] = Json{{"times", em.times}, {"mean_energy", nums(em.mean_energy)},
                              {"bound", num(em.bound)},   {"time_of_max", em.time_of_max}};
  } else {
    out.mean_density.reset();
    out.mean_momentum.reset();
    j["field_mean"] = nullptr;
    j["energy_moment"] = nullptr;
  }
  j["barycenters"] = bary;

  if (dir) {
    member_csv.write(*dir / "members.csv");
    bound_csv.write(*dir / "boundedness.csv");
    func_csv.write(*dir / "functionals.csv");
    bary_csv.write(*dir / "barycenters.csv");
    if (out.mean_density) {
      write_field_file(*dir / "field_mean_density.csv", *out.mean_density);
      write_field_file(*dir / "field_mean_momentum.csv", *out.mean_momentum);
    }
    for (std::size_t b = 0; b < out.barycenters.size(); ++b)
      if (out.barycenters[b]) write_field_file(*dir / ("barycenter_" + std::to_string(b) + ".csv"), *out.barycenters[b]);
    if (cfg.save_trajectories)
      for (std::size_t i = 0; i < ens.size(); ++i)
        write_trajectory(*dir / "trajectories" / std::to_string(i), ens.members[i].report.trajectory);
  }
  return j;
}

/// Differences of level statistics between consecutive levels (coarse, fine).
Json cross_level_row(const ExperimentConfig& cfg, std::size_t coarse_level, const LevelOutcome& coarse,
                     const LevelOutcome& fine, const ProbabilityTable& diagnostic) {
  Json row;
  row["levels"] = Json::array({coarse_level, coarse_level + 1});
  row["diagnostic"] = to_json_value(diagnostic);
  Json fd = Json::array();
  for (std::size_t f = 0; f < cfg.statistics.functionals.size(); ++f)
    fd.push_back(Json{{"name", cfg.statistics.functionals[f].name},
                      {"difference", num(std::abs(fine.functional_values[f] - coarse.functional_values[f]))}});
  row["functional_differences"] = fd;
  if (coarse.mean_density && fine.mean_density) {
    row["field_mean_density_l1"] = field_distance(*coarse.mean_density, *fine.mean_density, 1.0);
    row["field_mean_momentum_l1"] = field_distance(*coarse.mean_momentum, *fine.mean_momentum, 1.0);
  } else {
    row["field_mean_density_l1"] = "inf";
    row["field_mean_momentum_l1"] = "inf";
  }
  Json bd = Json::array();
  for (std::size_t b = 0; b < cfg.statistics.barycenters.size(); ++b) {
    const auto& req = cfg.statistics.barycenters[b];
    const double d = coarse.barycenters[b] && fine.barycenters[b]
                         ? field_distance(*coarse.barycenters[b], *fine.barycenters[b], req.q)
                         : kInfinity;
    bd.push_back(num(d));
  }
  row["barycenter_distances"] = bd;
  return row;
}

void add_diagnostic_rows(CsvTable& table, std::size_t a, std::size_t b, const ProbabilityTable& t) {
  for (std::size_t k = 0; k < t.eps.size(); ++k)
    table.add_row({std::to_string(a), std::to_string(b), fmt(t.eps[k]), fmt(t.exceedance[k])});
}

Json provenance(const ExperimentConfig& cfg) {
  return Json{{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"code_version", code_version()}};
}

std::optional<fs::path> prepare_output(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!opt.write_outputs) return std::nullopt;
  const fs::path root = make_dir(cfg.output_dir);
  write_json_file(root / "config.json", Json(cfg));
  return root;
}

ExperimentReport finish(Json json, std::vector<bool> tainted,
                        const std::optional<fs::path>& root) {
  ExperimentReport rep;
  rep.tainted = std::move(tainted);
  json["any_tainted"] = rep.any_tainted();
  rep.json = std::move(json);
  if (root) {
    write_json_file(*root / "report.json", rep.json);
    rep.output_dir = *root;
  }
  return rep;
}

GridSpec level_grid(const ExperimentConfig& cfg, std::size_t l) {
  return GridSpec{cfg.distribution.dim, cfg.ladder[l].n, cfg.distribution.period};
}

} // namespace

ExperimentReport run_weak(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.mode != ExperimentMode::weak) throw ConfigError("run_weak: config mode is not weak");
  const auto root = prepare_output(config, options);
  Json report;
  report["mode"] = "weak";
  report["provenance"] = provenance(config);
  Json levels = Json::array();
  Json cross = Json::array();
  CsvTable diag_csv({"level_a", "level_b", "eps", "exceedance"});
  std::vector<bool> tainted;
  std::optional<LevelOutcome> prev;
  for (std::size_t l = 0; l < config.ladder.size(); ++l) {
    const GridSpec grid = level_grid(config, l);
    LevelOutcome cur;
    cur.ensemble = build_weak_ensemble(config.distribution, grid, config.scheme, config.seed, config.ladder[l].samples,
                                       options.threads);
    std::optional<fs::path> dir;
    if (root) dir = make_dir(*root / ("level_" + std::to_string(l)));
    Json lj = level_statistics(config, l, grid, cur, dir ? &*dir : nullptr);
    lj["samples"] = config.ladder[l].samples;
    if (dir) write_json_file(*dir / "summary.json", lj);
    tainted.push_back(lj["tainted"].get<bool>());
    levels.push_back(std::move(lj));
    if (prev) {
      // sample_latent is index addressable, so the coarse members reappear at the fine level
      const auto diag = convergence_in_probability_diagnostic(prev->ensemble, cur.ensemble, config.statistics.eps,
                                                              config.statistics.distance_q);
      cross.push_back(cross_level_row(config, l - 1, *prev, cur, diag));
      add_diagnostic_rows(diag_csv, l - 1, l, diag);
    }
    prev = std::move(cur);
  }
  report["levels"] = levels;
  report["cross_level"] = cross;
  if (root) diag_csv.write(*root / "convergence.csv");
  return finish(std::move(report), std::move(tainted), root);
}

ExperimentReport run_strong(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.mode != ExperimentMode::strong) throw ConfigError("run_strong: config mode is not strong");
  const auto root = prepare_output(config, options);
  const auto& spec = config.distribution;
  Json report;
  report["mode"] = "strong";
  report["provenance"] = provenance(config);
  Json levels = Json::array();
  std::vector<bool> tainted;
  std::vector<LevelOutcome> outcomes;
  std::vector<CollocationPartition> partitions;
  for (std::size_t l = 0; l < config.ladder.size(); ++l) {
    const GridSpec grid = level_grid(config, l);
    const int per_axis = static_cast<int>(config.ladder[l].samples);
    CollocationPartition partition;
    try {
      partition = build_partition(spec.K, per_axis, config.point_rule, config.seed);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    LevelOutcome cur;
    cur.ensemble = build_strong_ensemble(spec, grid, config.scheme, partition, options.threads);
    std::optional<fs::path> dir;
    if (root) dir = make_dir(*root / ("level_" + std::to_string(l)));
    Json lj = level_statistics(config, l, grid, cur, dir ? &*dir : nullptr);
    lj["per_axis"] = per_axis;
    lj["partition_cells"] = partition.size();
    lj["point_rule"] = to_string(config.point_rule);
    const double lattice = std::pow(config.statistics.data_error_probes + 1.0, spec.K);
    if (lattice <= 1e5) {
      CollocatedData collocated;
      collocated.partition = partition;
      collocated.records.reserve(cur.ensemble.size());
      for (const auto& m : cur.ensemble.members) collocated.records.push_back(m.data);
      lj["data_sup_error"] = collocation_sup_error(spec, collocated, grid, config.statistics.data_error_probes);
    } else {
      lj["data_sup_error"] = nullptr;
    }
    if (dir) write_json_file(*dir / "summary.json", lj);
    tainted.push_back(lj["tainted"].get<bool>());
    levels.push_back(std::move(lj));
    outcomes.push_back(std::move(cur));
    partitions.push_back(std::move(partition));
  }
  report["levels"] = levels;

  // Every level against the finest, evaluated at the finest level's collocation points.
  Json table = Json::array();
  CsvTable csv({"level", "n", "partition_cells", "density_error", "momentum_error", "eps", "exceedance"});
  const std::size_t L = outcomes.size();
  const auto& finest = outcomes.back().ensemble;
  const double gamma = spec.gamma;
  const double q_rho = gamma;
  const double q_m = 2.0 * gamma / (gamma + 1.0);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const auto pairs = pair_by_partition(partitions[l], outcomes[l].ensemble, finest);
    const double e_rho = expectation_norm_error(outcomes[l].ensemble, finest, pairs, Quantity::density, q_rho,
                                                config.statistics.expectation_r);
    const double e_m = expectation_norm_error(outcomes[l].ensemble, finest, pairs, Quantity::momentum, q_m,
                                              config.statistics.expectation_r);
    const auto diag = convergence_in_probability_diagnostic(outcomes[l].ensemble, finest, pairs,
                                                            config.statistics.eps, config.statistics.distance_q);
    table.push_back(Json{{"level", l},
                         {"n", config.ladder[l].n},
                         {"partition_cells", partitions[l].size()},
                         {"density_error", num(e_rho)},
                         {"momentum_error", num(e_m)},
                         {"density_q", q_rho},
                         {"momentum_q", q_m},
                         {"diagnostic", to_json_value(diag)}});
    for (std::size_t k = 0; k < diag.eps.size(); ++k)
      csv.add_row({std::to_string(l), std::to_string(config.ladder[l].n), std::to_string(partitions[l].size()),
                   fmt(e_rho), fmt(e_m), fmt(diag.eps[k]), fmt(diag.exceedance[k])});
  }
  report["expectation_convergence"] = table;
  if (root) csv.write(*root / "convergence.csv");
  return finish(std::move(report), std::move(tainted), root);
}

ExperimentReport run_deterministic_convergence(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto root = prepare_output(config, options);
  const auto& spec = config.distribution;
  const auto& cv = config.convergence;
  std::vector<GridSpec> grids;
  for (std::size_t l = 0; l < config.ladder.size(); ++l) grids.push_back(level_grid(config, l));
  const LatentPoint centre{std::vector<double>(static_cast<std::size_t>(spec.K), 0.5)};
  const DataRecord sample = realize_data(spec, centre, grids.front());

  std::vector<ConvergenceRow> rows;
  if (cv.problem == "manufactured") {
    const auto problem = manufactured_wave_problem(cv.amplitude, cv.flux_offset, sample.mu, sample.eta, sample.a,
                                                   sample.gamma, config.scheme.final_time);
    rows = manufactured_convergence(problem, grids, config.scheme);
  } else if (cv.problem == "equilibrium") {
    rows = manufactured_convergence(equilibrium_problem(spec.dim, sample.rho0.mean(), sample.mu, sample.a, sample.gamma),
                                    grids, config.scheme);
  } else {
    const int ref_n = cv.reference_n > 0 ? cv.reference_n : 2 * config.ladder.back().n;
    const GridSpec reference{spec.dim, ref_n, spec.period};
    rows = self_convergence([&](const GridSpec& g) { return realize_data(spec, centre, g); }, grids, reference,
                            config.scheme);
  }
  (void)options;

  Json report;
  report["mode"] = "convergence";
  report["problem"] = cv.problem;
  report["provenance"] = provenance(config);
  Json jrows = Json::array();
  CsvTable csv({"n", "h", "density_error", "momentum_error", "error", "order", "status"});
  std::vector<bool> tainted;
  for (const auto& r : rows) {
    jrows.push_back(Json{{"n", r.n},
                         {"h", r.h},
                         {"density_error", num(r.density_error)},
                         {"momentum_error", num(r.momentum_error)},
                         {"error", num(r.error)},
                         {"order", num(r.order)},
                         {"status", to_string(r.status)}});
    csv.add_row({std::to_string(r.n), fmt(r.h), fmt(r.density_error), fmt(r.momentum_error), fmt(r.error),
                 fmt(r.order), to_string(r.status)});
    tainted.push_back(r.status != SolveStatus::completed);
  }
  report["rows"] = jrows;
  if (root) csv.write(*root / "convergence.csv");
  return finish(std::move(report), std::move(tainted), root);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  switch (config.mode) {
  case ExperimentMode::weak: return run_weak(config, options);
  case ExperimentMode::strong: return run_strong(config, options);
  case ExperimentMode::convergence: return run_deterministic_convergence(config, options);
  }
  throw ConfigError("unknown mode");
}

} // namespace nsuq
