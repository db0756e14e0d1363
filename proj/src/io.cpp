#include "nsuq/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nsuq {

namespace {

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
}

void check_keys(const Json& j, const char* what, std::initializer_list<const char*> allowed) {
  require_object(j, what);
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

} // namespace

void to_json(Json& j, const SchemeConfig& c) {
  j = Json{{"cfl", c.cfl},
           {"final_time", c.final_time},
           {"theta_implicit", c.theta_implicit},
           {"linf_ceiling", c.linf_ceiling},
           {"picard_tol", c.picard_tol},
           {"picard_max_iter", c.picard_max_iter},
           {"output_intervals", c.output_intervals},
           {"density_diffusion_exponent", c.density_diffusion_exponent},
           {"max_steps", c.max_steps},
           {"max_dt_halvings", c.max_dt_halvings}};
}

void from_json(const Json& j, SchemeConfig& c) {
  check_keys(j, "scheme",
             {"cfl", "final_time", "theta_implicit", "linf_ceiling", "picard_tol", "picard_max_iter",
              "output_intervals", "density_diffusion_exponent", "max_steps", "max_dt_halvings"});
  read_opt(j, "cfl", c.cfl);
  read_opt(j, "final_time", c.final_time);
  read_opt(j, "theta_implicit", c.theta_implicit);
  read_opt(j, "linf_ceiling", c.linf_ceiling);
  read_opt(j, "picard_tol", c.picard_tol);
  read_opt(j, "picard_max_iter", c.picard_max_iter);
  read_opt(j, "output_intervals", c.output_intervals);
  read_opt(j, "density_diffusion_exponent", c.density_diffusion_exponent);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "max_dt_halvings", c.max_dt_halvings);
}

void to_json(Json& j, const AdmissibleBounds& b) {
  j = Json{{"rho_lower", b.rho_lower}, {"mu_lower", b.mu_lower}, {"a_lower", b.a_lower},
           {"a_upper", b.a_upper},     {"g_sup", b.g_sup}};
}

void from_json(const Json& j, AdmissibleBounds& b) {
  check_keys(j, "bounds", {"rho_lower", "mu_lower", "a_lower", "a_upper", "g_sup"});
  read_opt(j, "rho_lower", b.rho_lower);
  read_opt(j, "mu_lower", b.mu_lower);
  read_opt(j, "a_lower", b.a_lower);
  read_opt(j, "a_upper", b.a_upper);
  read_opt(j, "g_sup", b.g_sup);
}

void to_json(Json& j, const ParameterTransform& t) {
  switch (t.kind) {
  case ParameterTransform::Kind::constant:
    j = Json{{"kind", "constant"}, {"value", t.value}};
    break;
  case ParameterTransform::Kind::uniform:
    j = Json{{"kind", "uniform"}, {"coord", t.coord}, {"lo", t.lo}, {"hi", t.hi}};
    break;
  case ParameterTransform::Kind::truncated_normal:
    j = Json{{"kind", "truncated_normal"}, {"coord", t.coord}, {"lo", t.lo},
             {"hi", t.hi},                 {"mean", t.mean},   {"sd", t.sd}};
    break;
  }
}

void from_json(const Json& j, ParameterTransform& t) {
  if (j.is_number()) {
    t = ParameterTransform::constant_value(j.get<double>());
    return;
  }
  check_keys(j, "transform", {"kind", "value", "coord", "lo", "hi", "mean", "sd"});
  std::string kind = "constant";
  read_opt(j, "kind", kind);
  ParameterTransform out;
  read_opt(j, "value", out.value);
  read_opt(j, "coord", out.coord);
  read_opt(j, "lo", out.lo);
  read_opt(j, "hi", out.hi);
  read_opt(j, "mean", out.mean);
  read_opt(j, "sd", out.sd);
  if (kind == "constant") out.kind = ParameterTransform::Kind::constant;
  else if (kind == "uniform") out.kind = ParameterTransform::Kind::uniform;
  else if (kind == "truncated_normal") out.kind = ParameterTransform::Kind::truncated_normal;
  else throw ConfigError("transform: unknown kind '" + kind + "'");
  t = out;
}

void to_json(Json& j, const RandomMode& m) {
  j = Json{{"k", m.k},
           {"component", m.component},
           {"coord", m.coord},
           {"cos_base", m.cos_base},
           {"cos_slope", m.cos_slope},
           {"sin_base", m.sin_base},
           {"sin_slope", m.sin_slope}};
}

void from_json(const Json& j, RandomMode& m) {
  check_keys(j, "mode", {"k", "component", "coord", "cos_base", "cos_slope", "sin_base", "sin_slope"});
  m = RandomMode{};
  read_opt(j, "k", m.k);
  read_opt(j, "component", m.component);
  read_opt(j, "coord", m.coord);
  read_opt(j, "cos_base", m.cos_base);
  read_opt(j, "cos_slope", m.cos_slope);
  read_opt(j, "sin_base", m.sin_base);
  read_opt(j, "sin_slope", m.sin_slope);
}

void to_json(Json& j, const RandomFieldSpec& s) { j = Json{{"mean", s.mean}, {"modes", s.modes}}; }

void from_json(const Json& j, RandomFieldSpec& s) {
  check_keys(j, "field", {"mean", "modes"});
  read_opt(j, "mean", s.mean);
  read_opt(j, "modes", s.modes);
}

void to_json(Json& j, const RandomForcingSpec& s) {
  j = Json{{"modes", s.modes}, {"envelope", s.envelope}, {"horizon", s.horizon}};
}

void from_json(const Json& j, RandomForcingSpec& s) {
  check_keys(j, "forcing", {"modes", "envelope", "horizon"});
  read_opt(j, "modes", s.modes);
  read_opt(j, "envelope", s.envelope);
  read_opt(j, "horizon", s.horizon);
}

void to_json(Json& j, const DistributionSpec& s) {
  j = Json{{"K", s.K},         {"dim", s.dim},     {"period", s.period}, {"gamma", s.gamma},
           {"bounds", s.bounds}, {"mu", s.mu},     {"eta", s.eta},       {"a", s.a},
           {"rho0", s.rho0},   {"u0", s.u0},       {"g", s.g},           {"sobolev_order", s.sobolev_order}};
}

void from_json(const Json& j, DistributionSpec& s) {
  check_keys(j, "distribution",
             {"K", "dim", "period", "gamma", "bounds", "mu", "eta", "a", "rho0", "u0", "g", "sobolev_order"});
  read_opt(j, "K", s.K);
  read_opt(j, "dim", s.dim);
  read_opt(j, "period", s.period);
  read_opt(j, "gamma", s.gamma);
  if (j.contains("bounds")) from_json(j.at("bounds"), s.bounds);
  if (j.contains("mu")) from_json(j.at("mu"), s.mu);
  if (j.contains("eta")) from_json(j.at("eta"), s.eta);
  if (j.contains("a")) from_json(j.at("a"), s.a);
  if (j.contains("rho0")) from_json(j.at("rho0"), s.rho0);
  if (j.contains("u0")) from_json(j.at("u0"), s.u0);
  if (j.contains("g")) from_json(j.at("g"), s.g);
  read_opt(j, "sobolev_order", s.sobolev_order);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no infinity; unresolved quantities are written as the string "inf".
Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

} // namespace

Json report_summary(const SolveReport& report) {
  return Json{{"status", to_string(report.status)},
              {"steps", report.steps},
              {"picard_iterations", report.picard_iterations},
              {"final_time", report.step_times.empty() ? 0.0 : report.step_times.back()},
              {"final_energy", num(report.final_energy())},
              {"max_linf", num(report.max_linf())},
              {"max_step_residual", num(report.max_step_residual)}};
}

Json to_json_value(const BoundednessReport& r) {
  return Json{{"mode", to_string(r.mode)},
              {"thresholds", nums(r.thresholds)},
              {"exceedance", nums(r.exceedance)},
              {"unresolved_weight", num(r.unresolved_weight)}};
}

Json to_json_value(const ProbabilityTable& t) {
  return Json{{"eps", nums(t.eps)}, {"exceedance", nums(t.exceedance)}};
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write(os);
  if (!os) throw IoError("write failed: " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& t) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  CsvTable times({"index", "time"});
  for (std::size_t j = 0; j < t.size(); ++j) {
    times.add_row({std::to_string(j), format_double(t.times[j])});
    for (const auto& [name, field] : {std::pair{"rho_", &t.states[j].rho}, std::pair{"m_", &t.states[j].momentum}}) {
      const auto path = dir / (name + std::to_string(j) + ".bin");
      std::ofstream os(path, std::ios::binary);
      if (!os) throw IoError("cannot open " + path.string());
      write_field_binary(os, *field);
    }
  }
  times.write(dir / "times.csv");
}

Trajectory read_trajectory(const std::filesystem::path& dir) {
  std::ifstream ts(dir / "times.csv");
  if (!ts) throw IoError("cannot open " + (dir / "times.csv").string());
  std::string line;
  std::getline(ts, line);
  Trajectory t;
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::size_t j = std::stoul(line.substr(0, comma));
    const double time = std::stod(line.substr(comma + 1));
    auto load = [&](const std::string& name) {
      std::ifstream is(dir / (name + std::to_string(j) + ".bin"), std::ios::binary);
      if (!is) throw IoError("missing snapshot file " + name + std::to_string(j) + ".bin");
      return read_field_binary(is);
    };
    FluidState s(load("rho_"), load("m_"), time);
    if (t.empty()) t.grid = s.grid();
    t.push(std::move(s));
  }
  return t;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

} // namespace nsuq
