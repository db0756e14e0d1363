#pragma once

#include "nsuq/random_data.hpp"
#include "nsuq/solver.hpp"
#include "nsuq/statistics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsuq {

using Json = nlohmann::json;

/// Malformed or inconsistent configuration document.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Failure to read or write an output artefact.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void to_json(Json& j, const SchemeConfig& c);
void from_json(const Json& j, SchemeConfig& c);
void to_json(Json& j, const AdmissibleBounds& b);
void from_json(const Json& j, AdmissibleBounds& b);
void to_json(Json& j, const ParameterTransform& t);
void from_json(const Json& j, ParameterTransform& t);
void to_json(Json& j, const RandomMode& m);
void from_json(const Json& j, RandomMode& m);
void to_json(Json& j, const RandomFieldSpec& s);
void from_json(const Json& j, RandomFieldSpec& s);
void to_json(Json& j, const RandomForcingSpec& s);
void from_json(const Json& j, RandomForcingSpec& s);
void to_json(Json& j, const DistributionSpec& s);
void from_json(const Json& j, DistributionSpec& s);

/// status, step count, Picard iterations, final energy, max L-infinity, final time.
Json report_summary(const SolveReport& report);
Json to_json_value(const BoundednessReport& r);
Json to_json_value(const ProbabilityTable& t);

/// Deterministic text rendering of a double ("%.17g"; inf/nan spelled out).
std::string format_double(double v);

/// Small CSV writer: header row then rows of already formatted cells.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  void write(std::ostream& os) const;
  void write(const std::filesystem::path& path) const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

Json read_json_file(const std::filesystem::path& path);
/// Writes j.dump(2) plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Writes times.csv and one binary field file per snapshot and quantity
/// (rho_<j>.bin, m_<j>.bin) into dir.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& t);
Trajectory read_trajectory(const std::filesystem::path& dir);

/// 64-bit FNV-1a hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

} // namespace nsuq
