#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gequi/analyzer.hpp"
#include "gequi/metrics.hpp"

namespace gequi {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const IntRange&) const = default;
};

struct OracleCell {
  int i = 0;
  int k = 0;
  int s = 0;
  CommutationVerdict verdict;
  bool predicted = false;  // check_layer(i, k, s, 0)

  bool agrees() const { return verdict.holds == predicted; }
  bool operator==(const OracleCell&) const = default;
};

struct OracleGrid {
  Symmetry symmetry = Symmetry::Rotation;
  IntRange i_range;
  IntRange k_range;
  IntRange s_range;
  std::vector<OracleCell> cells;

  std::size_t agreeing() const;
  bool operator==(const OracleGrid&) const = default;
};

/// Evaluates the commutation oracle on every (i, k, s) with k <= i.
/// Throws ConfigError for empty or non-positive ranges.
OracleGrid run_oracle_grid(Symmetry symmetry, IntRange i_range, IntRange k_range, IntRange s_range);

struct SuggestResult {
  int lo = 0;
  int hi = 0;
  std::vector<int> sizes;
  bool operator==(const SuggestResult&) const = default;
};

struct MeasureResult {
  std::vector<EquivarianceProfile> profiles;
  bool operator==(const MeasureResult&) const = default;
};

struct SweepResult {
  int input_size = 0;
  bool integer_mode = false;
  std::vector<SweepRow> rows;
  bool operator==(const SweepResult&) const = default;
};

/// Envelope written by every CLI command in structured mode.
struct ReportDocument {
  int schema_version = kReportSchemaVersion;
  std::string tool_version = kToolVersion;
  std::vector<std::string> command;
  std::string config_name;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::string result_kind;  // analysis | suggest | oracle | profile | sweep | builtins
  nlohmann::json result;
  int exit_code = 0;

  bool operator==(const ReportDocument&) const = default;
};

void to_json(nlohmann::json& j, const GroupElement& g);
void from_json(const nlohmann::json& j, GroupElement& g);
void to_json(nlohmann::json& j, const TraceRecord& r);
void from_json(const nlohmann::json& j, TraceRecord& r);
void to_json(nlohmann::json& j, const AnalysisReport& r);
void from_json(const nlohmann::json& j, AnalysisReport& r);
void to_json(nlohmann::json& j, const OracleGrid& g);
void from_json(const nlohmann::json& j, OracleGrid& g);
void to_json(nlohmann::json& j, const SuggestResult& r);
void from_json(const nlohmann::json& j, SuggestResult& r);
void to_json(nlohmann::json& j, const EquivarianceProfile& p);
void from_json(const nlohmann::json& j, EquivarianceProfile& p);
void to_json(nlohmann::json& j, const MeasureResult& r);
void from_json(const nlohmann::json& j, MeasureResult& r);
void to_json(nlohmann::json& j, const SweepResult& r);
void from_json(const nlohmann::json& j, SweepResult& r);
void to_json(nlohmann::json& j, const ReportDocument& d);
void from_json(const nlohmann::json& j, ReportDocument& d);

}  // namespace gequi
