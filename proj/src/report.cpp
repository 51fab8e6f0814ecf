#include "gequi/report.hpp"

#include "gequi/errors.hpp"
#include "gequi/group.hpp"

namespace gequi {

using nlohmann::json;

namespace {

json patch_json(const IndexPatch& p) {
  return json::array({json::array({p.top_left.x, p.top_left.y}), json::array({p.bottom_right.x, p.bottom_right.y})});
}

IndexPatch patch_from(const json& j) {
  return {{j.at(0).at(0).get<int>(), j.at(0).at(1).get<int>()}, {j.at(1).at(0).get<int>(), j.at(1).at(1).get<int>()}};
}

json range_json(const IntRange& r) { return json::array({r.lo, r.hi}); }
IntRange range_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

std::size_t OracleGrid::agreeing() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.agrees() ? 1 : 0;
  return n;
}

OracleGrid run_oracle_grid(Symmetry symmetry, IntRange i_range, IntRange k_range, IntRange s_range) {
  for (const IntRange& r : {i_range, k_range, s_range}) {
    if (r.lo < 1 || r.lo > r.hi) {
      throw ConfigError("degenerate range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
    }
  }
  OracleGrid grid{symmetry, i_range, k_range, s_range, {}};
  for (int i = i_range.lo; i <= i_range.hi; ++i)
    for (int k = k_range.lo; k <= std::min(k_range.hi, i); ++k)
      for (int s = s_range.lo; s <= s_range.hi; ++s) {
        grid.cells.push_back({i, k, s, commutation(symmetry, i, k, s), check_layer(i, k, s, 0)});
      }
  if (grid.cells.empty()) throw ConfigError("oracle grid is empty (every k exceeds every i)");
  return grid;
}

void to_json(json& j, const GroupElement& g) { j = to_string(g); }
void from_json(const json& j, GroupElement& g) { g = parse_element(j.get<std::string>()); }

void to_json(json& j, const TraceRecord& r) {
  j = {{"layer", r.layer_index},  {"kind", std::string(to_string(r.kind))}, {"input_side", r.input_side},
       {"padded_side", r.padded_side}, {"output_side", r.output_side}, {"condition_ok", r.condition_ok},
       {"reason", r.reason}};
}

void from_json(const json& j, TraceRecord& r) {
  r.layer_index = j.at("layer").get<int>();
  r.kind = parse_layer_kind(j.at("kind").get<std::string>());
  r.input_side = j.at("input_side").get<int>();
  r.padded_side = j.at("padded_side").get<int>();
  r.output_side = j.at("output_side").get<int>();
  r.condition_ok = j.at("condition_ok").get<bool>();
  r.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const AnalysisReport& r) {
  j = {{"input_size", r.input_size},
       {"exact", r.exact},
       {"violations", r.violations},
       {"trace", r.trace},
       {"search_window", json::array({r.search_lo, r.search_hi})},
       {"suggested_sizes", r.suggested_sizes}};
}

void from_json(const json& j, AnalysisReport& r) {
  r.input_size = j.at("input_size").get<int>();
  r.exact = j.at("exact").get<bool>();
  r.violations = j.at("violations").get<std::vector<int>>();
  r.trace = j.at("trace").get<std::vector<TraceRecord>>();
  r.search_lo = j.at("search_window").at(0).get<int>();
  r.search_hi = j.at("search_window").at(1).get<int>();
  r.suggested_sizes = j.at("suggested_sizes").get<std::vector<int>>();
}

void to_json(json& j, const OracleGrid& g) {
  json cells = json::array();
  for (const OracleCell& c : g.cells) {
    json cell = {{"i", c.i}, {"k", c.k}, {"s", c.s}, {"holds", c.verdict.holds}, {"predicted", c.predicted},
                 {"agrees", c.agrees()}};
    if (c.verdict.counterexample) {
      const Counterexample& ce = *c.verdict.counterexample;
      cell["counterexample"] = {{"output", json::array({ce.output.x, ce.output.y})},
                                {"transform_then_sample", patch_json(ce.transform_then_sample)},
                                {"sample_then_transform", patch_json(ce.sample_then_transform)}};
    }
    cells.push_back(std::move(cell));
  }
  j = {{"symmetry", g.symmetry == Symmetry::Rotation ? "rot" : "mirror"},
       {"i_range", range_json(g.i_range)},
       {"k_range", range_json(g.k_range)},
       {"s_range", range_json(g.s_range)},
       {"cells", cells},
       {"total", g.cells.size()},
       {"agreeing", g.agreeing()}};
}

void from_json(const json& j, OracleGrid& g) {
  g.symmetry = j.at("symmetry").get<std::string>() == "rot" ? Symmetry::Rotation : Symmetry::Mirror;
  g.i_range = range_from(j.at("i_range"));
  g.k_range = range_from(j.at("k_range"));
  g.s_range = range_from(j.at("s_range"));
  g.cells.clear();
  for (const json& cell : j.at("cells")) {
    OracleCell c;
    c.i = cell.at("i").get<int>();
    c.k = cell.at("k").get<int>();
    c.s = cell.at("s").get<int>();
    c.verdict.holds = cell.at("holds").get<bool>();
    c.predicted = cell.at("predicted").get<bool>();
    if (cell.contains("counterexample")) {
      const json& ce = cell.at("counterexample");
      c.verdict.counterexample = Counterexample{{ce.at("output").at(0).get<int>(), ce.at("output").at(1).get<int>()},
                                                patch_from(ce.at("transform_then_sample")),
                                                patch_from(ce.at("sample_then_transform"))};
    }
    g.cells.push_back(std::move(c));
  }
}

void to_json(json& j, const SuggestResult& r) {
  j = {{"range", json::array({r.lo, r.hi})}, {"sizes", r.sizes}};
}

void from_json(const json& j, SuggestResult& r) {
  r.lo = j.at("range").at(0).get<int>();
  r.hi = j.at("range").at(1).get<int>();
  r.sizes = j.at("sizes").get<std::vector<int>>();
}

void to_json(json& j, const EquivarianceProfile& p) {
  json entries = json::array();
  for (const ProfileEntry& e : p.entries) {
    entries.push_back({{"layer", e.layer_index}, {"element", e.element}, {"error", e.error}});
  }
  j = {{"network", p.network}, {"seed", p.seed}, {"integer_mode", p.integer_mode}, {"entries", entries}};
}

void from_json(const json& j, EquivarianceProfile& p) {
  p.network = j.at("network").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.integer_mode = j.at("integer_mode").get<bool>();
  p.entries.clear();
  for (const json& e : j.at("entries")) {
    p.entries.push_back({e.at("layer").get<int>(), e.at("element").get<GroupElement>(), e.at("error").get<double>()});
  }
}

void to_json(json& j, const MeasureResult& r) { j = {{"profiles", r.profiles}}; }
void from_json(const json& j, MeasureResult& r) { r.profiles = j.at("profiles").get<std::vector<EquivarianceProfile>>(); }

void to_json(json& j, const SweepResult& r) {
  json rows = json::array();
  for (const SweepRow& row : r.rows) rows.push_back({{"angle", row.angle}, {"discrepancy", row.discrepancy}});
  j = {{"input_size", r.input_size}, {"integer_mode", r.integer_mode}, {"rows", rows}};
}

void from_json(const json& j, SweepResult& r) {
  r.input_size = j.at("input_size").get<int>();
  r.integer_mode = j.at("integer_mode").get<bool>();
  r.rows.clear();
  for (const json& row : j.at("rows")) r.rows.push_back({row.at("angle").get<double>(), row.at("discrepancy").get<double>()});
}

void to_json(json& j, const ReportDocument& d) {
  j = {{"schema_version", d.schema_version},
       {"tool", "gequi"},
       {"tool_version", d.tool_version},
       {"command", d.command},
       {"config_name", d.config_name},
       {"config_digest", d.config_digest},
       {"seed", d.seed ? json(*d.seed) : json(nullptr)},
       {"result_kind", d.result_kind},
       {"result", d.result},
       {"exit_code", d.exit_code}};
}

void from_json(const json& j, ReportDocument& d) {
  d.schema_version = j.at("schema_version").get<int>();
  if (d.schema_version != kReportSchemaVersion) {
    throw ConfigError("unsupported report schema_version " + std::to_string(d.schema_version));
  }
  d.tool_version = j.at("tool_version").get<std::string>();
  d.command = j.at("command").get<std::vector<std::string>>();
  d.config_name = j.at("config_name").get<std::string>();
  d.config_digest = j.at("config_digest").get<std::string>();
  d.seed = j.at("seed").is_null() ? std::nullopt : std::optional<std::uint64_t>(j.at("seed").get<std::uint64_t>());
  d.result_kind = j.at("result_kind").get<std::string>();
  d.result = j.at("result");
  d.exit_code = j.at("exit_code").get<int>();
}

}  // namespace gequi
