#include "gequi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gequi/analyzer.hpp"
#include "gequi/config.hpp"
#include "gequi/errors.hpp"
#include "gequi/metrics.hpp"
#include "gequi/report.hpp"

namespace gequi::cli {

namespace {

using nlohmann::json;

constexpr double kRealTolerance = 1e-9;

struct Options {
  std::string config;
  std::optional<int> input_size;
  std::uint64_t seed = 0;
  int seeds = 1;
  bool integer_weights = false;
  std::string format = "text";
  std::string elements;
  std::string out_path;
  std::optional<int> lo;
  std::optional<int> hi;
  int radius = 4;
  std::string i_range = "2:24";
  std::string k_range = "1:5";
  std::string s_range = "1:4";
  std::string symmetry = "rot";
  double angle_step = 15.0;
};

struct Outcome {
  ReportDocument doc;
  std::string text;
};

class Style {
 public:
  explicit Style(bool color) : color_(color) {}
  std::string ok(bool good) const {
    if (!color_) return good ? "✓" : "✗";
    return good ? "\033[32m✓\033[0m" : "\033[31m✗\033[0m";
  }

 private:
  bool color_;
};

ArchitectureSpec resolve_config(const Options& opt) {
  std::string name = opt.config;
  ArchitectureSpec arch;
  if (name.rfind("builtin:", 0) != 0 && std::filesystem::is_regular_file(name)) {
    arch = load_config(name);
  } else {
    if (name.rfind("builtin:", 0) == 0) name = name.substr(8);
    auto builtin = find_builtin(name);
    if (!builtin) throw ConfigError("'" + opt.config + "' is neither a readable config file nor a built-in");
    arch = *builtin;
  }
  if (opt.input_size) arch.input_size = *opt.input_size;
  return arch;
}

IntRange parse_range(const std::string& text, const std::string& what) {
  IntRange r;
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      r.lo = r.hi = std::stoi(text);
    } else {
      r.lo = std::stoi(text.substr(0, colon));
      r.hi = std::stoi(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected N or LO:HI, got '" + text + "'");
  }
  return r;
}

std::vector<GroupElement> parse_elements(const std::string& text, GroupKind kind) {
  std::vector<GroupElement> out;
  if (text.empty()) {
    const GroupKind pool = kind == GroupKind::P4M ? GroupKind::P4M : GroupKind::P4;
    for (const GroupElement g : elements(pool))
      if (g != GroupElement::identity()) out.push_back(g);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_element(item));
  }
  if (out.empty()) throw ConfigError("--elements: no elements given");
  return out;
}

ReportDocument envelope(const std::vector<std::string>& args, const ArchitectureSpec* arch, const char* kind) {
  ReportDocument doc;
  doc.command = args;
  if (arch) {
    doc.config_name = arch->name;
    doc.config_digest = config_digest(*arch);
  }
  doc.result_kind = kind;
  return doc;
}

std::string fmt_error(double v) {
  std::ostringstream os;
  if (v == 0.0) {
    os << "0";
  } else {
    os << std::scientific << std::setprecision(3) << v;
  }
  return os.str();
}

Outcome cmd_analyze(const Options& opt, const std::vector<std::string>& args, const Style& style) {
  const ArchitectureSpec arch = resolve_config(opt);
  infer_shapes(arch);
  const AnalysisReport report = analyze(arch.layers, arch.input_size, opt.radius);
  Outcome o{envelope(args, &arch, "analysis"), {}};
  o.doc.result = report;
  o.doc.exit_code = report.exact ? kExitExact : kExitInexact;

  std::ostringstream os;
  os << "network " << arch.name << " (" << to_string(arch.group) << "), input " << arch.input_size << "x"
     << arch.input_size << "\n";
  os << std::setw(4) << "idx" << "  " << std::left << std::setw(16) << "layer" << std::right << std::setw(3) << "k"
     << std::setw(3) << "s" << std::setw(3) << "p" << std::setw(6) << "in" << std::setw(8) << "padded" << std::setw(6)
     << "out" << "  ok  note\n";
  for (const TraceRecord& rec : report.trace) {
    const LayerSpec& layer = arch.layers[static_cast<std::size_t>(rec.layer_index)];
    const bool spatial = has_spatial_kernel(layer.kind);
    auto field = [&](int v) { return spatial ? std::to_string(v) : std::string("-"); };
    os << std::setw(4) << rec.layer_index << "  " << std::left << std::setw(16) << to_string(rec.kind) << std::right
       << std::setw(3) << field(layer.k) << std::setw(3) << field(layer.s) << std::setw(3) << field(layer.p)
       << std::setw(6) << rec.input_side << std::setw(8) << rec.padded_side << std::setw(6) << rec.output_side << "  "
       << style.ok(rec.condition_ok) << "   " << rec.reason << "\n";
  }
  if (report.exact) {
    os << "verdict: EXACT (every subsampling layer keeps its grid under rotation and mirroring)\n";
  } else {
    os << "verdict: APPROXIMATE (violations at layer";
    for (const int v : report.violations) os << " " << v;
    os << ")\n";
  }
  os << "exact input sizes in [" << report.search_lo << ", " << report.search_hi << "]:";
  for (const int s : report.suggested_sizes) os << " " << s;
  if (report.suggested_sizes.empty()) os << " none";
  os << "\n";
  o.text = os.str();
  return o;
}

Outcome cmd_suggest(const Options& opt, const std::vector<std::string>& args) {
  const ArchitectureSpec arch = resolve_config(opt);
  const int lo = opt.lo.value_or(std::max(1, arch.input_size - opt.radius));
  const int hi = opt.hi.value_or(arch.input_size + opt.radius);
  if (lo > hi) throw ConfigError("--lo must not exceed --hi");
  SuggestResult result{lo, hi, suggest_input_sizes(arch.layers, lo, hi)};
  Outcome o{envelope(args, &arch, "suggest"), {}};
  o.doc.result = result;
  o.doc.exit_code = kExitExact;
  std::ostringstream os;
  os << "exact input sizes for " << arch.name << " in [" << lo << ", " << hi << "]:";
  for (const int s : result.sizes) os << " " << s;
  if (result.sizes.empty()) os << " none";
  os << "\n";
  o.text = os.str();
  return o;
}

Outcome cmd_oracle(const Options& opt, const std::vector<std::string>& args, const Style& style) {
  Symmetry symmetry;
  if (opt.symmetry == "rot") {
    symmetry = Symmetry::Rotation;
  } else if (opt.symmetry == "mirror") {
    symmetry = Symmetry::Mirror;
  } else {
    throw ConfigError("--symmetry must be rot or mirror");
  }
  const OracleGrid grid = run_oracle_grid(symmetry, parse_range(opt.i_range, "--i"), parse_range(opt.k_range, "--k"),
                                          parse_range(opt.s_range, "--s"));
  Outcome o{envelope(args, nullptr, "oracle"), {}};
  o.doc.result = grid;
  const bool all_agree = grid.agreeing() == grid.cells.size();
  o.doc.exit_code = all_agree ? kExitExact : kExitInexact;

  std::ostringstream os;
  std::size_t holding = 0;
  for (const OracleCell& c : grid.cells) holding += c.verdict.holds ? 1 : 0;
  os << (symmetry == Symmetry::Rotation ? "rotation" : "mirror") << " commutation oracle over i in ["
     << grid.i_range.lo << ", " << grid.i_range.hi << "], k in [" << grid.k_range.lo << ", " << grid.k_range.hi
     << "], s in [" << grid.s_range.lo << ", " << grid.s_range.hi << "]\n";
  const bool verbose = grid.cells.size() <= 24;
  for (const OracleCell& c : grid.cells) {
    if (!verbose && c.agrees()) continue;
    os << "  i=" << c.i << " k=" << c.k << " s=" << c.s << "  holds=" << (c.verdict.holds ? "yes" : "no")
       << "  (i-k) mod s = 0: " << (c.predicted ? "yes" : "no") << "  " << style.ok(c.agrees()) << "\n";
    if (c.verdict.counterexample) {
      const Counterexample& ce = *c.verdict.counterexample;
      auto patch = [](const IndexPatch& p) {
        return "[(" + std::to_string(p.top_left.x) + "," + std::to_string(p.top_left.y) + "),(" +
               std::to_string(p.bottom_right.x) + "," + std::to_string(p.bottom_right.y) + ")]";
      };
      os << "    counterexample at output (" << ce.output.x << "," << ce.output.y
         << "): transform-then-sample " << patch(ce.transform_then_sample) << " vs sample-then-transform "
         << patch(ce.sample_then_transform) << "\n";
    }
  }
  os << "cells: " << grid.cells.size() << ", commuting: " << holding << ", agreement with (i-k) mod s = 0: "
     << grid.agreeing() << "/" << grid.cells.size() << "\n";
  o.text = os.str();
  return o;
}

Outcome cmd_measure(const Options& opt, const std::vector<std::string>& args) {
  const ArchitectureSpec arch = resolve_config(opt);
  if (opt.seeds < 1) throw ConfigError("--seeds must be >= 1");
  const std::vector<GroupElement> elems = parse_elements(opt.elements, arch.group);
  MeasureResult result;
  for (int i = 0; i < opt.seeds; ++i) {
    result.profiles.push_back(profile_equivariance(arch, opt.seed + static_cast<std::uint64_t>(i), elems, opt.integer_weights));
  }
  double worst = 0.0;
  for (const auto& p : result.profiles) worst = std::max(worst, p.max_error());
  const bool zero = opt.integer_weights ? worst == 0.0 : worst <= kRealTolerance;

  Outcome o{envelope(args, &arch, "profile"), {}};
  o.doc.seed = opt.seed;
  o.doc.result = result;
  o.doc.exit_code = zero ? kExitExact : kExitInexact;

  std::ostringstream os;
  os << "equivariance error of " << arch.name << " at input " << arch.input_size << " ("
     << (opt.integer_weights ? "integer" : "real") << " weights)\n";
  for (const auto& p : result.profiles) {
    os << "seed " << p.seed << "\n";
    os << std::setw(6) << "layer" << "  " << std::left << std::setw(16) << "kind" << std::right;
    for (const GroupElement g : elems) os << std::setw(12) << to_string(g);
    os << "\n";
    for (std::size_t e = 0; e < p.entries.size(); e += elems.size()) {
      const int layer = p.entries[e].layer_index;
      os << std::setw(6) << layer << "  " << std::left << std::setw(16)
         << to_string(arch.layers[static_cast<std::size_t>(layer)].kind) << std::right;
      for (std::size_t j = 0; j < elems.size(); ++j) os << std::setw(12) << fmt_error(p.entries[e + j].error);
      os << "\n";
    }
  }
  os << "max error: " << fmt_error(worst) << (zero ? " (exact)" : " (equivariance broken)") << "\n";
  o.text = os.str();
  return o;
}

Outcome cmd_sweep(const Options& opt, const std::vector<std::string>& args) {
  const ArchitectureSpec arch = resolve_config(opt);
  const Network net = build_network(arch, opt.seed, opt.integer_weights);
  const FeatureMap x = random_feature_map(input_seed(opt.seed), arch.input_channels, 1, arch.input_size,
                                          arch.input_size, opt.integer_weights);
  SweepResult result{arch.input_size, opt.integer_weights, invariance_sweep(net, x, sweep_angles(opt.angle_step))};
  bool quarter_turns_ok = true;
  for (const SweepRow& row : result.rows) {
    if (std::fmod(row.angle, 90.0) == 0.0 && row.discrepancy > kRealTolerance) quarter_turns_ok = false;
  }
  Outcome o{envelope(args, &arch, "sweep"), {}};
  o.doc.seed = opt.seed;
  o.doc.result = result;
  o.doc.exit_code = quarter_turns_ok ? kExitExact : kExitInexact;

  std::ostringstream os;
  os << "invariance sweep of " << arch.name << " at input " << arch.input_size << " (circle-cropped, bilinear)\n";
  os << std::setw(10) << "angle" << std::setw(14) << "discrepancy" << "\n";
  for (const SweepRow& row : result.rows) {
    os << std::setw(10) << row.angle << std::setw(14) << fmt_error(row.discrepancy)
       << (std::fmod(row.angle, 90.0) == 0.0 ? "  *" : "") << "\n";
  }
  os << "(* quarter turns; only these are covered by the discrete group)\n";
  o.text = os.str();
  return o;
}

Outcome cmd_list(const std::vector<std::string>& args) {
  Outcome o{envelope(args, nullptr, "builtins"), {}};
  json list = json::array();
  std::ostringstream os;
  for (const Builtin& b : builtins()) {
    list.push_back({{"name", b.arch.name}, {"description", b.description}, {"config", config_to_json(b.arch)}});
    os << std::left << std::setw(14) << b.arch.name << std::setw(5) << to_string(b.arch.group) << std::right
       << std::setw(4) << b.arch.input_size << "  " << b.description << "\n";
  }
  o.doc.result = list;
  o.text = os.str();
  return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
  CLI::App app{"Exact-equivariance analysis for p4/p4m group convolutional networks", "gequi"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", opt.format, "text or structured (JSON)")
        ->check(CLI::IsMember({"text", "structured", "json"}));
    sub->add_option("--out", opt.out_path, "write the report to this path instead of stdout");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", opt.config, "config file path or built-in name")->required();
    sub->add_option("--input-size", opt.input_size, "override the config's input side length")
        ->check(CLI::PositiveNumber);
  };
  auto add_weights = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "seed for weights and input");
    sub->add_flag("--integer-weights", opt.integer_weights, "draw weights and inputs from integers in [-4, 4]");
  };

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "static exactness verdict per layer");
  add_config(analyze_cmd);
  add_common(analyze_cmd);
  analyze_cmd->add_option("--radius", opt.radius, "search radius for suggested input sizes")->check(CLI::NonNegativeNumber);

  CLI::App* suggest_cmd = app.add_subcommand("suggest", "list input sizes that make the network exact");
  add_config(suggest_cmd);
  add_common(suggest_cmd);
  suggest_cmd->add_option("--lo", opt.lo, "smallest input size to try");
  suggest_cmd->add_option("--hi", opt.hi, "largest input size to try");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force index commutation over an (i, k, s) grid");
  add_common(oracle_cmd);
  oracle_cmd->add_option("--i", opt.i_range, "input sizes, N or LO:HI");
  oracle_cmd->add_option("--k", opt.k_range, "kernel sizes, N or LO:HI");
  oracle_cmd->add_option("--s", opt.s_range, "strides, N or LO:HI");
  oracle_cmd->add_option("--symmetry", opt.symmetry, "rot or mirror");

  CLI::App* measure_cmd = app.add_subcommand("measure", "per-depth equivariance error with random weights");
  add_config(measure_cmd);
  add_common(measure_cmd);
  add_weights(measure_cmd);
  measure_cmd->add_option("--seeds", opt.seeds, "number of consecutive seeds starting at --seed");
  measure_cmd->add_option("--elements", opt.elements, "comma-separated group elements, e.g. r,r2,r3,m");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "output discrepancy under bilinear rotations");
  add_config(sweep_cmd);
  add_common(sweep_cmd);
  add_weights(sweep_cmd);
  sweep_cmd->add_option("--angle-step", opt.angle_step, "angle step in degrees");

  CLI::App* list_cmd = app.add_subcommand("list-builtins", "show the built-in architectures");
  add_common(list_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  Outcome outcome;
  try {
    const Style style(color && opt.out_path.empty());
    if (*analyze_cmd) {
      outcome = cmd_analyze(opt, args, style);
    } else if (*suggest_cmd) {
      outcome = cmd_suggest(opt, args);
    } else if (*oracle_cmd) {
      outcome = cmd_oracle(opt, args, style);
    } else if (*measure_cmd) {
      outcome = cmd_measure(opt, args);
    } else if (*sweep_cmd) {
      outcome = cmd_sweep(opt, args);
    } else {
      outcome = cmd_list(args);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string rendered =
      opt.format == "text" ? outcome.text : json(outcome.doc).dump(2) + "\n";
  if (opt.out_path.empty()) {
    out << rendered;
  } else {
    std::ofstream file(opt.out_path);
    if (!file) {
      err << "error: cannot write '" << opt.out_path << "'\n";
      return kExitUsage;
    }
    file << rendered;
  }
  return outcome.doc.exit_code;
}

}  // namespace gequi::cli
