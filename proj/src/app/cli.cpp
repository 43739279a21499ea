#include "phaseflow/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <sstream>

#include "phaseflow/driver.hpp"
#include "phaseflow/error.hpp"
#include "phaseflow/scenarios.hpp"

namespace phaseflow {

namespace {

struct Flags {
  std::string config_path;
  std::string scenario;
  std::optional<int> level;
  std::optional<double> tmax;
  std::optional<int> max_steps;
  std::string model;
  std::string elements;
  std::string convection;
  std::string force;
  std::string out_dir;
  std::string audit;
  std::string eoc;
  std::optional<int> eoc_reference;
  bool vtk_quadratic = false;
  bool dump = false;
  bool quiet = false;
  std::vector<std::string> sets;
};

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      levels.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--eoc: '" + text + "' is not a comma separated list of levels");
    }
  }
  if (levels.empty()) throw ConfigError("--eoc: no levels given");
  return levels;
}

Config build_config(const Flags& f, bool eoc) {
  Config base;
  if (!f.config_path.empty()) {
    base = load_config(f.config_path, f.scenario);
  } else if (!f.scenario.empty()) {
    base = preset(f.scenario);
  } else {
    throw ConfigError("either a config file or --scenario is required");
  }
  if (eoc && !f.tmax) {
    base.t_end = 0.4;
    std::erase(base.defaulted, std::string("solver.t_end"));
  }

  Config c = base;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.level) overrides.emplace_back("domain.level", std::to_string(*f.level));
  if (f.tmax) overrides.emplace_back("solver.t_end", format_number(*f.tmax));
  if (f.max_steps) overrides.emplace_back("solver.max_steps", std::to_string(*f.max_steps));
  if (!f.model.empty()) overrides.emplace_back("physics.model", f.model);
  if (!f.elements.empty()) overrides.emplace_back("discretization.elements", f.elements);
  if (!f.convection.empty()) overrides.emplace_back("discretization.convection", f.convection);
  if (!f.force.empty()) overrides.emplace_back("physics.force_weighted", f.force == "weighted" ? "true" : "false");
  if (!f.out_dir.empty()) overrides.emplace_back("output.directory", f.out_dir);
  if (!f.audit.empty()) overrides.emplace_back("solver.audit", f.audit);
  if (f.vtk_quadratic) overrides.emplace_back("output.vtk_quadratic", "true");
  for (const auto& [key, value] : overrides) set_config_value(c, key, value);

  std::vector<std::string> still;
  for (const std::string& k : base.defaulted) {
    if (get_config_value(c, k) == get_config_value(base, k)) still.push_back(k);
  }
  c.defaulted = std::move(still);
  if (c.adapt.enabled) {
    c.adapt.min_level = std::min(c.adapt.min_level, c.level);
    c.adapt.max_level = std::max(c.adapt.max_level, c.level);
  }
  c.validate();
  return c;
}

int run_command(const Flags& f, std::ostream& out, std::ostream& err) {
  const bool eoc = !f.eoc.empty();
  const Config c = build_config(f, eoc);
  if (f.dump) {
    out << dump_config(c);
    return 0;
  }
  if (eoc) {
    const std::vector<int> levels = parse_levels(f.eoc);
    const int reference = f.eoc_reference ? *f.eoc_reference : *std::max_element(levels.begin(), levels.end()) + 2;
    const EocResult r = run_eoc(c, levels, reference, f.quiet ? nullptr : &err);
    print_eoc_table(r, out);
    return 0;
  }

  const SimulationSummary s = simulate(c, true, f.quiet ? nullptr : &err);
  out << "scenario " << c.scenario << ": " << s.steps << " steps, t = " << format_number(s.t_final) << '\n';
  out << "mass drift " << format_number(s.max_mass_drift) << ", audit failures " << s.audit_failures << ", ledger "
      << (s.ledger.pass ? "pass" : "fail") << '\n';
  out << "output written to " << c.output.directory << '\n';
  const bool audit_ok = s.audit_failures == 0 && s.ledger.pass;
  if (c.convection == Convection::FV && !audit_ok) {
    out << "note: finite-volume convection does not guarantee the energy inequality; violations are logged only\n";
  }
  if (c.audit == AuditMode::Strict && c.convection == Convection::FE && !audit_ok) {
    err << "strict audit failed: " << s.audit_failures << " step(s) violate the energy inequality"
        << (s.ledger.pass ? "" : "; cumulative ledger violated") << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffuse-interface two-phase flow solver", "phaseflow"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* run = app.add_subcommand("run", "Run a scenario, or the convergence study with --eoc");
  run->add_option("config", f.config_path, "Config file (section.key = value lines)");
  std::string names;
  for (const std::string& n : preset_names()) names += (names.empty() ? "" : "|") + n;
  run->add_option("--scenario", f.scenario, "Preset: " + names);
  run->add_option("--level", f.level, "Uniform refinement level (even)");
  run->add_option("--tmax", f.tmax, "End time");
  run->add_option("--max-steps", f.max_steps, "Step limit");
  run->add_option("--model", f.model, "agg|dss")->check(CLI::IsMember({"agg", "dss"}));
  run->add_option("--elements", f.elements, "th|p1p1")->check(CLI::IsMember({"th", "p1p1"}));
  run->add_option("--convection", f.convection, "fv|fe")->check(CLI::IsMember({"fv", "fe"}));
  run->add_option("--force", f.force, "constant|weighted")->check(CLI::IsMember({"constant", "weighted"}));
  run->add_option("--out", f.out_dir, "Output directory");
  run->add_option("--audit", f.audit, "strict|log")->check(CLI::IsMember({"strict", "log"}));
  run->add_option("--eoc", f.eoc, "Comma separated levels for the convergence table");
  run->add_option("--eoc-reference", f.eoc_reference, "Reference level (default: finest level + 2)");
  run->add_flag("--vtk-quadratic", f.vtk_quadratic, "Write six-node triangles with the P2 velocity");
  run->add_option("--set", f.sets, "Override any config key: section.key=value");
  run->add_flag("--dump-config", f.dump, "Print the resolved config and exit");
  run->add_flag("--quiet", f.quiet, "No progress output");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    return run_command(f, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace phaseflow
