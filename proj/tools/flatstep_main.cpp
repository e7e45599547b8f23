#include "flatstep/harness.hpp"
#include "flatstep/linalg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int cmd_list() {
  for (const auto& exp : flatstep::harness::experiments()) {
    std::cout << exp.name << "  [schema " << exp.csv_schema << "]\n  " << exp.help
              << "\n  csv columns: ";
    for (size_t i = 0; i < exp.csv_columns.size(); ++i)
      std::cout << (i ? "," : "") << exp.csv_columns[i];
    std::cout << "\n";
    for (const auto& [key, spec] : exp.schema) {
      std::cout << "    --param " << key << "=...";
      if (spec.required)
        std::cout << " (required)";
      else if (spec.kind == flatstep::harness::ParamKind::number)
        std::cout << " (default " << std::get<double>(spec.default_value) << ")";
      std::cout << "  " << spec.help << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "flatstep: curvature, calibration, spectral and determinantal diagnostics for "
      "two-channel update operators. Each experiment writes <out>.csv (schema-tagged) "
      "and <out>.json (inputs echo, derived scalars, checks)."};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "enumerate experiments and their schemas");

  std::string config_path, out_path, experiment;
  std::uint64_t seed = 0;
  bool seed_set = false, out_set = false;
  std::vector<std::string> params;

  for (const auto& exp : flatstep::harness::experiments()) {
    std::string desc = exp.help + " [csv " + exp.csv_schema + ": ";
    for (size_t i = 0; i < exp.csv_columns.size(); ++i)
      desc += (i ? "," : "") + exp.csv_columns[i];
    desc += "]";
    auto* sub = app.add_subcommand(exp.name, desc);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "RNG seed");
    sub->add_option_function<std::string>(
           "--out", [&](const std::string& o) { out_path = o; out_set = true; },
           "output path stem");
    sub->add_option("--param", params, "key=value override (repeatable)");
    sub->callback([&, name = exp.name] { experiment = name; });
  }

  CLI11_PARSE(app, argc, argv);
  if (list_cmd->parsed()) return cmd_list();

  try {
    flatstep::harness::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error kind=validation msg=cannot open config " << config_path << "\n";
        return 2;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = flatstep::harness::parse_config_json(ss.str());
      if (cfg.experiment != experiment) {
        std::cerr << "error kind=validation msg=config experiment '" << cfg.experiment
                  << "' does not match subcommand '" << experiment << "'\n";
        return 2;
      }
    } else {
      cfg.experiment = experiment;
    }
    if (seed_set) cfg.seed = seed;
    if (out_set) cfg.out_path = out_path;
    for (const auto& p : params) flatstep::harness::apply_override(cfg, p);
    return flatstep::harness::run(cfg);
  } catch (const flatstep::Error& e) {
    std::cerr << "error kind=validation msg=" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error kind=numerical msg=" << e.what() << "\n";
    return 3;
  }
}
