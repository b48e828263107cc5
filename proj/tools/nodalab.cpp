#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodalab/harness.hpp"

namespace {

using json = nlohmann::ordered_json;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal sets of Neumann eigenfunctions: experiments and checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "A config file is a JSON object of the subcommand's keys; unknown keys are rejected. Options on the command "
      "line override the file. Exit status: 0 success, 1 a hard check failed, 2 invalid configuration, 3 "
      "computation error.");

  std::string config_path, out;
  int jobs = 1;
  std::string seed;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output path (CSV, or JSON for tiling); stdout when omitted");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for sampled checks (tiling coverage, reflect Lipschitz pairs)");
  app.add_flag("--print-config", print_config, "print the resolved config as JSON and exit");

  const std::map<nodalab::ExperimentKind, std::string> about{
      {nodalab::ExperimentKind::Zeros, "Bessel zeros of J_n or J_n'"},
      {nodalab::ExperimentKind::Modes, "Neumann eigenvalues and boundary residuals"},
      {nodalab::ExperimentKind::Nodal, "closed-form against marching-squares nodal length"},
      {nodalab::ExperimentKind::Bound, "nodal length against C sqrt(lambda)"},
      {nodalab::ExperimentKind::Frequency, "ball mass, frequency and doubling index along radii"},
      {nodalab::ExperimentKind::SweepNStar, "max N*/sqrt(lambda) over the slab for each mode"},
      {nodalab::ExperimentKind::Reflect, "validity data of reflection charts"},
      {nodalab::ExperimentKind::Tiling, "cube decomposition with invariant checks"},
      {nodalab::ExperimentKind::SmallCube, "search for a halving sub-cube of a boundary cube"},
      {nodalab::ExperimentKind::Theorem2, "per-cube nodal area against N*(Q) and its upper envelope"}};

  std::map<nodalab::ExperimentKind, std::map<std::string, std::string>> values;
  std::map<nodalab::ExperimentKind, CLI::App*> subs;
  for (nodalab::ExperimentKind k : nodalab::all_experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(nodalab::to_string(k), about.at(k));
    sub->footer("Output: " + nodalab::schema_help(k));
    for (const std::string& key : nodalab::config_keys(k)) sub->add_option(flag_name(key), values[k][key], key);
    subs[k] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  nodalab::ExperimentKind kind{};
  for (const auto& [k, sub] : subs)
    if (sub->parsed()) kind = k;

  nodalab::ExperimentConfig cfg;
  try {
    json j = config_path.empty() ? json::object() : json::parse(read_file(config_path));
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : values[kind])
      if (subs[kind]->count(flag_name(key))) j[key] = value;
    if (app.count("--out")) j["out"] = out;
    if (app.count("--jobs")) j["jobs"] = jobs;
    if (app.count("--seed")) j["seed"] = seed;
    cfg = nodalab::parse_config(j.dump(), kind);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  if (print_config) {
    std::fputs(nodalab::config_to_json(cfg).c_str(), stdout);
    return 0;
  }

  try {
    const nodalab::RunResult r = nodalab::run(cfg);
    for (const std::string& n : r.notes) std::fprintf(stderr, "%s\n", n.c_str());
    for (const std::string& f : r.failures) std::fprintf(stderr, "FAIL: %s\n", f.c_str());
    return r.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
