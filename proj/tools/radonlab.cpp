// radonlab <experiment> [--param value]... --seed S --out DIR
// radonlab --config spec.json [--seed S] [--out DIR]
// Exit codes: 0 pass, 1 criterion fail, 2 usage error, 3 guard/resource error.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "radonlab/radonlab.hpp"

using namespace radonlab;

namespace {

std::string default_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (auto& e : v) s += (s.empty() ? "" : ",") + e.dump();
    return s;
  }
  return v.dump();
}

std::string type_label(const json& v) {
  if (v.is_boolean()) return "BOOL";
  if (v.is_number_integer()) return "INT";
  if (v.is_number()) return "FLOAT";
  if (v.is_string()) return "TEXT";
  return v[0].is_number_integer() ? "INT,..." : "FLOAT,...";
}

int run(int argc, char** argv) {
  CLI::App app{"Numerical experiments for discrete Radon transforms on the integer lattice.\n"
               "Each experiment writes CSV tables, SVG charts and a summary JSON to --out and exits\n"
               "0 on pass, 1 on a failed criterion, 2 on usage errors, 3 on guard/resource errors."};
  app.require_subcommand(0, 1);
  std::string config, out;
  int64_t seed = 1;
  app.add_option("--config", config, "JSON file {name, params, seed, out} mirroring the experiment spec")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 1)");
  auto* out_opt = app.add_option("--out", out, "output directory");
  app.fallthrough();

  std::map<std::string, std::map<std::string, std::string>> given;
  for (auto& E : experiments()) {
    auto* sub = app.add_subcommand(E.name, E.help);
    for (auto& P : E.params)
      sub->add_option("--" + P.name, given[E.name][P.name], P.help + " [default: " + default_text(P.value) + "]")
          ->type_name(type_label(P.value));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // prints help or the parse error
  }

  ExperimentSpec spec;
  if (!config.empty()) {
    std::ifstream in(config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("--config: ") + e.what());
    }
    spec = ExperimentSpec::from_json(j);
  }
  auto subs = app.get_subcommands();
  if (!subs.empty()) {
    const std::string name = subs.front()->get_name();
    require(config.empty() || spec.name == name, "--config names '" + spec.name + "' but the command is '" + name + "'");
    spec.name = name;
    const auto& E = find_experiment(name);
    for (auto& P : E.params)
      if (subs.front()->get_option("--" + P.name)->count() > 0)
        spec.params[P.name] = parse_param_text(E, P.name, given[name][P.name]);
  }
  require(!spec.name.empty(), "no experiment given (see --help)");
  if (seed_opt->count() > 0) spec.seed = seed;
  if (out_opt->count() > 0) spec.out_dir = out;
  require(!spec.out_dir.empty(), "--out DIR is required");

  Report R = run_experiment(spec);
  std::cout << spec.name << ": " << (R.pass ? "PASS" : "FAIL") << "\n" << R.summary.dump() << "\n";
  return R.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidArgument& e) {
    std::cerr << "radonlab: usage error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "radonlab: usage error: " << e.what() << "\n";
    return 2;
  } catch (const GuardError& e) {
    std::cerr << "radonlab: guard: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "radonlab: error: " << e.what() << "\n";
    return 3;
  }
}
