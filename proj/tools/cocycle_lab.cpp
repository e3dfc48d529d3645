#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cocycle/app.hpp"

using cocycle::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw cocycle::ConfigError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw cocycle::ConfigError(path + ": " + e.what());
  }
}

struct Flags {
  std::string config, out = ".", mu, nu, experiment;
  std::optional<std::uint64_t> seed;
  std::optional<double> p, alpha;
  std::optional<long> ngrid, nmax;
  int threads = 0;
};

json assemble(const Flags& f) {
  json cfg = f.config.empty() ? json::object() : read_json(f.config);
  if (!cfg.is_object()) throw cocycle::ConfigError("config must be a JSON object");
  if (!f.mu.empty()) cfg["mu"] = read_json(f.mu);
  if (!f.nu.empty()) cfg["nu"] = read_json(f.nu);
  if (f.p) cfg["p"] = *f.p;
  if (f.alpha) cfg["alpha"] = *f.alpha;
  if (f.ngrid) cfg["n_grid"] = *f.ngrid;
  if (f.nmax) cfg["n_max"] = *f.nmax;
  return cfg;
}

int report_failure(const json& diag, const std::string& out_dir) {
  std::cerr << diag.dump() << '\n';
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream(std::filesystem::path(out_dir) / "error.json") << diag.dump(2) << '\n';
  return diag.value("exit_code", 3);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random matrix cocycle experiments"};
  app.require_subcommand(1);
  Flags f;
  std::string chosen;

  auto common = [&f](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", f.config, "experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--seed", f.seed, "seed override");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--threads", f.threads, "worker cap (0: all cores)");
    sub->add_option("--mu", f.mu, "measure spec file for mu");
    sub->add_option("--nu", f.nu, "measure spec file for nu");
    sub->add_option("--p", f.p, "moment / Wasserstein exponent");
    sub->add_option("--alpha", f.alpha, "Holder exponent");
    sub->add_option("--ngrid", f.ngrid, "projective grid size");
    sub->add_option("--nmax", f.nmax, "largest iterate");
  };
  for (const auto& name : cocycle::experiments()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    common(sub, false);
    sub->callback([&chosen, name] { chosen = name; });
  }
  auto* val = app.add_subcommand("validate", "check a config without computing");
  common(val, true);
  val->add_option("--experiment", f.experiment, "experiment the config is for");
  val->callback([&chosen] { chosen = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  json cfg;
  try {
    cfg = assemble(f);
  } catch (const cocycle::Error& e) {
    return report_failure({{"error", e.kind()}, {"message", e.what()}, {"exit_code", 2}}, f.out);
  }

  if (chosen == "validate") {
    std::string exp = f.experiment;
    if (exp.empty() && cfg.contains("experiment") && cfg["experiment"].is_string())
      exp = cfg["experiment"].get<std::string>();
    if (exp.empty()) {
      std::cerr << "validate: pass --experiment or set \"experiment\" in the config\n";
      return 2;
    }
    auto rep = cocycle::validate(exp, cfg);
    json out = {{"experiment", exp},
                {"valid", rep.ok()},
                {"violations", rep.violations},
                {"warnings", rep.warnings}};
    std::cout << out.dump(2) << '\n';
    return rep.ok() ? 0 : 2;
  }

  cocycle::RunOptions opt;
  opt.out_dir = f.out;
  opt.seed = f.seed;
  opt.threads = f.threads;
  auto res = cocycle::run(chosen, cfg, opt);
  if (res.exit_code != 0) return report_failure(res.diagnostic, f.out);
  std::cout << chosen << ": " << res.summary << '\n';
  return 0;
}
