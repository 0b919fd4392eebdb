#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "nullforge/errors.hpp"
#include "nullforge/pipeline.hpp"

namespace {

// Exit codes: 0 pass, 1 a check failed, 2 bad input, 3 library error.
nlohmann::json load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw nullforge::ConfigError(path + ": cannot open");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw nullforge::ConfigError(path + ": " + e.what());
  }
}

int run(const std::string& config, const std::string& out, const std::optional<std::uint64_t>& seed, bool verbose) {
  nullforge::PipelineOptions opt;
  opt.out_dir = out;
  opt.seed = seed;
  if (verbose) opt.log = &std::cerr;
  const auto res = nullforge::run_pipeline(load(config), opt);
  std::cout << "status: " << (res.exit_code == 0 ? "pass" : "fail") << "\n";
  if (!res.first_failed.empty()) std::cout << "first failed check: " << res.first_failed << "\n";
  for (const auto& a : res.artifacts) std::cout << "wrote " << out << "/" << a << "\n";
  return res.exit_code;
}

int verify(const std::string& report) {
  const auto v = nullforge::verify_report(load(report));
  for (const auto& f : v.failures) std::cout << "FAIL " << f << "\n";
  std::cout << (v.ok ? "report verified" : "report does not verify") << "\n";
  return v.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nullforge: null curves and minimal surfaces"};
  app.require_subcommand(1);

  std::string config, out = ".", report;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  auto* r = app.add_subcommand("run", "run an experiment from a JSON config");
  r->add_option("config", config, "experiment config")->required()->check(CLI::ExistingFile);
  r->add_option("--out", out, "output directory");
  r->add_option("--seed", seed, "override the config seed");
  r->add_flag("--verbose", verbose, "print progress to stderr");
  auto* v = app.add_subcommand("verify", "recheck a report.json");
  v->add_option("report", report, "report file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (r->parsed()) return run(config, out, seed, verbose);
    return verify(report);
  } catch (const nullforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nullforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
