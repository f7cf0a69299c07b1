#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fellap/commands.hpp"

using namespace fellap;

namespace {

int emit(const std::string& path, const std::string& csv) {
  if (path.empty()) {
    std::cout << csv;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot write " << path << '\n';
    return exit_config;
  }
  f << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fell bundles, partial actions and approximation-property certificates"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions opt;
  std::string out_path;
  app.add_option("--config", opt.config_path, "JSON config document");
  app.add_option("--seed", opt.seed, "seed for randomized checks")->capture_default_str();
  app.add_option("--out", out_path, "CSV output path (stdout if absent)");
  app.add_option("--tol", opt.tol, "residual tolerance")->capture_default_str();

  std::string target;
  int radius = 2;
  int samples = 4;
  auto* validate = app.add_subcommand("validate", "check partial-action, twist or bundle axioms");
  validate->add_option("--target", target, "action, twist or bundle ref")->required();
  validate->add_option("--radius", radius, "word-length window for infinite groups")->capture_default_str();
  validate->add_option("--samples", samples, "random samples per fiber pair")->capture_default_str();

  std::string action_ref, config_out;
  auto* globalize = app.add_subcommand("globalize", "enveloping action of a finite-group partial action");
  globalize->add_option("--action", action_ref, "action ref")->required();
  globalize->add_option("--config-out", config_out, "write the config with the global action appended");

  APCheckOptions ap;
  auto* apcheck = app.add_subcommand("ap-check", "AP defect table for a witness family");
  apcheck->add_option("--bundle", ap.bundle, "bundle ref");
  apcheck->add_option("--witness", ap.witness, "family ref, builtin:uniform, builtin:folner:N or builtin:cuntz:i")
      ->required();
  apcheck->add_option("--targets", ap.targets, "basis, basis:R, or t / t#i items separated by ';'")
      ->capture_default_str();
  apcheck->add_option("--n", ap.n, "Cantor alphabet size for builtin:cuntz")->capture_default_str();
  apcheck->add_option("--cap", ap.cap, "bound cap for the family");

  std::string bundle_ref;
  int window = 2;
  auto* kernels = app.add_subcommand("kernels", "window dimensions, norms and beta residuals");
  kernels->add_option("--bundle", bundle_ref, "bundle ref")->required();
  kernels->add_option("--window", window, "largest window radius")->capture_default_str();
  kernels->add_option("--samples", samples, "random kernels per radius")->capture_default_str();

  int n = 2, imax = 8;
  std::string words = "a";
  bool include_identity = false;
  auto* cuntz = app.add_subcommand("cuntz-ap", "defects of the Cuntz witness net");
  cuntz->add_option("--n", n, "alphabet size")->capture_default_str();
  cuntz->add_option("--imax", imax, "largest witness index")->capture_default_str();
  cuntz->add_option("--targets", words, "free-group words separated by ','")->capture_default_str();
  cuntz->add_flag("--include-identity", include_identity, "let the witness include the empty word");

  int depth = 2;
  int gr_radius = 1;
  auto* groupoid = app.add_subcommand("groupoid", "truncated spectral groupoid of the Cantor action");
  groupoid->add_option("--n", n, "alphabet size")->capture_default_str();
  groupoid->add_option("--depth", depth, "cylinder depth")->capture_default_str();
  groupoid->add_option("--radius", gr_radius, "word-length radius")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  std::ostringstream csv;
  int code = exit_pass;
  try {
    if (*validate)
      code = cmd_validate(opt, target, radius, samples, csv, std::cerr);
    else if (*globalize)
      code = cmd_globalize(opt, action_ref, config_out, csv, std::cerr);
    else if (*apcheck)
      code = cmd_ap_check(opt, ap, csv, std::cerr);
    else if (*kernels)
      code = cmd_kernels(opt, bundle_ref, window, samples, csv, std::cerr);
    else if (*cuntz)
      code = cmd_cuntz_ap(opt, n, imax, words, include_identity, csv, std::cerr);
    else if (*groupoid)
      code = cmd_groupoid(opt, n, depth, gr_radius, csv, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return exit_unsupported;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return exit_validation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  const int io = emit(out_path, csv.str());
  return io ? io : code;
}
