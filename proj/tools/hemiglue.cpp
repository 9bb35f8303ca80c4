// hemiglue <verify|build|sweep> [target] [--n INT] [--config PATH] [--out PATH] [--seed INT] [--<key> VALUE ...]
//
// Exit codes: 0 pass, 1 verified failure, 2 usage or configuration error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "hemiglue/error.hpp"
#include "hemiglue/suites.hpp"

namespace {

using hemi::Config;
using hemi::VerificationReport;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hemi::Error("invalid-config", "cannot write " + path);
  out << text;
}

// "runs/x.json" -> "runs/x"; paths without an extension are used as is.
std::string stem_of(const std::string& path) {
  const std::filesystem::path p(path);
  return p.has_extension() ? (p.parent_path() / p.stem()).string() : path;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

int finish(const VerificationReport& rep) { return rep.pass() ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformed hemisphere metrics: constructions, verification suites and sweeps"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  const Config defaults = Config::defaults();
  app.add_option("--config", config_path, "key = value configuration file");
  for (const auto& [key, value] : defaults.entries()) {
    app.add_option("--" + key, flags[key], "default: " + (value.empty() ? std::string("(empty)") : value))
        ->group(key == "n" || key == "seed" || key == "out" ? "Common" : "Configuration");
  }

  std::string verify_suite = "all", build_target, sweep_param;
  auto* verify = app.add_subcommand("verify", "run a verification suite: " + join(hemi::suite_names()) + ", all");
  verify->add_option("suite", verify_suite, "suite name");
  auto* build = app.add_subcommand("build", "build a metric bundle: " + join(hemi::build_targets()));
  build->add_option("target", build_target, "construction")->required();
  auto* sweep = app.add_subcommand("sweep", "sweep a parameter: " + join(hemi::sweep_parameters()));
  sweep->add_option("param", sweep_param, "parameter")->required();
  for (CLI::App* sub : {verify, build, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Config cfg = defaults;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& [key, value] : flags)
      if (app.count("--" + key) > 0) cfg.set(key, value);
    hemi::RunContext ctx(cfg);
    const bool timing = cfg.integer("record_timing") != 0;
    const std::string out = cfg.text("out");
    auto stamp = [&](VerificationReport& rep) {
      if (timing) rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (verify->parsed()) {
      const auto& names = hemi::suite_names();
      if (verify_suite != "all" && std::find(names.begin(), names.end(), verify_suite) == names.end())
        throw hemi::Error("invalid-usage", "unknown suite '" + verify_suite + "'");
      VerificationReport rep = hemi::run_verify(verify_suite, ctx);
      stamp(rep);
      std::cerr << hemi::summary_table(rep);
      if (out.empty())
        std::cout << rep.dump();
      else
        write_file(out, rep.dump());
      return finish(rep);
    }

    if (build->parsed()) {
      const auto& targets = hemi::build_targets();
      if (std::find(targets.begin(), targets.end(), build_target) == targets.end())
        throw hemi::Error("invalid-usage", "unknown build target '" + build_target + "'");
      const std::string base = stem_of(out.empty() ? "hemiglue_" + build_target + ".json" : out);
      VerificationReport rep;
      try {
        hemi::BuildOutput b = hemi::run_build(build_target, ctx);
        rep = std::move(b.report);
        write_file(base + ".json", b.bundle.dump(2) + "\n");
        for (const auto& f : b.csv) write_file(base + f.suffix, f.text);
      } catch (const hemi::Error& e) {
        if (hemi::is_usage_error(e.code())) throw;
        rep.command = "build";
        rep.target = build_target;
        rep.config = cfg.entries();
        rep.checks.push_back(hemi::check_flag(build_target + "-completed", false, 0, e.what()));
      }
      stamp(rep);
      write_file(base + "_report.json", rep.dump());
      std::cout << hemi::summary_table(rep);
      return finish(rep);
    }

    hemi::SweepOutput s;
    try {
      s = hemi::run_sweep(sweep_param, ctx);
    } catch (const hemi::Error& e) {
      if (hemi::is_usage_error(e.code())) throw;
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    stamp(s.report);
    if (out.empty()) {
      std::cout << s.csv;
    } else {
      write_file(out, s.csv);
      write_file(stem_of(out) + "_report.json", s.report.dump());
    }
    return finish(s.report);
  } catch (const hemi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hemi::is_usage_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
