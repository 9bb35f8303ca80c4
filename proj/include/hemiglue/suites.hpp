#pragma once

// Verification suites, metric bundles and parameter sweeps behind the CLI.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hemiglue/pipeline.hpp"
#include "hemiglue/report.hpp"

namespace hemi {

/// Validated configuration plus lazily built constructions shared by the
/// suites of one run.
class RunContext {
 public:
  explicit RunContext(Config config);
  const Config& config() const { return config_; }
  int n() const { return n_; }
  unsigned seed() const { return seed_; }
  DeformationOptions deformation_options() const;
  ThmCOptions thm_c_options() const;
  CorollaryOptions corollary_options() const;
  const DeformationResult& deformation();
  const GluedResult& thm_c();
  const GluedResult& corollary();

 private:
  Config config_;
  int n_ = 3;
  unsigned seed_ = 1;
  std::optional<DeformationResult> deformation_;
  std::optional<GluedResult> thm_c_, corollary_;
};

/// Suite names accepted by run_verify ("all" runs each of them in order).
const std::vector<std::string>& suite_names();
/// A failing construction becomes a failed "<suite>-completed" check.
VerificationReport run_verify(const std::string& suite, RunContext& ctx);

struct CsvFile {
  std::string suffix;  // appended to the output stem, e.g. "_field.csv"
  std::string text;
};

struct BuildOutput {
  VerificationReport report;
  nlohmann::ordered_json bundle;
  std::vector<CsvFile> csv;
};
const std::vector<std::string>& build_targets();
BuildOutput run_build(const std::string& target, RunContext& ctx);

struct SweepOutput {
  VerificationReport report;
  std::string csv;
};
const std::vector<std::string>& sweep_parameters();
/// Values come from sweep_values, else sweep_range "lo:hi:count" spaced by
/// sweep_scale, else a per-parameter default grid. Out-of-range values throw
/// "cap-violation" before anything is computed.
std::vector<double> sweep_grid(const std::string& param, const Config& config);
SweepOutput run_sweep(const std::string& param, RunContext& ctx);

/// JSON descriptions of the constructions (parameters sufficient to rebuild them).
nlohmann::ordered_json deformation_json(const DeformationResult& def, const DeformationOptions& opts);
nlohmann::ordered_json glued_json(const GluedResult& r);

/// Human-readable table of the checks.
std::string summary_table(const VerificationReport& report);

/// Error codes that mean bad usage or configuration (exit code 2).
bool is_usage_error(const std::string& code);

}  // namespace hemi
