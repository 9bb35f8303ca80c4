#pragma once

// Verification reports and run configuration.
//
// A report is a list of named checks. Each check stores the measured value,
// the bound it is compared against, and a signed margin that is >= 0 exactly
// when the check passes (strict checks need margin > 0). Reports serialize to
// JSON with a fixed key order, so equal inputs give byte-identical files.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace hemi {

inline constexpr int kReportSchema = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

enum class Status { Pass, Fail, Skip };
std::string status_name(Status s);
Status parse_status(const std::string& s);

struct Check {
  std::string id;
  Status status = Status::Skip;
  double value = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  std::string details;
};

/// value < tolerance.
Check check_below(std::string id, double value, double tolerance, int samples, std::string details = {});
/// value > bound (strict).
Check check_above(std::string id, double value, double bound, int samples, std::string details = {});
/// value >= bound.
Check check_at_least(std::string id, double value, double bound, int samples, std::string details = {});
/// |value - target| < tolerance.
Check check_near(std::string id, double value, double target, double tolerance, int samples, std::string details = {});
/// A boolean outcome with no natural margin.
Check check_flag(std::string id, bool ok, int samples, std::string details = {});

/// Flat key = value configuration; values are kept as text and parsed on use.
class Config {
 public:
  /// Every recognized key with its default.
  static Config defaults();
  /// Reads `key = value` lines ('#' starts a comment). Throws "invalid-config"
  /// on malformed lines or unknown keys.
  void load_file(const std::string& path);
  /// Throws "invalid-config" for unknown keys.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  /// Comma-separated list of numbers.
  std::vector<double> list(const std::string& key) const;
  /// Checks ranges; throws "unsupported-dimension" for n < 3 and "invalid-config" otherwise.
  void validate() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct VerificationReport {
  std::string command;  // verify, build or sweep
  std::string target;
  std::map<std::string, std::string> config;
  std::vector<Check> checks;
  nlohmann::ordered_json results;  // construction parameters and tables
  double wall_time = -1.0;         // seconds; serialized only when >= 0

  /// Pass iff every non-skipped check passes and at least one check ran.
  bool pass() const;
  nlohmann::ordered_json to_json() const;
  static VerificationReport from_json(const nlohmann::ordered_json& j);
  std::string dump() const;
};

/// Decimal text with 17 significant digits, as used in every CSV.
std::string csv_number(double v);

}  // namespace hemi
