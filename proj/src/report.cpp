#include "hemiglue/report.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hemiglue/error.hpp"

namespace hemi {

namespace {

Check make_check(std::string id, bool ok, double value, double margin, double tolerance, int samples,
                 std::string details) {
  Check c;
  c.id = std::move(id);
  c.status = ok ? Status::Pass : Status::Fail;
  c.value = value;
  c.margin = margin;
  c.tolerance = tolerance;
  c.samples = samples;
  c.details = std::move(details);
  return c;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error("invalid-config", key + ": not a number: '" + text + "'");
  return v;
}

// JSON has no NaN or infinity; encode them as strings so reports stay valid.
nlohmann::ordered_json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from_json(const nlohmann::ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  return s == "inf" ? INFINITY : -INFINITY;
}

}  // namespace

std::string status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skip: return "skip";
  }
  return "skip";
}

Status parse_status(const std::string& s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "skip") return Status::Skip;
  throw Error("invalid-report", "unknown status '" + s + "'");
}

Check check_below(std::string id, double value, double tolerance, int samples, std::string details) {
  return make_check(std::move(id), value < tolerance, value, tolerance - value, tolerance, samples, std::move(details));
}

Check check_above(std::string id, double value, double bound, int samples, std::string details) {
  return make_check(std::move(id), value > bound, value, value - bound, bound, samples, std::move(details));
}

Check check_at_least(std::string id, double value, double bound, int samples, std::string details) {
  return make_check(std::move(id), value >= bound, value, value - bound, bound, samples, std::move(details));
}

Check check_near(std::string id, double value, double target, double tolerance, int samples, std::string details) {
  const double err = std::abs(value - target);
  return make_check(std::move(id), err < tolerance, value, tolerance - err, tolerance, samples, std::move(details));
}

Check check_flag(std::string id, bool ok, int samples, std::string details) {
  return make_check(std::move(id), ok, ok ? 1.0 : 0.0, ok ? 1.0 : -1.0, 0.0, samples, std::move(details));
}

Config Config::defaults() {
  Config c;
  c.values_ = {
      {"n", "3"},
      {"seed", "1"},
      {"out", ""},
      {"record_timing", "0"},
      // Engine and variation checks.
      {"engine_samples", "100"},
      {"perturb_samples", "200"},
      {"variation_samples", "10"},
      {"hemisphere_degree", "20"},
      {"equator_degree", "20"},
      {"tol_engine", "1e-9"},
      {"tol_identity", "1e-10"},
      {"tol_fd", "1e-5"},
      {"tol_pde", "1e-4"},
      {"tol_boundary", "1e-10"},
      {"tol_seam", "1e-10"},
      {"tol_sphere", "1e-8"},
      {"tol_perturb", "1e-8"},
      {"tol_field", "1e-9"},
      {"tol_chain", "0.01"},
      // Deformation.
      {"basis_degree", "16"},
      {"interior_samples", "2000"},
      {"equator_samples", "200"},
      {"t_start", "0.2"},
      {"t_steps", "11"},
      {"q_step", "0.0025"},
      // Gluing and final metrics.
      {"delta", "0.1"},
      {"epsilon", "0"},
      {"kappa", "0.05"},
      {"width", "0.16"},
      {"collar", "0.15"},
      {"boundary_samples", "32"},
      {"final_samples", "2000"},
      {"subharmonic_samples", "500"},
      {"subharmonic_delta", "0.05"},
      {"ray_points", "200"},
      {"field_points", "400"},
      // Sweeps.
      {"sweep_values", ""},
      {"sweep_range", ""},
      {"sweep_scale", "log"},
      {"corner", "thmc"},
  };
  return c;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("invalid-config", "cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("invalid-config", path + ":" + std::to_string(lineno) + ": expected key = value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("invalid-config", "unknown key '" + key + "'");
  it->second = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("invalid-config", "unknown key '" + key + "'");
  return it->second;
}

double Config::number(const std::string& key) const { return parse_number(key, text(key)); }

int Config::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw Error("invalid-config", key + ": not an integer");
  return static_cast<int>(v);
}

std::vector<double> Config::list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  return out;
}

void Config::validate() const {
  const int n = integer("n");
  if (n < 3) throw Error("unsupported-dimension", "the constructions need n >= 3, got n = " + std::to_string(n));
  if (n > 5) throw Error("unsupported-dimension", "jets are limited to chart dimension 5, got n = " + std::to_string(n));
  if (integer("seed") < 0) throw Error("invalid-config", "seed must be nonnegative");
  for (const char* k : {"tol_engine", "tol_identity", "tol_fd", "tol_pde", "tol_boundary", "tol_seam", "tol_sphere",
                        "tol_perturb", "tol_field", "tol_chain", "t_start",
                        "q_step", "delta", "kappa", "width", "collar", "subharmonic_delta"})
    if (!(number(k) > 0.0)) throw Error("invalid-config", std::string(k) + " must be positive");
  for (const char* k : {"engine_samples", "perturb_samples", "variation_samples", "hemisphere_degree",
                        "equator_degree", "basis_degree", "interior_samples", "equator_samples", "t_steps",
                        "boundary_samples", "final_samples", "subharmonic_samples", "ray_points", "field_points"})
    if (integer(k) <= 0) throw Error("invalid-config", std::string(k) + " must be a positive integer");
  if (number("epsilon") < 0.0) throw Error("invalid-config", "epsilon must be >= 0 (0 selects it automatically)");
  if (!(number("delta") < 0.125)) throw Error("invalid-config", "delta must lie in (0, 1/8)");
  if (!(number("subharmonic_delta") < 0.125)) throw Error("invalid-config", "subharmonic_delta must lie in (0, 1/8)");
  if (!(number("collar") < 1.0)) throw Error("invalid-config", "collar must lie in (0, 1)");
  const std::string& scale = text("sweep_scale");
  if (scale != "log" && scale != "linear") throw Error("invalid-config", "sweep_scale must be log or linear");
  const std::string& corner = text("corner");
  if (corner != "thmc" && corner != "corollary") throw Error("invalid-config", "corner must be thmc or corollary");
  (void)list("sweep_values");
}

bool VerificationReport::pass() const {
  bool any = false;
  for (const Check& c : checks) {
    if (c.status == Status::Fail) return false;
    if (c.status == Status::Pass) any = true;
  }
  return any;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["version"] = kLibraryVersion;
  j["command"] = command;
  j["target"] = target;
  j["status"] = pass() ? "pass" : "fail";
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["status"] = status_name(c.status);
    e["value"] = number_json(c.value);
    e["margin"] = number_json(c.margin);
    e["tolerance"] = number_json(c.tolerance);
    e["samples"] = c.samples;
    e["details"] = c.details;
    arr.push_back(std::move(e));
  }
  j["checks"] = arr;
  j["results"] = results.is_null() ? nlohmann::ordered_json::object() : results;
  if (wall_time >= 0.0) j["wall_time"] = wall_time;
  return j;
}

VerificationReport VerificationReport::from_json(const nlohmann::ordered_json& j) {
  VerificationReport r;
  r.command = j.at("command").get<std::string>();
  r.target = j.at("target").get<std::string>();
  for (const auto& [k, v] : j.at("config").items()) r.config[k] = v.get<std::string>();
  for (const auto& e : j.at("checks")) {
    Check c;
    c.id = e.at("id").get<std::string>();
    c.status = parse_status(e.at("status").get<std::string>());
    c.value = number_from_json(e.at("value"));
    c.margin = number_from_json(e.at("margin"));
    c.tolerance = number_from_json(e.at("tolerance"));
    c.samples = e.at("samples").get<int>();
    c.details = e.at("details").get<std::string>();
    r.checks.push_back(std::move(c));
  }
  r.results = j.at("results");
  if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
  return r;
}

std::string VerificationReport::dump() const { return to_json().dump(2) + "\n"; }

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hemi
