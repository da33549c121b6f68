#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xeblab {

// Flat key=value configuration with section headers; a JSON mirror with the
// same section/key names is accepted for programmatic use. Unknown keys are
// rejected at parse time.
struct ExperimentConfig {
  // [experiment]
  std::string kind;
  std::string id;  // derived from kind/n/m/seed when empty
  std::uint64_t seed = 1;
  std::string out = "runs";
  int threads = 1;
  // [circuit]
  int n = 4;
  int m = 2;
  std::string one_qubit = "haar";
  std::string two_qubit = "cz";
  std::string layout = "random";
  // [noise]
  std::optional<double> e1bar, e2bar, eqbar;
  std::vector<double> e1_list, e2_list, eq_list;
  std::optional<double> mix_f;
  // [sampling]
  std::size_t count = 0;
  // [estimate]
  std::vector<std::string> estimators{"xeb", "v", "mle"};
  std::string archive;
  // [predict]
  std::optional<long long> g1, g2;
  // [walsh]
  int degree = -1;
  std::vector<double> t_grid;
  int ensemble = 1;
  bool write_distribution = false;
  // [matching]
  std::string graph;
  std::uint64_t field_q = 2147483647ULL;
  int trials = 10;
  std::size_t draws = 100000;

  bool operator==(const ExperimentConfig&) const = default;

  std::string resolved_id() const;
  // Checks the kind, parameter ranges and caps; cheap, runs before any work.
  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_json(const std::string& text);
// Dispatches on a leading '{' (JSON) versus the sectioned text format.
ExperimentConfig load_config_file(const std::string& path);
// Canonical text form; parse_config_text(format_config(c)) == c.
std::string format_config(const ExperimentConfig& config);
// FNV-1a over the canonical text with the result-neutral fields (output
// directory, thread count) normalized away, so equal hashes mean equal
// reproducible results.
std::uint64_t config_hash(const ExperimentConfig& config);

struct ResultRecord {
  std::string experiment_id;
  std::string timestamp;
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::string out_dir;  // directory holding this run's artifacts
  std::vector<std::pair<std::string, double>> metrics;

  double metric(const std::string& name) const;  // throws if absent
};

// Runs one experiment, writes its artifacts (config copy, metrics CSV,
// record JSON, plus kind-specific files) under <out>/<id>/.
ResultRecord run_experiment(const ExperimentConfig& config);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};
struct VerifyOptions {
  // Test hook: perturbs the Walsh normalization inside the Parseval check,
  // which must then fail.
  bool inject_walsh_fault = false;
};
struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
};

// Cross-module brute-force equivalence checks at small n.
VerifyReport verify_suite(const VerifyOptions& options = {});
void print_verify_report(std::ostream& out, const VerifyReport& report);

}  // namespace xeblab
