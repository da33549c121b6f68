#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xeblab/experiment.hpp"

namespace {

// Exit codes: 0 success, 1 check failure, 2 usage/config error.
constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsageError = 2;

struct CliFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<int> n, m;
  std::optional<std::uint64_t> count;
  std::optional<double> e1, e2, eq, mix_f;
  std::optional<std::string> one_qubit, two_qubit, layout;
  std::optional<std::string> archive, graph, id, estimators;
  std::optional<long long> g1, g2;
  std::optional<int> degree, ensemble, trials;
  std::optional<std::uint64_t> field_q, draws;
  std::optional<std::string> t_grid;
  bool write_distribution = false;
};

xeblab::ExperimentConfig build_config(const std::string& kind, const CliFlags& f) {
  xeblab::ExperimentConfig c;
  if (!f.config_path.empty()) c = xeblab::load_config_file(f.config_path);
  c.kind = kind;
  if (f.id) c.id = *f.id;
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.threads) c.threads = *f.threads;
  if (f.n) c.n = *f.n;
  if (f.m) c.m = *f.m;
  if (f.one_qubit) c.one_qubit = *f.one_qubit;
  if (f.two_qubit) c.two_qubit = *f.two_qubit;
  if (f.layout) c.layout = *f.layout;
  if (f.e1) c.e1bar = *f.e1;
  if (f.e2) c.e2bar = *f.e2;
  if (f.eq) c.eqbar = *f.eq;
  if (f.mix_f) c.mix_f = *f.mix_f;
  if (f.count) c.count = *f.count;
  if (f.archive) c.archive = *f.archive;
  if (f.graph) c.graph = *f.graph;
  if (f.g1) c.g1 = *f.g1;
  if (f.g2) c.g2 = *f.g2;
  if (f.degree) c.degree = *f.degree;
  if (f.ensemble) c.ensemble = *f.ensemble;
  if (f.trials) c.trials = *f.trials;
  if (f.field_q) c.field_q = *f.field_q;
  if (f.draws) c.draws = *f.draws;
  if (f.estimators) {
    c.estimators.clear();
    std::string tok;
    for (char ch : *f.estimators + ",") {
      if (ch == ',') {
        if (!tok.empty()) c.estimators.push_back(tok);
        tok.clear();
      } else {
        tok += ch;
      }
    }
  }
  if (f.t_grid) {
    c.t_grid.clear();
    std::string tok;
    for (char ch : *f.t_grid + ",") {
      if (ch == ',') {
        if (!tok.empty()) c.t_grid.push_back(std::stod(tok));
        tok.clear();
      } else {
        tok += ch;
      }
    }
  }
  if (f.write_distribution) c.write_distribution = true;
  return c;
}

int run_kind(const std::string& kind, const CliFlags& f) {
  const xeblab::ExperimentConfig config = build_config(kind, f);
  const xeblab::ResultRecord record = xeblab::run_experiment(config);
  std::cerr << "wrote " << record.out_dir << "\n";
  // Machine-readable results on stdout only.
  std::cout << "experiment_id=" << record.experiment_id << "\n";
  for (const auto& [name, value] : record.metrics) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    std::cout << name << "=" << buf << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-circuit sampling statistics laboratory"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand name
  bool verify_flag = false;
  bool inject_walsh_fault = false;
  app.add_flag("--verify", verify_flag, "run the cross-module verification suite");
  app.add_flag("--inject-walsh-fault", inject_walsh_fault)->group("");  // test hook

  CliFlags f;
  app.add_option("--config", f.config_path, "config file (sectioned text or JSON)");
  app.add_option("--seed", f.seed, "seed override");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--threads", f.threads, "worker threads");
  app.add_option("--id", f.id, "experiment id (defaults to kind_n.._m.._s..)");
  const std::vector<std::string> kinds = {"simulate",     "sample",       "noisy-sample",
                                          "estimate",     "predict",      "walsh",
                                          "correlation-scan", "match-sample", "match-test"};
  std::string selected;
  for (const std::string& kind : kinds) {
    CLI::App* sub = app.add_subcommand(kind, "run a '" + kind + "' experiment");
    sub->add_option("--n", f.n, "qubit count");
    sub->add_option("--m", f.m, "cycle count (even)");
    sub->add_option("--one-qubit", f.one_qubit, "one-qubit gate set: haar|identity|hadamard");
    sub->add_option("--two-qubit", f.two_qubit, "two-qubit gate set: cz|none");
    sub->add_option("--layout", f.layout, "coupling layout: random|line");
    sub->add_option("--count", f.count, "number of samples");
    sub->add_option("--e1", f.e1, "averaged one-qubit gate error rate");
    sub->add_option("--e2", f.e2, "averaged two-qubit gate error rate");
    sub->add_option("--eq", f.eq, "averaged readout error rate");
    sub->add_option("--mix-f", f.mix_f, "mixture fidelity for generated estimate inputs");
    sub->add_option("--archive", f.archive, "sample archive path");
    sub->add_option("--estimators", f.estimators, "comma list: xeb,v,mle");
    sub->add_option("--g1", f.g1, "one-qubit gate count override (predict)");
    sub->add_option("--g2", f.g2, "two-qubit gate count override (predict)");
    sub->add_option("--degree", f.degree, "Walsh truncation degree");
    sub->add_option("--t-grid", f.t_grid, "comma list of flip rates");
    sub->add_option("--ensemble", f.ensemble, "number of circuits to average over");
    sub->add_option("--graph", f.graph, "bipartite graph file");
    sub->add_option("--q", f.field_q, "finite field prime");
    sub->add_option("--trials", f.trials, "determinant test repetitions");
    sub->add_option("--draws", f.draws, "semi-matching sample count");
    sub->add_flag("--write-distribution", f.write_distribution, "emit distribution.csv");
    sub->callback([&selected, kind] { selected = kind; });
  }
  CLI::App* verify_sub = app.add_subcommand("verify", "run the cross-module verification suite");
  verify_sub->callback([&verify_flag] { verify_flag = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (verify_flag) {
      const xeblab::VerifyReport report =
          xeblab::verify_suite({.inject_walsh_fault = inject_walsh_fault});
      xeblab::print_verify_report(std::cout, report);
      return report.all_pass() ? kOk : kCheckFailure;
    }
    if (selected.empty()) {
      std::cerr << app.help() << "\n";
      return kUsageError;
    }
    return run_kind(selected, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
}
