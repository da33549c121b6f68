#include "xeblab/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "xeblab/circuit.hpp"
#include "xeblab/matching.hpp"
#include "xeblab/noise.hpp"
#include "xeblab/rng.hpp"
#include "xeblab/simulator.hpp"
#include "xeblab/stats.hpp"
#include "xeblab/walsh.hpp"
#include "xeblab/xeb.hpp"

namespace xeblab {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kKinds = {
    "simulate", "sample",     "noisy-sample",     "estimate",   "predict",
    "walsh",    "correlation-scan", "match-sample", "match-test"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      break;
    }
    out.push_back(trim(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

// Applies one (section, key, value) triple onto the config. Returns false
// for unknown keys so callers can report the location.
bool apply_key(ExperimentConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
  auto in = [&](const char* s) { return section == s; };
  if (in("experiment")) {
    if (key == "kind") c.kind = value;
    else if (key == "id") c.id = value;
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "out") c.out = value;
    else if (key == "threads") c.threads = std::stoi(value);
    else return false;
    return true;
  }
  if (in("circuit")) {
    if (key == "n") c.n = std::stoi(value);
    else if (key == "m") c.m = std::stoi(value);
    else if (key == "one_qubit") c.one_qubit = value;
    else if (key == "two_qubit") c.two_qubit = value;
    else if (key == "layout") c.layout = value;
    else return false;
    return true;
  }
  if (in("noise")) {
    if (key == "e1") c.e1bar = std::stod(value);
    else if (key == "e2") c.e2bar = std::stod(value);
    else if (key == "eq") c.eqbar = std::stod(value);
    else if (key == "e1_list") c.e1_list = parse_doubles(value);
    else if (key == "e2_list") c.e2_list = parse_doubles(value);
    else if (key == "eq_list") c.eq_list = parse_doubles(value);
    else if (key == "mix_f") c.mix_f = std::stod(value);
    else return false;
    return true;
  }
  if (in("sampling")) {
    if (key == "count") c.count = std::stoull(value);
    else return false;
    return true;
  }
  if (in("estimate")) {
    if (key == "estimators") c.estimators = split(value, ',');
    else if (key == "archive") c.archive = value;
    else return false;
    return true;
  }
  if (in("predict")) {
    if (key == "g1") c.g1 = std::stoll(value);
    else if (key == "g2") c.g2 = std::stoll(value);
    else return false;
    return true;
  }
  if (in("walsh")) {
    if (key == "degree") c.degree = std::stoi(value);
    else if (key == "t_grid") c.t_grid = parse_doubles(value);
    else if (key == "ensemble") c.ensemble = std::stoi(value);
    else if (key == "write_distribution") c.write_distribution = parse_bool(value);
    else return false;
    return true;
  }
  if (in("matching")) {
    if (key == "graph") c.graph = value;
    else if (key == "q") c.field_q = std::stoull(value);
    else if (key == "trials") c.trials = std::stoi(value);
    else if (key == "draws") c.draws = std::stoull(value);
    else return false;
    return true;
  }
  return false;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

NoiseModel noise_from_config(const ExperimentConfig& c) {
  NoiseModel m;
  m.e1 = c.e1_list;
  m.e2 = c.e2_list;
  m.eq = c.eq_list;
  if (c.e1bar || c.e2bar || c.eqbar)
    m.averaged = {c.e1bar.value_or(0.0), c.e2bar.value_or(0.0), c.eqbar.value_or(0.0)};
  m.validate();
  return m;
}

bool has_noise(const ExperimentConfig& c) {
  return c.e1bar || c.e2bar || c.eqbar || !c.e1_list.empty() || !c.e2_list.empty() ||
         !c.eq_list.empty();
}

std::string multiplicity_key(const MultiSubset& c) {
  std::string s;
  for (std::size_t i = 0; i < c.multiplicity.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c.multiplicity[i]);
  }
  return s;
}

}  // namespace

std::string ExperimentConfig::resolved_id() const {
  if (!id.empty()) return id;
  std::ostringstream os;
  os << kind << "_n" << n << "_m" << m << "_s" << seed;
  return os.str();
}

void ExperimentConfig::validate() const {
  if (!kKinds.count(kind))
    throw std::invalid_argument("config: unknown experiment kind '" + kind + "'");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (ensemble < 1) throw std::invalid_argument("config: ensemble must be >= 1");
  parse_gate_config(one_qubit, two_qubit, layout);

  const bool needs_statevector = kind == "simulate" || kind == "sample" ||
                                 kind == "noisy-sample" || kind == "estimate" ||
                                 kind == "walsh" || kind == "correlation-scan";
  if (needs_statevector) {
    if (n < 1 || n > kDefaultQubitCap)
      throw std::out_of_range("config: n exceeds the statevector cap of " +
                              std::to_string(kDefaultQubitCap));
    if (m < 0 || m % 2 != 0)
      throw std::out_of_range("config: m must be a nonnegative even integer");
  }
  if (kind == "predict" && n < 1) throw std::out_of_range("config: predict needs n >= 1");
  if ((kind == "sample" || kind == "noisy-sample") && count < 1)
    throw std::invalid_argument("config: sampling count must be >= 1");
  if (kind == "noisy-sample" && !has_noise(*this))
    throw std::invalid_argument("config: noisy-sample needs noise rates");
  if (kind == "estimate" && archive.empty()) {
    if (!mix_f) throw std::invalid_argument("config: estimate needs an archive or mix_f");
    if (count < 1) throw std::invalid_argument("config: estimate without archive needs count");
  }
  if (mix_f && !(*mix_f >= 0.0 && *mix_f <= 1.0))
    throw std::domain_error("config: mix_f outside [0,1]");
  if ((kind == "match-sample" || kind == "match-test") && graph.empty())
    throw std::invalid_argument("config: matching experiments need a graph file");
  if (kind == "walsh" && degree > n)
    throw std::out_of_range("config: truncation degree exceeds n");
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "kind = " << c.kind << "\n";
  if (!c.id.empty()) os << "id = " << c.id << "\n";
  os << "seed = " << c.seed << "\n";
  os << "out = " << c.out << "\n";
  os << "threads = " << c.threads << "\n";
  os << "\n[circuit]\n";
  os << "n = " << c.n << "\n";
  os << "m = " << c.m << "\n";
  os << "one_qubit = " << c.one_qubit << "\n";
  os << "two_qubit = " << c.two_qubit << "\n";
  os << "layout = " << c.layout << "\n";
  os << "\n[noise]\n";
  if (c.e1bar) os << "e1 = " << fmt_double(*c.e1bar) << "\n";
  if (c.e2bar) os << "e2 = " << fmt_double(*c.e2bar) << "\n";
  if (c.eqbar) os << "eq = " << fmt_double(*c.eqbar) << "\n";
  if (!c.e1_list.empty()) os << "e1_list = " << join_doubles(c.e1_list) << "\n";
  if (!c.e2_list.empty()) os << "e2_list = " << join_doubles(c.e2_list) << "\n";
  if (!c.eq_list.empty()) os << "eq_list = " << join_doubles(c.eq_list) << "\n";
  if (c.mix_f) os << "mix_f = " << fmt_double(*c.mix_f) << "\n";
  os << "\n[sampling]\n";
  os << "count = " << c.count << "\n";
  os << "\n[estimate]\n";
  {
    std::string es;
    for (std::size_t i = 0; i < c.estimators.size(); ++i) {
      if (i) es += ",";
      es += c.estimators[i];
    }
    os << "estimators = " << es << "\n";
  }
  if (!c.archive.empty()) os << "archive = " << c.archive << "\n";
  os << "\n[predict]\n";
  if (c.g1) os << "g1 = " << *c.g1 << "\n";
  if (c.g2) os << "g2 = " << *c.g2 << "\n";
  os << "\n[walsh]\n";
  os << "degree = " << c.degree << "\n";
  if (!c.t_grid.empty()) os << "t_grid = " << join_doubles(c.t_grid) << "\n";
  os << "ensemble = " << c.ensemble << "\n";
  os << "write_distribution = " << (c.write_distribution ? "true" : "false") << "\n";
  os << "\n[matching]\n";
  if (!c.graph.empty()) os << "graph = " << c.graph << "\n";
  os << "q = " << c.field_q << "\n";
  os << "trials = " << c.trials << "\n";
  os << "draws = " << c.draws << "\n";
  return os.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key '" + key + "' outside any section");
    try {
      if (!apply_key(c, section, key, value))
        throw std::invalid_argument("unknown key '" + section + "." + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for '" +
                                  section + "." + key + "': " + e.what());
    }
  }
  return c;
}

ExperimentConfig parse_config_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig c;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object())
      throw std::invalid_argument("config json: section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      std::string repr;
      if (value.is_string()) {
        repr = value.get<std::string>();
      } else if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i) repr += ",";
          repr += value[i].is_string() ? value[i].get<std::string>()
                                       : fmt_double(value[i].get<double>());
        }
      } else if (value.is_boolean()) {
        repr = value.get<bool>() ? "true" : "false";
      } else if (value.is_number_unsigned()) {
        repr = std::to_string(value.get<std::uint64_t>());
      } else if (value.is_number_integer()) {
        repr = std::to_string(value.get<std::int64_t>());
      } else {
        repr = fmt_double(value.get<double>());
      }
      if (!apply_key(c, section, key, repr))
        throw std::invalid_argument("config json: unknown key '" + section + "." + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  ExperimentConfig canonical = config;
  canonical.out = "";
  canonical.threads = 1;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : format_config(canonical)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

double ResultRecord::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw std::out_of_range("record has no metric '" + name + "'");
}

namespace {

void run_simulate_family(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  const GateConfig gc = parse_gate_config(c.one_qubit, c.two_qubit, c.layout);
  const RandomCircuit circuit = generate_random_circuit(c.n, c.m, c.seed, gc);
  const OutputDistribution dist = simulate(circuit);
  const GateCounts counts = gate_counts(circuit);
  rec.metrics.emplace_back("g1", static_cast<double>(counts.g1));
  rec.metrics.emplace_back("g2", static_cast<double>(counts.g2));

  {
    std::ofstream out(dir / "circuit.txt");
    write_circuit(out, circuit);
  }

  if (c.kind == "simulate") {
    const PorterThomasDiagnostics diag = porter_thomas_diagnostics(dist);
    rec.metrics.emplace_back("pt_first_moment", diag.first_moment);
    rec.metrics.emplace_back("pt_second_moment", diag.second_moment);
    rec.metrics.emplace_back("pt_ks_exp1", diag.ks_exp1);
    rec.metrics.emplace_back("alpha", alpha(dist, circuit.id()).alpha);
    if (c.write_distribution) {
      std::ofstream out(dir / "distribution.csv");
      out << "bitstring,probability\n";
      for (std::size_t i = 0; i < dist.p.size(); ++i)
        out << bits_to_string(i, dist.n) << "," << fmt_double(dist.p[i]) << "\n";
    }
  }

  if (c.count > 0 || c.kind == "sample") {
    const SampleSet samples =
        sample(dist, c.count, c.seed, Provenance{circuit.id(), "", c.seed});
    std::ofstream out(dir / "samples.txt");
    write_sample_archive(out, samples);
    rec.metrics.emplace_back("sample_count", static_cast<double>(samples.size()));
  }
}

void run_noisy_sample(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  const GateConfig gc = parse_gate_config(c.one_qubit, c.two_qubit, c.layout);
  const RandomCircuit circuit = generate_random_circuit(c.n, c.m, c.seed, gc);
  const NoiseModel model = noise_from_config(c);
  const SampleSet samples = noisy_sampler(circuit, model, c.count, c.seed, c.threads);
  {
    std::ofstream out(dir / "samples.txt");
    write_sample_archive(out, samples);
  }
  const OutputDistribution dist = simulate(circuit);
  const FidelityEstimate xeb = f_xeb(samples, dist);
  const FidelityEstimate predicted = formula77(model, circuit);
  const GateCounts counts = gate_counts(circuit);
  const double deviation = formula77_deviation(c.n, counts.g1, counts.g2);

  std::vector<EstimatorReportRow> rows;
  EstimatorReportRow row{circuit.id(), c.n, c.m, format_estimator_kind(xeb.kind), xeb.value,
                         xeb.std_error, xeb.sample_count, predicted.value, 0.0, deviation};
  if (model.averaged) {
    row.predicted_77_avg = formula77_simplified(c.n, counts.g1, counts.g2, (*model.averaged)[0],
                                                (*model.averaged)[1], (*model.averaged)[2])
                               .value;
  }
  rows.push_back(row);
  std::ofstream out(dir / "estimates.csv");
  write_estimator_report(out, rows);

  rec.metrics.emplace_back("xeb_value", xeb.value);
  rec.metrics.emplace_back("xeb_std_error", xeb.std_error);
  rec.metrics.emplace_back("predicted_77", predicted.value);
  rec.metrics.emplace_back("predicted_77_avg", row.predicted_77_avg);
  rec.metrics.emplace_back("deviation_bound", deviation);
  rec.metrics.emplace_back("sample_count", static_cast<double>(samples.size()));
}

void run_estimate(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  const GateConfig gc = parse_gate_config(c.one_qubit, c.two_qubit, c.layout);
  const RandomCircuit circuit = generate_random_circuit(c.n, c.m, c.seed, gc);
  const OutputDistribution dist = simulate(circuit);

  SampleSet samples;
  if (!c.archive.empty()) {
    std::ifstream in(c.archive);
    if (!in) throw std::runtime_error("cannot open sample archive " + c.archive);
    samples = read_sample_archive(in);
    if (samples.n != c.n)
      throw std::invalid_argument("estimate: archive qubit count does not match the circuit");
  } else {
    const OutputDistribution noisy = mix_with_uniform(dist, *c.mix_f);
    samples = sample(noisy, c.count, c.seed,
                     Provenance{circuit.id(), "mixture F=" + fmt_double(*c.mix_f), c.seed});
  }

  double predicted77 = 0.0, predicted77avg = 0.0, deviation = 0.0;
  const GateCounts counts = gate_counts(circuit);
  if (has_noise(c)) {
    const NoiseModel model = noise_from_config(c);
    predicted77 = formula77(model, circuit).value;
    if (model.averaged)
      predicted77avg = formula77_simplified(c.n, counts.g1, counts.g2, (*model.averaged)[0],
                                            (*model.averaged)[1], (*model.averaged)[2])
                           .value;
    deviation = formula77_deviation(c.n, counts.g1, counts.g2);
  }

  std::vector<EstimatorReportRow> rows;
  for (const std::string& name : c.estimators) {
    FidelityEstimate est;
    if (name == "xeb") est = f_xeb(samples, dist);
    else if (name == "v") est = v_estimator(samples, dist);
    else if (name == "mle") est = mle_estimator(samples, dist);
    else throw std::invalid_argument("estimate: unknown estimator '" + name + "'");
    rows.push_back({circuit.id(), c.n, c.m, format_estimator_kind(est.kind), est.value,
                    est.std_error, est.sample_count, predicted77, predicted77avg, deviation});
    rec.metrics.emplace_back(name + "_value", est.value);
    rec.metrics.emplace_back(name + "_std_error", est.std_error);
  }
  {
    std::ofstream out(dir / "estimates.csv");
    write_estimator_report(out, rows);
  }
  {
    std::ofstream out(dir / "histogram.csv");
    write_histogram_csv(out, size_biased_histogram(samples, dist));
  }
  rec.metrics.emplace_back("sample_count", static_cast<double>(samples.size()));
  rec.metrics.emplace_back("alpha", alpha(dist, circuit.id()).alpha);
}

void run_predict(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  // Paper-style gate accounting; the two-qubit count uses the nm/2 bound
  // unless overridden.
  const long long g1 = c.g1.value_or(static_cast<long long>(c.n) * (c.m + 1));
  const long long g2 = c.g2.value_or(static_cast<long long>(c.n) * c.m / 2);
  const double e1 = c.e1bar.value_or(0.0016);
  const double e2 = c.e2bar.value_or(0.0062);
  const double eq = c.eqbar.value_or(0.038);

  const FidelityEstimate avg = formula77_simplified(c.n, g1, g2, e1, e2, eq);
  const double two_factor = std::pow(1.0 - 0.0093, static_cast<double>(g2)) *
                            std::pow(1.0 - eq, static_cast<double>(c.n));
  const double deviation = formula77_deviation(c.n, g1, g2);

  std::vector<EstimatorReportRow> rows{{"", c.n, c.m, format_estimator_kind(avg.kind), avg.value,
                                        0.0, 0, 0.0, avg.value, deviation}};
  std::ofstream out(dir / "estimates.csv");
  write_estimator_report(out, rows);

  rec.metrics.emplace_back("g1", static_cast<double>(g1));
  rec.metrics.emplace_back("g2", static_cast<double>(g2));
  rec.metrics.emplace_back("predicted_77_avg", avg.value);
  rec.metrics.emplace_back("predicted_77_two_factor", two_factor);
  rec.metrics.emplace_back("deviation_bound", deviation);
}

void run_walsh(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  const GateConfig gc = parse_gate_config(c.one_qubit, c.two_qubit, c.layout);
  const RandomCircuit circuit = generate_random_circuit(c.n, c.m, c.seed, gc);
  const OutputDistribution dist = simulate(circuit);
  const WalshSpectrum spec = walsh_transform(dist);
  {
    std::ofstream out(dir / "spectrum.csv");
    write_spectrum_csv(out, spec);
  }
  double nonconstant_mass = 0.0;
  for (std::size_t s = 1; s < spec.coef.size(); ++s)
    nonconstant_mass += spec.coef[s] * spec.coef[s];
  rec.metrics.emplace_back("nonconstant_mass", nonconstant_mass);

  // Truncation error as a function of the degree cut: the raw correlation
  // with D_C is sqrt(mass below the cut / total nonconstant mass).
  {
    std::vector<double> mass_by_degree(c.n + 1, 0.0);
    for (std::size_t s = 1; s < spec.coef.size(); ++s)
      mass_by_degree[std::popcount(s)] += spec.coef[s] * spec.coef[s];
    std::ofstream out(dir / "truncation.csv");
    out << "degree,low_degree_mass_fraction,raw_correlation\n";
    double below = 0.0;
    for (int d = 0; d <= c.n; ++d) {
      below += mass_by_degree[d];
      const double fraction = nonconstant_mass > 0.0 ? below / nonconstant_mass : 0.0;
      out << d << "," << fmt_double(fraction) << "," << fmt_double(std::sqrt(fraction)) << "\n";
    }
  }

  if (c.degree >= 0) {
    const DegreeTruncation trunc = degree_truncate(spec, c.degree);
    double low_mass = 0.0;
    for (std::size_t s = 1; s < spec.coef.size(); ++s)
      if (std::popcount(s) <= c.degree) low_mass += spec.coef[s] * spec.coef[s];
    rec.metrics.emplace_back("truncation_degree", c.degree);
    rec.metrics.emplace_back("low_degree_mass_fraction",
                             nonconstant_mass > 0.0 ? low_mass / nonconstant_mass : 0.0);
    rec.metrics.emplace_back("correlation_raw", pearson(trunc.raw, dist.p));
    rec.metrics.emplace_back("correlation_repaired", pearson(trunc.repaired.p, dist.p));
  }
}

void run_correlation_scan(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  std::vector<double> grid = c.t_grid;
  if (grid.empty())
    for (int i = 0; i <= 10; ++i) grid.push_back(0.05 * i);

  std::vector<double> mean_corr(grid.size(), 0.0);
  const GateConfig gc = parse_gate_config(c.one_qubit, c.two_qubit, c.layout);
  for (int e = 0; e < c.ensemble; ++e) {
    const RandomCircuit circuit = generate_random_circuit(c.n, c.m, c.seed + e, gc);
    const OutputDistribution dist = simulate(circuit);
    for (std::size_t i = 0; i < grid.size(); ++i)
      mean_corr[i] += noise_correlation(dist, grid[i]);
  }
  std::ofstream out(dir / "correlation.csv");
  out << "t,correlation\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    mean_corr[i] /= c.ensemble;
    out << fmt_double(grid[i]) << "," << fmt_double(mean_corr[i]) << "\n";
  }
  rec.metrics.emplace_back("points", static_cast<double>(grid.size()));
  rec.metrics.emplace_back("ensemble", static_cast<double>(c.ensemble));
  rec.metrics.emplace_back("correlation_first", mean_corr.front());
  rec.metrics.emplace_back("correlation_last", mean_corr.back());
}

void run_match_sample(const ExperimentConfig& c, const fs::path& dir, ResultRecord& rec) {
  std::ifstream in(c.graph);
  if (!in) throw std::runtime_error("cannot open graph file " + c.graph);
  const BipartiteGraph g = read_graph(in);

  SplitStream root(c.seed);
  std::map<std::string, std::uint64_t> histogram;
  for (std::size_t i = 0; i < c.draws; ++i) {
    SplitStream rng = root.split(i);
    ++histogram[multiplicity_key(sample_semi_matching(g, rng))];
  }

  const bool exact_available = g.na <= 8 && g.nb <= 8;
  std::map<std::string, std::uint64_t> exact;
  double chi2_p = -1.0;
  if (exact_available) {
    const double tuples = static_cast<double>(choice_tuple_count(g));
    double chi2 = 0.0;
    int cells = 0;
    double small_obs = 0.0, small_exp = 0.0;
    for (const MultiSubset& ms : enumerate_multisets(g.nb, g.na)) {
      const std::uint64_t count = count_semi_matchings(g, ms);
      if (count == 0) continue;
      exact[multiplicity_key(ms)] = count;
      const double expected = static_cast<double>(c.draws) * static_cast<double>(count) / tuples;
      const auto it = histogram.find(multiplicity_key(ms));
      const double observed = it == histogram.end() ? 0.0 : static_cast<double>(it->second);
      if (expected < 5.0) {  // pool sparse cells
        small_obs += observed;
        small_exp += expected;
        continue;
      }
      chi2 += (observed - expected) * (observed - expected) / expected;
      ++cells;
    }
    if (small_exp > 0.0) {
      chi2 += (small_obs - small_exp) * (small_obs - small_exp) / small_exp;
      ++cells;
    }
    if (cells >= 2) chi2_p = chi_squared_survival(chi2, cells - 1);
  }

  std::ofstream out(dir / "multisets.csv");
  out << "multiset,count,frequency,exact_count\n";
  for (const auto& [key, count] : histogram) {
    out << "\"" << key << "\"," << count << ","
        << fmt_double(static_cast<double>(count) / static_cast<double>(c.draws)) << ",";
    const auto it = exact.find(key);
    out << (it == exact.end() ? std::string("-") : std::to_string(it->second)) << "\n";
  }

  rec.metrics.emplace_back("draws", static_cast<double>(c.draws));
  rec.metrics.emplace_back("distinct_multisets", static_cast<double>(histogram.size()));
  if (chi2_p >= 0.0) rec.metrics.emplace_back("chi2_p", chi2_p);
}

void run_match_test(const ExperimentConfig& c, const fs::path& /*dir*/, ResultRecord& rec) {
  std::ifstream in(c.graph);
  if (!in) throw std::runtime_error("cannot open graph file " + c.graph);
  const BipartiteGraph g = read_graph(in);
  const MatchVerdict verdict = lovasz_matching_test(g, c.field_q, c.trials, c.seed);
  const bool yes = verdict == MatchVerdict::kPerfectMatchingExists;
  rec.metrics.emplace_back("perfect_matching", yes ? 1.0 : 0.0);
  rec.metrics.emplace_back("trials", static_cast<double>(c.trials));
  if (g.na == g.nb) {
    const bool oracle_yes = max_bipartite_matching(g) == g.na;
    rec.metrics.emplace_back("oracle_perfect_matching", oracle_yes ? 1.0 : 0.0);
    rec.metrics.emplace_back("verdict_agrees", yes == oracle_yes ? 1.0 : 0.0);
  }
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& config) {
  config.validate();

  ResultRecord rec;
  rec.experiment_id = config.resolved_id();
  rec.timestamp = timestamp_utc();
  rec.config_text = format_config(config);
  rec.config_hash = config_hash(config);

  const fs::path dir = fs::path(config.out) / rec.experiment_id;
  fs::create_directories(dir);
  rec.out_dir = dir.string();
  write_text_file(dir / "config.txt", rec.config_text);

  if (config.kind == "simulate" || config.kind == "sample")
    run_simulate_family(config, dir, rec);
  else if (config.kind == "noisy-sample")
    run_noisy_sample(config, dir, rec);
  else if (config.kind == "estimate")
    run_estimate(config, dir, rec);
  else if (config.kind == "predict")
    run_predict(config, dir, rec);
  else if (config.kind == "walsh")
    run_walsh(config, dir, rec);
  else if (config.kind == "correlation-scan")
    run_correlation_scan(config, dir, rec);
  else if (config.kind == "match-sample")
    run_match_sample(config, dir, rec);
  else if (config.kind == "match-test")
    run_match_test(config, dir, rec);

  {
    std::ofstream out(dir / "metrics.csv");
    out << "metric,value\n";
    for (const auto& [name, value] : rec.metrics) out << name << "," << fmt_double(value) << "\n";
  }
  {
    nlohmann::json j;
    j["experiment_id"] = rec.experiment_id;
    j["timestamp"] = rec.timestamp;
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(rec.config_hash));
    j["config_hash"] = hash_hex;
    j["config"] = rec.config_text;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, value] : rec.metrics) metrics[name] = value;
    j["metrics"] = metrics;
    write_text_file(dir / "record.json", j.dump(2) + "\n");
  }
  return rec;
}

bool VerifyReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void print_verify_report(std::ostream& out, const VerifyReport& report) {
  for (const auto& c : report.checks)
    out << (c.pass ? "ok   " : "FAIL ") << c.name
        << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  out << (report.all_pass() ? "verify: all checks passed" : "verify: FAILURES present") << "\n";
}

namespace {

OutputDistribution random_distribution(int n, SplitStream& rng) {
  OutputDistribution d;
  d.n = n;
  d.p.resize(std::size_t{1} << n);
  double total = 0.0;
  for (double& v : d.p) {
    v = -std::log(1.0 - rng.next_unit());  // Exp(1) draws: a Dirichlet point
    total += v;
  }
  for (double& v : d.p) v /= total;
  return d;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

VerifyReport verify_suite(const VerifyOptions& options) {
  VerifyReport report;
  SplitStream rng(20260811);
  char detail[160];

  auto check = [&](const std::string& name, bool pass, const std::string& info = "") {
    report.checks.push_back({name, pass, info});
  };

  // Walsh round trip and Parseval (with the optional fault hook).
  {
    std::vector<double> f(64);
    for (double& v : f) v = rng.next_unit() * 2.0 - 1.0;
    WalshSpectrum spec = walsh_transform(f);
    const double round = max_abs_diff(inverse_walsh(spec), f);
    std::snprintf(detail, sizeof detail, "max err %.2e", round);
    check("walsh_round_trip", round < 1e-12, detail);

    if (options.inject_walsh_fault)
      for (double& ccoef : spec.coef) ccoef *= 1.000001;
    double lhs = 0.0, rhs = 0.0;
    for (double ccoef : spec.coef) lhs += ccoef * ccoef;
    for (double v : f) rhs += v * v;
    rhs /= static_cast<double>(f.size());
    std::snprintf(detail, sizeof detail, "|lhs-rhs| %.2e", std::abs(lhs - rhs));
    check("walsh_parseval", std::abs(lhs - rhs) < 1e-10, detail);
  }

  // Bitflip channel against the spectral route.
  {
    double worst = 0.0;
    for (double t : {0.01, 0.1, 0.3}) {
      const OutputDistribution d = random_distribution(6, rng);
      const OutputDistribution direct = bitflip_channel(d, t);
      const std::vector<double> spectral = inverse_walsh(attenuate(walsh_transform(d), t));
      worst = std::max(worst, max_abs_diff(direct.p, spectral));
    }
    std::snprintf(detail, sizeof detail, "max err %.2e", worst);
    check("bitflip_equals_spectral_route", worst < 1e-12, detail);
  }

  // Flip-rate semigroup s, t -> s + t - 2st.
  {
    const OutputDistribution d = random_distribution(6, rng);
    const double s = 0.1, t = 0.23;
    const OutputDistribution twice = bitflip_channel(bitflip_channel(d, s), t);
    const OutputDistribution once = bitflip_channel(d, s + t - 2.0 * s * t);
    const double err = max_abs_diff(twice.p, once.p);
    std::snprintf(detail, sizeof detail, "max err %.2e", err);
    check("bitflip_semigroup", err < 1e-12, detail);
  }

  // Uniform readout rates collapse to the bitflip kernel.
  {
    const OutputDistribution d = random_distribution(5, rng);
    const OutputDistribution a = readout_channel(d, std::vector<double>(5, 0.07));
    const OutputDistribution b = bitflip_channel(d, 0.07);
    const double err = max_abs_diff(a.p, b.p);
    std::snprintf(detail, sizeof detail, "max err %.2e", err);
    check("readout_uniform_equals_bitflip", err < 1e-12, detail);
  }

  // Mixture channel {(.5, 0), (.5, .5)} equals .5 D + .5 U.
  {
    const OutputDistribution d = random_distribution(5, rng);
    const OutputDistribution a =
        general_channel(d, ToyChannelSpec::flip_mixture({{0.5, 0.0}, {0.5, 0.5}}));
    const OutputDistribution b = mix_with_uniform(d, 0.5);
    const double err = max_abs_diff(a.p, b.p);
    std::snprintf(detail, sizeof detail, "max err %.2e", err);
    check("mixture_channel_linearity", err < 1e-12, detail);
  }

  // Exact mixture bias: E[2^n D] - 1 = alpha F for the F-mixture.
  {
    const RandomCircuit circuit = generate_random_circuit(8, 6, 3);
    const OutputDistribution d = simulate(circuit);
    const double a = alpha(d).alpha;
    double worst = 0.0;
    for (double f : {0.0, 0.25, 0.5, 1.0})
      worst = std::max(worst, std::abs(xeb_expectation(mix_with_uniform(d, f), d) - a * f));
    std::snprintf(detail, sizeof detail, "max err %.2e", worst);
    check("mixture_bias_identity", worst < 1e-12, detail);
  }

  // Three-part model decomposes exactly: XEB = F alpha + (Fg - F) rho.
  {
    const RandomCircuit circuit = generate_random_circuit(8, 6, 5);
    const OutputDistribution d = simulate(circuit);
    const NoiseModel model = NoiseModel::averaged_rates(0.0016, 0.0062, 0.038);
    const OutputDistribution noisy = three_part_model(d, model, circuit);
    const GateCounts counts = gate_counts(circuit);
    const double fg = std::pow(1.0 - 0.0016, static_cast<double>(counts.g1)) *
                      std::pow(1.0 - 0.0062, static_cast<double>(counts.g2));
    const double p0 = std::pow(1.0 - 0.038, 8.0);
    const double f = fg * p0;
    const OutputDistribution readout = readout_channel(d, std::vector<double>(8, 0.038));
    OutputDistribution n_ro;
    n_ro.n = 8;
    n_ro.p.resize(d.p.size());
    for (std::size_t i = 0; i < d.p.size(); ++i)
      n_ro.p[i] = (readout.p[i] - p0 * d.p[i]) / (1.0 - p0);
    const double want = f * alpha(d).alpha + (fg - f) * xeb_expectation(n_ro, d);
    const double got = xeb_expectation(noisy, d);
    std::snprintf(detail, sizeof detail, "|got-want| %.2e", std::abs(got - want));
    check("three_part_decomposition", std::abs(got - want) < 1e-12, detail);
  }

  // Closed-form pins.
  {
    const double rocket = std::pow(0.99, 900.0);
    const double dev = formula77_deviation(53, 795, 371);
    const bool ok = std::abs(rocket / 0.00012 - 1.0) < 0.05 && std::abs(dev - 0.088) < 0.001;
    std::snprintf(detail, sizeof detail, "(1-.01)^900=%.3g dev=%.4f", rocket, dev);
    check("formula77_pins", ok, detail);
  }

  // Law of total variance on random nested data.
  {
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<std::vector<double>> groups;
      std::vector<double> pooled;
      const int ngroups = 2 + static_cast<int>(rng.next_below(5));
      for (int gix = 0; gix < ngroups; ++gix) {
        std::vector<double> g;
        const int sz = 2 + static_cast<int>(rng.next_below(8));
        const double shift = rng.next_unit() * 4.0;
        for (int i = 0; i < sz; ++i) {
          g.push_back(shift + rng.next_unit());
          pooled.push_back(g.back());
        }
        groups.push_back(std::move(g));
      }
      const VarianceDecomposition vd = total_variance(groups);
      worst = std::max(worst, std::abs(vd.total - population_variance(pooled)));
    }
    std::snprintf(detail, sizeof detail, "max err %.2e", worst);
    check("pythagorean_variance", worst < 1e-12, detail);
  }

  // Semi-matching sampler support and exact proportionality on K22.
  {
    BipartiteGraph k22{2, 2, {{0, 1}, {0, 1}}};
    std::map<std::string, int> tuple_hist;
    for (int c0 : {0, 1})
      for (int c1 : {0, 1}) {
        MultiSubset ms{{0, 0}};
        ++ms.multiplicity[c0];
        ++ms.multiplicity[c1];
        ++tuple_hist[multiplicity_key(ms)];
      }
    bool ok = true;
    for (const MultiSubset& ms : enumerate_multisets(2, 2)) {
      const auto it = tuple_hist.find(multiplicity_key(ms));
      const std::uint64_t enumerated = it == tuple_hist.end() ? 0 : it->second;
      if (enumerated != count_semi_matchings(k22, ms)) ok = false;
    }
    check("semi_matching_proportionality", ok);
  }

  // Lovasz verdicts against the augmenting-path oracle.
  {
    int disagreements = 0;
    for (int i = 0; i < 50; ++i) {
      SplitStream gr = rng.split(1000 + i);
      const int nv = 2 + static_cast<int>(gr.next_below(5));
      BipartiteGraph g;
      g.na = g.nb = nv;
      g.adj.resize(nv);
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          if (gr.next_bernoulli(0.4)) g.adj[a].push_back(b);
      bool isolated = false;
      for (const auto& nbrs : g.adj) isolated |= nbrs.empty();
      if (isolated) continue;
      const bool lov = lovasz_matching_test(g, 2147483647ULL, 8, gr.next_u64()) ==
                       MatchVerdict::kPerfectMatchingExists;
      const bool oracle = max_bipartite_matching(g) == nv;
      if (lov != oracle) ++disagreements;
    }
    std::snprintf(detail, sizeof detail, "%d disagreements", disagreements);
    check("lovasz_vs_matching_oracle", disagreements == 0, detail);
  }

  // Degree truncation leaves exactly zero Walsh mass above the cut.
  {
    const OutputDistribution d = random_distribution(6, rng);
    const WalshSpectrum spec = walsh_transform(d);
    const DegreeTruncation trunc = degree_truncate(spec, 2);
    const WalshSpectrum back = walsh_transform(trunc.raw);
    double high = 0.0;
    for (std::size_t s = 0; s < back.coef.size(); ++s)
      if (std::popcount(s) > 2) high = std::max(high, std::abs(back.coef[s]));
    std::snprintf(detail, sizeof detail, "max |coef| above cut %.2e", high);
    check("truncation_kills_high_degree", high < 1e-15, detail);
  }

  // Seeded determinism of the two samplers.
  {
    const RandomCircuit circuit = generate_random_circuit(6, 4, 11);
    const OutputDistribution d = simulate(circuit);
    const bool plain = sample(d, 500, 42).bits == sample(d, 500, 42).bits;
    const NoiseModel model = NoiseModel::averaged_rates(0.01, 0.02, 0.03);
    const SampleSet one_thread = noisy_sampler(circuit, model, 400, 9, 1);
    const SampleSet two_threads = noisy_sampler(circuit, model, 400, 9, 2);
    check("sampler_determinism", plain && one_thread.bits == two_threads.bits);
  }

  return report;
}

}  // namespace xeblab
