#include "xeblab/xeb.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "xeblab/stats.hpp"

namespace xeblab {

namespace {

void check_compatible(const SampleSet& samples, const OutputDistribution& dist) {
  if (samples.n != dist.n)
    throw std::invalid_argument("estimator: samples and distribution disagree on n");
  if (samples.size() < 1) throw std::invalid_argument("estimator: empty sample set");
}

}  // namespace

std::string format_estimator_kind(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::kXeb: return "XEB";
    case EstimatorKind::kV: return "V";
    case EstimatorKind::kMle: return "MLE";
    case EstimatorKind::kPredicted77: return "PREDICTED_77";
    case EstimatorKind::kPredicted77Avg: return "PREDICTED_77_AVG";
  }
  return "?";
}

std::vector<double> scaled_sample_probs(const SampleSet& samples,
                                        const OutputDistribution& dist) {
  check_compatible(samples, dist);
  const double scale = static_cast<double>(dist.size());
  std::vector<double> values;
  values.reserve(samples.size());
  for (std::uint64_t b : samples.bits) values.push_back(scale * dist.p[b]);
  return values;
}

FidelityEstimate f_xeb(const SampleSet& samples, const OutputDistribution& dist) {
  const std::vector<double> values = scaled_sample_probs(samples, dist);
  FidelityEstimate e;
  e.kind = EstimatorKind::kXeb;
  e.sample_count = values.size();
  e.value = mean(values) - 1.0;
  e.std_error = values.size() > 1
                    ? std::sqrt(sample_variance(values) / static_cast<double>(values.size()))
                    : 0.0;
  return e;
}

BiasConstant alpha(const OutputDistribution& dist, std::string circuit_id) {
  dist.validate();
  double sum_sq = 0.0;
  for (double v : dist.p) sum_sq += v * v;
  BiasConstant b;
  b.alpha = -1.0 + static_cast<double>(dist.size()) * sum_sq;
  b.circuit_id = std::move(circuit_id);
  return b;
}

FidelityEstimate v_estimator(const SampleSet& samples, const OutputDistribution& dist) {
  const double a = alpha(dist).alpha;
  if (a == 0.0)
    throw std::domain_error("v_estimator: alpha = 0 (uniform distribution), estimator undefined");
  FidelityEstimate e = f_xeb(samples, dist);
  e.kind = EstimatorKind::kV;
  e.value /= a;
  e.std_error /= std::abs(a);
  return e;
}

FidelityEstimate mle_estimator(const SampleSet& samples, const OutputDistribution& dist) {
  const std::vector<double> values = scaled_sample_probs(samples, dist);

  // With v = 2^n D(x), the log-likelihood is sum log(1 + F (v_i - 1)) up to
  // a constant; its derivative is strictly decreasing in F, so bisect.
  auto deriv = [&](double f) {
    double s = 0.0;
    for (double v : values) s += (v - 1.0) / (1.0 + f * (v - 1.0));
    return s;
  };

  FidelityEstimate e;
  e.kind = EstimatorKind::kMle;
  e.sample_count = values.size();

  double fhat;
  if (deriv(0.0) <= 0.0) {
    fhat = 0.0;
    e.at_boundary = true;
  } else if (deriv(1.0 - 1e-15) >= 0.0) {
    fhat = 1.0;
    e.at_boundary = true;
  } else {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (deriv(mid) > 0.0 ? lo : hi) = mid;
    }
    fhat = 0.5 * (lo + hi);
  }
  e.value = fhat;

  double info = 0.0;
  for (double v : values) {
    const double denom = 1.0 + fhat * (v - 1.0);
    if (denom > 0.0) info += (v - 1.0) * (v - 1.0) / (denom * denom);
  }
  e.std_error = info > 0.0 ? 1.0 / std::sqrt(info) : 0.0;
  return e;
}

double xeb_expectation(const OutputDistribution& noisy, const OutputDistribution& ideal) {
  if (noisy.n != ideal.n)
    throw std::invalid_argument("xeb_expectation: distributions disagree on n");
  double s = 0.0;
  for (std::size_t i = 0; i < noisy.p.size(); ++i) s += noisy.p[i] * ideal.p[i];
  return static_cast<double>(ideal.size()) * s - 1.0;
}

FidelityEstimate formula77(const NoiseModel& model, const RandomCircuit& circuit) {
  model.validate();
  const GateCounts counts = gate_counts(circuit);
  double product = 1.0;
  if (!model.e1.empty()) {
    if (model.e1.size() != static_cast<std::size_t>(counts.g1))
      throw std::invalid_argument("formula77: e1 list does not match circuit");
    for (double e : model.e1) product *= 1.0 - e;
  } else if (model.averaged) {
    product *= std::pow(1.0 - (*model.averaged)[0], static_cast<double>(counts.g1));
  } else {
    throw std::invalid_argument("formula77: no one-qubit rates");
  }
  if (!model.e2.empty()) {
    if (model.e2.size() != static_cast<std::size_t>(counts.g2))
      throw std::invalid_argument("formula77: e2 list does not match circuit");
    for (double e : model.e2) product *= 1.0 - e;
  } else if (model.averaged) {
    product *= std::pow(1.0 - (*model.averaged)[1], static_cast<double>(counts.g2));
  } else if (counts.g2 > 0) {
    throw std::invalid_argument("formula77: no two-qubit rates");
  }
  for (double e : model.qubit_rates(circuit.n)) product *= 1.0 - e;

  FidelityEstimate e;
  e.kind = EstimatorKind::kPredicted77;
  e.value = product;
  return e;
}

FidelityEstimate formula77_simplified(int n, long long g1, long long g2, double e1bar,
                                      double e2bar, double eqbar) {
  if (n < 0 || g1 < 0 || g2 < 0)
    throw std::invalid_argument("formula77_simplified: negative counts");
  FidelityEstimate e;
  e.kind = EstimatorKind::kPredicted77Avg;
  e.value = std::pow(1.0 - e1bar, static_cast<double>(g1)) *
            std::pow(1.0 - e2bar, static_cast<double>(g2)) *
            std::pow(1.0 - eqbar, static_cast<double>(n));
  return e;
}

double formula77_deviation(int n, long long g1, long long g2) {
  if (n < 0 || g1 < 0 || g2 < 0)
    throw std::invalid_argument("formula77_deviation: negative counts");
  return 0.2 * (std::sqrt(static_cast<double>(n)) * 0.038 +
                std::sqrt(static_cast<double>(g1)) * 0.0016 +
                std::sqrt(static_cast<double>(g2)) * 0.0063);
}

SizeBiasedHistogram size_biased_histogram(const SampleSet& samples,
                                          const OutputDistribution& dist) {
  const std::vector<double> values = scaled_sample_probs(samples, dist);
  constexpr int kBins = 50;
  constexpr double kHi = 10.0;
  constexpr double kWidth = kHi / kBins;

  SizeBiasedHistogram h;
  h.sample_count = values.size();
  h.bin_edges.resize(kBins + 1);
  for (int i = 0; i <= kBins; ++i) h.bin_edges[i] = kWidth * i;
  h.empirical_density.assign(kBins, 0.0);
  std::size_t overflow = 0;
  for (double v : values) {
    const int bin = static_cast<int>(v / kWidth);
    if (bin >= kBins)
      ++overflow;
    else
      h.empirical_density[bin] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(values.size()) * kWidth);
  for (double& d : h.empirical_density) d *= norm;
  h.overflow_fraction = static_cast<double>(overflow) / static_cast<double>(values.size());

  h.exp_reference.resize(kBins);
  h.size_biased_reference.resize(kBins);
  for (int i = 0; i < kBins; ++i) {
    const double x = kWidth * (i + 0.5);
    h.exp_reference[i] = std::exp(-x);
    h.size_biased_reference[i] = x * std::exp(-x);
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const SizeBiasedHistogram& h) {
  out << "bin_lo,bin_hi,empirical,exp_ref,size_biased_ref\n";
  char buf[160];
  for (std::size_t i = 0; i < h.empirical_density.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.17g,%.17g,%.17g\n", h.bin_edges[i],
                  h.bin_edges[i + 1], h.empirical_density[i], h.exp_reference[i],
                  h.size_biased_reference[i]);
    out << buf;
  }
}

VarianceDecomposition total_variance(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("total_variance: need >= 2 groups");
  std::size_t count = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw std::invalid_argument("total_variance: degenerate group");
    count += g.size();
    for (double v : g) grand_sum += v;
  }
  const double grand_mean = grand_sum / static_cast<double>(count);

  VarianceDecomposition d;
  for (const auto& g : groups) {
    const double w = static_cast<double>(g.size()) / static_cast<double>(count);
    const double mu = mean(g);
    d.within += w * population_variance(g);
    d.between += w * (mu - grand_mean) * (mu - grand_mean);
  }
  d.total = d.within + d.between;
  return d;
}

void write_estimator_report(std::ostream& out, std::span<const EstimatorReportRow> rows) {
  out << "circuit_id,n,m,estimator_kind,value,std_error,sample_count,"
         "predicted_77,predicted_77_avg,deviation_bound\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%d,%d,%s,%.17g,%.17g,%zu,%.17g,%.17g,%.17g\n", r.n, r.m,
                  r.estimator_kind.c_str(), r.value, r.std_error, r.sample_count,
                  r.predicted_77, r.predicted_77_avg, r.deviation_bound);
    out << r.circuit_id << buf;
  }
}

}  // namespace xeblab
