#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xeblab/circuit.hpp"
#include "xeblab/distribution.hpp"
#include "xeblab/noise.hpp"

namespace xeblab {

enum class EstimatorKind { kXeb, kV, kMle, kPredicted77, kPredicted77Avg };
std::string format_estimator_kind(EstimatorKind k);

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  EstimatorKind kind = EstimatorKind::kXeb;
  std::size_t sample_count = 0;  // 0 for the predicted kinds
  bool at_boundary = false;      // MLE pinned to an endpoint of [0,1]
};

// alpha = -1 + 2^n sum_x D(x)^2, the per-circuit bias constant: under the
// F-mixture the expected value of 2^n D(x) is 1 + alpha F.
struct BiasConstant {
  double alpha = 0.0;
  std::string circuit_id;
};

// The rescaled likelihoods 2^n D(x_i) of a sample set.
std::vector<double> scaled_sample_probs(const SampleSet& samples,
                                        const OutputDistribution& dist);

// Linear cross-entropy estimator: 2^n mean(D(x_i)) - 1, with the standard
// error of the mean.
FidelityEstimate f_xeb(const SampleSet& samples, const OutputDistribution& dist);

BiasConstant alpha(const OutputDistribution& dist, std::string circuit_id = "");

// Bias-corrected per-circuit estimator: F_XEB / alpha. Undefined when
// alpha = 0 (uniform D); throws std::domain_error.
FidelityEstimate v_estimator(const SampleSet& samples, const OutputDistribution& dist);

// Maximum likelihood under the mixture model F D + (1-F) U, solved on [0,1]
// to |dF| < 1e-9; standard error from observed Fisher information.
FidelityEstimate mle_estimator(const SampleSet& samples, const OutputDistribution& dist);

// Exact expectation of 2^n D(x) - 1 when x ~ noisy; the full-vector version
// of F_XEB used by the oracle checks.
double xeb_expectation(const OutputDistribution& noisy, const OutputDistribution& ideal);

// Per-component success product over the circuit's gates and qubits.
FidelityEstimate formula77(const NoiseModel& model, const RandomCircuit& circuit);

// Averaged form (1-e1)^g1 (1-e2)^g2 (1-eq)^n.
FidelityEstimate formula77_simplified(int n, long long g1, long long g2, double e1bar,
                                      double e2bar, double eqbar);

// Rough relative deviation of the product prediction,
// 0.2 (sqrt(n) 0.038 + sqrt(g1) 0.0016 + sqrt(g2) 0.0063).
double formula77_deviation(int n, long long g1, long long g2);

// 50 equal-width bins on [0,10] plus an overflow bin, with the two
// reference densities e^-x and x e^-x at the bin centers.
struct SizeBiasedHistogram {
  std::vector<double> bin_edges;               // 51 edges
  std::vector<double> empirical_density;       // 50 bins
  std::vector<double> exp_reference;           // e^-x at bin centers
  std::vector<double> size_biased_reference;   // x e^-x at bin centers
  double overflow_fraction = 0.0;
  std::size_t sample_count = 0;
};
SizeBiasedHistogram size_biased_histogram(const SampleSet& samples,
                                          const OutputDistribution& dist);
void write_histogram_csv(std::ostream& out, const SizeBiasedHistogram& h);

// Law-of-total-variance split of grouped values under the population
// convention, size-weighted so that total = within + between exactly.
struct VarianceDecomposition {
  double within = 0.0;
  double between = 0.0;
  double total = 0.0;
};
VarianceDecomposition total_variance(const std::vector<std::vector<double>>& groups);

struct EstimatorReportRow {
  std::string circuit_id;
  int n = 0;
  int m = 0;
  std::string estimator_kind;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t sample_count = 0;
  double predicted_77 = 0.0;
  double predicted_77_avg = 0.0;
  double deviation_bound = 0.0;
};
void write_estimator_report(std::ostream& out, std::span<const EstimatorReportRow> rows);

}  // namespace xeblab
