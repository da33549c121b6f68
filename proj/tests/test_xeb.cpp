#include <stdexcept>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "xeblab/circuit.hpp"
#include "xeblab/noise.hpp"
#include "xeblab/simulator.hpp"
#include "xeblab/stats.hpp"
#include "xeblab/xeb.hpp"

using namespace xeblab;

TEST_CASE("uniform draws give xeb expectation zero, ideal draws give alpha") {
  const OutputDistribution d = simulate(generate_random_circuit(10, 10, 1));
  CHECK(xeb_expectation(OutputDistribution::uniform(10), d) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(xeb_expectation(d, d) == doctest::Approx(alpha(d).alpha).epsilon(1e-12));

  const SampleSet uniform_samples = sample(OutputDistribution::uniform(10), 50000, 3);
  const FidelityEstimate est = f_xeb(uniform_samples, d);
  CHECK(std::abs(est.value) < 3.0 * est.std_error);

  const SampleSet ideal_samples = sample(d, 50000, 4);
  const FidelityEstimate ideal = f_xeb(ideal_samples, d);
  CHECK(std::abs(ideal.value - alpha(d).alpha) < 3.0 * ideal.std_error);
}

TEST_CASE("per-circuit mixture bias is exactly 1 + alpha F") {
  const OutputDistribution d = simulate(generate_random_circuit(10, 10, 7));
  const double a = alpha(d).alpha;
  for (double f : {0.0, 0.25, 0.5, 1.0}) {
    const double expectation = xeb_expectation(mix_with_uniform(d, f), d);
    CHECK(expectation == doctest::Approx(a * f).epsilon(1e-12));
  }
}

TEST_CASE("estimators reject mismatched inputs") {
  const OutputDistribution d = simulate(generate_random_circuit(4, 2, 1));
  SampleSet wrong;
  wrong.n = 5;
  wrong.bits = {0};
  CHECK_THROWS_AS(f_xeb(wrong, d), std::invalid_argument);
  SampleSet empty;
  empty.n = 4;
  CHECK_THROWS_AS(f_xeb(empty, d), std::invalid_argument);
}

TEST_CASE("alpha closed forms") {
  CHECK(alpha(OutputDistribution::uniform(6)).alpha == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(alpha(OutputDistribution::point_mass(6, 9)).alpha ==
        doctest::Approx(63.0).epsilon(1e-12));
}

TEST_CASE("alpha of random circuits concentrates near 1") {
  double total = 0.0;
  const int circuits = 20;
  for (int i = 0; i < circuits; ++i)
    total += alpha(simulate(generate_random_circuit(12, 14, 200 + i))).alpha;
  const double mean_alpha = total / circuits;
  CHECK(mean_alpha > 0.9);
  CHECK(mean_alpha < 1.1);
}

TEST_CASE("v estimator is exactly unbiased per circuit") {
  const OutputDistribution d = simulate(generate_random_circuit(10, 10, 11));
  const double a = alpha(d).alpha;
  // Full-vector expectation of V under the mixture: (alpha F) / alpha = F.
  for (double f : {0.0, 0.5}) {
    const double v_expectation = xeb_expectation(mix_with_uniform(d, f), d) / a;
    CHECK(v_expectation == doctest::Approx(f).epsilon(1e-12));
  }

  const SampleSet s = sample(mix_with_uniform(d, 0.5), 50000, 17);
  const FidelityEstimate v = v_estimator(s, d);
  CHECK(std::abs(v.value - 0.5) < 3.0 * v.std_error);

  CHECK_THROWS_AS(v_estimator(s, OutputDistribution::uniform(10)), std::domain_error);
}

TEST_CASE("v tracks xeb when alpha is close to 1") {
  const OutputDistribution d = simulate(generate_random_circuit(12, 14, 19));
  const SampleSet s = sample(mix_with_uniform(d, 0.4), 30000, 23);
  const FidelityEstimate x = f_xeb(s, d);
  const FidelityEstimate v = v_estimator(s, d);
  CHECK(std::abs(v.value - x.value) < 0.1 * std::abs(x.value) + 0.02);
}

TEST_CASE("mle recovers the mixture endpoints") {
  const OutputDistribution d = simulate(generate_random_circuit(10, 10, 29));
  const SampleSet at_zero = sample(mix_with_uniform(d, 0.0), 30000, 31);
  const FidelityEstimate f0 = mle_estimator(at_zero, d);
  CHECK(f0.value < 3.0 * f0.std_error + 1e-6);

  const SampleSet at_one = sample(mix_with_uniform(d, 1.0), 30000, 37);
  const FidelityEstimate f1 = mle_estimator(at_one, d);
  CHECK(f1.value > 1.0 - 3.0 * f1.std_error - 1e-6);
}

TEST_CASE("mle flags the boundary when every sample has zero likelihood") {
  const OutputDistribution d = OutputDistribution::point_mass(2, 0);
  SampleSet s;
  s.n = 2;
  s.bits = {1, 2, 3};
  const FidelityEstimate est = mle_estimator(s, d);
  CHECK(est.value == 0.0);
  CHECK(est.at_boundary);
}

TEST_CASE("mle beats xeb in variance on repeated experiments") {
  const OutputDistribution d = simulate(generate_random_circuit(12, 14, 41));
  const OutputDistribution noisy = mix_with_uniform(d, 0.3);
  std::vector<double> xeb_values, mle_values;
  for (int rep = 0; rep < 30; ++rep) {
    const SampleSet s = sample(noisy, 5000, 1000 + rep);
    xeb_values.push_back(f_xeb(s, d).value);
    mle_values.push_back(mle_estimator(s, d).value);
  }
  CHECK(population_variance(mle_values) <= population_variance(xeb_values));
}

TEST_CASE("formula 77 with no errors is 1 and decreases in every rate") {
  const RandomCircuit circuit = generate_random_circuit(6, 4, 43);
  CHECK(formula77(NoiseModel::averaged_rates(0, 0, 0), circuit).value == 1.0);
  double prev = 1.0;
  for (double e : {0.001, 0.01, 0.05}) {
    const double v = formula77(NoiseModel::averaged_rates(e, e, e), circuit).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("rocket pin: 900 components at rate 0.01") {
  const double v = formula77_simplified(0, 900, 0, 0.01, 0.0, 0.0).value;
  CHECK(std::abs(v / 0.00012 - 1.0) < 0.05);
}

TEST_CASE("formula 77 equals its simplified form at constant rates") {
  const RandomCircuit circuit = generate_random_circuit(12, 14, 47);
  const GateCounts counts = gate_counts(circuit);
  NoiseModel per_gate;
  per_gate.e1 = std::vector<double>(counts.g1, 0.0016);
  per_gate.e2 = std::vector<double>(counts.g2, 0.0062);
  per_gate.eq = std::vector<double>(12, 0.038);
  const double a = formula77(per_gate, circuit).value;
  const double b = formula77_simplified(12, counts.g1, counts.g2, 0.0016, 0.0062, 0.038).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("formula 77 at large scale matches an extended-precision oracle") {
  const RandomCircuit circuit = generate_random_circuit(53, 20, 1, {}, kMaxCircuitQubits);
  const GateCounts counts = gate_counts(circuit);
  CHECK(counts.g1 == 1113);
  const double v = formula77(NoiseModel::averaged_rates(0.0016, 0.0062, 0.038), circuit).value;
  const long double expected =
      std::exp(static_cast<long double>(counts.g1) * std::log(1.0L - 0.0016L) +
               static_cast<long double>(counts.g2) * std::log(1.0L - 0.0062L) +
               53.0L * std::log(1.0L - 0.038L));
  CHECK(std::abs(v / static_cast<double>(expected) - 1.0) < 1e-10);
}

TEST_CASE("two-factor shortcut is documented as close but not equal") {
  // (1-0.0093)^g2 (1-0.038)^n versus the three-factor form at n=53, m=20.
  const double three = formula77_simplified(53, 1113, 530, 0.0016, 0.0062, 0.038).value;
  const double two = std::pow(1.0 - 0.0093, 530.0) * std::pow(1.0 - 0.038, 53.0);
  const double ratio = two / three;
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
  MESSAGE("two-factor/three-factor ratio: ", ratio);
}

TEST_CASE("deviation formula pins") {
  CHECK(std::abs(formula77_deviation(53, 795, 371) - 0.088) < 0.001);
  CHECK(formula77_deviation(0, 0, 0) == 0.0);
  CHECK(formula77_deviation(53, 1113, 530) == doctest::Approx(0.095012).epsilon(1e-4));
}

TEST_CASE("size-biased histogram tracks the expected densities") {
  const OutputDistribution d = simulate(generate_random_circuit(16, 14, 53, {}, 16));

  // Uniform draws: the scaled likelihoods follow Exp(1).
  const SampleSet uniform_draws = sample(OutputDistribution::uniform(16), 1000000, 59);
  const double ks_exp =
      ks_distance(scaled_sample_probs(uniform_draws, d),
                  [](double z) { return 1.0 - std::exp(-z); });
  CHECK(ks_exp < 0.01);

  // Ideal draws: size-biased density x e^-x, CDF 1 - (1+z) e^-z.
  const SampleSet ideal_draws = sample(d, 1000000, 61);
  const double ks_biased =
      ks_distance(scaled_sample_probs(ideal_draws, d),
                  [](double z) { return 1.0 - (1.0 + z) * std::exp(-z); });
  CHECK(ks_biased < 0.01);

  // Mixture draws: F-weighted blend of the two laws.
  const double f = 0.4;
  const SampleSet mixture_draws = sample(mix_with_uniform(d, f), 1000000, 67);
  const double ks_mix =
      ks_distance(scaled_sample_probs(mixture_draws, d), [f](double z) {
        return f * (1.0 - (1.0 + z) * std::exp(-z)) + (1.0 - f) * (1.0 - std::exp(-z));
      });
  CHECK(ks_mix < 0.01);

  const SizeBiasedHistogram h = size_biased_histogram(ideal_draws, d);
  CHECK(h.sample_count == 1000000);
  double mass = h.overflow_fraction;
  for (double dens : h.empirical_density) mass += dens * 0.2;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  // Empirical density hugs x e^-x bin by bin; the realized circuit freezes
  // O(2^-n/2) deviations per bin, so this stays looser than the KS checks.
  for (int i = 0; i < 50; ++i)
    CHECK(std::abs(h.empirical_density[i] - h.size_biased_reference[i]) < 0.02);
}

TEST_CASE("total variance hand cases") {
  const VarianceDecomposition two_groups = total_variance({{0.0, 0.0}, {1.0, 1.0}});
  CHECK(two_groups.within == 0.0);
  CHECK(two_groups.between == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(two_groups.total == doctest::Approx(0.25).epsilon(1e-15));

  const VarianceDecomposition constant = total_variance({{2.0, 2.0}, {2.0, 2.0, 2.0}});
  CHECK(constant.within == 0.0);
  CHECK(constant.between == 0.0);
  CHECK(constant.total == 0.0);

  CHECK_THROWS_AS(total_variance({{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(total_variance({{1.0, 2.0}, {1.0}}), std::invalid_argument);
}

TEST_CASE("total variance matches the pooled-variance oracle") {
  SplitStream rng(71);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> groups;
    std::vector<double> pooled;
    const int ngroups = 2 + static_cast<int>(rng.next_below(6));
    for (int g = 0; g < ngroups; ++g) {
      const int size = 2 + static_cast<int>(rng.next_below(10));
      std::vector<double> values;
      const double center = rng.next_unit() * 10.0;
      for (int i = 0; i < size; ++i) {
        values.push_back(center + rng.next_unit() * 2.0 - 1.0);
        pooled.push_back(values.back());
      }
      groups.push_back(std::move(values));
    }
    const VarianceDecomposition vd = total_variance(groups);
    CHECK(vd.total == doctest::Approx(vd.within + vd.between).epsilon(1e-15));
    CHECK(std::abs(vd.total - population_variance(pooled)) < 1e-12);
  }
}

TEST_CASE("estimator report csv has the pinned column order") {
  std::vector<EstimatorReportRow> rows{{"c4m2s1", 4, 2, "XEB", 0.5, 0.01, 1000, 0.4, 0.41, 0.05}};
  std::ostringstream os;
  write_estimator_report(os, rows);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header ==
        "circuit_id,n,m,estimator_kind,value,std_error,sample_count,predicted_77,"
        "predicted_77_avg,deviation_bound");
  std::getline(in, row);
  CHECK(row.rfind("c4m2s1,4,2,XEB,0.5,0.01,1000,", 0) == 0);
}
