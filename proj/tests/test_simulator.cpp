#include <stdexcept>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "xeblab/circuit.hpp"
#include "xeblab/rng.hpp"
#include "xeblab/simulator.hpp"

using namespace xeblab;

TEST_CASE("identity circuit leaves the zero state") {
  const GateConfig gc = parse_gate_config("identity", "cz");
  const OutputDistribution d = simulate(generate_random_circuit(3, 0, 1, gc));
  CHECK(d.p[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < d.p.size(); ++i) CHECK(d.p[i] == 0.0);
}

TEST_CASE("single Hadamard splits the mass") {
  const GateConfig gc = parse_gate_config("hadamard", "cz");
  const OutputDistribution d = simulate(generate_random_circuit(1, 0, 1, gc));
  CHECK(d.p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.p[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("output distribution is normalized: mean of 2^n D over uniform x is 1") {
  const OutputDistribution d = simulate(generate_random_circuit(12, 14, 3));
  double sum = 0.0;
  for (double v : d.p) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("norm is preserved after every gate") {
  const RandomCircuit c = generate_random_circuit(8, 10, 21);
  StateVector sv = StateVector::zero_state(8);
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates) {
      sv.apply_gate(g);
      CHECK(std::abs(sv.norm_sq() - 1.0) < 1e-10);
    }
}

TEST_CASE("gate order inside a disjoint layer does not matter") {
  RandomCircuit c = generate_random_circuit(7, 6, 13);
  const OutputDistribution base = simulate(c);
  for (auto& layer : c.layers) std::reverse(layer.gates.begin(), layer.gates.end());
  const OutputDistribution permuted = simulate(c);
  CHECK(oracles::max_abs_diff(base.p, permuted.p) < 1e-12);
}

TEST_CASE("circuit followed by its inverse returns to the zero state") {
  const RandomCircuit c = generate_random_circuit(6, 8, 4);
  const RandomCircuit inv = inverse_circuit(c);
  StateVector sv = StateVector::zero_state(6);
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates) sv.apply_gate(g);
  for (const auto& layer : inv.layers)
    for (const auto& g : layer.gates) sv.apply_gate(g);
  const OutputDistribution d = sv.measure_probs();
  CHECK(std::abs(d.p[0] - 1.0) < 1e-10);
}

TEST_CASE("statevector cap is enforced") {
  const RandomCircuit big = generate_random_circuit(26, 2, 1, {}, kMaxCircuitQubits);
  CHECK_THROWS_AS(simulate(big), std::out_of_range);
}

TEST_CASE("sampling a point mass repeats the same string") {
  const SampleSet s = sample(OutputDistribution::point_mass(3, 0), 5, 9);
  REQUIRE(s.size() == 5);
  for (auto b : s.bits) CHECK(b == 0);
}

TEST_CASE("sampling the uniform distribution matches its frequencies") {
  const SampleSet s = sample(OutputDistribution::uniform(2), 1000000, 31);
  double freq[4] = {0, 0, 0, 0};
  for (auto b : s.bits) freq[b] += 1.0;
  for (double f : freq) CHECK(std::abs(f / 1e6 - 0.25) < 0.002);  // 3 sigma ~ 0.0013
}

TEST_CASE("sampling is deterministic per seed") {
  const OutputDistribution d = simulate(generate_random_circuit(5, 4, 2));
  CHECK(sample(d, 1000, 77).bits == sample(d, 1000, 77).bits);
  CHECK(sample(d, 1000, 77).bits != sample(d, 1000, 78).bits);
}

TEST_CASE("empirical sample frequencies converge to the distribution") {
  const OutputDistribution d = simulate(generate_random_circuit(4, 4, 8));
  const SampleSet s = sample(d, 200000, 5);
  std::vector<double> freq(d.size(), 0.0);
  for (auto b : s.bits) freq[b] += 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double se = std::sqrt(d.p[i] * (1.0 - d.p[i]) / 2e5);
    CHECK(std::abs(freq[i] / 2e5 - d.p[i]) < 4.0 * se + 1e-5);
  }
}

TEST_CASE("porter-thomas diagnostics on the uniform distribution") {
  const PorterThomasDiagnostics diag = porter_thomas_diagnostics(OutputDistribution::uniform(8));
  CHECK(diag.first_moment == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(diag.second_moment == doctest::Approx(1.0).epsilon(1e-12));
  // All mass at z=1, so the gap to 1 - e^-1 is the KS distance: clearly
  // fails an Exp(1) test.
  CHECK(diag.ks_exp1 == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("ideal porter-thomas reference has moments 1 and 2") {
  SplitStream rng(3);
  const OutputDistribution d = oracles::random_distribution(14, rng);
  const PorterThomasDiagnostics diag = porter_thomas_diagnostics(d);
  CHECK(diag.first_moment == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(diag.second_moment == doctest::Approx(2.0).epsilon(0.05));
  CHECK(diag.ks_exp1 < 0.02);
}

TEST_CASE("random circuits reach porter-thomas statistics") {
  double mean_m2 = 0.0;
  const int circuits = 5;
  for (int i = 0; i < circuits; ++i) {
    const OutputDistribution d = simulate(generate_random_circuit(10, 12, 50 + i));
    mean_m2 += porter_thomas_diagnostics(d).second_moment;
  }
  mean_m2 /= circuits;
  CHECK(mean_m2 > 1.8);
  CHECK(mean_m2 < 2.2);
}

TEST_CASE("sample archive round trips") {
  const OutputDistribution d = simulate(generate_random_circuit(5, 2, 6));
  const SampleSet s = sample(d, 64, 11, Provenance{"c5m2s6", "", 0});
  std::ostringstream os;
  write_sample_archive(os, s);
  std::istringstream in(os.str());
  const SampleSet back = read_sample_archive(in);
  CHECK(back.n == s.n);
  CHECK(back.bits == s.bits);
}
