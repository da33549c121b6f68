#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "xeblab/circuit.hpp"
#include "xeblab/distribution.hpp"

namespace xeblab {

// Dense statevector on n qubits; amplitude index convention matches
// OutputDistribution (qubit 0 is the most significant bit).
struct StateVector {
  int n = 0;
  std::vector<std::complex<double>> amp;

  static StateVector zero_state(int n);
  void apply_gate(const GateSpec& g);
  // pauli: 1 = X, 2 = Y, 3 = Z (global phase is dropped for Y).
  void apply_pauli(int q, int pauli);
  double norm_sq() const;
  OutputDistribution measure_probs() const;
};

// Exact Born-rule output distribution of the circuit.
OutputDistribution simulate(const RandomCircuit& c, int qubit_cap = kDefaultQubitCap);

// k i.i.d. draws by inverse CDF over the explicit vector; deterministic for
// a fixed seed.
SampleSet sample(const OutputDistribution& dist, std::size_t k, std::uint64_t seed,
                 Provenance origin = {});

struct PorterThomasDiagnostics {
  double first_moment = 0;   // mean of 2^n p(x) over uniform x (always 1)
  double second_moment = 0;  // mean of (2^n p(x))^2; 2 for ideal Porter-Thomas
  double ks_exp1 = 0;        // KS distance of {2^n p(x)} to Exp(1)
};
PorterThomasDiagnostics porter_thomas_diagnostics(const OutputDistribution& dist);

}  // namespace xeblab
