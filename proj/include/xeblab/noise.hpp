#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xeblab/circuit.hpp"
#include "xeblab/distribution.hpp"

namespace xeblab {

// Per-component error rates: per-gate lists (in circuit gate order) and/or
// an averaged triple used for any component without an explicit rate.
struct NoiseModel {
  std::vector<double> e1;  // one-qubit gate rates, flattened circuit order
  std::vector<double> e2;  // two-qubit gate rates, flattened circuit order
  std::vector<double> eq;  // per-qubit readout rates
  std::optional<std::array<double, 3>> averaged;  // {e1bar, e2bar, eqbar}

  static NoiseModel averaged_rates(double e1bar, double e2bar, double eqbar);
  void validate() const;
  // Readout rate per qubit, resolved from the explicit list or the average.
  std::vector<double> qubit_rates(int n) const;
};

std::string format_noise_model(const NoiseModel& m);

// Toy channel: exactly one of a single flip rate t (the B_t channel), an
// explicit error distribution E over the 2^n strings, or a finite mixture
// of flip-rate channels {(w_j, t_j)} with weights summing to 1.
struct ToyChannelSpec {
  std::optional<double> flip_rate;
  std::vector<double> error_distribution;
  std::vector<std::pair<double, double>> mixture;

  static ToyChannelSpec flip(double t);
  static ToyChannelSpec explicit_errors(std::vector<double> e);
  static ToyChannelSpec flip_mixture(std::vector<std::pair<double, double>> wt);
  void validate(int n) const;
};

// F D + (1-F) U, pointwise.
OutputDistribution mix_with_uniform(const OutputDistribution& dist, double F);

// N_t(D)(x) = sum_y D(x^y) t^|y| (1-t)^(n-|y|). Direct O(4^n) convolution
// for n <= 12; Walsh attenuation route above that.
OutputDistribution bitflip_channel(const OutputDistribution& dist, double t);

// N(D)(x) = sum_y D(x^y) E(y) for the E encoded by `spec`.
OutputDistribution general_channel(const OutputDistribution& dist, const ToyChannelSpec& spec);

// Convolution with the independent per-qubit readout error law
// E(y) = prod_{i: y_i=1} e_i prod_{i: y_i=0} (1-e_i), y = 0 term included.
OutputDistribution readout_channel(const OutputDistribution& dist,
                                   const std::vector<double>& eq);

// Three-part noisy distribution F D + (F_g - F) N_RO + (1 - F_g) U, where F
// and F_g are the per-component success products with and without the
// readout factors and N_RO is the renormalized y != 0 readout part.
OutputDistribution three_part_model(const OutputDistribution& dist, const NoiseModel& model,
                                    const RandomCircuit& circuit);

// Monte-Carlo trajectory sampler: after each gate, with probability e_g a
// uniformly random non-identity Pauli hits that gate's qubit(s); after
// measurement each bit flips independently with its readout rate. Output is
// deterministic for a fixed seed and independent of the thread count.
SampleSet noisy_sampler(const RandomCircuit& circuit, const NoiseModel& model, std::size_t k,
                        std::uint64_t seed, int threads = 1);

}  // namespace xeblab
