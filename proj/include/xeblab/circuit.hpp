#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xeblab {

// Hard limit from packing bitstrings into 64-bit words.
inline constexpr int kMaxCircuitQubits = 64;
// Default cap for anything that touches a dense statevector.
inline constexpr int kDefaultQubitCap = 24;

enum class OneQubitSet { kHaar, kIdentity, kHadamard };
enum class TwoQubitSet { kCz, kNone };
// Per-cycle coupling layout. Random disjoint pairings scramble at much
// lower depth than the nearest-neighbor line (line circuits need m ~ 3n
// before the output reaches Porter-Thomas statistics), so they are the
// default; the line remains available for geometry studies.
enum class Connectivity { kRandomPairs, kLine };

struct GateConfig {
  OneQubitSet one_qubit = OneQubitSet::kHaar;
  TwoQubitSet two_qubit = TwoQubitSet::kCz;
  Connectivity connectivity = Connectivity::kRandomPairs;
};

GateConfig parse_gate_config(const std::string& one_qubit, const std::string& two_qubit,
                             const std::string& layout = "random");
std::string format_one_qubit_set(OneQubitSet s);
std::string format_two_qubit_set(TwoQubitSet s);
std::string format_connectivity(Connectivity c);

// A single gate: a 2x2 or 4x4 complex unitary acting on one or two qubits.
// Matrices are row-major in the basis ordered by (q0, q1) bits, q0 first.
struct GateSpec {
  enum class Kind { kOneQubit, kTwoQubit };
  Kind kind = Kind::kOneQubit;
  int q0 = 0;
  int q1 = -1;
  std::vector<std::complex<double>> u;

  int dim() const { return kind == Kind::kOneQubit ? 2 : 4; }
  // Checks target indices and unitarity (U U^dag = I to 1e-12).
  void validate(int n) const;
};

struct GateLayer {
  bool two_qubit = false;
  std::vector<GateSpec> gates;
};

// Layered random circuit: m cycles of (one-qubit layer, two-qubit layer on
// disjoint pairs) closed by one trailing one-qubit layer, so the layer list
// has 2m+1 entries and exactly n(m+1) one-qubit gates.
struct RandomCircuit {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  GateConfig config;
  std::vector<GateLayer> layers;

  std::string id() const;
  // Checks layer structure, gate counts and per-layer pair disjointness.
  void validate() const;
};

// Deterministic generation: stream splitting is per layer and per gate, so
// the same (n, m, seed, config) yields a bit-identical circuit.
RandomCircuit generate_random_circuit(int n, int m, std::uint64_t seed,
                                      const GateConfig& config = {},
                                      int qubit_cap = kDefaultQubitCap);

struct GateCounts {
  long long g1 = 0;
  long long g2 = 0;
};
GateCounts gate_counts(const RandomCircuit& c);

// Exact inverse: layers reversed, every unitary conjugate-transposed.
RandomCircuit inverse_circuit(const RandomCircuit& c);

// Line-oriented text format: header "n=<int> m=<int> seed=<int>", then one
// gate per line, "G1 q=<i> U=<8 floats>" / "G2 q=<i>,<j> U=<32 floats>",
// floats with 17 significant digits (lossless for doubles).
void write_circuit(std::ostream& out, const RandomCircuit& c);
RandomCircuit read_circuit(std::istream& in);

}  // namespace xeblab
