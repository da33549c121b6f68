#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xeblab {

// Explicit probability vector over the 2^n bitstrings on n qubits.
//
// Index convention used throughout: qubit 0 is the most significant bit, so
// an index read as an n-bit binary number is the bitstring with qubit 0
// leftmost, matching the sample-archive text format.
struct OutputDistribution {
  int n = 0;
  std::vector<double> p;

  static OutputDistribution uniform(int n);
  static OutputDistribution point_mass(int n, std::uint64_t x);

  std::size_t size() const { return p.size(); }
  // Checks nonnegativity and unit total mass. Throws std::domain_error.
  void validate(double tol = 1e-10) const;
};

struct Provenance {
  std::string circuit_id;
  std::string noise;
  std::uint64_t seed = 0;
};

// Ordered list of measured bitstrings, each packed into the low n bits of a
// word under the index convention above.
struct SampleSet {
  int n = 0;
  std::vector<std::uint64_t> bits;
  Provenance origin;

  std::size_t size() const { return bits.size(); }
};

// Text form of one bitstring, qubit 0 leftmost.
std::string bits_to_string(std::uint64_t x, int n);
std::uint64_t string_to_bits(const std::string& s);

// Sample-archive format: first line "n=<int>", then one bitstring per line.
void write_sample_archive(std::ostream& out, const SampleSet& samples);
SampleSet read_sample_archive(std::istream& in);

}  // namespace xeblab
