#include "xeblab/distribution.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace xeblab {

OutputDistribution OutputDistribution::uniform(int n) {
  if (n < 0 || n > 62) throw std::out_of_range("uniform: bad qubit count");
  OutputDistribution d;
  d.n = n;
  d.p.assign(std::size_t{1} << n, 1.0 / static_cast<double>(std::size_t{1} << n));
  return d;
}

OutputDistribution OutputDistribution::point_mass(int n, std::uint64_t x) {
  if (n < 0 || n > 62) throw std::out_of_range("point_mass: bad qubit count");
  if (x >> n) throw std::out_of_range("point_mass: bitstring out of range");
  OutputDistribution d;
  d.n = n;
  d.p.assign(std::size_t{1} << n, 0.0);
  d.p[x] = 1.0;
  return d;
}

void OutputDistribution::validate(double tol) const {
  if (p.size() != (std::size_t{1} << n))
    throw std::domain_error("distribution: size is not 2^n");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::domain_error("distribution: negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::domain_error("distribution: mass does not sum to 1");
}

std::string bits_to_string(std::uint64_t x, int n) {
  std::string s(n, '0');
  for (int i = 0; i < n; ++i)
    if ((x >> (n - 1 - i)) & 1) s[i] = '1';
  return s;
}

std::uint64_t string_to_bits(const std::string& s) {
  std::uint64_t x = 0;
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring: expected only '0'/'1'");
    x = (x << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return x;
}

void write_sample_archive(std::ostream& out, const SampleSet& samples) {
  out << "n=" << samples.n << "\n";
  for (std::uint64_t b : samples.bits) out << bits_to_string(b, samples.n) << "\n";
}

SampleSet read_sample_archive(std::istream& in) {
  SampleSet s;
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
    throw std::invalid_argument("sample archive: missing 'n=<int>' header");
  s.n = std::stoi(line.substr(2));
  if (s.n < 1 || s.n > 62) throw std::invalid_argument("sample archive: bad qubit count");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (static_cast<int>(line.size()) != s.n)
      throw std::invalid_argument("sample archive: bitstring of wrong length");
    s.bits.push_back(string_to_bits(line));
  }
  return s;
}

}  // namespace xeblab
