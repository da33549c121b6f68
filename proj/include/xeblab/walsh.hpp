#pragma once

#include <iosfwd>
#include <vector>

#include "xeblab/distribution.hpp"

namespace xeblab {

// Normalization convention of a spectrum. kAnalysis puts the 2^-n factor on
// the forward transform, so probability distributions have coef[0] = 2^-n
// and Parseval reads sum_S coef(S)^2 = 2^-n sum_x f(x)^2.
enum class WalshNorm { kAnalysis };

// Walsh coefficients indexed by subset mask; cube coordinate i (qubit i)
// lives at bit n-1-i, matching the distribution index convention.
struct WalshSpectrum {
  int n = 0;
  std::vector<double> coef;
  WalshNorm norm = WalshNorm::kAnalysis;

  std::size_t size() const { return coef.size(); }
};

// Forward transform of a real function given as a 2^n array:
// coef(S) = 2^-n sum_x f(x) W_S(x) with W_S(x) = prod_{i in S} (1-2x_i).
// Fast butterfly, O(n 2^n).
WalshSpectrum walsh_transform(const std::vector<double>& f);
WalshSpectrum walsh_transform(const OutputDistribution& d);

// f(x) = sum_S coef(S) W_S(x); exact inverse of walsh_transform.
std::vector<double> inverse_walsh(const WalshSpectrum& spec);

// Noise attenuation law: multiplies coef(S) by (1-2t)^|S|.
WalshSpectrum attenuate(const WalshSpectrum& spec, double t);

struct DegreeTruncation {
  std::vector<double> raw;        // inverse of the spectrum zeroed above degree d
  OutputDistribution repaired;    // raw clipped at 0 and renormalized
};
// Low-degree truncation of a spectrum, 0 <= d <= n.
DegreeTruncation degree_truncate(const WalshSpectrum& spec, int d);

// Noise-stability correlation between D and its bitflip-noisy version:
// sum_{S != empty} coef(S)^2 (1-2t)^|S| / sum_{S != empty} coef(S)^2.
// Throws std::domain_error for the uniform distribution (zero variance).
double noise_correlation(const OutputDistribution& d, double t);

// CSV export with columns subset_mask (hex), degree, coefficient.
void write_spectrum_csv(std::ostream& out, const WalshSpectrum& spec);

}  // namespace xeblab
