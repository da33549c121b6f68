#include "xeblab/walsh.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace xeblab {

namespace {

int log2_size(std::size_t size) {
  if (size == 0 || (size & (size - 1)) != 0)
    throw std::invalid_argument("walsh: array length must be a power of two");
  return std::countr_zero(size);
}

// In-place unnormalized butterfly; applying it twice multiplies by 2^n.
void fwht(std::vector<double>& v) {
  const std::size_t size = v.size();
  for (std::size_t len = 1; len < size; len <<= 1) {
    for (std::size_t i = 0; i < size; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j], b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

}  // namespace

WalshSpectrum walsh_transform(const std::vector<double>& f) {
  WalshSpectrum spec;
  spec.n = log2_size(f.size());
  spec.coef = f;
  fwht(spec.coef);
  const double scale = 1.0 / static_cast<double>(f.size());
  for (double& c : spec.coef) c *= scale;
  return spec;
}

WalshSpectrum walsh_transform(const OutputDistribution& d) {
  return walsh_transform(d.p);
}

std::vector<double> inverse_walsh(const WalshSpectrum& spec) {
  if (spec.coef.size() != (std::size_t{1} << spec.n))
    throw std::invalid_argument("walsh: spectrum size is not 2^n");
  std::vector<double> f = spec.coef;
  fwht(f);
  return f;
}

WalshSpectrum attenuate(const WalshSpectrum& spec, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("attenuate: t outside [0,1]");
  WalshSpectrum out = spec;
  const double factor = 1.0 - 2.0 * t;
  std::vector<double> powers(spec.n + 1);
  powers[0] = 1.0;
  for (int k = 1; k <= spec.n; ++k) powers[k] = powers[k - 1] * factor;
  for (std::size_t s = 0; s < out.coef.size(); ++s)
    out.coef[s] *= powers[std::popcount(s)];
  return out;
}

DegreeTruncation degree_truncate(const WalshSpectrum& spec, int d) {
  if (d < 0 || d > spec.n) throw std::out_of_range("degree_truncate: degree outside [0,n]");
  WalshSpectrum low = spec;
  for (std::size_t s = 0; s < low.coef.size(); ++s)
    if (std::popcount(s) > d) low.coef[s] = 0.0;
  DegreeTruncation result;
  result.raw = inverse_walsh(low);

  double mass = 0.0;
  std::vector<double> clipped(result.raw.size());
  for (std::size_t i = 0; i < result.raw.size(); ++i) {
    clipped[i] = result.raw[i] > 0.0 ? result.raw[i] : 0.0;
    mass += clipped[i];
  }
  if (mass <= 0.0)
    throw std::domain_error("degree_truncate: truncation has no positive mass to repair");
  result.repaired.n = spec.n;
  result.repaired.p.resize(clipped.size());
  for (std::size_t i = 0; i < clipped.size(); ++i) result.repaired.p[i] = clipped[i] / mass;
  return result;
}

double noise_correlation(const OutputDistribution& d, double t) {
  if (!(t >= 0.0 && t <= 0.5)) throw std::invalid_argument("noise_correlation: t outside [0,1/2]");
  d.validate();
  const WalshSpectrum spec = walsh_transform(d);
  const double factor = 1.0 - 2.0 * t;
  std::vector<double> powers(spec.n + 1);
  powers[0] = 1.0;
  for (int k = 1; k <= spec.n; ++k) powers[k] = powers[k - 1] * factor;
  double num = 0.0, den = 0.0;
  for (std::size_t s = 1; s < spec.coef.size(); ++s) {
    const double w = spec.coef[s] * spec.coef[s];
    num += w * powers[std::popcount(s)];
    den += w;
  }
  if (den <= 0.0)
    throw std::domain_error("noise_correlation: undefined for the uniform distribution");
  return num / den;
}

void write_spectrum_csv(std::ostream& out, const WalshSpectrum& spec) {
  out << "subset_mask,degree,coefficient\n";
  char buf[48];
  for (std::size_t s = 0; s < spec.coef.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%zx,%d,%.17g\n", s, std::popcount(s), spec.coef[s]);
    out << buf;
  }
}

}  // namespace xeblab
