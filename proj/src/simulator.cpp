#include "xeblab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xeblab/rng.hpp"
#include "xeblab/stats.hpp"

namespace xeblab {

namespace {
using complexd = std::complex<double>;
}

StateVector StateVector::zero_state(int n) {
  // Memory sanity bound (2^28 amplitudes = 4 GiB); simulate() applies the
  // stricter configurable cap.
  if (n < 1 || n > 28)
    throw std::out_of_range("statevector: qubit count exceeds the dense bound");
  StateVector sv;
  sv.n = n;
  sv.amp.assign(std::size_t{1} << n, 0.0);
  sv.amp[0] = 1.0;
  return sv;
}

void StateVector::apply_gate(const GateSpec& g) {
  const std::size_t dim = amp.size();
  if (g.kind == GateSpec::Kind::kOneQubit) {
    const std::size_t bit = std::size_t{1} << (n - 1 - g.q0);
    const complexd u00 = g.u[0], u01 = g.u[1], u10 = g.u[2], u11 = g.u[3];
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const complexd a0 = amp[i], a1 = amp[i | bit];
      amp[i] = u00 * a0 + u01 * a1;
      amp[i | bit] = u10 * a0 + u11 * a1;
    }
    return;
  }

  const std::size_t b0 = std::size_t{1} << (n - 1 - g.q0);
  const std::size_t b1 = std::size_t{1} << (n - 1 - g.q1);
  bool diagonal = true;
  for (int r = 0; r < 4 && diagonal; ++r)
    for (int c = 0; c < 4; ++c)
      if (r != c && g.u[static_cast<std::size_t>(r) * 4 + c] != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    const complexd d0 = g.u[0], d1 = g.u[5], d2 = g.u[10], d3 = g.u[15];
    for (std::size_t i = 0; i < dim; ++i) {
      const int sub = ((i & b0) ? 2 : 0) | ((i & b1) ? 1 : 0);
      switch (sub) {
        case 0: amp[i] *= d0; break;
        case 1: amp[i] *= d1; break;
        case 2: amp[i] *= d2; break;
        case 3: amp[i] *= d3; break;
      }
    }
    return;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & b0) || (i & b1)) continue;
    const std::size_t i00 = i, i01 = i | b1, i10 = i | b0, i11 = i | b0 | b1;
    const complexd a00 = amp[i00], a01 = amp[i01], a10 = amp[i10], a11 = amp[i11];
    amp[i00] = g.u[0] * a00 + g.u[1] * a01 + g.u[2] * a10 + g.u[3] * a11;
    amp[i01] = g.u[4] * a00 + g.u[5] * a01 + g.u[6] * a10 + g.u[7] * a11;
    amp[i10] = g.u[8] * a00 + g.u[9] * a01 + g.u[10] * a10 + g.u[11] * a11;
    amp[i11] = g.u[12] * a00 + g.u[13] * a01 + g.u[14] * a10 + g.u[15] * a11;
  }
}

void StateVector::apply_pauli(int q, int pauli) {
  const std::size_t bit = std::size_t{1} << (n - 1 - q);
  const std::size_t dim = amp.size();
  switch (pauli) {
    case 1:  // X
      for (std::size_t i = 0; i < dim; ++i)
        if (!(i & bit)) std::swap(amp[i], amp[i | bit]);
      break;
    case 2:  // Y, up to a global phase: swap with sign flip on the |1> arm
      for (std::size_t i = 0; i < dim; ++i)
        if (!(i & bit)) {
          const complexd a0 = amp[i];
          amp[i] = -amp[i | bit];
          amp[i | bit] = a0;
        }
      break;
    case 3:  // Z
      for (std::size_t i = 0; i < dim; ++i)
        if (i & bit) amp[i] = -amp[i];
      break;
    default:
      throw std::invalid_argument("apply_pauli: pauli code must be 1..3");
  }
}

double StateVector::norm_sq() const {
  double s = 0.0;
  for (const complexd& a : amp) s += std::norm(a);
  return s;
}

OutputDistribution StateVector::measure_probs() const {
  OutputDistribution d;
  d.n = n;
  d.p.resize(amp.size());
  for (std::size_t i = 0; i < amp.size(); ++i) d.p[i] = std::norm(amp[i]);
  return d;
}

OutputDistribution simulate(const RandomCircuit& c, int qubit_cap) {
  if (c.n > qubit_cap)
    throw std::out_of_range("simulate: circuit exceeds the statevector cap");
  StateVector sv = StateVector::zero_state(c.n);
  for (const auto& layer : c.layers)
    for (const auto& g : layer.gates) sv.apply_gate(g);
  return sv.measure_probs();
}

SampleSet sample(const OutputDistribution& dist, std::size_t k, std::uint64_t seed,
                 Provenance origin) {
  if (k < 1) throw std::invalid_argument("sample: need k >= 1");
  dist.validate();
  std::vector<double> cum(dist.p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    acc += dist.p[i];
    cum[i] = acc;
  }
  SampleSet s;
  s.n = dist.n;
  s.bits.reserve(k);
  origin.seed = seed;
  s.origin = std::move(origin);
  SplitStream rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const double u = rng.next_unit() * acc;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    s.bits.push_back(static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cum.begin(),
                                 static_cast<std::ptrdiff_t>(cum.size()) - 1)));
  }
  return s;
}

PorterThomasDiagnostics porter_thomas_diagnostics(const OutputDistribution& dist) {
  dist.validate();
  const double scale = static_cast<double>(dist.size());
  std::vector<double> values(dist.p.size());
  for (std::size_t i = 0; i < dist.p.size(); ++i) values[i] = scale * dist.p[i];
  PorterThomasDiagnostics d;
  d.first_moment = mean(values);
  double m2 = 0.0;
  for (double v : values) m2 += v * v;
  d.second_moment = m2 / static_cast<double>(values.size());
  d.ks_exp1 = ks_distance(std::move(values), [](double z) { return 1.0 - std::exp(-z); });
  return d;
}

}  // namespace xeblab
