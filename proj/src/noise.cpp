#include "xeblab/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "xeblab/rng.hpp"
#include "xeblab/simulator.hpp"
#include "xeblab/walsh.hpp"

namespace xeblab {

namespace {

constexpr int kDirectConvolutionCap = 12;  // brute-force route below, Walsh above

void check_rate(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument(std::string(what) + ": rate outside [0,1]");
}

// out(x) = sum_y dist(x^y) kernel(y), the O(4^n) double loop.
std::vector<double> convolve_direct(const std::vector<double>& dist,
                                    const std::vector<double>& kernel) {
  const std::size_t size = dist.size();
  std::vector<double> out(size, 0.0);
  for (std::size_t y = 0; y < size; ++y) {
    const double e = kernel[y];
    if (e == 0.0) continue;
    for (std::size_t x = 0; x < size; ++x) out[x] += dist[x ^ y] * e;
  }
  return out;
}

// Spectral route: pointwise product of spectra, 2^n \hat D(S) \hat E(S).
std::vector<double> convolve_walsh(const std::vector<double>& dist,
                                   const std::vector<double>& kernel) {
  WalshSpectrum d = walsh_transform(dist);
  const WalshSpectrum e = walsh_transform(kernel);
  const double scale = static_cast<double>(dist.size());
  for (std::size_t s = 0; s < d.coef.size(); ++s) d.coef[s] *= scale * e.coef[s];
  return inverse_walsh(d);
}

std::vector<double> bitflip_kernel(int n, double t) {
  std::vector<double> powers_t(n + 1), powers_1t(n + 1);
  powers_t[0] = powers_1t[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    powers_t[k] = powers_t[k - 1] * t;
    powers_1t[k] = powers_1t[k - 1] * (1.0 - t);
  }
  std::vector<double> kernel(std::size_t{1} << n);
  for (std::size_t y = 0; y < kernel.size(); ++y) {
    const int w = std::popcount(y);
    kernel[y] = powers_t[w] * powers_1t[n - w];
  }
  return kernel;
}

// Roundoff from the butterfly can leave tiny negatives; clamp them so the
// output validates as a distribution.
OutputDistribution finish_distribution(int n, std::vector<double> p) {
  for (double& v : p)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  OutputDistribution out;
  out.n = n;
  out.p = std::move(p);
  out.validate();
  return out;
}

struct FlatGate {
  const GateSpec* gate;
  double rate;
};

// Applies the injected Pauli (code 1..3 for one qubit, 1..15 interpreted as
// a pair of Pauli indices for two) to the gate's target qubits.
void inject(StateVector& sv, const GateSpec& g, int code) {
  if (g.kind == GateSpec::Kind::kOneQubit) {
    sv.apply_pauli(g.q0, code);
  } else {
    const int pa = code >> 2, pb = code & 3;
    if (pa) sv.apply_pauli(g.q0, pa);
    if (pb) sv.apply_pauli(g.q1, pb);
  }
}

struct ResolvedRates {
  std::vector<FlatGate> gates;   // flattened circuit order
  std::vector<double> qubit;     // readout rate per qubit
  double gate_success = 1.0;     // prod over gates of (1 - e_g)
  double readout_success = 1.0;  // prod over qubits of (1 - e_q)
};

ResolvedRates resolve_rates(const NoiseModel& model, const RandomCircuit& circuit) {
  model.validate();
  const GateCounts counts = gate_counts(circuit);
  if (!model.e1.empty() && model.e1.size() != static_cast<std::size_t>(counts.g1))
    throw std::invalid_argument("noise model: e1 list does not match circuit gate count");
  if (!model.e2.empty() && model.e2.size() != static_cast<std::size_t>(counts.g2))
    throw std::invalid_argument("noise model: e2 list does not match circuit gate count");
  if (!model.averaged && ((model.e1.empty() && counts.g1 > 0) ||
                          (model.e2.empty() && counts.g2 > 0)))
    throw std::invalid_argument("noise model: missing rate list and no averaged rates");

  ResolvedRates r;
  r.qubit = model.qubit_rates(circuit.n);
  std::size_t i1 = 0, i2 = 0;
  for (const auto& layer : circuit.layers) {
    for (const auto& g : layer.gates) {
      double rate;
      if (g.kind == GateSpec::Kind::kOneQubit)
        rate = model.e1.empty() ? (*model.averaged)[0] : model.e1[i1++];
      else
        rate = model.e2.empty() ? (*model.averaged)[1] : model.e2[i2++];
      r.gates.push_back({&g, rate});
      r.gate_success *= 1.0 - rate;
    }
  }
  for (double e : r.qubit) r.readout_success *= 1.0 - e;
  return r;
}

}  // namespace

NoiseModel NoiseModel::averaged_rates(double e1bar, double e2bar, double eqbar) {
  NoiseModel m;
  m.averaged = {e1bar, e2bar, eqbar};
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  for (double r : e1) check_rate(r, "noise model e1");
  for (double r : e2) check_rate(r, "noise model e2");
  for (double r : eq) check_rate(r, "noise model eq");
  if (averaged)
    for (double r : *averaged) check_rate(r, "noise model averaged");
}

std::vector<double> NoiseModel::qubit_rates(int n) const {
  if (!eq.empty()) {
    if (eq.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("noise model: eq list does not match qubit count");
    return eq;
  }
  if (!averaged) throw std::invalid_argument("noise model: no readout rates available");
  return std::vector<double>(n, (*averaged)[2]);
}

std::string format_noise_model(const NoiseModel& m) {
  char buf[96];
  std::ostringstream os;
  if (m.averaged) {
    std::snprintf(buf, sizeof buf, "e1=%.17g e2=%.17g eq=%.17g", (*m.averaged)[0],
                  (*m.averaged)[1], (*m.averaged)[2]);
    os << buf;
  }
  auto list = [&](const char* name, const std::vector<double>& v) {
    if (v.empty()) return;
    if (os.tellp() > 0) os << " ";
    os << name << "=[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", v[i]);
      os << buf;
    }
    os << "]";
  };
  list("e1", m.e1);
  list("e2", m.e2);
  list("eq", m.eq);
  return os.str();
}

ToyChannelSpec ToyChannelSpec::flip(double t) {
  ToyChannelSpec s;
  s.flip_rate = t;
  return s;
}

ToyChannelSpec ToyChannelSpec::explicit_errors(std::vector<double> e) {
  ToyChannelSpec s;
  s.error_distribution = std::move(e);
  return s;
}

ToyChannelSpec ToyChannelSpec::flip_mixture(std::vector<std::pair<double, double>> wt) {
  ToyChannelSpec s;
  s.mixture = std::move(wt);
  return s;
}

void ToyChannelSpec::validate(int n) const {
  const int set = (flip_rate ? 1 : 0) + (error_distribution.empty() ? 0 : 1) +
                  (mixture.empty() ? 0 : 1);
  if (set != 1)
    throw std::invalid_argument("toy channel: specify exactly one of flip rate, explicit E, mixture");
  if (flip_rate) check_rate(*flip_rate, "toy channel t");
  if (!error_distribution.empty()) {
    if (error_distribution.size() != (std::size_t{1} << n))
      throw std::invalid_argument("toy channel: E has wrong length");
    try {
      OutputDistribution e;
      e.n = n;
      e.p = error_distribution;
      e.validate(1e-12);
    } catch (const std::domain_error& err) {
      throw std::invalid_argument(std::string("toy channel: ") + err.what());
    }
  }
  if (!mixture.empty()) {
    double total = 0.0;
    for (const auto& [w, t] : mixture) {
      if (!(w >= 0.0)) throw std::invalid_argument("toy channel: negative mixture weight");
      check_rate(t, "toy channel mixture t");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("toy channel: mixture weights do not sum to 1");
  }
}

OutputDistribution mix_with_uniform(const OutputDistribution& dist, double F) {
  if (!(F >= 0.0 && F <= 1.0)) throw std::domain_error("mix_with_uniform: F outside [0,1]");
  dist.validate();
  OutputDistribution out = dist;
  const double u = (1.0 - F) / static_cast<double>(dist.size());
  for (double& v : out.p) v = F * v + u;
  return out;
}

OutputDistribution bitflip_channel(const OutputDistribution& dist, double t) {
  check_rate(t, "bitflip channel t");
  dist.validate();
  if (dist.n <= kDirectConvolutionCap)
    return finish_distribution(dist.n, convolve_direct(dist.p, bitflip_kernel(dist.n, t)));
  WalshSpectrum spec = attenuate(walsh_transform(dist), t);
  return finish_distribution(dist.n, inverse_walsh(spec));
}

OutputDistribution general_channel(const OutputDistribution& dist, const ToyChannelSpec& spec) {
  dist.validate();
  spec.validate(dist.n);
  if (spec.flip_rate) return bitflip_channel(dist, *spec.flip_rate);
  if (!spec.mixture.empty()) {
    // Convolution is linear in E, so a mixture of B_t kernels is the same
    // weighted sum of bitflip outputs.
    std::vector<double> acc(dist.size(), 0.0);
    for (const auto& [w, t] : spec.mixture) {
      const OutputDistribution part = bitflip_channel(dist, t);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * part.p[i];
    }
    return finish_distribution(dist.n, std::move(acc));
  }
  if (dist.n <= kDirectConvolutionCap)
    return finish_distribution(dist.n, convolve_direct(dist.p, spec.error_distribution));
  return finish_distribution(dist.n, convolve_walsh(dist.p, spec.error_distribution));
}

OutputDistribution readout_channel(const OutputDistribution& dist,
                                   const std::vector<double>& eq) {
  dist.validate();
  if (eq.size() != static_cast<std::size_t>(dist.n))
    throw std::invalid_argument("readout channel: need one rate per qubit");
  for (double e : eq) check_rate(e, "readout channel");
  // The product error law factorizes, so convolve one qubit at a time.
  std::vector<double> cur = dist.p;
  std::vector<double> next(cur.size());
  for (int q = 0; q < dist.n; ++q) {
    const double e = eq[q];
    const std::size_t bit = std::size_t{1} << (dist.n - 1 - q);
    for (std::size_t x = 0; x < cur.size(); ++x)
      next[x] = (1.0 - e) * cur[x] + e * cur[x ^ bit];
    cur.swap(next);
  }
  return finish_distribution(dist.n, std::move(cur));
}

OutputDistribution three_part_model(const OutputDistribution& dist, const NoiseModel& model,
                                    const RandomCircuit& circuit) {
  dist.validate();
  if (dist.n != circuit.n)
    throw std::invalid_argument("three_part_model: distribution/circuit size mismatch");
  const ResolvedRates rates = resolve_rates(model, circuit);
  const double f_gates = rates.gate_success;
  const double p0 = rates.readout_success;
  const double f = f_gates * p0;
  const OutputDistribution readout = readout_channel(dist, rates.qubit);

  // F D + (F_g - F) N_RO + (1 - F_g) U with N_RO the normalized y != 0 part
  // of the readout convolution; written via (F_g - F) N_RO = F_g (R - p0 D)
  // so the no-readout-error edge needs no special case.
  OutputDistribution out;
  out.n = dist.n;
  out.p.resize(dist.size());
  const double uniform = (1.0 - f_gates) / static_cast<double>(dist.size());
  for (std::size_t i = 0; i < out.p.size(); ++i)
    out.p[i] = f * dist.p[i] + f_gates * (readout.p[i] - p0 * dist.p[i]) + uniform;
  return finish_distribution(out.n, std::move(out.p));
}

SampleSet noisy_sampler(const RandomCircuit& circuit, const NoiseModel& model, std::size_t k,
                        std::uint64_t seed, int threads) {
  if (k < 1) throw std::invalid_argument("noisy_sampler: need k >= 1");
  circuit.validate();
  const ResolvedRates rates = resolve_rates(model, circuit);
  const OutputDistribution ideal = simulate(circuit);
  std::vector<double> cum(ideal.p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    acc += ideal.p[i];
    cum[i] = acc;
  }

  const std::size_t dim = std::size_t{1} << circuit.n;
  const std::size_t gate_count = rates.gates.size();

  // Ideal prefix snapshots let a trajectory fast-forward to its first error.
  const std::size_t snapshot_bytes = (gate_count + 1) * dim * sizeof(std::complex<double>);
  std::vector<std::vector<std::complex<double>>> snapshots;
  if (snapshot_bytes <= (std::size_t{64} << 20)) {
    StateVector sv = StateVector::zero_state(circuit.n);
    snapshots.reserve(gate_count + 1);
    snapshots.push_back(sv.amp);
    for (const auto& fg : rates.gates) {
      sv.apply_gate(*fg.gate);
      snapshots.push_back(sv.amp);
    }
  }

  SampleSet out;
  out.n = circuit.n;
  out.bits.assign(k, 0);
  out.origin = {circuit.id(), format_noise_model(model), seed};
  const SplitStream root(seed);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<std::size_t, int>> errors;
    StateVector sv;
    sv.n = circuit.n;
    for (std::size_t traj = begin; traj < end; ++traj) {
      SplitStream rng = root.split(traj);
      errors.clear();
      for (std::size_t j = 0; j < gate_count; ++j) {
        if (rates.gates[j].rate > 0.0 && rng.next_bernoulli(rates.gates[j].rate)) {
          const bool two = rates.gates[j].gate->kind == GateSpec::Kind::kTwoQubit;
          const int code = static_cast<int>(rng.next_below(two ? 15 : 3)) + 1;
          errors.emplace_back(j, code);
        }
      }

      std::uint64_t bits;
      const double u = rng.next_unit();
      if (errors.empty()) {
        const auto it = std::upper_bound(cum.begin(), cum.end(), u * acc);
        bits = static_cast<std::uint64_t>(
            std::min<std::ptrdiff_t>(it - cum.begin(),
                                     static_cast<std::ptrdiff_t>(cum.size()) - 1));
      } else {
        std::size_t next_gate = 0;
        std::size_t error_idx = 0;
        if (!snapshots.empty()) {
          const std::size_t first = errors.front().first;
          sv.amp = snapshots[first + 1];
          inject(sv, *rates.gates[first].gate, errors.front().second);
          next_gate = first + 1;
          error_idx = 1;
        } else {
          sv = StateVector::zero_state(circuit.n);
        }
        for (std::size_t j = next_gate; j < gate_count; ++j) {
          sv.apply_gate(*rates.gates[j].gate);
          if (error_idx < errors.size() && errors[error_idx].first == j) {
            inject(sv, *rates.gates[j].gate, errors[error_idx].second);
            ++error_idx;
          }
        }
        const double target = u * sv.norm_sq();
        double run = 0.0;
        std::size_t pick = dim;
        std::size_t last_nonzero = 0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double w = std::norm(sv.amp[i]);
          if (w > 0.0) last_nonzero = i;
          run += w;
          if (run > target) {
            pick = i;
            break;
          }
        }
        if (pick == dim) pick = last_nonzero;  // u at the rounding boundary
        bits = pick;
      }

      for (int q = 0; q < circuit.n; ++q)
        if (rates.qubit[q] > 0.0 && rng.next_bernoulli(rates.qubit[q]))
          bits ^= std::uint64_t{1} << (circuit.n - 1 - q);
      out.bits[traj] = bits;
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(k)));
  if (workers == 1) {
    run_range(0, k);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = k * w / workers;
      const std::size_t end = k * (w + 1) / workers;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace xeblab
