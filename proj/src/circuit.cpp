#include "xeblab/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xeblab/rng.hpp"

namespace xeblab {

namespace {

using complexd = std::complex<double>;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Haar-random U(2) via the Hurwitz parameterization: with u1..u4 uniform on
// [0,1), alpha/psi/chi are uniform angles and theta = asin(sqrt(u4)), i.e.
// sin^2(theta) is uniform, which is exactly the Haar weight.
std::vector<complexd> haar_one_qubit(SplitStream& rng) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const double alpha = tau * rng.next_unit();
  const double psi = tau * rng.next_unit();
  const double chi = tau * rng.next_unit();
  const double theta = std::asin(std::sqrt(rng.next_unit()));
  const double c = std::cos(theta), s = std::sin(theta);
  const complexd phase = std::polar(1.0, alpha);
  return {phase * std::polar(c, psi), phase * std::polar(s, chi),
          phase * -std::polar(s, -chi), phase * std::polar(c, -psi)};
}

std::vector<complexd> identity_gate(int dim) {
  std::vector<complexd> u(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) u[static_cast<std::size_t>(i) * dim + i] = 1.0;
  return u;
}

std::vector<complexd> hadamard_gate() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h, h, -h};
}

std::vector<complexd> cz_gate() {
  auto u = identity_gate(4);
  u[15] = -1.0;
  return u;
}

GateSpec make_one_qubit(int q, OneQubitSet set, SplitStream& rng) {
  GateSpec g;
  g.kind = GateSpec::Kind::kOneQubit;
  g.q0 = q;
  switch (set) {
    case OneQubitSet::kHaar: g.u = haar_one_qubit(rng); break;
    case OneQubitSet::kIdentity: g.u = identity_gate(2); break;
    case OneQubitSet::kHadamard: g.u = hadamard_gate(); break;
  }
  return g;
}

}  // namespace

GateConfig parse_gate_config(const std::string& one_qubit, const std::string& two_qubit,
                             const std::string& layout) {
  GateConfig c;
  if (one_qubit == "haar") c.one_qubit = OneQubitSet::kHaar;
  else if (one_qubit == "identity") c.one_qubit = OneQubitSet::kIdentity;
  else if (one_qubit == "hadamard") c.one_qubit = OneQubitSet::kHadamard;
  else throw std::invalid_argument("gate config: unknown one-qubit set '" + one_qubit + "'");
  if (two_qubit == "cz") c.two_qubit = TwoQubitSet::kCz;
  else if (two_qubit == "none") c.two_qubit = TwoQubitSet::kNone;
  else throw std::invalid_argument("gate config: unknown two-qubit set '" + two_qubit + "'");
  if (layout == "random") c.connectivity = Connectivity::kRandomPairs;
  else if (layout == "line") c.connectivity = Connectivity::kLine;
  else throw std::invalid_argument("gate config: unknown layout '" + layout + "'");
  return c;
}

std::string format_one_qubit_set(OneQubitSet s) {
  switch (s) {
    case OneQubitSet::kHaar: return "haar";
    case OneQubitSet::kIdentity: return "identity";
    case OneQubitSet::kHadamard: return "hadamard";
  }
  return "?";
}

std::string format_two_qubit_set(TwoQubitSet s) {
  return s == TwoQubitSet::kCz ? "cz" : "none";
}

std::string format_connectivity(Connectivity c) {
  return c == Connectivity::kRandomPairs ? "random" : "line";
}

void GateSpec::validate(int n) const {
  const int d = dim();
  if (u.size() != static_cast<std::size_t>(d) * d)
    throw std::invalid_argument("gate: matrix size does not match arity");
  if (q0 < 0 || q0 >= n) throw std::out_of_range("gate: qubit index out of range");
  if (kind == Kind::kTwoQubit) {
    if (q1 < 0 || q1 >= n) throw std::out_of_range("gate: qubit index out of range");
    if (q1 == q0) throw std::invalid_argument("gate: two-qubit gate needs distinct qubits");
  }
  // U U^dag = I to 1e-12.
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      complexd acc = 0.0;
      for (int k = 0; k < d; ++k)
        acc += u[static_cast<std::size_t>(r) * d + k] *
               std::conj(u[static_cast<std::size_t>(c) * d + k]);
      const complexd want = (r == c) ? complexd{1.0, 0.0} : complexd{0.0, 0.0};
      if (std::abs(acc - want) > 1e-12)
        throw std::invalid_argument("gate: matrix is not unitary");
    }
  }
}

std::string RandomCircuit::id() const {
  std::ostringstream os;
  os << "c" << n << "m" << m << "s" << seed;
  return os.str();
}

void RandomCircuit::validate() const {
  if (n < 1 || n > kMaxCircuitQubits) throw std::out_of_range("circuit: qubit count out of range");
  long long one_qubit_layers = 0, g1 = 0, g2 = 0;
  for (const auto& layer : layers) {
    std::uint64_t used = 0;
    if (!layer.two_qubit) {
      ++one_qubit_layers;
      if (layer.gates.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("circuit: one-qubit layer is not full");
    }
    for (const auto& g : layer.gates) {
      g.validate(n);
      if (layer.two_qubit != (g.kind == GateSpec::Kind::kTwoQubit))
        throw std::invalid_argument("circuit: gate arity does not match its layer");
      const std::uint64_t mask = (std::uint64_t{1} << g.q0) |
          (g.kind == GateSpec::Kind::kTwoQubit ? (std::uint64_t{1} << g.q1) : 0);
      if (used & mask)
        throw std::invalid_argument("circuit: qubit reused inside a layer");
      used |= mask;
      (g.kind == GateSpec::Kind::kOneQubit ? g1 : g2) += 1;
    }
  }
  if (one_qubit_layers != m + 1)
    throw std::invalid_argument("circuit: expected m+1 one-qubit layers");
  if (g1 != static_cast<long long>(n) * (m + 1))
    throw std::invalid_argument("circuit: one-qubit gate count != n(m+1)");
  if (2 * g2 > static_cast<long long>(n) * m)
    throw std::invalid_argument("circuit: two-qubit gate count exceeds nm/2");
}

RandomCircuit generate_random_circuit(int n, int m, std::uint64_t seed,
                                      const GateConfig& config, int qubit_cap) {
  if (qubit_cap > kMaxCircuitQubits) qubit_cap = kMaxCircuitQubits;
  if (n < 1 || n > qubit_cap) throw std::out_of_range("generate_random_circuit: n out of range");
  if (m < 0 || m % 2 != 0)
    throw std::out_of_range("generate_random_circuit: m must be a nonnegative even integer");

  RandomCircuit c;
  c.n = n;
  c.m = m;
  c.seed = seed;
  c.config = config;
  SplitStream root(seed);

  int layer_index = 0;
  auto one_qubit_layer = [&] {
    GateLayer layer;
    layer.two_qubit = false;
    SplitStream layer_rng = root.split(layer_index++);
    for (int q = 0; q < n; ++q) {
      SplitStream gate_rng = layer_rng.split(q);
      layer.gates.push_back(make_one_qubit(q, config.one_qubit, gate_rng));
    }
    c.layers.push_back(std::move(layer));
  };

  // Coupled pairs per cycle: either a fresh random disjoint pairing drawn
  // from the layer's stream, or line neighbors alternating even pairs
  // (0,1),(2,3),... with odd pairs (1,2),(3,4),...
  auto two_qubit_layer = [&](int cycle) {
    GateLayer layer;
    layer.two_qubit = true;
    SplitStream layer_rng = root.split(layer_index++);
    if (config.two_qubit == TwoQubitSet::kCz) {
      std::vector<std::pair<int, int>> pairs;
      if (config.connectivity == Connectivity::kRandomPairs) {
        std::vector<int> order(n);
        for (int q = 0; q < n; ++q) order[q] = q;
        for (int i = n - 1; i > 0; --i)
          std::swap(order[i], order[layer_rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
        for (int i = 0; i + 1 < n; i += 2) pairs.emplace_back(order[i], order[i + 1]);
      } else {
        for (int q = cycle % 2; q + 1 < n; q += 2) pairs.emplace_back(q, q + 1);
      }
      for (const auto& [qa, qb] : pairs) {
        GateSpec g;
        g.kind = GateSpec::Kind::kTwoQubit;
        g.q0 = qa;
        g.q1 = qb;
        g.u = cz_gate();
        layer.gates.push_back(std::move(g));
      }
    }
    c.layers.push_back(std::move(layer));
  };

  for (int cycle = 0; cycle < m; ++cycle) {
    one_qubit_layer();
    two_qubit_layer(cycle);
  }
  one_qubit_layer();
  c.validate();
  return c;
}

GateCounts gate_counts(const RandomCircuit& c) {
  GateCounts counts;
  for (const auto& layer : c.layers)
    (layer.two_qubit ? counts.g2 : counts.g1) += static_cast<long long>(layer.gates.size());
  return counts;
}

RandomCircuit inverse_circuit(const RandomCircuit& c) {
  RandomCircuit inv;
  inv.n = c.n;
  inv.m = c.m;
  inv.seed = c.seed;
  inv.config = c.config;
  for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it) {
    GateLayer layer;
    layer.two_qubit = it->two_qubit;
    for (const auto& g : it->gates) {
      GateSpec h = g;
      const int d = g.dim();
      for (int r = 0; r < d; ++r)
        for (int col = 0; col < d; ++col)
          h.u[static_cast<std::size_t>(r) * d + col] =
              std::conj(g.u[static_cast<std::size_t>(col) * d + r]);
      layer.gates.push_back(std::move(h));
    }
    inv.layers.push_back(std::move(layer));
  }
  return inv;
}

void write_circuit(std::ostream& out, const RandomCircuit& c) {
  out << "n=" << c.n << " m=" << c.m << " seed=" << c.seed << "\n";
  for (const auto& layer : c.layers) {
    for (const auto& g : layer.gates) {
      if (g.kind == GateSpec::Kind::kOneQubit)
        out << "G1 q=" << g.q0 << " U=";
      else
        out << "G2 q=" << g.q0 << "," << g.q1 << " U=";
      for (std::size_t i = 0; i < g.u.size(); ++i) {
        if (i) out << " ";
        out << format_double(g.u[i].real()) << " " << format_double(g.u[i].imag());
      }
      out << "\n";
    }
  }
}

RandomCircuit read_circuit(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("circuit: empty input");
  RandomCircuit c;
  {
    std::uint64_t seed = 0;
    int n = 0, m = 0;
    if (std::sscanf(line.c_str(), "n=%d m=%d seed=%llu", &n, &m,
                    reinterpret_cast<unsigned long long*>(&seed)) != 3)
      throw std::invalid_argument("circuit: bad header '" + line + "'");
    c.n = n;
    c.m = m;
    c.seed = seed;
  }

  std::vector<GateSpec> gates;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, field;
    ls >> tag >> field;
    GateSpec g;
    if (tag == "G1") {
      g.kind = GateSpec::Kind::kOneQubit;
      if (std::sscanf(field.c_str(), "q=%d", &g.q0) != 1)
        throw std::invalid_argument("circuit: bad G1 line '" + line + "'");
    } else if (tag == "G2") {
      g.kind = GateSpec::Kind::kTwoQubit;
      if (std::sscanf(field.c_str(), "q=%d,%d", &g.q0, &g.q1) != 2)
        throw std::invalid_argument("circuit: bad G2 line '" + line + "'");
    } else {
      throw std::invalid_argument("circuit: unknown gate tag '" + tag + "'");
    }
    std::string ufield;
    ls >> ufield;
    if (ufield.rfind("U=", 0) != 0)
      throw std::invalid_argument("circuit: missing U= on line '" + line + "'");
    const int entries = g.kind == GateSpec::Kind::kOneQubit ? 4 : 16;
    std::vector<double> vals;
    vals.push_back(std::stod(ufield.substr(2)));
    double v;
    while (ls >> v) vals.push_back(v);
    if (vals.size() != static_cast<std::size_t>(2 * entries))
      throw std::invalid_argument("circuit: wrong float count on line '" + line + "'");
    for (int i = 0; i < entries; ++i) g.u.emplace_back(vals[2 * i], vals[2 * i + 1]);
    gates.push_back(std::move(g));
  }

  // Rebuild layers: runs of G1 gates split into full layers of n, maximal
  // runs of G2 gates form one two-qubit layer each.
  std::size_t i = 0;
  while (i < gates.size()) {
    GateLayer layer;
    layer.two_qubit = gates[i].kind == GateSpec::Kind::kTwoQubit;
    if (layer.two_qubit) {
      while (i < gates.size() && gates[i].kind == GateSpec::Kind::kTwoQubit)
        layer.gates.push_back(std::move(gates[i++]));
    } else {
      for (int k = 0; k < c.n && i < gates.size() &&
                      gates[i].kind == GateSpec::Kind::kOneQubit; ++k)
        layer.gates.push_back(std::move(gates[i++]));
    }
    c.layers.push_back(std::move(layer));
  }
  // Two-qubit layers may be empty in the source circuit (n=1 or "none"
  // two-qubit set); reinsert them so the cycle structure validates.
  if (c.m > 0) {
    std::vector<GateLayer> shaped;
    std::size_t src = 0;
    for (int cycle = 0; cycle < c.m; ++cycle) {
      if (src >= c.layers.size() || c.layers[src].two_qubit)
        throw std::invalid_argument("circuit: malformed layer structure");
      shaped.push_back(std::move(c.layers[src++]));
      if (src < c.layers.size() && c.layers[src].two_qubit)
        shaped.push_back(std::move(c.layers[src++]));
      else
        shaped.push_back(GateLayer{.two_qubit = true, .gates = {}});
    }
    if (src >= c.layers.size() || c.layers[src].two_qubit)
      throw std::invalid_argument("circuit: malformed layer structure");
    shaped.push_back(std::move(c.layers[src++]));
    if (src != c.layers.size())
      throw std::invalid_argument("circuit: trailing layers after final one-qubit layer");
    c.layers = std::move(shaped);
  }
  c.validate();
  return c;
}

}  // namespace xeblab
