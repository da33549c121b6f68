#include "xeblab/matching.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace xeblab {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 q) { return static_cast<u64>(u128(a) * b % q); }

u64 powmod(u64 base, u64 exp, u64 q) {
  u64 r = 1 % q;
  base %= q;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, q);
    base = mulmod(base, base, q);
    exp >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin, exact for all 64-bit integers.
bool is_prime(u64 x) {
  if (x < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (x % p == 0) return x == p;
  }
  u64 d = x - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 v = powmod(a, d, x);
    if (v == 1 || v == x - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      v = mulmod(v, v, x);
      if (v == x - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// Determinant over GF(q) by Gaussian elimination with pivoting by search.
u64 det_mod(std::vector<u64> mat, int n, u64 q) {
  u64 det = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int row = col; row < n; ++row)
      if (mat[static_cast<std::size_t>(row) * n + col] != 0) {
        pivot = row;
        break;
      }
    if (pivot < 0) return 0;
    if (pivot != col) {
      for (int j = 0; j < n; ++j)
        std::swap(mat[static_cast<std::size_t>(pivot) * n + j],
                  mat[static_cast<std::size_t>(col) * n + j]);
      det = q - det;  // row swap flips the sign
    }
    const u64 p = mat[static_cast<std::size_t>(col) * n + col];
    det = mulmod(det, p, q);
    const u64 pinv = powmod(p, q - 2, q);
    for (int row = col + 1; row < n; ++row) {
      const u64 factor = mulmod(mat[static_cast<std::size_t>(row) * n + col], pinv, q);
      if (factor == 0) continue;
      for (int j = col; j < n; ++j) {
        const u64 sub = mulmod(factor, mat[static_cast<std::size_t>(col) * n + j], q);
        u64& cell = mat[static_cast<std::size_t>(row) * n + j];
        cell = cell >= sub ? cell - sub : cell + q - sub;
      }
    }
  }
  return det % q;
}

void count_recursive(const BipartiteGraph& g, std::vector<int>& remaining, int a, u64& acc) {
  if (a == g.na) {
    ++acc;
    return;
  }
  for (int b : g.adj[a]) {
    if (remaining[b] == 0) continue;
    --remaining[b];
    count_recursive(g, remaining, a + 1, acc);
    ++remaining[b];
  }
}

bool try_augment(const BipartiteGraph& g, int a, std::vector<int>& match_b,
                 std::vector<char>& visited) {
  for (int b : g.adj[a]) {
    if (visited[b]) continue;
    visited[b] = 1;
    if (match_b[b] < 0 || try_augment(g, match_b[b], match_b, visited)) {
      match_b[b] = a;
      return true;
    }
  }
  return false;
}

}  // namespace

void BipartiteGraph::validate() const {
  if (na < 1 || nb < 1) throw std::invalid_argument("graph: empty side");
  if (adj.size() != static_cast<std::size_t>(na))
    throw std::invalid_argument("graph: need one neighbor set per A-vertex");
  for (const auto& nbrs : adj) {
    int prev = -1;
    for (int b : nbrs) {
      if (b < 0 || b >= nb) throw std::out_of_range("graph: neighbor index out of range");
      if (b <= prev) throw std::invalid_argument("graph: neighbor sets must be sorted and duplicate-free");
      prev = b;
    }
  }
}

void write_graph(std::ostream& out, const BipartiteGraph& g) {
  out << "na=" << g.na << " nb=" << g.nb << "\n";
  for (const auto& nbrs : g.adj) {
    for (std::size_t i = 0; i < nbrs.size(); ++i) out << (i ? " " : "") << nbrs[i];
    out << "\n";
  }
}

BipartiteGraph read_graph(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("graph: empty input");
  BipartiteGraph g;
  if (std::sscanf(line.c_str(), "na=%d nb=%d", &g.na, &g.nb) != 2)
    throw std::invalid_argument("graph: bad header '" + line + "'");
  for (int a = 0; a < g.na; ++a) {
    if (!std::getline(in, line))
      throw std::invalid_argument("graph: missing neighbor line for A-vertex");
    std::istringstream ls(line);
    std::vector<int> nbrs;
    int b;
    while (ls >> b) nbrs.push_back(b);
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    g.adj.push_back(std::move(nbrs));
  }
  g.validate();
  return g;
}

int MultiSubset::total() const {
  return std::accumulate(multiplicity.begin(), multiplicity.end(), 0);
}

MultiSubset sample_semi_matching(const BipartiteGraph& g, SplitStream& rng) {
  g.validate();
  MultiSubset c;
  c.multiplicity.assign(g.nb, 0);
  for (int a = 0; a < g.na; ++a) {
    if (g.adj[a].empty())
      throw std::invalid_argument("sample_semi_matching: A-vertex with no neighbors");
    const std::size_t pick = rng.next_below(g.adj[a].size());
    ++c.multiplicity[g.adj[a][pick]];
  }
  return c;
}

MultiSubset sample_semi_matching(const BipartiteGraph& g, std::uint64_t seed) {
  SplitStream rng(seed);
  return sample_semi_matching(g, rng);
}

std::uint64_t count_semi_matchings(const BipartiteGraph& g, const MultiSubset& c) {
  g.validate();
  if (g.na > 12) throw std::out_of_range("count_semi_matchings: na exceeds the enumeration cap");
  if (c.multiplicity.size() != static_cast<std::size_t>(g.nb))
    throw std::invalid_argument("count_semi_matchings: multiset size mismatch");
  for (int m : c.multiplicity)
    if (m < 0) throw std::invalid_argument("count_semi_matchings: negative multiplicity");
  if (c.total() != g.na) return 0;
  std::vector<int> remaining = c.multiplicity;
  std::uint64_t acc = 0;
  count_recursive(g, remaining, 0, acc);
  return acc;
}

std::vector<MultiSubset> enumerate_multisets(int nb, int total) {
  if (nb < 1 || total < 0) throw std::invalid_argument("enumerate_multisets: bad arguments");
  std::vector<MultiSubset> out;
  std::vector<int> current(nb, 0);
  const std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == nb - 1) {
      current[pos] = left;
      out.push_back(MultiSubset{current});
      return;
    }
    for (int take = left; take >= 0; --take) {
      current[pos] = take;
      rec(pos + 1, left - take);
    }
  };
  rec(0, total);
  return out;
}

std::uint64_t choice_tuple_count(const BipartiteGraph& g) {
  std::uint64_t total = 1;
  for (const auto& nbrs : g.adj) total *= nbrs.size();
  return total;
}

MatchVerdict lovasz_matching_test(const BipartiteGraph& g, std::uint64_t field_prime,
                                  int repetitions, std::uint64_t seed) {
  g.validate();
  if (g.na != g.nb)
    throw std::invalid_argument("lovasz_matching_test: sides must have equal size");
  const int n = g.na;
  if (repetitions < 1) throw std::invalid_argument("lovasz_matching_test: need k >= 1");
  if (!is_prime(field_prime)) throw std::invalid_argument("lovasz_matching_test: q is not prime");
  if (field_prime <= static_cast<u64>(n) * static_cast<u64>(n))
    throw std::invalid_argument("lovasz_matching_test: need q > n^2");

  SplitStream root(seed);
  for (int trial = 0; trial < repetitions; ++trial) {
    SplitStream rng = root.split(trial);
    std::vector<u64> mat(static_cast<std::size_t>(n) * n, 0);
    for (int a = 0; a < n; ++a)
      for (int b : g.adj[a])
        mat[static_cast<std::size_t>(a) * n + b] = 1 + rng.next_below(field_prime - 1);
    if (det_mod(std::move(mat), n, field_prime) != 0)
      return MatchVerdict::kPerfectMatchingExists;
  }
  return MatchVerdict::kProbablyNone;
}

int max_bipartite_matching(const BipartiteGraph& g) {
  g.validate();
  std::vector<int> match_b(g.nb, -1);
  int matched = 0;
  for (int a = 0; a < g.na; ++a) {
    std::vector<char> visited(g.nb, 0);
    if (try_augment(g, a, match_b, visited)) ++matched;
  }
  return matched;
}

}  // namespace xeblab
