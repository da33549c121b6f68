#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "xeblab/rng.hpp"

namespace xeblab {

// Bipartite graph given by per-A-vertex neighbor sets into B.
struct BipartiteGraph {
  int na = 0;
  int nb = 0;
  std::vector<std::vector<int>> adj;  // adj[a]: sorted, duplicate-free

  void validate() const;
};

// Graph text format: first line "na=<int> nb=<int>", then one line per
// A-vertex listing its neighbor indices, space-separated.
void write_graph(std::ostream& out, const BipartiteGraph& g);
BipartiteGraph read_graph(std::istream& in);

// Multiset over B with total multiplicity na.
struct MultiSubset {
  std::vector<int> multiplicity;

  int total() const;
};

// Picks a uniform neighbor for every A-vertex; the resulting multiset C is
// distributed proportionally to the semi-matching count n(A,C).
MultiSubset sample_semi_matching(const BipartiteGraph& g, SplitStream& rng);
MultiSubset sample_semi_matching(const BipartiteGraph& g, std::uint64_t seed);

// Exact number of maps A -> C that land in neighbor sets and hit every
// element of C with its prescribed multiplicity. Exponential enumeration,
// capped at na <= 12; oracle use only.
std::uint64_t count_semi_matchings(const BipartiteGraph& g, const MultiSubset& c);

// All multisets of the given total over nb elements, in lexicographic
// multiplicity order. Sizes explode quickly; meant for small oracles.
std::vector<MultiSubset> enumerate_multisets(int nb, int total);

// Number of neighbor-choice tuples, prod_a |B_a|.
std::uint64_t choice_tuple_count(const BipartiteGraph& g);

enum class MatchVerdict { kPerfectMatchingExists, kProbablyNone };

// Randomized determinant test over GF(q): fills the edge positions of the
// Lovasz matrix with random nonzero field elements and evaluates the
// determinant by Gaussian elimination, k independent trials. A nonzero
// determinant certifies a perfect matching; k zero determinants answer
// "probably none" with one-sided error at most (n/q)^k.
MatchVerdict lovasz_matching_test(const BipartiteGraph& g, std::uint64_t field_prime,
                                  int repetitions, std::uint64_t seed);

// Deterministic augmenting-path maximum matching (oracle for the test).
int max_bipartite_matching(const BipartiteGraph& g);

}  // namespace xeblab
