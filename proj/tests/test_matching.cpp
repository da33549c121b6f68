#include <stdexcept>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "xeblab/matching.hpp"
#include "xeblab/rng.hpp"
#include "xeblab/stats.hpp"

using namespace xeblab;

namespace {

BipartiteGraph complete(int na, int nb) {
  BipartiteGraph g;
  g.na = na;
  g.nb = nb;
  g.adj.assign(na, {});
  for (auto& nbrs : g.adj)
    for (int b = 0; b < nb; ++b) nbrs.push_back(b);
  return g;
}

BipartiteGraph random_graph(int na, int nb, double p, SplitStream& rng) {
  BipartiteGraph g;
  g.na = na;
  g.nb = nb;
  g.adj.assign(na, {});
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      if (rng.next_bernoulli(p)) g.adj[a].push_back(b);
  return g;
}

}  // namespace

TEST_CASE("semi-matching counts on K22") {
  const BipartiteGraph k22 = complete(2, 2);
  CHECK(count_semi_matchings(k22, MultiSubset{{1, 1}}) == 2);
  CHECK(count_semi_matchings(k22, MultiSubset{{2, 0}}) == 1);
  CHECK(count_semi_matchings(k22, MultiSubset{{0, 2}}) == 1);
  CHECK(count_semi_matchings(k22, MultiSubset{{3, 0}}) == 0);  // wrong total
}

TEST_CASE("count is zero when C uses a vertex nobody can reach") {
  BipartiteGraph g;
  g.na = 2;
  g.nb = 3;
  g.adj = {{0}, {0, 1}};
  CHECK(count_semi_matchings(g, MultiSubset{{1, 0, 1}}) == 0);
}

TEST_CASE("C concentrated on one vertex forces the map") {
  const BipartiteGraph k23 = complete(2, 3);
  CHECK(count_semi_matchings(k23, MultiSubset{{0, 2, 0}}) == 1);
  BipartiteGraph partial;
  partial.na = 2;
  partial.nb = 2;
  partial.adj = {{0}, {0, 1}};
  CHECK(count_semi_matchings(partial, MultiSubset{{0, 2}}) == 0);
}

TEST_CASE("counting cap is enforced") {
  const BipartiteGraph big = complete(13, 2);
  CHECK_THROWS_AS(count_semi_matchings(big, MultiSubset{{7, 6}}), std::out_of_range);
}

TEST_CASE("sampler probabilities are exactly n(A,C) / prod |B_a| on small graphs") {
  SplitStream rng(101);
  int graphs_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int na = 1 + static_cast<int>(rng.next_below(3));
    const int nb = 1 + static_cast<int>(rng.next_below(3));
    BipartiteGraph g = random_graph(na, nb, 0.6, rng);
    bool ok = true;
    for (const auto& nbrs : g.adj) ok &= !nbrs.empty();
    if (!ok) continue;
    ++graphs_checked;
    const auto tuples = oracles::enumerate_choice_tuples(g);
    std::uint64_t tuple_total = 0;
    for (const MultiSubset& ms : enumerate_multisets(g.nb, g.na)) {
      const auto it = tuples.find(ms.multiplicity);
      const std::uint64_t enumerated = it == tuples.end() ? 0 : it->second;
      CHECK(enumerated == count_semi_matchings(g, ms));
      tuple_total += enumerated;
    }
    CHECK(tuple_total == choice_tuple_count(g));
  }
  CHECK(graphs_checked > 20);
}

TEST_CASE("deterministic when every A-vertex has one neighbor") {
  BipartiteGraph g;
  g.na = 3;
  g.nb = 4;
  g.adj = {{2}, {0}, {2}};
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const MultiSubset c = sample_semi_matching(g, seed);
    CHECK(c.multiplicity == std::vector<int>{1, 0, 2, 0});
  }
}

TEST_CASE("isolated A-vertex is an error") {
  BipartiteGraph g;
  g.na = 2;
  g.nb = 2;
  g.adj = {{}, {0}};
  CHECK_THROWS_AS(sample_semi_matching(g, 1), std::invalid_argument);
}

TEST_CASE("empirical K22 frequencies match the enumerated law") {
  const BipartiteGraph k22 = complete(2, 2);
  SplitStream root(7);
  std::map<std::vector<int>, int> hist;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    SplitStream rng = root.split(i);
    ++hist[sample_semi_matching(k22, rng).multiplicity];
  }
  CHECK(std::abs(hist[{1, 1}] / static_cast<double>(draws) - 0.5) < 0.01);
  CHECK(std::abs(hist[{2, 0}] / static_cast<double>(draws) - 0.25) < 0.01);
  CHECK(std::abs(hist[{0, 2}] / static_cast<double>(draws) - 0.25) < 0.01);
}

TEST_CASE("sampled multisets always have support") {
  SplitStream rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    BipartiteGraph g = random_graph(4, 4, 0.5, rng);
    bool ok = true;
    for (const auto& nbrs : g.adj) ok &= !nbrs.empty();
    if (!ok) continue;
    SplitStream root = rng.split(trial);
    for (int i = 0; i < 50; ++i) {
      SplitStream draw = root.split(i);
      CHECK(count_semi_matchings(g, sample_semi_matching(g, draw)) > 0);
    }
  }
}

TEST_CASE("lovasz test certifies the diagonal graph every trial") {
  BipartiteGraph diag;
  diag.na = diag.nb = 5;
  diag.adj = {{0}, {1}, {2}, {3}, {4}};
  for (int k : {1, 3})
    CHECK(lovasz_matching_test(diag, 2147483647ULL, k, 99) ==
          MatchVerdict::kPerfectMatchingExists);
}

TEST_CASE("identically zero determinant yields probably-none") {
  BipartiteGraph g;
  g.na = g.nb = 2;
  g.adj = {{0}, {0}};  // both A-vertices see only b0
  for (std::uint64_t seed : {1ULL, 5ULL, 9ULL})
    CHECK(lovasz_matching_test(g, 2147483647ULL, 10, seed) == MatchVerdict::kProbablyNone);
}

TEST_CASE("lovasz parameter validation") {
  const BipartiteGraph k33 = complete(3, 3);
  CHECK_THROWS_AS(lovasz_matching_test(k33, 2147483646ULL, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(lovasz_matching_test(k33, 7, 5, 1), std::invalid_argument);  // q <= n^2
  CHECK_THROWS_AS(lovasz_matching_test(k33, 2147483647ULL, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(lovasz_matching_test(complete(2, 3), 2147483647ULL, 5, 1),
                  std::invalid_argument);
}

TEST_CASE("lovasz verdicts agree with the augmenting-path oracle") {
  SplitStream rng(131);
  int yes = 0, no = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(7));
    const BipartiteGraph g = random_graph(n, n, 0.35, rng);
    const bool lov = lovasz_matching_test(g, 2147483647ULL, 10, rng.next_u64()) ==
                     MatchVerdict::kPerfectMatchingExists;
    const bool oracle = max_bipartite_matching(g) == n;
    CHECK(lov == oracle);
    (oracle ? yes : no) += 1;
  }
  CHECK(yes > 5);
  CHECK(no > 5);
}

TEST_CASE("maximum matching on known graphs") {
  CHECK(max_bipartite_matching(complete(4, 4)) == 4);
  BipartiteGraph path;
  path.na = 3;
  path.nb = 3;
  path.adj = {{0}, {0, 1}, {1}};
  CHECK(max_bipartite_matching(path) == 2);
}

TEST_CASE("graph io round trips and rejects malformed input") {
  BipartiteGraph g;
  g.na = 2;
  g.nb = 3;
  g.adj = {{0, 2}, {1}};
  std::ostringstream os;
  write_graph(os, g);
  std::istringstream in(os.str());
  const BipartiteGraph back = read_graph(in);
  CHECK(back.na == 2);
  CHECK(back.nb == 3);
  CHECK(back.adj == g.adj);

  std::istringstream bad("na=2\n0\n1\n");
  CHECK_THROWS_AS(read_graph(bad), std::invalid_argument);
  std::istringstream out_of_range_vertex("na=1 nb=2\n5\n");
  CHECK_THROWS_AS(read_graph(out_of_range_vertex), std::out_of_range);
}

TEST_CASE("k33 sampling passes a chi-squared goodness-of-fit test") {
  const BipartiteGraph k33 = complete(3, 3);
  SplitStream root(17);
  std::map<std::vector<int>, double> hist;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    SplitStream rng = root.split(i);
    hist[sample_semi_matching(k33, rng).multiplicity] += 1.0;
  }
  const double tuples = static_cast<double>(choice_tuple_count(k33));
  double chi2 = 0.0;
  int cells = 0;
  for (const MultiSubset& ms : enumerate_multisets(3, 3)) {
    const double expected =
        draws * static_cast<double>(count_semi_matchings(k33, ms)) / tuples;
    REQUIRE(expected > 5.0);
    const double observed = hist.count(ms.multiplicity) ? hist[ms.multiplicity] : 0.0;
    chi2 += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  CHECK(cells == 10);
  CHECK(chi_squared_survival(chi2, cells - 1) > 0.01);
}
