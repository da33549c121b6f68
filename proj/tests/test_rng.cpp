#include "doctest.h"
#include "xeblab/rng.hpp"

using xeblab::SplitStream;

TEST_CASE("same seed gives the same stream") {
  SplitStream a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("split path names a stream independently of parent position") {
  SplitStream parent(7);
  SplitStream child_before = parent.split(3);
  parent.next_u64();
  parent.next_u64();
  SplitStream child_after = parent.split(3);
  for (int i = 0; i < 16; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("sibling streams differ") {
  SplitStream parent(7);
  SplitStream a = parent.split(0);
  SplitStream b = parent.split(1);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("unit doubles live in [0,1) and look uniform") {
  SplitStream rng(99);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("bounded draws stay in range and hit every value") {
  SplitStream rng(5);
  int seen[7] = {0};
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.next_below(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (int c : seen) CHECK(c > 700);
}
