#include <doctest.h>

#include <set>
#include <vector>

#include "subcam/rng.hpp"

using namespace subcam;

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("substreams with different tags are distinct") {
  std::set<std::uint64_t> seen;
  seen.insert(substream(7, "data"));
  seen.insert(substream(7, "init"));
  seen.insert(substream(7, "batches"));
  seen.insert(substream(7, "clustering"));
  seen.insert(substream(7, "data", std::uint64_t{1}));
  seen.insert(substream(8, "data"));
  CHECK(seen.size() == 6);
}

TEST_CASE("uniform values stay in range") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    int k = rng.uniform_int(-3, 9);
    CHECK(k >= -3);
    CHECK(k <= 9);
  }
}

TEST_CASE("uniform_index covers all values") {
  Rng rng(9);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) counts[rng.uniform_index(5)]++;
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("shuffle is a permutation and deterministic") {
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7};
  Rng a(42);
  a.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 8);
  std::vector<int> w = {0, 1, 2, 3, 4, 5, 6, 7};
  Rng b(42);
  b.shuffle(w);
  CHECK(v == w);
}
