// Tests for the deterministic random number streams.

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "spilab/rng.hpp"

using namespace spilab;

TEST_CASE("equal seeds give equal streams, distinct seeds diverge") {
  Rng a(42), b(42), c(43);
  bool all_equal = true;
  bool any_differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    all_equal = all_equal && (x == b.uniform());
    any_differs = any_differs || (x != c.uniform());
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform(lo, hi) respects its bounds") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-2.0, 3.0);
    CHECK(x >= -2.0);
    CHECK(x < 3.0);
  }
}

TEST_CASE("uniform_int covers every bucket") {
  Rng rng(11);
  std::array<int, 5> counts{};
  for (int i = 0; i < 5000; ++i) {
    const int k = rng.uniform_int(5);
    REQUIRE(k >= 0);
    REQUIRE(k < 5);
    counts[k] += 1;
  }
  for (const int c : counts) CHECK(c > 800);
}

TEST_CASE("categorical draws match the given masses") {
  Rng rng(13);
  const std::vector<double> probs = {0.5, 0.0, 0.25, 0.25};
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) counts[rng.categorical(probs)] += 1;
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.5) < 0.02);
  CHECK(std::abs(counts[2] / static_cast<double>(n) - 0.25) < 0.02);
  CHECK(std::abs(counts[3] / static_cast<double>(n) - 0.25) < 0.02);
}

TEST_CASE("categorical never returns a zero-mass index") {
  Rng rng(17);
  const std::vector<double> probs = {0.0, 1.0, 0.0};
  for (int i = 0; i < 200; ++i) CHECK(rng.categorical(probs) == 1);
}

TEST_CASE("categorical tolerates a total slightly below one") {
  Rng rng(19);
  const std::vector<double> probs = {0.3, 0.7 - 1e-13};
  for (int i = 0; i < 200; ++i) {
    const int k = rng.categorical(probs);
    CHECK(k >= 0);
    CHECK(k <= 1);
  }
}

TEST_CASE("derive_seed separates streams and is stable") {
  CHECK(derive_seed(123, 0) == derive_seed(123, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(123, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(123, 0) != derive_seed(124, 0));
}

TEST_CASE("split streams from adjacent derived seeds look independent") {
  SplitRng a(derive_seed(5, 0));
  SplitRng b(derive_seed(5, 1));
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.uniform() == b.uniform()) equal += 1;
  }
  CHECK(equal == 0);
}

TEST_CASE("splitmix engine matches its reference sequence") {
  SplitMix64 engine(0);
  CHECK(engine() == 0xe220a8397b1dcdafULL);
  CHECK(engine() == 0x6e789e6aa1b965f4ULL);
  CHECK(engine() == 0x06c45d188009454fULL);
}
