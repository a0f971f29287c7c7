//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <set>

#include "molmetric/random.hpp"

using namespace molmetric;

TEST_SUITE("random") {

TEST_CASE("splitmix64 reference outputs") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform_open stays inside (0, 1)") {
  SplitMix64 rng(4);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("below is in range and hits every value") {
  SplitMix64 rng(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("sampling without replacement") {
  const auto a = sample_without_replacement(100, 30, 5);
  CHECK(a.size() == 30);
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 30);
  for (std::size_t i : a) CHECK(i < 100);
  CHECK(sample_without_replacement(100, 30, 5) == a);
  CHECK(sample_without_replacement(100, 30, 6) != a);
  CHECK(sample_without_replacement(10, 10, 1).size() == 10);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
}

}  // TEST_SUITE
