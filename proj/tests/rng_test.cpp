#include "zne/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using zne::SplitMixStream;

TEST_CASE("fnv1a64 matches reference digests") {
  // Published FNV-1a test vectors.
  CHECK(zne::fnv1a64("", 14695981039346656037ULL) == 14695981039346656037ULL);
  CHECK(zne::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(zne::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("streams are deterministic and key dependent") {
  SplitMixStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    auto va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool differs = false;
  SplitMixStream a2(42);
  for (int i = 0; i < 10; ++i) {
    if (a2.next_u64() != c.next_u64()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("derive is independent of parent position") {
  SplitMixStream parent(7);
  SplitMixStream child_before = parent.derive("curve-1");
  parent.next_u64();
  parent.next_u64();
  SplitMixStream child_after = parent.derive("curve-1");
  for (int i = 0; i < 20; ++i) {
    CHECK(child_before.next_u64() == child_after.next_u64());
  }
  CHECK(parent.derive("curve-1").key() != parent.derive("curve-2").key());
}

TEST_CASE("next_unit stays in [0, 1) and looks uniform") {
  SplitMixStream rng(123);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);           // sd of the mean ~ 0.0009
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("next_in covers the requested interval") {
  SplitMixStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    double v = rng.next_in(-0.2, 0.2);
    REQUIRE(v >= -0.2);
    REQUIRE(v < 0.2);
  }
}
