#include <doctest.h>

#include "tabsa/linalg.hpp"
#include "tabsa/rng.hpp"

using namespace tabsa;

TEST_CASE("splitmix64 streams are deterministic and distinct") {
  SplitMix64 a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    std::uint64_t va = a.next();
    CHECK(va == b.next());
  }
  bool differs = false;
  SplitMix64 a2(42);
  for (int i = 0; i < 10; ++i) differs |= a2.next() != c.next();
  CHECK(differs);
}

TEST_CASE("uniform draws stay inside the requested range") {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-0.1, 0.1);
    CHECK(x >= -0.1);
    CHECK(x < 0.1);
  }
}

TEST_CASE("derive_seed separates streams by part and by order") {
  std::uint64_t a = derive_seed(1, {"s1", "LOCATION1", "price"});
  std::uint64_t b = derive_seed(1, {"s1", "LOCATION1", "safety"});
  std::uint64_t c = derive_seed(2, {"s1", "LOCATION1", "price"});
  std::uint64_t d = derive_seed(1, {"LOCATION1", "s1", "price"});
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
  CHECK(a == derive_seed(1, {"s1", "LOCATION1", "price"}));
}

TEST_CASE("matvec and tmatvec agree with hand results") {
  Matrix x(2, 3);
  // columns [1,2], [3,4], [5,6]
  x.at(0, 0) = 1; x.at(1, 0) = 2;
  x.at(0, 1) = 3; x.at(1, 1) = 4;
  x.at(0, 2) = 5; x.at(1, 2) = 6;

  Vec u = {1.0, 0.0, 2.0};
  Vec out = matvec(x, u);
  CHECK(out[0] == doctest::Approx(11.0));
  CHECK(out[1] == doctest::Approx(14.0));

  Vec w = {1.0, 1.0};
  Vec tv = tmatvec(x, w);
  CHECK(tv[0] == doctest::Approx(3.0));
  CHECK(tv[1] == doctest::Approx(7.0));
  CHECK(tv[2] == doctest::Approx(11.0));
}

TEST_CASE("matvec rejects shape mismatches") {
  Matrix x(2, 3);
  Vec u = {1.0, 2.0};
  CHECK_THROWS_AS(matvec(x, u), InputError);
  Vec w = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(tmatvec(x, w), InputError);
}

TEST_CASE("sigmoid midpoint and mean") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  Vec v = {1.0, 2.0, 3.0};
  CHECK(mean(v) == doctest::Approx(2.0));
}
