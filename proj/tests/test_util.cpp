#include <doctest.h>

#include "cplab/util.hpp"

using namespace cplab;

TEST_SUITE("util") {

TEST_CASE("fnv1a matches the published 64-bit vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("fnv1a_u64 folds all eight bytes") {
  CHECK(fnv1a_u64(0, kFnvOffset) != fnv1a_u64(1, kFnvOffset));
  CHECK(fnv1a_u64(1, kFnvOffset) != fnv1a_u64(1ull << 56, kFnvOffset));
  // Chaining is order-sensitive.
  CHECK(fnv1a_u64(2, fnv1a_u64(1, kFnvOffset)) != fnv1a_u64(1, fnv1a_u64(2, kFnvOffset)));
}

TEST_CASE("hex64 is fixed-width lowercase") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hex64(~0ull) == "ffffffffffffffff");
}

TEST_CASE("num_str round-trips doubles exactly") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 3.141592653589793, 1e17}) {
    CHECK(std::stod(num_str(v)) == v);
  }
  CHECK(num_str(1.0) == "1");
  CHECK(num_str(0.5) == "0.5");
}

TEST_CASE("require throws Error with the given message") {
  CHECK_NOTHROW(require(true, "fine"));
  CHECK_THROWS_WITH_AS(require(false, "boom"), "boom", Error);
  CHECK_THROWS_AS(fail("x"), Error);
}

}  // TEST_SUITE
