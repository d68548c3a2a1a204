#include <gtest/gtest.h>

#include <set>
#include <string_view>

#include "ua/common/checksum.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"

namespace ua {
namespace {

TEST(Checksum, KnownFnvVectors) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  Fnv1a64 h;
  h.update(std::string_view("a"));
  EXPECT_EQ(h.digest(), 0xaf63dc4c8601ec8cULL);
  Fnv1a64 foobar;
  foobar.update(std::string_view("foo"));
  foobar.update(std::string_view("bar"));
  EXPECT_EQ(foobar.digest(), 0x85944171f73967e8ULL);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(42, 1);
  Rng b = make_rng(42, 1);
  Rng c = make_rng(42, 2);
  EXPECT_EQ(a(), b());
  EXPECT_NE(make_rng(42, 1)(), c());
}

TEST(Rng, Uniform01InRange) {
  Rng rng = make_rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Errors, TrainingErrorCarriesStep) {
  TrainingError e("diverged", 17);
  EXPECT_EQ(e.step(), 17u);
  EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  const Error& base = e;
  (void)base;
}

}  // namespace
}  // namespace ua
