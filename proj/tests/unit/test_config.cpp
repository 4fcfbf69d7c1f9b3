#include <gtest/gtest.h>

#include "kpzlab/config.hpp"

using namespace kpzlab;

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(ExperimentConfig, GetAndRequire) {
  const auto c = ExperimentConfig::parse("seed = 7\n[marginal]\nks_max = 0.1\nname = tw gue\n");
  EXPECT_EQ(c.get<int>("seed", 0), 7);
  EXPECT_DOUBLE_EQ(c.require<double>("marginal.ks_max"), 0.1);
  EXPECT_EQ(c.get<std::string>("marginal.name", ""), "tw gue");
  EXPECT_EQ(c.get<int>("marginal.missing", 3), 3);
  EXPECT_TRUE(c.has("marginal.ks_max"));
  EXPECT_FALSE(c.has("nothing"));
  EXPECT_THROW(c.require<int>("marginal.missing"), std::invalid_argument);
  EXPECT_THROW(c.require<int>("marginal.name"), std::invalid_argument);
}

TEST(ExperimentConfig, CanonicalFormIsOrderAndSpaceInsensitive) {
  const auto a = ExperimentConfig::parse("b = 2\na=1\n[y]\nq = 1\np =  x   y\n[x]\nk = v\n");
  const auto b = ExperimentConfig::parse("a = 1\n[x]\nk=v\n[y]\np = x y\nq=1\nb = 2\n");
  EXPECT_EQ(a.canonical(), "a = 1\nb = 2\n[x]\nk = v\n[y]\np = x y\nq = 1\n");
  EXPECT_NE(a.canonical(), b.canonical());  // b's "b = 2" sits in section y
  EXPECT_EQ(a.hash().size(), 16u);
  auto d = ExperimentConfig::parse("a=1\nb=2\n[x]\nk=v\n[y]\np=x y\nq=1\n");
  EXPECT_EQ(a.hash(), d.hash());
  d.set("y.q", 2);
  EXPECT_NE(a.hash(), d.hash());
  EXPECT_EQ(d.get<int>("y.q", 0), 2);
}

TEST(ExperimentConfig, Errors) {
  EXPECT_THROW(ExperimentConfig::parse("[unterminated\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/cfg.ini"), std::runtime_error);
}
