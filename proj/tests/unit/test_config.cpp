#include <gtest/gtest.h>

#include "omtk/config.hpp"
#include "omtk/dsl.hpp"

namespace omtk {
namespace {

TEST(Config, PaperPreset) {
  const ProblemConfig c = parse_config("preset = paper-ex-4\nT = 3\n");
  EXPECT_EQ(c.d, 1);
  EXPECT_EQ(c.m, 1);
  EXPECT_EQ(dsl::to_string(*c.system.p[0].expr()), "x2");
  EXPECT_EQ(dsl::to_string(*c.system.q[0].expr()),
            dsl::to_string(dsl::parse("M1*(x1^2-1)", {1, 1})));
  EXPECT_EQ(c.x0, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(c.horizon, 3.0);
  EXPECT_TRUE(c.system.is_hamiltonian());
}

TEST(Config, EmptyFileWithPreset) {
  const ProblemConfig c = parse_config("# only a preset\npreset = ou-degenerate\n");
  EXPECT_EQ(dsl::to_string(*c.system.q[0].expr()), dsl::to_string(dsl::parse("-x2", {1, 1})));
}

TEST(Config, MomentAboveDeclaredOrder) {
  try {
    parse_config("dims = 1, 1\np = x2\nq = M5*x1\nmoments = 2\nx0 = 0, 0\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.key_path().substr(0, 1), "q");
  }
}

TEST(Config, ExplicitKeysOverridePreset) {
  const ProblemConfig c = parse_config("preset = ou\nq[1] = -2*x2\nx0 = 0, 1\n");
  EXPECT_EQ(dsl::to_string(*c.system.q[0].expr()), dsl::to_string(dsl::parse("-2*x2", {1, 1})));
  EXPECT_EQ(c.system.x0(1), 1.0);
}

TEST(Config, SchemaErrorsCarryKeys) {
  const auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const SchemaError& e) {
      return e.key_path();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("p = x2\n"), "dims");
  EXPECT_EQ(key_of("preset = ou\nfoo = 1\n"), "foo");
  EXPECT_EQ(key_of("preset = ou\nT = 1\nT = 2\n"), "T");
  EXPECT_EQ(key_of("preset = ou\nT = -1\n"), "T");
  EXPECT_EQ(key_of("preset = ou\nx0 = 1\n"), "x0");
  EXPECT_EQ(key_of("preset = nope\n"), "preset");
  EXPECT_EQ(key_of("preset = ou\njust words\n"), "line 2");
  EXPECT_EQ(key_of("preset = ou\nq[2] = x1\n"), "q[2]");
}

TEST(Config, DriftSyntaxErrorCarriesKeyAndOffset) {
  try {
    parse_config("preset = ou\nq = -x2 +\n");
    FAIL();
  } catch (const ConfigParseError& e) {
    EXPECT_EQ(e.key(), "q[1]");
    EXPECT_EQ(e.offset(), 5u);
  }
}

TEST(Config, HashStableUnderKeyReordering) {
  const ProblemConfig a = parse_config("dims = 1, 1\np = x2\nq = -x2\nx0 = 0, 0\nT = 1\n");
  const ProblemConfig b = parse_config("T = 1\nx0 = 0,0\nq = -x2\np = x2\ndims = 1,1\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash(), parse_config("preset = ou-degenerate\n").hash());
  EXPECT_NE(a.hash(), parse_config("preset = ou\n").hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, Fnv1a64KnownValues) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
}

TEST(Config, AllPresetsResolve) {
  for (const std::string& name : preset_names()) {
    EXPECT_NO_THROW(preset_config(name)) << name;
  }
}

}  // namespace
}  // namespace omtk
