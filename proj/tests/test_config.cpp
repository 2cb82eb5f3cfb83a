#include <gtest/gtest.h>

#include <cstdlib>

#include "hawkes_greeks/config.hpp"

using namespace hawkes_greeks;

TEST(Config, EmptyGivesDefaults) {
    ::unsetenv(kOutputDirEnv);
    const auto c = parse_config("");
    EXPECT_EQ(c.sigma, 0.10);
    EXPECT_EQ(c.alpha, 0.30);
    EXPECT_EQ(c.beta, 0.80);
    EXPECT_EQ(c.gamma, 0.20);
    EXPECT_EQ(c.mu, 0.05);
    EXPECT_EQ(c.horizon, 1.0);
    EXPECT_EQ(c.lambda0, 1.0);
    EXPECT_EQ(c.s0, 5.0);
    EXPECT_EQ(c.mc.grid_n, 100);
    EXPECT_EQ(c.mc.fd_bump, 0.01);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_EQ(c.methods.size(), 5u);
}

TEST(Config, CommentsAndWhitespace) {
    const auto c = parse_config("# header\n  sigma = 0.2  # inline\n\nkind=asian\nstrikes = 4, 5 ,6\n");
    EXPECT_EQ(c.sigma, 0.2);
    EXPECT_EQ(c.mc.kind, OptionKind::asian);
    EXPECT_EQ(c.strikes, (std::vector<double>{4, 5, 6}));
}

TEST(Config, StabilityViolated) {
    try {
        parse_config("alpha = 0.9\nbeta = 0.8\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("stability violated"), std::string::npos);
    }
}

TEST(Config, FlagOverridesFile) {
    EXPECT_EQ(parse_config("seed = 3\n", {{"seed", "7"}}).mc.seed, 7u);
    EXPECT_EQ(parse_config("seed = 3\n").mc.seed, 3u);
}

TEST(Config, UnknownAndInvalidKeysNamed) {
    try {
        parse_config("sigmaa = 0.1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("sigmaa"), std::string::npos);
    }
    try {
        parse_config("paths = many\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("paths"), std::string::npos);
    }
    EXPECT_THROW(parse_config("sigma =\n"), ConfigError);
    EXPECT_THROW(parse_config("sigma 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config("sigma = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("fd_bump = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("kind = american\n"), ConfigError);
    EXPECT_THROW(parse_config("methods = exact,xx\n"), ConfigError);
}

TEST(Config, EnvironmentOutputDir) {
    ::setenv(kOutputDirEnv, "/tmp/somewhere", 1);
    EXPECT_EQ(parse_config("").output_dir, "/tmp/somewhere");
    EXPECT_EQ(parse_config("output_dir = x\n").output_dir, "x");
    ::unsetenv(kOutputDirEnv);
}

TEST(Config, StrikeLists) {
    EXPECT_EQ(parse_config("").strike_list(false), (std::vector<double>{5.0}));
    EXPECT_EQ(parse_config("").strike_list(true).size(), 26u);
    EXPECT_EQ(parse_config("strikes = standard\n").strike_list(false).size(), 26u);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config(std::filesystem::path("/nonexistent/cfg")), ConfigError); }
