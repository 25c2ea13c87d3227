#include <cfmimo/config.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace cfmimo;

TEST(Config, DefaultsAreTheReferencePreset) {
    const SimConfig c;
    EXPECT_EQ(c.rus, 12);
    EXPECT_EQ(c.antennas, 8);
    EXPECT_EQ(c.users, 100);
    EXPECT_EQ(c.active_users, 40);
    EXPECT_EQ(c.pilots, 20);
    EXPECT_EQ(c.coherence, 200);
    EXPECT_DOUBLE_EQ(c.angular_spread, std::numbers::pi / 8);
    EXPECT_EQ(c.eta, 1.0);
    EXPECT_EQ(c.max_cluster, 10);
    EXPECT_EQ(c.window, 100);
    EXPECT_EQ(c.startup_slots, 500);
    EXPECT_EQ(c.a_max, 100.0);
    EXPECT_EQ(c.v, 10000.0);
    EXPECT_DOUBLE_EQ(c.data_fraction(), 0.9);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, KeyValueRoundTrip) {
    SimConfig c;
    c.seed = 77;
    c.utility = Utility::HFS;
    c.scheme = Scheme::Baseline;
    c.rbs = 8;
    c.snr = 12345.678;
    c.fusion = FusionRule::NominalSnr;
    c.pilot_noise = false;
    std::istringstream in(to_key_values(c));
    SimConfig d;
    apply_key_values(d, in);
    EXPECT_EQ(to_key_values(c), to_key_values(d));
    EXPECT_EQ(d.seed, 77u);
    EXPECT_EQ(d.utility, Utility::HFS);
    EXPECT_EQ(d.snr, 12345.678);
}

TEST(Config, ParsesCommentsSpacesAndPiFractions) {
    std::istringstream in("# comment\n\n  rbs = 8 \nangular-spread=pi/4\nutility=hfs\npilot-noise=false\n");
    SimConfig c;
    apply_key_values(c, in);
    EXPECT_EQ(c.rbs, 8);
    EXPECT_DOUBLE_EQ(c.angular_spread, std::numbers::pi / 4);
    EXPECT_EQ(c.utility, Utility::HFS);
    EXPECT_FALSE(c.pilot_noise);
}

TEST(Config, RejectsBadInput) {
    SimConfig c;
    EXPECT_THROW(c.set("no-such-key", "1"), ConfigError);
    EXPECT_THROW(c.set("rbs", "eight"), ConfigError);
    EXPECT_THROW(c.set("rbs", "8x"), ConfigError);
    EXPECT_THROW(c.set("utility", "max-min"), ConfigError);
    EXPECT_THROW(c.set("pilot-noise", "maybe"), ConfigError);
    std::istringstream in("rbs 8\n");
    EXPECT_THROW(apply_key_values(c, in), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/cfmimo.cfg"), ConfigError);
}

TEST(Config, ValidateEnforcesInvariants) {
    auto bad = [](auto mutate) {
        SimConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), ConfigError);
    };
    bad([](SimConfig& c) { c.active_users = 101; });
    bad([](SimConfig& c) { c.pilots = 201; });
    bad([](SimConfig& c) { c.max_cluster = 0; });
    bad([](SimConfig& c) { c.max_cluster = 13; });
    bad([](SimConfig& c) { c.rbs = 0; });
    bad([](SimConfig& c) { c.angular_spread = 0.0; });
    bad([](SimConfig& c) { c.angular_spread = 2.0 * std::numbers::pi; });
    bad([](SimConfig& c) { c.users = 0; });
    bad([](SimConfig& c) { c.window = 0; });
    bad([](SimConfig& c) { c.snr = -1.0; });
}

TEST(Config, EveryKeyRenders) {
    const SimConfig c;
    for (const auto& k : SimConfig::keys()) {
        SimConfig d;
        EXPECT_NO_THROW(d.set(k, c.get(k))) << k;
    }
}
