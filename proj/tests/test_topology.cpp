#include <cfmimo/topology.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cfmimo;

namespace {

SimConfig preset() { return SimConfig{}; }

} // namespace

TEST(Torus, WrapsAcrossTheEdge) {
    EXPECT_DOUBLE_EQ(torus_distance({0, 0}, {49, 0}, 50), 1.0);
    EXPECT_DOUBLE_EQ(torus_distance({0, 0}, {0, 49}, 50), 1.0);
    EXPECT_DOUBLE_EQ(torus_distance({1, 1}, {49, 49}, 50), std::sqrt(8.0));
    EXPECT_DOUBLE_EQ(torus_distance({10, 10}, {35, 10}, 50), 25.0);
}

TEST(Torus, MetricAndTranslationInvariant) {
    Engine rng(7);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        const double ab = torus_distance(a, b, 50);
        EXPECT_NEAR(ab, torus_distance(b, a, 50), 1e-12);
        EXPECT_LE(ab, torus_distance(a, c, 50) + torus_distance(c, b, 50) + 1e-12);
        EXPECT_LE(ab, std::sqrt(2.0) * 25.0 + 1e-12);
        const double sx = u(rng), sy = u(rng);
        const Point a2{std::fmod(a.x + sx, 50.0), std::fmod(a.y + sy, 50.0)};
        const Point b2{std::fmod(b.x + sx, 50.0), std::fmod(b.y + sy, 50.0)};
        EXPECT_NEAR(ab, torus_distance(a2, b2, 50), 1e-9);
    }
    EXPECT_EQ(torus_distance({3, 4}, {3, 4}, 50), 0.0);
}

TEST(Geometry, DefaultGridHasHalfCellOffsets) {
    const auto g = make_geometry(preset());
    ASSERT_EQ(g.num_rus(), 12);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) {
            const Point p = g.ru_positions[r * 4 + c];
            EXPECT_DOUBLE_EQ(p.x, (c + 0.5) * 12.5);
            EXPECT_DOUBLE_EQ(p.y, (r + 0.5) * 50.0 / 3.0);
        }
}

TEST(Geometry, SingleRuSitsInTheCentre) {
    SimConfig cfg = preset();
    cfg.rus = 1;
    cfg.max_cluster = 1;
    const auto g = make_geometry(cfg);
    ASSERT_EQ(g.num_rus(), 1);
    EXPECT_DOUBLE_EQ(g.ru_positions[0].x, 25.0);
    EXPECT_DOUBLE_EQ(g.ru_positions[0].y, 25.0);
}

TEST(Geometry, GridShapeErrors) {
    SimConfig cfg = preset();
    cfg.rus = 7; // prime, only 1 x 7
    cfg.max_cluster = 7;
    EXPECT_THROW(grid_shape(cfg), ConfigError);
    cfg.grid_rows = 1;
    EXPECT_EQ(grid_shape(cfg), (std::pair<int, int>{1, 7}));
    cfg.rus = 12;
    cfg.grid_rows = 5;
    EXPECT_THROW(grid_shape(cfg), ConfigError);
    cfg.grid_rows = 0;
    EXPECT_EQ(grid_shape(cfg), (std::pair<int, int>{3, 4}));
    cfg.rus = 3;
    EXPECT_EQ(grid_shape(cfg), (std::pair<int, int>{1, 3}));
}

TEST(Geometry, UesInsideAreaAndReproducible) {
    const auto a = make_geometry(preset());
    const auto b = make_geometry(preset());
    ASSERT_EQ(a.num_ues(), 100);
    for (int k = 0; k < a.num_ues(); ++k) {
        EXPECT_GE(a.ue_positions[k].x, 0.0);
        EXPECT_LT(a.ue_positions[k].x, 50.0);
        EXPECT_GE(a.ue_positions[k].y, 0.0);
        EXPECT_LT(a.ue_positions[k].y, 50.0);
        EXPECT_EQ(a.ue_positions[k].x, b.ue_positions[k].x);
        EXPECT_EQ(a.lsfc[k], b.lsfc[k]);
        EXPECT_EQ(a.supports[k], b.supports[k]);
        for (int l = 0; l < a.num_rus(); ++l) {
            EXPECT_GT(a.lsfc[k][l], 0.0);
            EXPECT_FALSE(a.supports[k][l].empty());
        }
    }
    SimConfig other = preset();
    other.seed = 2;
    EXPECT_NE(make_geometry(other).ue_positions[0].x, a.ue_positions[0].x);
}

TEST(Pathloss, CalibrationGivesUnitSnrAtThreeRadii) {
    const SimConfig cfg = preset();
    const PathlossModel model(cfg);
    const double d = 3.0 * std::sqrt(50.0 * 50.0 / (std::numbers::pi * 12.0));
    EXPECT_NEAR(ru_radius(cfg), d / 3.0, 1e-12);
    EXPECT_NEAR(model.mean_gain(d) * cfg.antennas * calibrated_snr(cfg), 1.0, 1e-12);

    SimConfig ss = cfg;
    ss.pathloss = PathlossKind::SingleSlope;
    const PathlossModel single(ss);
    EXPECT_NEAR(single.mean_gain(d) * ss.antennas * calibrated_snr(ss), 1.0, 1e-12);

    SimConfig fixed = cfg;
    fixed.snr = 1234.5;
    EXPECT_EQ(calibrated_snr(fixed), 1234.5);
}

TEST(Pathloss, MonotoneAndClamped) {
    const PathlossModel model(preset());
    EXPECT_EQ(model.gain_los(0.0), model.gain_los(1.0));
    EXPECT_EQ(model.gain_nlos(0.2), model.gain_nlos(1.0));
    double prev_los = model.gain_los(1.0), prev_nlos = model.gain_nlos(1.0);
    for (double d = 1.25; d < 80.0; d += 0.25) {
        EXPECT_LE(model.gain_los(d), prev_los);
        EXPECT_LE(model.gain_nlos(d), prev_nlos);
        EXPECT_LE(model.gain_nlos(d), model.gain_los(d));
        prev_los = model.gain_los(d);
        prev_nlos = model.gain_nlos(d);
    }
    EXPECT_EQ(model.los_probability(18.0), 1.0);
    EXPECT_LT(model.los_probability(30.0), 1.0);
    EXPECT_GT(model.los_probability(30.0), 0.0);
}

TEST(Pathloss, MonteCarloMixtureMatchesClosedForm) {
    // draw LOS/NLOS with the model's probability, average the gains
    const PathlossModel model(preset());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double d : {10.0, 25.0, 27.6, 35.0}) {
        Engine rng(static_cast<std::uint64_t>(d * 100));
        const double p = model.los_probability(d);
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i)
            sum += u(rng) < p ? model.gain_los(d) : model.gain_nlos(d);
        EXPECT_NEAR(sum / n / model.mean_gain(d), 1.0, 0.01) << "d=" << d;
    }
}

TEST(Supports, WindowOnAGridAngleHasOneIndex) {
    for (int m = 0; m < 8; ++m) {
        const auto s = support_from_angle(2.0 * std::numbers::pi * m / 8, 8, std::numbers::pi / 8);
        EXPECT_EQ(s, std::vector<int>{m});
    }
}

TEST(Supports, SymmetricWindowBetweenTwoAngles) {
    const double mid = std::numbers::pi / 8; // halfway between indices 0 and 1
    const auto s = support_from_angle(mid, 8, std::numbers::pi / 4 + 1e-9);
    EXPECT_EQ(s, (std::vector<int>{0, 1}));
    // across the 2 pi seam
    const auto w = support_from_angle(2.0 * std::numbers::pi - mid, 8, std::numbers::pi / 4 + 1e-9);
    EXPECT_EQ(w, (std::vector<int>{0, 7}));
}

TEST(Supports, FullSpreadCoversEverything) {
    const auto s = support_from_angle(1.234, 8, 2.0 * std::numbers::pi - 1e-12);
    EXPECT_EQ(s.size(), 8u);
}

TEST(Supports, EmptyWindowFallsBackToNearest) {
    const auto s = support_from_angle(0.3, 8, 0.01);
    EXPECT_EQ(s, std::vector<int>{0});
    const auto t = support_from_angle(0.5, 8, 0.01);
    EXPECT_EQ(t, std::vector<int>{1});
}

TEST(Supports, CountMatchesAngleEnumeration) {
    Engine rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 500; ++i) {
        const double theta = u(rng);
        const double delta = u(rng) * 0.999;
        const int m_ant = 4 + i % 13;
        int inside = 0;
        for (int m = 0; m < m_ant; ++m) {
            double d = std::abs(2.0 * std::numbers::pi * m / m_ant - theta);
            d = std::min(d, 2.0 * std::numbers::pi - d);
            inside += d <= delta / 2;
        }
        EXPECT_EQ(static_cast<int>(support_from_angle(theta, m_ant, delta).size()), std::max(inside, 1));
    }
}

TEST(Supports, Overlap) {
    EXPECT_EQ(support_overlap({0, 1, 2}, {2, 3}), 1);
    EXPECT_EQ(support_overlap({0, 1}, {2, 3}), 0);
    EXPECT_EQ(support_overlap({1, 3, 5}, {1, 3, 5}), 3);
}

TEST(Geometry, AngleUsesShortestDisplacement) {
    NetworkGeometry g;
    g.area_side = 50;
    g.ru_positions = {{1, 25}};
    g.ue_positions = {{49, 25}, {1, 30}};
    EXPECT_NEAR(g.angle(0, 0), std::numbers::pi, 1e-12);
    EXPECT_NEAR(g.angle(1, 0), std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(g.distance(0, 0), 2.0, 1e-12);
}
