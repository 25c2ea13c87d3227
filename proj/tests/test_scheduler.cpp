#include <cfmimo/association.hpp>
#include <cfmimo/oracles.hpp>
#include <cfmimo/scheduler.hpp>

#include <gtest/gtest.h>

using namespace cfmimo;

namespace {

using Graph = std::vector<std::vector<int>>;

Graph edges(int n, std::initializer_list<std::pair<int, int>> list) {
    Graph g(n);
    for (auto [a, b] : list) {
        g[a].push_back(b);
        g[b].push_back(a);
    }
    return g;
}

bool independent(const std::vector<int>& set, const Graph& g) {
    AssociationState a(static_cast<int>(g.size()), 0);
    a.conflicts = g;
    return is_independent(set, a);
}

} // namespace

TEST(Queues, UpdateRule) {
    std::vector<double> q{5.0, 1.0, 0.0};
    update_queues(q, std::vector<double>{3.0, 3.0, 0.0}, std::vector<double>{2.0, 0.0, 100.0});
    EXPECT_EQ(q, (std::vector<double>{4.0, 0.0, 100.0}));
}

TEST(Queues, NeverServedQueueIsNondecreasing) {
    SimConfig cfg;
    std::vector<double> q{0.0, 0.0};
    double prev = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto a = arrivals_pfs(q, cfg);
        update_queues(q, std::vector<double>{0.0, 1.0}, a);
        EXPECT_GE(q[0], prev);
        prev = q[0];
    }
}

TEST(Arrivals, Pfs) {
    SimConfig cfg;
    EXPECT_EQ(arrivals_pfs(std::vector<double>{10000.0}, cfg), std::vector<double>{1.0});
    EXPECT_EQ(arrivals_pfs(std::vector<double>{0.0}, cfg), std::vector<double>{100.0});
    EXPECT_EQ(arrivals_pfs(std::vector<double>{10.0}, cfg), std::vector<double>{100.0});
    EXPECT_EQ(arrivals_pfs(std::vector<double>{400.0}, cfg), std::vector<double>{25.0});
}

TEST(Arrivals, Hfs) {
    SimConfig cfg;
    EXPECT_EQ(arrivals_hfs(std::vector<double>{5000.0, 0.0}, cfg), (std::vector<double>{100.0, 100.0}));
    EXPECT_EQ(arrivals_hfs(std::vector<double>{9999.0, 1.0}, cfg), (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(arrivals_hfs(std::vector<double>{20000.0}, cfg), std::vector<double>{0.0});
}

TEST(Arrivals, IneligibleUesGetNothing) {
    SimConfig cfg;
    const std::vector<bool> eligible{true, false};
    EXPECT_EQ(arrivals_pfs(std::vector<double>{0.0, 0.0}, cfg, eligible), (std::vector<double>{100.0, 0.0}));
    // an ineligible queue does not count toward the HFS sum
    EXPECT_EQ(arrivals_hfs(std::vector<double>{10.0, 1e9}, cfg, eligible), (std::vector<double>{100.0, 0.0}));
    cfg.utility = Utility::HFS;
    EXPECT_EQ(compute_arrivals(std::vector<double>{1.0, 2.0}, cfg), (std::vector<double>{100.0, 100.0}));
}

TEST(Greedy, TopWeights) {
    const std::vector<double> w{5, 4, 3, 2}, q{1, 1, 1, 1};
    EXPECT_EQ(select_active_greedy(w, q, 2).active, (std::vector<int>{0, 1}));
    const std::vector<double> w2{2, 4, 5, 3};
    const Selection s = select_active_greedy(w2, q, 2);
    EXPECT_EQ(s.active, (std::vector<int>{1, 2}));
    EXPECT_EQ(s.objective, 9.0);
}

TEST(Greedy, EmptyQueuesAreNeverScheduled) {
    const std::vector<double> w{5, 4}, q{0, 0};
    EXPECT_TRUE(select_active_greedy(w, q, 2).active.empty());
    EXPECT_TRUE(select_active_conflict(w, q, Graph(2), 2).active.empty());
    const std::vector<double> q2{0, 3};
    EXPECT_EQ(select_active_greedy(w, q2, 2).active, std::vector<int>{1});
}

TEST(Greedy, SlackBudgetTakesEveryone) {
    const std::vector<double> w{1, 0, 2}, q{1, 1, 1};
    EXPECT_EQ(select_active_greedy(w, q, 10).active, (std::vector<int>{0, 1, 2}));
}

TEST(Greedy, TiesByIndex) {
    const std::vector<double> w{1, 2, 2, 2}, q{1, 1, 1, 1};
    EXPECT_EQ(select_active_greedy(w, q, 2).active, (std::vector<int>{1, 2}));
}

TEST(Greedy, MatchesBruteForceWithoutConflicts) {
    Engine rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 300; ++it) {
        const int n = 1 + it % 15;
        std::vector<double> w(n), q(n);
        for (int k = 0; k < n; ++k) {
            q[k] = u(rng) < 0.2 ? 0.0 : 1.0;
            w[k] = u(rng);
        }
        const int k_act = 1 + it % n;
        EXPECT_NEAR(select_active_greedy(w, q, k_act).objective,
                    oracles::brute_force_selection(w, q, Graph(n), k_act), 1e-12);
    }
}

TEST(Conflict, PathGraph) {
    const std::vector<double> w{3, 5, 3}, q{1, 1, 1};
    const Selection s = select_active_conflict(w, q, edges(3, {{0, 1}, {1, 2}}), 2);
    EXPECT_EQ(s.active, (std::vector<int>{0, 2}));
    EXPECT_EQ(s.objective, 6.0);
    EXPECT_TRUE(s.exact);
}

TEST(Conflict, NoEdgesEqualsGreedy) {
    const std::vector<double> w{2, 7, 1, 7, 3}, q{1, 1, 1, 1, 1};
    EXPECT_EQ(select_active_conflict(w, q, Graph(5), 3).active, select_active_greedy(w, q, 3).active);
}

TEST(Conflict, GreedyWarmStartIsNotOptimal) {
    // greedy takes the 10 hub and stops; the three leaves are worth more
    const std::vector<double> w{10, 4, 4, 4}, q{1, 1, 1, 1};
    const Selection s = select_active_conflict(w, q, edges(4, {{0, 1}, {0, 2}, {0, 3}}), 3);
    EXPECT_EQ(s.active, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(s.objective, 12.0);
}

TEST(Conflict, ZeroWeightsFillLeftoverCapacity) {
    const std::vector<double> w{5, 0, 0, 0}, q{1, 1, 1, 0};
    const Selection s = select_active_conflict(w, q, edges(4, {{0, 1}}), 3);
    EXPECT_EQ(s.active, (std::vector<int>{0, 2})); // 1 conflicts with 0, 3 has an empty queue
    EXPECT_EQ(s.objective, 5.0);
}

TEST(Conflict, MatchesBruteForce) {
    Engine rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 500; ++it) {
        const int n = 1 + it % 12;
        const int k_act = 1 + static_cast<int>(u(rng) * n);
        std::vector<double> w(n), q(n);
        for (int k = 0; k < n; ++k) {
            q[k] = u(rng) < 0.1 ? 0.0 : 50.0 * u(rng);
            w[k] = q[k] * std::round(4 * u(rng)) / 4.0; // coarse rates give ties
        }
        Graph g(n);
        const double p = u(rng);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (u(rng) < p) {
                    g[a].push_back(b);
                    g[b].push_back(a);
                }
        const Selection s = select_active_conflict(w, q, g, k_act, 1e9);
        EXPECT_TRUE(s.exact);
        EXPECT_LE(static_cast<int>(s.active.size()), k_act);
        EXPECT_TRUE(independent(s.active, g));
        for (int k : s.active)
            EXPECT_GT(q[k], 0.0);
        EXPECT_NEAR(s.objective, oracles::brute_force_selection(w, q, g, k_act), 1e-9);
    }
}

TEST(Conflict, WeightScalingKeepsTheSelection) {
    Engine rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        const int n = 10;
        std::vector<double> w(n), q(n, 1.0);
        for (double& x : w)
            x = u(rng);
        Graph g(n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (u(rng) < 0.3) {
                    g[a].push_back(b);
                    g[b].push_back(a);
                }
        std::vector<double> w2 = w;
        for (double& x : w2)
            x *= 8.0; // power of two: exact scaling
        EXPECT_EQ(select_active_conflict(w, q, g, 4).active, select_active_conflict(w2, q, g, 4).active);
    }
}

TEST(Conflict, BudgetExhaustionIsReported) {
    // dense random instance, near-zero budget: either finishes exactly or says so
    Engine rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 100;
    std::vector<double> w(n), q(n, 1.0);
    for (double& x : w)
        x = 1.0 + u(rng);
    Graph g(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (u(rng) < 0.1) {
                g[a].push_back(b);
                g[b].push_back(a);
            }
    const Selection s = select_active_conflict(w, q, g, 40, 1e-6);
    EXPECT_TRUE(independent(s.active, g));
    EXPECT_LE(s.active.size(), 40u);
    if (!s.exact)
        EXPECT_GT(s.objective, 0.0); // the greedy incumbent survives
}

TEST(Startup, RandomSelectionRespectsConflicts) {
    const Graph g = edges(6, {{0, 1}, {1, 2}, {3, 4}});
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Engine rng(seed);
        const auto s = select_random_conflict_free({0, 1, 2, 3, 4, 5}, g, 3, rng);
        EXPECT_LE(s.size(), 3u);
        EXPECT_TRUE(independent(s, g));
        EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    }
    Engine rng(1);
    EXPECT_EQ(select_random_conflict_free({2, 5, 7}, {}, 5, rng), (std::vector<int>{2, 5, 7}));
}
