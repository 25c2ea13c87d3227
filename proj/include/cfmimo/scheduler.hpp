#pragma once

#include "config.hpp"
#include "rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

namespace cfmimo {

/// Virtual-queue state of the drift-plus-penalty scheduler.
struct SchedulerState {
    std::vector<double> queues;   // Q_k(t), starts at zero
    std::vector<double> arrivals; // a_k of the current slot

    explicit SchedulerState(int num_ues = 0) : queues(num_ues, 0.0), arrivals(num_ues, 0.0) {}
};

/// Q_k <- max(Q_k - mu_k, 0) + a_k
inline void update_queues(std::span<double> queues, std::span<const double> served, std::span<const double> arrivals) {
    for (std::size_t k = 0; k < queues.size(); ++k)
        queues[k] = std::max(queues[k] - served[k], 0.0) + arrivals[k];
}

/// Proportional fairness: a_k = min(V / Q_k, A_max), A_max for an empty
/// queue. UEs with `eligible[k] == false` get no arrivals.
inline std::vector<double> arrivals_pfs(std::span<const double> queues, const SimConfig& cfg,
                                        const std::vector<bool>& eligible = {}) {
    std::vector<double> a(queues.size(), 0.0);
    for (std::size_t k = 0; k < queues.size(); ++k) {
        if (!eligible.empty() && !eligible[k])
            continue;
        a[k] = queues[k] > 0.0 ? std::min(cfg.v / queues[k], cfg.a_max) : cfg.a_max;
    }
    return a;
}

/// Hard fairness: every UE gets A_max if V > sum_k Q_k, otherwise nothing.
inline std::vector<double> arrivals_hfs(std::span<const double> queues, const SimConfig& cfg,
                                        const std::vector<bool>& eligible = {}) {
    double total = 0.0;
    for (std::size_t k = 0; k < queues.size(); ++k)
        if (eligible.empty() || eligible[k])
            total += queues[k];
    std::vector<double> a(queues.size(), 0.0);
    if (cfg.v > total)
        for (std::size_t k = 0; k < queues.size(); ++k)
            if (eligible.empty() || eligible[k])
                a[k] = cfg.a_max;
    return a;
}

inline std::vector<double> compute_arrivals(std::span<const double> queues, const SimConfig& cfg,
                                            const std::vector<bool>& eligible = {}) {
    return cfg.utility == Utility::PFS ? arrivals_pfs(queues, cfg, eligible) : arrivals_hfs(queues, cfg, eligible);
}

struct Selection {
    std::vector<int> active; // ascending UE indices
    double objective = 0.0;
    bool exact = true;
    std::uint64_t nodes = 0;
};

namespace detail {

/// UEs with a non-empty queue that may be scheduled, ordered by decreasing
/// weight with ties by index.
inline std::vector<int> ranked_candidates(std::span<const double> weights, std::span<const double> queues,
                                          const std::vector<bool>& eligible) {
    std::vector<int> c;
    for (std::size_t k = 0; k < weights.size(); ++k)
        if (queues[k] > 0.0 && (eligible.empty() || eligible[k]))
            c.push_back(static_cast<int>(k));
    std::stable_sort(c.begin(), c.end(), [&](int a, int b) { return weights[a] > weights[b]; });
    return c;
}

inline Selection finish(std::vector<int> chosen, std::span<const double> weights) {
    Selection s;
    std::sort(chosen.begin(), chosen.end());
    for (int k : chosen)
        s.objective += weights[k];
    s.active = std::move(chosen);
    return s;
}

} // namespace detail

/// Top-K_act UEs by weight Q_k * R_k among non-empty, eligible queues.
inline Selection select_active_greedy(std::span<const double> weights, std::span<const double> queues, int k_act,
                                      const std::vector<bool>& eligible = {}) {
    auto c = detail::ranked_candidates(weights, queues, eligible);
    if (static_cast<int>(c.size()) > k_act)
        c.resize(k_act);
    return detail::finish(std::move(c), weights);
}

/// Exact maximum-weight independent set of the conflict graph with at most
/// `k_act` members.
///
/// Best-bound-first branch and bound over the candidates in decreasing
/// weight order. The bound of a node adds the largest remaining weights that
/// are not blocked by a chosen neighbour, up to the free capacity, which
/// drops the conflicts among undecided UEs and can only overestimate. The
/// greedy independent set seeds the incumbent. If `budget_ms` runs out the
/// incumbent is returned with `exact == false`. Zero-weight candidates fill
/// leftover capacity in index order after the search.
inline Selection select_active_conflict(std::span<const double> weights, std::span<const double> queues,
                                        const std::vector<std::vector<int>>& conflicts, int k_act,
                                        double budget_ms = 2000.0, const std::vector<bool>& eligible = {}) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto ranked = detail::ranked_candidates(weights, queues, eligible);

    std::vector<int> items; // positive weights, decreasing
    std::vector<int> zero_items;
    for (int k : ranked)
        (weights[k] > 0.0 ? items : zero_items).push_back(k);
    const int n = static_cast<int>(items.size());
    const int words = (n + 63) / 64;
    using Bits = std::vector<std::uint64_t>;
    auto test = [](const Bits& b, int i) { return (b[i >> 6] >> (i & 63)) & 1ULL; };
    auto set = [](Bits& b, int i) { b[i >> 6] |= 1ULL << (i & 63); };

    std::vector<int> item_of(weights.size(), -1);
    for (int i = 0; i < n; ++i)
        item_of[items[i]] = i;
    std::vector<Bits> adj(n, Bits(words, 0));
    for (int i = 0; i < n; ++i)
        for (int other : conflicts[items[i]])
            if (item_of[other] >= 0)
                set(adj[i], item_of[other]);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = weights[items[i]];

    struct Node {
        double bound;
        double value;
        int depth;
        int count;
        Bits chosen;
        Bits blocked;
    };
    auto bound_of = [&](const Node& nd) {
        double b = nd.value;
        int room = k_act - nd.count;
        for (int i = nd.depth; i < n && room > 0; ++i)
            if (!test(nd.blocked, i) && !test(nd.chosen, i)) {
                b += w[i];
                --room;
            }
        return b;
    };

    // greedy warm start
    Bits best_set(words, 0);
    double best_value = 0.0;
    {
        Bits blocked(words, 0);
        int count = 0;
        for (int i = 0; i < n && count < k_act; ++i) {
            if (test(blocked, i))
                continue;
            set(best_set, i);
            best_value += w[i];
            ++count;
            for (int j = 0; j < words; ++j)
                blocked[j] |= adj[i][j];
        }
    }

    auto worse = [](const Node& a, const Node& b) {
        if (a.bound != b.bound)
            return a.bound < b.bound;
        return a.depth < b.depth;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    Node root{0.0, 0.0, 0, 0, Bits(words, 0), Bits(words, 0)};
    root.bound = bound_of(root);
    if (n > 0 && k_act > 0)
        open.push(std::move(root));

    Selection sel;
    std::uint64_t nodes = 0;
    while (!open.empty()) {
        if (open.top().bound <= best_value)
            break;
        Node nd = open.top();
        open.pop();
        ++nodes;
        if ((nodes & 255) == 0 &&
            std::chrono::duration<double, std::milli>(Clock::now() - start).count() > budget_ms) {
            sel.exact = false;
            break;
        }
        while (nd.depth < n && test(nd.blocked, nd.depth))
            ++nd.depth;
        if (nd.depth >= n || nd.count >= k_act)
            continue; // leaf: value already reflected in the incumbent
        const int i = nd.depth;

        Node take = nd;
        take.depth = i + 1;
        take.count += 1;
        take.value += w[i];
        set(take.chosen, i);
        for (int j = 0; j < words; ++j)
            take.blocked[j] |= adj[i][j];
        if (take.value > best_value) {
            best_value = take.value;
            best_set = take.chosen;
        }
        take.bound = bound_of(take);
        if (take.bound > best_value)
            open.push(std::move(take));

        Node skip = std::move(nd);
        skip.depth = i + 1;
        set(skip.blocked, i);
        skip.bound = bound_of(skip);
        if (skip.bound > best_value)
            open.push(std::move(skip));
    }

    std::vector<int> chosen;
    for (int i = 0; i < n; ++i)
        if (test(best_set, i))
            chosen.push_back(items[i]);
    std::sort(zero_items.begin(), zero_items.end());
    for (int k : zero_items) {
        if (static_cast<int>(chosen.size()) >= k_act)
            break;
        bool free = true;
        for (int other : conflicts[k])
            if (std::find(chosen.begin(), chosen.end(), other) != chosen.end()) {
                free = false;
                break;
            }
        if (free)
            chosen.push_back(k);
    }
    const bool exact = sel.exact;
    sel = detail::finish(std::move(chosen), weights);
    sel.exact = exact;
    sel.nodes = nodes;
    return sel;
}

/// Random selection of up to `k_act` candidates that respects the conflict
/// graph (empty `conflicts` means no constraint): shuffle, then add each UE
/// that does not conflict with those already taken.
inline std::vector<int> select_random_conflict_free(std::vector<int> candidates,
                                                    const std::vector<std::vector<int>>& conflicts, int k_act,
                                                    Engine& rng) {
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<int> chosen;
    std::vector<char> taken(conflicts.empty() ? 0 : conflicts.size(), 0);
    for (int k : candidates) {
        if (static_cast<int>(chosen.size()) >= k_act)
            break;
        bool ok = true;
        if (!conflicts.empty())
            for (int other : conflicts[k])
                if (taken[other]) {
                    ok = false;
                    break;
                }
        if (!ok)
            continue;
        chosen.push_back(k);
        if (!conflicts.empty())
            taken[k] = 1;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace cfmimo
