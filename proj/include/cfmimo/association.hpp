#pragma once

#include "config.hpp"
#include "topology.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <utility>
#include <vector>

namespace cfmimo {

inline constexpr int kNoPilot = -1;

/// UE-RU bipartite association, pilot indices and the conflict graph.
struct AssociationState {
    std::vector<std::vector<int>> clusters; // per UE: serving RUs
    std::vector<std::vector<int>> served;   // per RU: associated UEs, ascending
    std::vector<int> pilots;                // per UE, kNoPilot when unassigned
    std::vector<std::pair<int, int>> conflict_edges; // k < k'
    std::vector<std::vector<int>> conflicts;          // adjacency of conflict_edges

    AssociationState() = default;
    AssociationState(int num_ues, int num_rus)
        : clusters(num_ues), served(num_rus), pilots(num_ues, kNoPilot), conflicts(num_ues) {}

    int num_ues() const { return static_cast<int>(clusters.size()); }
    int num_rus() const { return static_cast<int>(served.size()); }

    bool serves(int ru, int ue) const {
        const auto& u = served[ru];
        return std::binary_search(u.begin(), u.end(), ue);
    }

    void associate(int ue, int ru) {
        clusters[ue].push_back(ru);
        auto& u = served[ru];
        u.insert(std::upper_bound(u.begin(), u.end(), ue), ue);
    }

    bool in_conflict(int a, int b) const {
        const auto& n = conflicts[a];
        return std::find(n.begin(), n.end(), b) != n.end();
    }
};

/// Association threshold eta / (M * SNR) on the LSFC.
inline double association_threshold(const NetworkGeometry& g, const SimConfig& cfg) {
    return cfg.eta / (cfg.antennas * g.snr);
}

/// Up to Q_max RUs with the largest LSFC among those meeting the threshold,
/// ordered by decreasing LSFC (ties by RU index).
inline std::vector<int> form_cluster(int ue, const NetworkGeometry& g, const SimConfig& cfg) {
    const double thr = association_threshold(g, cfg);
    const auto& beta = g.lsfc[ue];
    std::vector<int> eligible;
    for (int l = 0; l < g.num_rus(); ++l)
        if (beta[l] >= thr)
            eligible.push_back(l);
    std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) { return beta[a] > beta[b]; });
    if (static_cast<int>(eligible.size()) > cfg.max_cluster)
        eligible.resize(cfg.max_cluster);
    return eligible;
}

namespace detail {

/// Number of distinct already-associated UEs that would conflict with `ue`
/// on each pilot, counting RUs in `rus` only.
inline std::vector<int> copilot_conflict_counts(int ue, const std::vector<int>& rus, const AssociationState& a,
                                                const NetworkGeometry& g, int num_pilots) {
    std::vector<int> count(num_pilots, 0);
    std::vector<char> seen(a.num_ues(), 0);
    for (int l : rus)
        for (int other : a.served[l]) {
            if (other == ue || seen[other] || a.pilots[other] == kNoPilot)
                continue;
            if (support_overlap(g.supports[ue][l], g.supports[other][l]) > 0) {
                seen[other] = 1;
                ++count[a.pilots[other]];
            }
        }
    return count;
}

inline int least_conflicting_pilot(const std::vector<int>& count) {
    // min_element returns the first minimum: lowest pilot index on ties
    return static_cast<int>(std::min_element(count.begin(), count.end()) - count.begin());
}

} // namespace detail

/// Edge (k, k') iff the UEs share an RU, share a pilot, and their angular
/// supports overlap at one or more shared RUs.
inline void build_conflict_graph(AssociationState& a, const NetworkGeometry& g) {
    a.conflict_edges.clear();
    a.conflicts.assign(a.num_ues(), {});
    for (int k = 0; k < a.num_ues(); ++k) {
        if (a.pilots[k] == kNoPilot)
            continue;
        for (int j = k + 1; j < a.num_ues(); ++j) {
            if (a.pilots[j] != a.pilots[k])
                continue;
            int overlap = 0;
            for (int l : a.clusters[k])
                if (a.serves(l, j))
                    overlap += support_overlap(g.supports[k][l], g.supports[j][l]);
            if (overlap > 0) {
                a.conflict_edges.emplace_back(k, j);
                a.conflicts[k].push_back(j);
                a.conflicts[j].push_back(k);
            }
        }
    }
}

/// Permanent pilot and cluster assignment for every UE, processed in index
/// order, followed by conflict graph construction.
inline AssociationState assign_pilots_fixed(const NetworkGeometry& g, const SimConfig& cfg) {
    AssociationState a(g.num_ues(), g.num_rus());
    for (int k = 0; k < g.num_ues(); ++k) {
        const auto cluster = form_cluster(k, g, cfg);
        const auto count = detail::copilot_conflict_counts(k, cluster, a, g, cfg.pilots);
        a.pilots[k] = detail::least_conflicting_pilot(count);
        for (int l : cluster)
            a.associate(k, l);
    }
    build_conflict_graph(a, g);
    return a;
}

/// Order in which the per-slot reassignment visits the active UEs.
inline std::vector<int> baseline_order(std::vector<int> active, const NetworkGeometry& g, const SimConfig& cfg) {
    std::sort(active.begin(), active.end());
    if (cfg.baseline_order == BaselineOrder::MaxLsfc) {
        auto best = [&](int k) { return *std::max_element(g.lsfc[k].begin(), g.lsfc[k].end()); };
        std::stable_sort(active.begin(), active.end(), [&](int a, int b) { return best(a) > best(b); });
    }
    return active;
}

/// Per-slot pilot and cluster reassignment for the active UEs.
///
/// Each UE takes the pilot with the fewest subspace-overlapping co-pilot UEs
/// at its candidate RUs. A candidate RU that already serves such a UE on the
/// chosen pilot is then left out of the cluster, so conflicts are avoided by
/// shrinking clusters rather than by constraining the schedule.
inline AssociationState assign_pilots_baseline(const std::vector<int>& active, const NetworkGeometry& g,
                                               const SimConfig& cfg) {
    AssociationState a(g.num_ues(), g.num_rus());
    for (int k : baseline_order(active, g, cfg)) {
        const auto candidates = form_cluster(k, g, cfg);
        const auto count = detail::copilot_conflict_counts(k, candidates, a, g, cfg.pilots);
        const int p = detail::least_conflicting_pilot(count);
        a.pilots[k] = p;
        for (int l : candidates) {
            bool blocked = false;
            for (int other : a.served[l])
                if (a.pilots[other] == p && support_overlap(g.supports[k][l], g.supports[other][l]) > 0) {
                    blocked = true;
                    break;
                }
            if (!blocked)
                a.associate(k, l);
        }
    }
    return a;
}

/// True when no two members of `set` are adjacent in the conflict graph.
inline bool is_independent(const std::vector<int>& set, const AssociationState& a) {
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            if (a.in_conflict(set[i], set[j]))
                return false;
    return true;
}

inline void export_conflict_graph(const AssociationState& a, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "conflict_edges.csv");
    csv << "ue_a,ue_b,pilot\n";
    for (auto [k, j] : a.conflict_edges)
        csv << k << ',' << j << ',' << a.pilots[k] << '\n';
    std::ofstream dot(dir / "conflict_graph.dot");
    dot << "graph conflicts {\n";
    for (int k = 0; k < a.num_ues(); ++k)
        dot << "  " << k << " [label=\"" << k << " p" << a.pilots[k] << "\"];\n";
    for (auto [k, j] : a.conflict_edges)
        dot << "  " << k << " -- " << j << ";\n";
    dot << "}\n";
}

} // namespace cfmimo
