#pragma once

#include "association.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "rate_control.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "scheduler.hpp"
#include "topology.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cfmimo {

struct QueueTraceRow {
    int slot = 0;
    int active = 0;
    double objective = 0.0;
    bool exact = true;
    double sum_queue = 0.0; // after the update
    double max_queue = 0.0;
};

struct RunResult {
    SimConfig config;
    double snr = 0.0;
    std::vector<double> throughput;  // mean service rate per UE over counted slots
    std::vector<double> service_sum; // accumulator behind `throughput`
    int counted_slots = 0;
    /// Mutual-information samples per UE from the counted slots it was active in.
    std::vector<std::vector<double>> mutual_info;
    std::vector<QueueTraceRow> queue_trace;
    std::vector<int> unservable;
    int inexact_slots = 0;
    std::vector<RateWindow> windows;
    /// Per counted slot, per UE service rate (only with keep_service_log).
    std::vector<std::vector<double>> service_log;
    NetworkGeometry geometry;
    std::optional<AssociationState> fixed_association;
    double wall_seconds = 0.0;
};

/// Read-only view of one simulated slot, handed to a RunOptions observer.
struct SlotView {
    int slot;
    bool startup;
    const std::vector<int>& active;
    const AssociationState& association;
    const SlotRealization& realization;
    const ChannelEstimates& estimates;
    const ReceiveVectors& vectors;
    const SlotRates& rates;
};

struct RunOptions {
    bool estimate_terms = false; // decompose estimates (diagnostics)
    std::function<void(const SlotView&)> observer;
};

namespace detail {

inline void check_slot(int t, const std::vector<int>& active, const SimConfig& cfg, const AssociationState& a,
                       const ReceiveVectors& rv) {
    auto fail = [t](const std::string& what) {
        throw InvariantViolation("slot " + std::to_string(t) + ": " + what);
    };
    if (static_cast<int>(active.size()) > cfg.active_users)
        fail("active set exceeds K_act");
    if (cfg.scheme == Scheme::FixedConflict && !is_independent(active, a))
        fail("active set violates the conflict graph");
    for (int k : active) {
        for (int l : a.clusters[k])
            if (!a.serves(l, k))
                fail("association graph is inconsistent for UE " + std::to_string(k));
        if (a.clusters[k].empty())
            continue;
        for (const auto& v : rv.vectors) {
            const double n = v.col(k).norm();
            if (n != 0.0 && std::abs(n - 1.0) > 1e-9)
                fail("receive vector of UE " + std::to_string(k) + " is not unit norm");
        }
    }
}

} // namespace detail

/// One complete simulation: setup, start-up phase, scheduled slots.
inline RunResult run(const SimConfig& cfg, const RunOptions& opts = {}) {
    cfg.validate();
    const auto wall_start = std::chrono::steady_clock::now();
    RunResult res;
    res.config = cfg;
    res.geometry = make_geometry(cfg);
    const NetworkGeometry& g = res.geometry;
    res.snr = g.snr;
    const int num_ues = g.num_ues();

    std::vector<bool> eligible(num_ues);
    std::vector<int> servable;
    for (int k = 0; k < num_ues; ++k) {
        eligible[k] = !form_cluster(k, g, cfg).empty();
        if (eligible[k])
            servable.push_back(k);
        else
            res.unservable.push_back(k);
    }

    static const std::vector<std::vector<int>> no_conflicts;
    if (cfg.scheme == Scheme::FixedConflict)
        res.fixed_association = assign_pilots_fixed(g, cfg);
    const auto& conflicts = res.fixed_association ? res.fixed_association->conflicts : no_conflicts;

    res.windows.assign(num_ues, RateWindow(cfg.window));
    res.mutual_info.assign(num_ues, {});
    res.service_sum.assign(num_ues, 0.0);
    SchedulerState state(num_ues);
    std::vector<double> weights(num_ues, 0.0);
    std::vector<double> served(num_ues, 0.0);

    const int total = cfg.startup_slots + cfg.slots;
    for (int t = 0; t < total; ++t) {
        const bool startup = t < cfg.startup_slots;
        Selection sel;
        if (startup) {
            Engine rng = make_engine(cfg.seed, Stream::Startup, {std::uint64_t(t)});
            sel.active = select_random_conflict_free(servable, conflicts, cfg.active_users, rng);
        } else {
            state.arrivals = compute_arrivals(state.queues, cfg, eligible);
            for (int k = 0; k < num_ues; ++k)
                weights[k] = state.queues[k] * res.windows[k].expected_rate();
            sel = cfg.scheme == Scheme::Baseline
                      ? select_active_greedy(weights, state.queues, cfg.active_users, eligible)
                      : select_active_conflict(weights, state.queues, conflicts, cfg.active_users,
                                               cfg.solver_budget_ms, eligible);
            if (!sel.exact)
                ++res.inexact_slots;
        }

        AssociationState slot_assoc;
        if (cfg.scheme == Scheme::Baseline)
            slot_assoc = assign_pilots_baseline(sel.active, g, cfg);
        const AssociationState& assoc = cfg.scheme == Scheme::Baseline ? slot_assoc : *res.fixed_association;

        const SlotRealization real = draw_channel(g, sel.active, cfg, t);
        const ChannelEstimates est = estimate_channels(real, assoc, g, cfg, opts.estimate_terms);
        const ReceiveVectors rv = combine(real, est, assoc, g, cfg);
        const SlotRates rates = compute_sinr(real, rv, g.snr);
        detail::check_slot(t, sel.active, cfg, assoc, rv);

        std::fill(served.begin(), served.end(), 0.0);
        for (int k : sel.active)
            served[k] = service_rate(true, res.windows[k].rate(), rates.mutual_info[k], cfg);

        if (!startup) {
            update_queues(state.queues, served, state.arrivals);
            QueueTraceRow row;
            row.slot = t;
            row.active = static_cast<int>(sel.active.size());
            row.objective = sel.objective;
            row.exact = sel.exact;
            for (double q : state.queues) {
                row.sum_queue += q;
                row.max_queue = std::max(row.max_queue, q);
            }
            res.queue_trace.push_back(row);
        }

        if (!startup || cfg.include_startup) {
            ++res.counted_slots;
            for (int k = 0; k < num_ues; ++k)
                res.service_sum[k] += served[k];
            for (int k : sel.active)
                res.mutual_info[k].push_back(rates.mutual_info[k]);
            if (cfg.keep_service_log)
                res.service_log.push_back(served);
        }

        if (opts.observer)
            opts.observer(SlotView{t, startup, sel.active, assoc, real, est, rv, rates});

        for (int k : sel.active)
            res.windows[k].record_sample(rates.mutual_info[k]);
    }

    res.throughput.assign(num_ues, 0.0);
    if (res.counted_slots > 0)
        for (int k = 0; k < num_ues; ++k)
            res.throughput[k] = res.service_sum[k] / res.counted_slots;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return res;
}

struct CdfPoint {
    double value;
    double cdf;
};

/// Empirical CDF of `values` as (sorted value, rank / N).
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> out;
    out.reserve(values.size());
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back({values[i], double(i + 1) / n});
    return out;
}

struct PooledThroughput {
    std::vector<double> values; // sorted
    std::vector<CdfPoint> cdf;
};

/// Pools per-UE throughputs of runs that differ only in their seed.
inline PooledThroughput aggregate(const std::vector<RunResult>& results) {
    PooledThroughput out;
    if (results.empty())
        return out;
    auto key = [](SimConfig c) {
        c.seed = 0;
        return to_key_values(c);
    };
    const std::string ref = key(results.front().config);
    for (const auto& r : results) {
        if (key(r.config) != ref)
            throw ConfigError("aggregate: runs differ in more than the seed");
        out.values.insert(out.values.end(), r.throughput.begin(), r.throughput.end());
    }
    std::sort(out.values.begin(), out.values.end());
    out.cdf = empirical_cdf(out.values);
    return out;
}

/// UE whose throughput is the lower median.
inline int median_ue(const std::vector<double>& throughput) {
    std::vector<int> idx(throughput.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return throughput[a] < throughput[b]; });
    return idx.empty() ? -1 : idx[(idx.size() - 1) / 2];
}

} // namespace cfmimo
