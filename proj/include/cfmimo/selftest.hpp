#pragma once

// Oracle and invariant checks shared by the acceptance test and the
// `selftest` subcommand. Each check returns one pass/fail line.

#include "engine.hpp"
#include "oracles.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace cfmimo::selftest {

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline double sample_std(const std::vector<double>& x) {
    if (x.size() < 2)
        return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
    double s = 0.0;
    for (double v : x)
        s += (v - mean) * (v - mean);
    return std::sqrt(s / double(x.size() - 1));
}

inline double mean(const std::vector<double>& x) {
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

/// Value at rank ceil(q * n) of an ascending sample (empirical quantile).
inline double quantile(std::vector<double> x, double q) {
    std::sort(x.begin(), x.end());
    const auto n = x.size();
    auto i = static_cast<std::size_t>(std::ceil(q * double(n)));
    i = std::clamp<std::size_t>(i, 1, n);
    return x[i - 1];
}

} // namespace detail

/// Branch and bound against enumeration on random instances with at most 12
/// UEs, and against the greedy sort when there are no conflicts.
inline CheckResult check_solver_exactness(int instances = 500, std::uint64_t seed = 1) {
    CheckResult res{"solver exactness", true, ""};
    Engine rng(stream_seed(seed, Stream::Startup, {0xb0b}));
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    int greedy_mismatches = 0;
    for (int it = 0; it < instances; ++it) {
        const int n = size(rng);
        const int k_act = std::uniform_int_distribution<int>(1, n)(rng);
        const double density = u(rng);
        std::vector<double> q(n), w(n);
        for (int k = 0; k < n; ++k) {
            q[k] = u(rng) < 0.15 ? 0.0 : 1.0 + 100.0 * u(rng);
            // coarse values force ties now and then
            w[k] = u(rng) < 0.2 ? 0.0 : std::round(10.0 * u(rng)) * q[k];
        }
        std::vector<std::vector<int>> adj(n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (u(rng) < density) {
                    adj[a].push_back(b);
                    adj[b].push_back(a);
                }
        const Selection s = select_active_conflict(w, q, adj, k_act, 1e9);
        const double ref = oracles::brute_force_selection(w, q, adj, k_act);
        AssociationState graph(n, 0);
        graph.conflicts = adj;
        const bool feasible = static_cast<int>(s.active.size()) <= k_act && is_independent(s.active, graph);
        if (!feasible || std::abs(s.objective - ref) > 1e-9 * std::max(1.0, ref) || !s.exact)
            ++mismatches;

        const std::vector<std::vector<int>> none(n);
        const Selection a = select_active_conflict(w, q, none, k_act, 1e9);
        const Selection b = select_active_greedy(w, q, k_act);
        if (std::abs(a.objective - b.objective) > 1e-9 * std::max(1.0, b.objective))
            ++greedy_mismatches;
    }
    res.pass = mismatches == 0 && greedy_mismatches == 0;
    res.detail = std::to_string(instances) + " instances, " + std::to_string(mismatches) +
                 " brute-force mismatches, " + std::to_string(greedy_mismatches) + " greedy mismatches";
    return res;
}

/// optimize_rate against a direct candidate scan on random windows, plus the
/// {1, 2, 3} example.
inline CheckResult check_rate_oracle(int windows = 1000, std::uint64_t seed = 1) {
    CheckResult res{"rate-adaptation oracle", true, ""};
    Engine rng(stream_seed(seed, Stream::Startup, {0xa7e}));
    std::uniform_int_distribution<int> len(1, 100);
    std::exponential_distribution<double> expo(0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int it = 0; it < windows; ++it) {
        std::vector<double> s(len(rng));
        const bool discrete = u(rng) < 0.3;
        for (double& x : s)
            x = discrete ? std::floor(4.0 * u(rng)) : expo(rng);
        const RateChoice a = optimize_rate(s);
        const RateChoice b = oracles::scan_rate(s);
        if (a.rate != b.rate || std::abs(a.expected - b.expected) > 1e-12 * std::max(1.0, b.expected))
            ++mismatches;
    }
    const std::vector<double> ex{1.0, 2.0, 3.0};
    const RateChoice c = optimize_rate(ex);
    const bool example = c.rate == 2.0 && c.expected == 2.0 * (2.0 / 3.0);
    res.pass = mismatches == 0 && example;
    res.detail = std::to_string(windows) + " windows, " + std::to_string(mismatches) + " mismatches; {1,2,3} -> r*=" +
                 detail::fmt(c.rate) + ", R=" + detail::fmt(c.expected);
    return res;
}

/// PFS and HFS arrivals at V = 10000, A_max = 100 against direct
/// substitution, including both boundaries.
inline CheckResult check_arrivals() {
    CheckResult res{"closed-form arrivals", true, ""};
    SimConfig cfg;
    cfg.v = 10000.0;
    cfg.a_max = 100.0;
    std::vector<std::string> failed;
    auto expect = [&](const char* what, const std::vector<double>& got, const std::vector<double>& want) {
        if (got != want)
            failed.push_back(what);
    };
    expect("pfs Q=10000", arrivals_pfs(std::vector<double>{10000.0}, cfg), {1.0});
    expect("pfs Q=0", arrivals_pfs(std::vector<double>{0.0}, cfg), {100.0});
    expect("pfs V/Q>A_max", arrivals_pfs(std::vector<double>{50.0}, cfg), {100.0});
    expect("pfs V/Q=A_max", arrivals_pfs(std::vector<double>{100.0}, cfg), {100.0});
    expect("pfs mixed", arrivals_pfs(std::vector<double>{0.0, 400.0, 20000.0}, cfg), {100.0, 25.0, 0.5});
    expect("hfs sum=5000", arrivals_hfs(std::vector<double>{2500.0, 2500.0}, cfg), {100.0, 100.0});
    expect("hfs sum=V", arrivals_hfs(std::vector<double>{4000.0, 6000.0}, cfg), {0.0, 0.0});
    expect("hfs sum>V", arrivals_hfs(std::vector<double>{20000.0, 0.0}, cfg), {0.0, 0.0});
    expect("hfs empty", arrivals_hfs(std::vector<double>{0.0, 0.0, 0.0}, cfg), {100.0, 100.0, 100.0});
    res.pass = failed.empty();
    res.detail = failed.empty() ? "9 cases exact" : "failed:";
    for (const auto& f : failed)
        res.detail += " [" + f + "]";
    return res;
}

/// Monte-Carlo channel power, projector algebra, unit norms, zero blocks and
/// the two-path SINR evaluation.
inline CheckResult check_channel_statistics(int draws = 100000, int slots = 60, std::uint64_t seed = 1) {
    CheckResult res{"channel statistics", true, ""};
    std::ostringstream d;

    // E|h_lk|^2 = M beta for every RU of one UE at the default geometry
    SimConfig one;
    one.users = 1;
    one.active_users = 1;
    one.seed = seed;
    const NetworkGeometry g1 = make_geometry(one);
    std::vector<double> power(g1.num_rus(), 0.0);
    for (int t = 0; t < draws; ++t) {
        const SlotRealization r = draw_channel(g1, {0}, one, t);
        for (int l = 0; l < g1.num_rus(); ++l)
            power[l] += r.channels[0].col(0).segment(l * one.antennas, one.antennas).squaredNorm();
    }
    double worst = 0.0;
    for (int l = 0; l < g1.num_rus(); ++l)
        worst = std::max(worst, std::abs(power[l] / draws / (one.antennas * g1.lsfc[0][l]) - 1.0));
    const bool power_ok = worst <= 0.02;
    d << "power dev " << detail::fmt(worst) << " over " << draws << " draws";

    // projector F_S F_S^H: idempotent and Hermitian
    double proj_err = 0.0;
    for (int m = 1; m <= 16; ++m)
        for (int first = 0; first < m; ++first)
            for (int len = 1; len <= m; ++len) {
                std::vector<int> s;
                for (int i = 0; i < len; ++i)
                    s.push_back((first + i) % m);
                std::sort(s.begin(), s.end());
                const Eigen::MatrixXcd f = dft_columns(m, s);
                const Eigen::MatrixXcd p = f * f.adjoint();
                proj_err = std::max(proj_err, (p * p - p).cwiseAbs().maxCoeff());
                proj_err = std::max(proj_err, (p - p.adjoint()).cwiseAbs().maxCoeff());
            }
    const bool proj_ok = proj_err <= 1e-9;
    d << "; projector err " << detail::fmt(proj_err);

    // short default-preset runs of both schemes, F = 2
    double norm_err = 0.0;
    double sinr_err = 0.0;
    bool zero_blocks = true;
    for (Scheme scheme : {Scheme::Baseline, Scheme::FixedConflict}) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.scheme = scheme;
        cfg.rbs = 2;
        cfg.startup_slots = slots / 2;
        cfg.slots = slots - slots / 2;
        RunOptions opts;
        const double snr = calibrated_snr(cfg);
        opts.observer = [&](const SlotView& v) {
            const auto scalar = oracles::sinr_scalar(v.realization, v.vectors, snr);
            for (std::size_t f = 0; f < scalar.size(); ++f)
                for (int k : v.active) {
                    const double a = v.rates.sinr[f][k];
                    sinr_err = std::max(sinr_err, std::abs(a - scalar[f][k]) / std::max(1.0, std::abs(a)));
                    const auto col = v.vectors.vectors[f].col(k);
                    if (!v.association.clusters[k].empty())
                        norm_err = std::max(norm_err, std::abs(col.norm() - 1.0));
                    for (int l = 0; l < v.realization.num_rus; ++l)
                        if (!v.association.serves(l, k) &&
                            col.segment(l * cfg.antennas, cfg.antennas).cwiseAbs().maxCoeff() != 0.0)
                            zero_blocks = false;
                }
        };
        run(cfg, opts);
    }
    const bool norm_ok = norm_err <= 1e-9;
    const bool sinr_ok = sinr_err <= 1e-10;
    d << "; unit-norm err " << detail::fmt(norm_err) << "; zero blocks " << (zero_blocks ? "ok" : "VIOLATED")
      << "; dual-path SINR rel err " << detail::fmt(sinr_err);
    res.pass = power_ok && proj_ok && norm_ok && sinr_ok && zero_blocks;
    res.detail = d.str();
    return res;
}

/// Noise-free fixed-scheme run: the contamination from co-pilot UEs served
/// by the same RU is exactly zero in every estimate of a scheduled UE, and
/// every scheduled set is independent in the conflict graph.
inline CheckResult check_conflict_soundness(int slots = 1000, std::uint64_t seed = 1, int startup = 100) {
    CheckResult res{"conflict soundness", true, ""};
    SimConfig cfg;
    cfg.seed = seed;
    cfg.scheme = Scheme::FixedConflict;
    cfg.pilot_noise = false;
    cfg.startup_slots = startup;
    cfg.slots = slots;
    long long checked = 0;
    long long nonzero = 0;
    long long dependent = 0;
    double leakage_max = 0.0;
    RunOptions opts;
    opts.estimate_terms = true;
    opts.observer = [&](const SlotView& v) {
        if (!is_independent(v.active, v.association))
            ++dependent;
        const int m_ant = v.realization.antennas;
        for (std::size_t f = 0; f < v.estimates.terms.size(); ++f) {
            const auto& t = v.estimates.terms[f];
            for (int k : v.active)
                for (int l : v.association.clusters[k]) {
                    ++checked;
                    if (t.served_contamination.col(k).segment(l * m_ant, m_ant).cwiseAbs().maxCoeff() != 0.0)
                        ++nonzero;
                    leakage_max =
                        std::max(leakage_max, t.leakage.col(k).segment(l * m_ant, m_ant).cwiseAbs().maxCoeff());
                }
        }
    };
    const RunResult r = run(cfg, opts);
    res.pass = nonzero == 0 && dependent == 0 && checked > 0;
    res.detail = std::to_string(checked) + " (UE, RU, RB) estimates, " + std::to_string(nonzero) +
                 " with nonzero served co-pilot contamination, " + std::to_string(dependent) +
                 " dependent sets; " + std::to_string(r.fixed_association->conflict_edges.size()) +
                 " conflict edges; max unserved-RU leakage " + detail::fmt(leakage_max);
    return res;
}

/// Default-preset runs for both utilities and both schemes over the seeds.
struct SchemeRuns {
    std::vector<int> seeds;
    int slots = 0;
    // [utility][scheme][seed index], utility 0 = PFS, scheme 0 = Baseline
    std::vector<RunResult> runs[2][2];
};

inline SchemeRuns run_scheme_grid(const std::vector<int>& seeds, int slots, int rbs = 1) {
    SchemeRuns out;
    out.seeds = seeds;
    out.slots = slots;
    const int n = static_cast<int>(seeds.size());
    for (auto& u : out.runs)
        for (auto& s : u)
            s.resize(n);
    parallel_for(4 * n, [&](int job) {
        const int u = job / (2 * n);
        const int s = (job / n) % 2;
        const int i = job % n;
        SimConfig cfg;
        cfg.utility = u == 0 ? Utility::PFS : Utility::HFS;
        cfg.scheme = s == 0 ? Scheme::Baseline : Scheme::FixedConflict;
        cfg.rbs = rbs;
        cfg.slots = slots;
        cfg.seed = static_cast<std::uint64_t>(seeds[i]);
        out.runs[u][s][i] = run(cfg);
    });
    return out;
}

inline std::vector<const RunResult*> all_runs(const SchemeRuns& g) {
    std::vector<const RunResult*> out;
    for (const auto& u : g.runs)
        for (const auto& s : u)
            for (const auto& r : s)
                out.push_back(&r);
    return out;
}

/// Pooled CDF of the fixed scheme at least the baseline's minus 0.02 at
/// every decile, and a strictly larger pooled mean, for both utilities.
inline CheckResult check_scheme_ordering(const SchemeRuns& g, double tolerance = 0.02) {
    CheckResult res{"scheme ordering", true, ""};
    std::ostringstream d;
    for (int u = 0; u < 2; ++u) {
        const PooledThroughput base = aggregate(g.runs[u][0]);
        const PooledThroughput fixed = aggregate(g.runs[u][1]);
        double worst = std::numeric_limits<double>::infinity();
        for (int dec = 1; dec <= 9; ++dec)
            worst = std::min(worst, detail::quantile(fixed.values, dec / 10.0) -
                                        detail::quantile(base.values, dec / 10.0));
        const double mb = detail::mean(base.values);
        const double mf = detail::mean(fixed.values);
        const bool ok = worst >= -tolerance && mf > mb;
        res.pass = res.pass && ok;
        d << (u == 0 ? "PFS" : "HFS") << ": min decile gap " << detail::fmt(worst) << ", mean " << detail::fmt(mf)
          << " vs " << detail::fmt(mb) << (ok ? "" : " (fail)") << (u == 0 ? "; " : "");
    }
    d << " [" << g.seeds.size() << " seeds, " << g.slots << " slots]";
    res.detail = d.str();
    return res;
}

/// Per seed and scheme, p90/p10 of the per-UE throughput is smaller under
/// HFS than under PFS.
inline CheckResult check_fairness_shape(const SchemeRuns& g) {
    CheckResult res{"fairness shape", true, ""};
    std::ostringstream d;
    double worst_hfs = 0.0;
    double best_pfs = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 2; ++s)
        for (std::size_t i = 0; i < g.seeds.size(); ++i) {
            auto ratio = [](const std::vector<double>& x) {
                const double p10 = detail::quantile(x, 0.1);
                return p10 > 0.0 ? detail::quantile(x, 0.9) / p10 : std::numeric_limits<double>::infinity();
            };
            const double pfs = ratio(g.runs[0][s][i].throughput);
            const double hfs = ratio(g.runs[1][s][i].throughput);
            worst_hfs = std::max(worst_hfs, hfs);
            best_pfs = std::min(best_pfs, pfs);
            if (!(hfs < pfs)) {
                res.pass = false;
                d << "seed " << g.seeds[i] << " " << (s ? "fixed" : "baseline") << ": " << detail::fmt(hfs)
                  << " >= " << detail::fmt(pfs) << "; ";
            }
        }
    d << "largest HFS p90/p10 " << detail::fmt(worst_hfs) << ", smallest PFS p90/p10 " << detail::fmt(best_pfs);
    res.detail = d.str();
    return res;
}

/// max_k Q_k over the last `window` slots is at most `factor` times its
/// median over the same slots, in every run given.
inline CheckResult check_queue_stability(const std::vector<const RunResult*>& runs, int window = 1000,
                                         double factor = 10.0) {
    CheckResult res{"queue stability", true, ""};
    double worst = 0.0;
    for (const RunResult* r : runs) {
        const auto& tr = r->queue_trace;
        if (static_cast<int>(tr.size()) < window) {
            res.pass = false;
            res.detail = "run shorter than the window";
            return res;
        }
        std::vector<double> m;
        for (auto it = tr.end() - window; it != tr.end(); ++it)
            m.push_back(it->max_queue);
        const double peak = *std::max_element(m.begin(), m.end());
        const double med = detail::quantile(m, 0.5);
        const double ratio = med > 0.0 ? peak / med : std::numeric_limits<double>::infinity();
        worst = std::max(worst, ratio);
        if (!(peak <= factor * med))
            res.pass = false;
    }
    res.detail = std::to_string(runs.size()) + " runs, worst max/median of max_k Q_k over the last " +
                 std::to_string(window) + " slots " + detail::fmt(worst);
    return res;
}

/// PFS, fixed-scheme runs of the given seeds at `rbs` resource blocks.
inline std::vector<RunResult> run_pfs_fixed(const std::vector<int>& seeds, int slots, int rbs) {
    std::vector<RunResult> out(seeds.size());
    parallel_for(static_cast<int>(seeds.size()), [&](int i) {
        SimConfig cfg;
        cfg.utility = Utility::PFS;
        cfg.scheme = Scheme::FixedConflict;
        cfg.slots = slots;
        cfg.rbs = rbs;
        cfg.seed = static_cast<std::uint64_t>(seeds[i]);
        out[i] = run(cfg);
    });
    return out;
}

/// F = 8 against F = 1, matched by seed. Mean throughput must grow, and the
/// mutual information of the median-throughput UE of the F = 1 run must
/// fluctuate less.
inline CheckResult check_wideband_gain(const std::vector<RunResult>& narrow, const std::vector<RunResult>& wide) {
    CheckResult res{"wideband gain", true, ""};
    std::ostringstream d;
    double min_gain = std::numeric_limits<double>::infinity();
    double max_std_ratio = 0.0;
    for (std::size_t i = 0; i < narrow.size(); ++i) {
        const double gain = detail::mean(wide[i].throughput) - detail::mean(narrow[i].throughput);
        const int ue = median_ue(narrow[i].throughput);
        const double s1 = detail::sample_std(narrow[i].mutual_info[ue]);
        const double s8 = detail::sample_std(wide[i].mutual_info[ue]);
        min_gain = std::min(min_gain, gain);
        max_std_ratio = std::max(max_std_ratio, s1 > 0.0 ? s8 / s1 : std::numeric_limits<double>::infinity());
        if (!(gain > 0.0) || !(s8 < s1)) {
            res.pass = false;
            d << "seed " << narrow[i].config.seed << ": gain " << detail::fmt(gain) << ", std " << detail::fmt(s8)
              << " vs " << detail::fmt(s1) << "; ";
        }
    }
    d << "smallest mean gain " << detail::fmt(min_gain) << ", largest std(F=" << (wide.empty() ? 0 : wide[0].config.rbs)
      << ")/std(F=" << (narrow.empty() ? 0 : narrow[0].config.rbs) << ") " << detail::fmt(max_std_ratio) << " ["
      << narrow.size() << " seeds, " << (narrow.empty() ? 0 : narrow[0].config.slots) << " slots]";
    res.detail = d.str();
    return res;
}

inline std::string format(const CheckResult& r) { return (r.pass ? "PASS  " : "FAIL  ") + r.name + ": " + r.detail; }

} // namespace cfmimo::selftest
