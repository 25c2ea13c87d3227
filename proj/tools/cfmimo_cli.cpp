// cfmimo: command-line runner for the cell-free uplink simulator.
//
//   cfmimo run      [config flags] [--config FILE] [--out-dir DIR] [--mi-ue K]...
//   cfmimo fig1     [config flags] [--seeds 1,2,3,4,5] [--out-dir DIR]
//   cfmimo fig2     [config flags] [--seeds 1,2,3,4,5] [--out-dir DIR]
//   cfmimo selftest [--full] [--slots N]
//
// Every configuration key is accepted as --<key>, and overrides the same key
// from --config. Exit status: 0 success, 1 failure, 2 usage or configuration
// error.

#include <cfmimo/cfmimo.hpp>
#include <cfmimo/selftest.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cfmimo;

namespace {

struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("--config", file, "key=value configuration file")->check(CLI::ExistingFile);
        for (const auto& key : SimConfig::keys()) {
            const SimConfig defaults;
            app->add_option_function<std::string>(
                   "--" + key, [this, key](const std::string& v) { values[key] = v; },
                   "default " + defaults.get(key))
                ->group("Configuration");
        }
    }

    SimConfig resolve() const {
        SimConfig cfg;
        if (!file.empty())
            cfg = load_config(file, cfg);
        for (const auto& [k, v] : values)
            cfg.set(k, v);
        cfg.validate();
        return cfg;
    }

    bool given(const std::string& key) const { return values.count(key) > 0; }
};

std::vector<int> parse_seeds(const std::string& text) {
    std::vector<int> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int s = std::stoi(item, &used);
            if (used != item.size() || s < 0)
                throw std::invalid_argument(item);
            seeds.push_back(s);
        } catch (const std::exception&) {
            throw ConfigError("bad seed list '" + text + "'");
        }
    }
    if (seeds.empty())
        throw ConfigError("empty seed list");
    return seeds;
}

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x)
        s += v;
    return x.empty() ? 0.0 : s / double(x.size());
}

void report(const std::string& label, const RunResult& r) {
    std::cout << label << ": mean throughput " << mean_of(r.throughput) << " bit/s/Hz, " << r.counted_slots
              << " counted slots, " << r.inexact_slots << " inexact, " << r.unservable.size() << " unservable, "
              << r.wall_seconds << " s\n";
}

std::vector<RunResult> run_seeds(const SimConfig& base, const std::vector<int>& seeds) {
    std::vector<RunResult> out(seeds.size());
    parallel_for(static_cast<int>(seeds.size()), [&](int i) {
        SimConfig cfg = base;
        cfg.seed = static_cast<std::uint64_t>(seeds[i]);
        out[i] = run(cfg);
    });
    return out;
}

int cmd_run(const ConfigFlags& flags, const fs::path& out_dir, const std::vector<int>& mi_ues) {
    const SimConfig cfg = flags.resolve();
    const RunResult r = run(cfg);
    write_run_outputs(out_dir, r, mi_ues);
    report("seed " + std::to_string(cfg.seed), r);
    std::cout << "wrote " << out_dir.string() << "\n";
    return 0;
}

int cmd_fig1(const ConfigFlags& flags, const fs::path& out_dir, const std::vector<int>& seeds) {
    SimConfig base = flags.resolve();
    base.rbs = 1;
    for (Utility u : {Utility::HFS, Utility::PFS})
        for (Scheme s : {Scheme::Baseline, Scheme::FixedConflict}) {
            SimConfig cfg = base;
            cfg.utility = u;
            cfg.scheme = s;
            const std::string tag = to_string(u) + "_" + to_string(s);
            const auto runs = run_seeds(cfg, seeds);
            for (std::size_t i = 0; i < runs.size(); ++i) {
                write_run_outputs(out_dir / tag / ("seed" + std::to_string(seeds[i])), runs[i]);
                report(tag + " seed " + std::to_string(seeds[i]), runs[i]);
            }
            write_cdf_csv(out_dir / (tag + "_throughput_cdf.csv"), aggregate(runs).cdf);
        }
    std::cout << "wrote " << out_dir.string() << "\n";
    return 0;
}

int cmd_fig2(const ConfigFlags& flags, const fs::path& out_dir, const std::vector<int>& seeds) {
    SimConfig base = flags.resolve();
    base.utility = Utility::PFS;
    base.scheme = Scheme::FixedConflict;
    // the mutual-information panel follows one UE: the median-throughput UE
    // of the first seed's F = 1 run
    int tracked = -1;
    for (int f : {1, 8}) {
        SimConfig cfg = base;
        cfg.rbs = f;
        const std::string tag = "pfs_fixed_F" + std::to_string(f);
        const auto runs = run_seeds(cfg, seeds);
        if (tracked < 0)
            tracked = median_ue(runs.front().throughput);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            write_run_outputs(out_dir / tag / ("seed" + std::to_string(seeds[i])), runs[i],
                              {median_ue(runs[i].throughput)});
            report(tag + " seed " + std::to_string(seeds[i]), runs[i]);
        }
        write_cdf_csv(out_dir / (tag + "_throughput_cdf.csv"), aggregate(runs).cdf);
        write_cdf_csv(out_dir / (tag + "_mutual_info_cdf.csv"), empirical_cdf(runs.front().mutual_info[tracked]));
    }
    std::cout << "mutual-information CDFs follow UE " << tracked << " of seed " << seeds.front() << "\n";
    std::cout << "wrote " << out_dir.string() << "\n";
    return 0;
}

int cmd_selftest(bool full, int slots, const std::vector<int>& seeds) {
    std::vector<selftest::CheckResult> results;
    auto emit = [&](selftest::CheckResult r) {
        std::cout << selftest::format(r) << std::endl;
        results.push_back(std::move(r));
    };
    emit(selftest::check_solver_exactness());
    emit(selftest::check_rate_oracle());
    emit(selftest::check_arrivals());
    emit(selftest::check_channel_statistics(full ? 100000 : 20000));
    emit(selftest::check_conflict_soundness(full ? 1000 : 200));
    if (full) {
        const auto grid = selftest::run_scheme_grid(seeds, slots);
        emit(selftest::check_scheme_ordering(grid));
        emit(selftest::check_fairness_shape(grid));
        emit(selftest::check_queue_stability(selftest::all_runs(grid)));
        emit(selftest::check_wideband_gain(grid.runs[0][1], selftest::run_pfs_fixed(seeds, slots, 8)));
    }
    for (const auto& r : results)
        if (!r.pass)
            return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-free massive MIMO uplink scheduling simulator"};
    app.require_subcommand(1);

    ConfigFlags run_flags, fig1_flags, fig2_flags;
    std::string out_dir = "out";
    std::string seeds_text = "1,2,3,4,5";
    std::vector<int> mi_ues;
    bool full = false;
    int selftest_slots = 10000;

    auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
    run_flags.attach(run_cmd);
    run_cmd->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    run_cmd->add_option("--mi-ue", mi_ues, "UE whose mutual-information CDF is written (repeatable)");

    auto* fig1_cmd = app.add_subcommand("fig1", "HFS and PFS, both schemes, F = 1, pooled over seeds");
    fig1_flags.attach(fig1_cmd);
    fig1_cmd->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    fig1_cmd->add_option("--seeds", seeds_text, "comma-separated seeds")->capture_default_str();

    auto* fig2_cmd = app.add_subcommand("fig2", "PFS, fixed scheme, F = 1 and F = 8");
    fig2_flags.attach(fig2_cmd);
    fig2_cmd->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    fig2_cmd->add_option("--seeds", seeds_text, "comma-separated seeds")->capture_default_str();

    auto* self_cmd = app.add_subcommand("selftest", "oracle and invariant checks");
    self_cmd->add_flag("--full", full, "also run the multi-seed simulation criteria");
    self_cmd->add_option("--slots", selftest_slots, "scheduled slots per run with --full")->capture_default_str();
    self_cmd->add_option("--seeds", seeds_text, "comma-separated seeds for --full")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(run_flags, out_dir, mi_ues);
        if (fig1_cmd->parsed()) {
            if (fig1_flags.given("utility") || fig1_flags.given("scheme") || fig1_flags.given("rbs"))
                throw ConfigError("fig1 sweeps utility and scheme at rbs=1; these keys cannot be set");
            return cmd_fig1(fig1_flags, out_dir, parse_seeds(seeds_text));
        }
        if (fig2_cmd->parsed()) {
            if (fig2_flags.given("utility") || fig2_flags.given("scheme") || fig2_flags.given("rbs"))
                throw ConfigError("fig2 fixes utility=pfs, scheme=fixed and sweeps rbs; these keys cannot be set");
            return cmd_fig2(fig2_flags, out_dir, parse_seeds(seeds_text));
        }
        if (self_cmd->parsed())
            return cmd_selftest(full, selftest_slots, parse_seeds(seeds_text));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
