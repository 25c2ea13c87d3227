#pragma once

#include "association.hpp"
#include "engine.hpp"
#include "topology.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace cfmimo {

namespace fs = std::filesystem;

/// `value,cdf` with a header line; one row per sample.
inline void write_cdf_csv(const fs::path& path, const std::vector<CdfPoint>& cdf) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out.precision(12);
    out << "value,cdf\n";
    for (const auto& p : cdf)
        out << p.value << ',' << p.cdf << '\n';
}

inline void write_queue_trace(const fs::path& path, const std::vector<QueueTraceRow>& trace) {
    std::ofstream out(path);
    out.precision(12);
    out << "slot,active,objective,exact,sum_queue,max_queue\n";
    for (const auto& r : trace)
        out << r.slot << ',' << r.active << ',' << r.objective << ',' << int(r.exact) << ',' << r.sum_queue << ','
            << r.max_queue << '\n';
}

/// Rate-window state: one row per buffered sample.
inline void write_windows(const fs::path& path, const std::vector<RateWindow>& windows) {
    std::ofstream out(path);
    out.precision(12);
    out << "ue,index,sample,rate,expected_rate\n";
    for (std::size_t k = 0; k < windows.size(); ++k) {
        int i = 0;
        for (double s : windows[k].samples())
            out << k << ',' << i++ << ',' << s << ',' << windows[k].rate() << ',' << windows[k].expected_rate()
                << '\n';
    }
}

/// key=value config echo followed by run metadata as comment lines, so the
/// file can be passed back as --config.
inline void write_run_meta(const fs::path& path, const RunResult& r) {
    std::ofstream out(path);
    out << to_key_values(r.config);
    out.precision(17);
    out << "# calibrated-snr=" << r.snr << '\n';
    out << "# counted-slots=" << r.counted_slots << '\n';
    out << "# inexact-slots=" << r.inexact_slots << '\n';
    out << "# unservable-ues=" << r.unservable.size() << '\n';
    if (r.fixed_association)
        out << "# conflict-edges=" << r.fixed_association->conflict_edges.size() << '\n';
    out << "# wall-seconds=" << r.wall_seconds << '\n';
}

/// Everything the plotting side consumes for one run, in `dir`:
/// throughput_cdf.csv, mutual_info_cdf_<ue>.csv for each requested UE (the
/// median-throughput UE when none is given), queue_trace.csv, windows.csv,
/// run_meta.txt, geometry CSVs and, for the fixed scheme, the conflict graph.
inline void write_run_outputs(const fs::path& dir, const RunResult& r, std::vector<int> mi_ues = {}) {
    fs::create_directories(dir);
    write_cdf_csv(dir / "throughput_cdf.csv", empirical_cdf(r.throughput));
    if (mi_ues.empty())
        mi_ues.push_back(median_ue(r.throughput));
    for (int k : mi_ues)
        if (k >= 0 && k < static_cast<int>(r.mutual_info.size()))
            write_cdf_csv(dir / ("mutual_info_cdf_" + std::to_string(k) + ".csv"), empirical_cdf(r.mutual_info[k]));
    write_queue_trace(dir / "queue_trace.csv", r.queue_trace);
    write_windows(dir / "windows.csv", r.windows);
    write_run_meta(dir / "run_meta.txt", r);
    export_geometry(r.geometry, dir);
    if (r.fixed_association)
        export_conflict_graph(*r.fixed_association, dir);
}

} // namespace cfmimo
