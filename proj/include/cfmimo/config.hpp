#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo {

/// Raised for any invalid or inconsistent simulation configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a simulation invariant is broken mid-run.
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

enum class Utility { PFS, HFS };
enum class Scheme { Baseline, FixedConflict };
enum class PathlossKind { UMi, SingleSlope };
enum class FusionRule { GeneralizedEigen, NominalSnr };
enum class BaselineOrder { MaxLsfc, Index };

/// All parameters of one simulation run.
///
/// Defaults reproduce the reference network: 12 RUs with 8 antennas on a
/// 50 m torus, 100 UEs, 40 active per slot, 20 pilots, T = 200, one RB.
struct SimConfig {
    int rus = 12;             // L
    int antennas = 8;         // M
    int users = 100;          // K_tot
    int active_users = 40;    // K_act
    int pilots = 20;          // tau_p
    int coherence = 200;      // T
    int rbs = 1;              // F
    double angular_spread = std::numbers::pi / 8.0;
    double eta = 1.0;
    int max_cluster = 10;     // Q_max
    double area_side = 50.0;
    /// Transmit SNR P/N0 (linear). Zero means "calibrate from the pathloss
    /// model so that mean-beta * M * SNR = 1 at three times the RU radius".
    double snr = 0.0;
    int window = 100;         // N
    int startup_slots = 500;  // N_init
    double a_max = 100.0;
    double v = 10000.0;
    Utility utility = Utility::PFS;
    Scheme scheme = Scheme::FixedConflict;
    std::uint64_t seed = 1;
    int slots = 10000;        // scheduled slots after start-up

    // Pathloss model.
    PathlossKind pathloss = PathlossKind::UMi;
    double carrier_ghz = 3.5;
    double ru_height = 10.0;
    double ue_height = 1.5;
    double min_distance = 1.0;
    double single_slope_exponent = 3.67;

    int grid_rows = 0;        // 0 = choose the most square factorization of L

    FusionRule fusion = FusionRule::GeneralizedEigen;
    BaselineOrder baseline_order = BaselineOrder::MaxLsfc;
    bool include_startup = false;
    /// Thermal noise on the pilot observation. Disabled only for
    /// contamination diagnostics.
    bool pilot_noise = true;
    /// Co-pilot UEs that are not associated with an RU still leak into that
    /// RU's pilot observation.
    bool pilot_leakage = true;
    double solver_budget_ms = 2000.0;
    bool keep_service_log = false;

    double data_fraction() const { return 1.0 - double(pilots) / double(coherence); }

    void validate() const;

    /// Set one field from its key=value text form.
    void set(std::string_view key, std::string_view value);
    /// Render one field as text (inverse of set).
    std::string get(std::string_view key) const;
    /// Every recognized key, in a stable order.
    static const std::vector<std::string>& keys();
};

inline std::string to_string(Utility u) { return u == Utility::PFS ? "pfs" : "hfs"; }
inline std::string to_string(Scheme s) { return s == Scheme::Baseline ? "baseline" : "fixed"; }
inline std::string to_string(PathlossKind p) { return p == PathlossKind::UMi ? "umi" : "single-slope"; }
inline std::string to_string(FusionRule f) {
    return f == FusionRule::GeneralizedEigen ? "geneig" : "nominal-snr";
}
inline std::string to_string(BaselineOrder o) { return o == BaselineOrder::MaxLsfc ? "max-lsfc" : "index"; }

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline long long parse_int(std::string_view key, std::string_view text) {
    const std::string s(text);
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("'" + std::string(key) + "': not an integer: '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError("'" + std::string(key) + "': not an integer: '" + s + "'");
    return v;
}

inline double parse_double(std::string_view key, std::string_view text) {
    std::string s(text);
    // "pi/8" style values are accepted for angles.
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = trim(s.substr(0, slash));
        const double den = parse_double(key, trim(s.substr(slash + 1)));
        const double n = (num == "pi") ? std::numbers::pi : parse_double(key, num);
        return n / den;
    }
    if (s == "pi")
        return std::numbers::pi;
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("'" + std::string(key) + "': not a number: '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError("'" + std::string(key) + "': not a number: '" + s + "'");
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view s) {
    if (s == "1" || s == "true" || s == "yes" || s == "on")
        return true;
    if (s == "0" || s == "false" || s == "no" || s == "off")
        return false;
    throw ConfigError("'" + std::string(key) + "': not a boolean: '" + std::string(s) + "'");
}

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Field {
    std::function<void(SimConfig&, std::string_view key, std::string_view)> set;
    std::function<std::string(const SimConfig&)> get;
};

template <typename T> Field int_field(T SimConfig::*m) {
    return {[m](SimConfig& c, std::string_view k, std::string_view v) {
                c.*m = static_cast<T>(parse_int(k, v));
            },
            [m](const SimConfig& c) { return std::to_string(c.*m); }};
}

inline Field double_field(double SimConfig::*m) {
    return {[m](SimConfig& c, std::string_view k, std::string_view v) { c.*m = parse_double(k, v); },
            [m](const SimConfig& c) { return fmt_double(c.*m); }};
}

inline Field bool_field(bool SimConfig::*m) {
    return {[m](SimConfig& c, std::string_view k, std::string_view v) { c.*m = parse_bool(k, v); },
            [m](const SimConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

template <typename E>
Field enum_field(E SimConfig::*m, std::vector<std::pair<std::string, E>> names) {
    return {[m, names](SimConfig& c, std::string_view k, std::string_view v) {
                for (const auto& [n, e] : names)
                    if (n == v) {
                        c.*m = e;
                        return;
                    }
                std::string allowed;
                for (const auto& [n, e] : names)
                    allowed += (allowed.empty() ? "" : "|") + n;
                throw ConfigError("'" + std::string(k) + "': expected " + allowed + ", got '" +
                                  std::string(v) + "'");
            },
            [m](const SimConfig& c) { return to_string(c.*m); }};
}

inline const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"rus", int_field(&SimConfig::rus)},
        {"antennas", int_field(&SimConfig::antennas)},
        {"users", int_field(&SimConfig::users)},
        {"active-users", int_field(&SimConfig::active_users)},
        {"pilots", int_field(&SimConfig::pilots)},
        {"coherence", int_field(&SimConfig::coherence)},
        {"rbs", int_field(&SimConfig::rbs)},
        {"angular-spread", double_field(&SimConfig::angular_spread)},
        {"eta", double_field(&SimConfig::eta)},
        {"max-cluster", int_field(&SimConfig::max_cluster)},
        {"area-side", double_field(&SimConfig::area_side)},
        {"snr", double_field(&SimConfig::snr)},
        {"window", int_field(&SimConfig::window)},
        {"startup-slots", int_field(&SimConfig::startup_slots)},
        {"a-max", double_field(&SimConfig::a_max)},
        {"v", double_field(&SimConfig::v)},
        {"utility", enum_field(&SimConfig::utility, {{"pfs", Utility::PFS}, {"hfs", Utility::HFS}})},
        {"scheme",
         enum_field(&SimConfig::scheme, {{"baseline", Scheme::Baseline}, {"fixed", Scheme::FixedConflict}})},
        {"seed", int_field(&SimConfig::seed)},
        {"slots", int_field(&SimConfig::slots)},
        {"pathloss", enum_field(&SimConfig::pathloss,
                                {{"umi", PathlossKind::UMi}, {"single-slope", PathlossKind::SingleSlope}})},
        {"carrier-ghz", double_field(&SimConfig::carrier_ghz)},
        {"ru-height", double_field(&SimConfig::ru_height)},
        {"ue-height", double_field(&SimConfig::ue_height)},
        {"min-distance", double_field(&SimConfig::min_distance)},
        {"single-slope-exponent", double_field(&SimConfig::single_slope_exponent)},
        {"grid-rows", int_field(&SimConfig::grid_rows)},
        {"fusion", enum_field(&SimConfig::fusion, {{"geneig", FusionRule::GeneralizedEigen},
                                                   {"nominal-snr", FusionRule::NominalSnr}})},
        {"baseline-order", enum_field(&SimConfig::baseline_order,
                                      {{"max-lsfc", BaselineOrder::MaxLsfc}, {"index", BaselineOrder::Index}})},
        {"include-startup", bool_field(&SimConfig::include_startup)},
        {"pilot-noise", bool_field(&SimConfig::pilot_noise)},
        {"pilot-leakage", bool_field(&SimConfig::pilot_leakage)},
        {"exact-solver-budget-ms", double_field(&SimConfig::solver_budget_ms)},
        {"keep-service-log", bool_field(&SimConfig::keep_service_log)},
    };
    return table;
}

inline const Field& field(std::string_view key) {
    for (const auto& [k, f] : fields())
        if (k == key)
            return f;
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

} // namespace detail

inline void SimConfig::set(std::string_view key, std::string_view value) {
    detail::field(key).set(*this, key, detail::trim(value));
}

inline std::string SimConfig::get(std::string_view key) const { return detail::field(key).get(*this); }

inline const std::vector<std::string>& SimConfig::keys() {
    static const std::vector<std::string> ks = [] {
        std::vector<std::string> out;
        for (const auto& [k, f] : detail::fields())
            out.push_back(k);
        return out;
    }();
    return ks;
}

inline void SimConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError(what);
    };
    require(rus > 0 && antennas > 0 && users > 0 && active_users > 0 && pilots > 0 && coherence > 0,
            "all counts must be positive");
    require(rbs >= 1, "rbs must be >= 1");
    require(active_users <= users, "active-users must not exceed users");
    require(pilots <= coherence, "pilots must not exceed coherence");
    require(max_cluster >= 1 && max_cluster <= rus, "max-cluster must lie in [1, rus]");
    require(angular_spread > 0.0 && angular_spread < 2.0 * std::numbers::pi,
            "angular-spread must lie in (0, 2*pi)");
    require(area_side > 0.0, "area-side must be positive");
    require(snr >= 0.0 && std::isfinite(snr), "snr must be finite and >= 0 (0 = calibrate)");
    require(eta >= 0.0, "eta must be >= 0");
    require(window > 0, "window must be positive");
    require(startup_slots >= 0 && slots >= 0, "slot counts must be >= 0");
    require(a_max > 0.0 && v > 0.0, "a-max and v must be positive");
    require(min_distance > 0.0, "min-distance must be positive");
    require(grid_rows >= 0, "grid-rows must be >= 0");
    require(solver_budget_ms > 0.0, "exact-solver-budget-ms must be positive");
}

/// Apply `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Later keys override earlier ones.
inline void apply_key_values(SimConfig& cfg, std::istream& in, const std::string& origin = "<input>") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            cfg.set(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline SimConfig load_config(const std::string& path, SimConfig base = {}) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    apply_key_values(base, in, path);
    return base;
}

inline std::string to_key_values(const SimConfig& cfg) {
    std::string out;
    for (const auto& k : SimConfig::keys())
        out += k + "=" + cfg.get(k) + "\n";
    return out;
}

} // namespace cfmimo
