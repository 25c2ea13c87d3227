#pragma once

#include "config.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

namespace cfmimo {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Shortest displacement from `a` to `b` on a square torus of side `side`.
inline Point torus_displacement(Point a, Point b, double side) {
    auto wrap = [side](double d) {
        d = std::fmod(d, side);
        if (d >= side / 2)
            d -= side;
        else if (d < -side / 2)
            d += side;
        return d;
    };
    return {wrap(b.x - a.x), wrap(b.y - a.y)};
}

inline double torus_distance(Point a, Point b, double side) {
    const Point d = torus_displacement(a, b, side);
    return std::hypot(d.x, d.y);
}

/// Absolute angular difference folded into [0, pi].
inline double wrapped_angle_distance(double a, double b) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double d = std::fmod(std::abs(a - b), two_pi);
    return std::min(d, two_pi - d);
}

/// Large-scale pathloss with a distance-dependent LOS probability.
///
/// UMi street canyon (3GPP TR 38.901, table 7.4.1-1 and 7.4.2-1) without
/// shadowing. The LOS branch is dual-slope around the effective breakpoint
/// distance; the NLOS branch is never better than LOS. The single-slope kind
/// is `c * d^-alpha` with LOS probability one, used where a test should not
/// depend on the UMi constants.
class PathlossModel {
  public:
    explicit PathlossModel(const SimConfig& cfg)
        : kind_(cfg.pathloss), fc_ghz_(cfg.carrier_ghz), h_ru_(cfg.ru_height), h_ue_(cfg.ue_height),
          d_min_(cfg.min_distance), alpha_(cfg.single_slope_exponent) {}

    double clamp(double d) const { return std::max(d, d_min_); }

    double los_probability(double d) const {
        if (kind_ == PathlossKind::SingleSlope)
            return 1.0;
        d = clamp(d);
        if (d <= 18.0)
            return 1.0;
        return 18.0 / d + std::exp(-d / 36.0) * (1.0 - 18.0 / d);
    }

    double gain_los(double d) const {
        d = clamp(d);
        if (kind_ == PathlossKind::SingleSlope)
            return 1e-3 * std::pow(d, -alpha_);
        return db_to_gain(-los_db(d));
    }

    double gain_nlos(double d) const {
        d = clamp(d);
        if (kind_ == PathlossKind::SingleSlope)
            return gain_los(d);
        const double d3 = d3d(d);
        const double nlos = 35.3 * std::log10(d3) + 22.4 + 21.3 * std::log10(fc_ghz_) - 0.3 * (h_ue_ - 1.5);
        return db_to_gain(-std::max(los_db(d), nlos));
    }

    /// Expected gain over the LOS/NLOS mixture at distance d.
    double mean_gain(double d) const {
        const double p = los_probability(d);
        return p * gain_los(d) + (1.0 - p) * gain_nlos(d);
    }

    double breakpoint() const {
        constexpr double c = 299792458.0;
        return 4.0 * (h_ru_ - 1.0) * (h_ue_ - 1.0) * fc_ghz_ * 1e9 / c;
    }

  private:
    static double db_to_gain(double db) { return std::pow(10.0, db / 10.0); }
    double d3d(double d) const { return std::hypot(d, h_ru_ - h_ue_); }

    double los_db(double d) const {
        const double d3 = d3d(d);
        const double bp = breakpoint();
        if (d <= bp)
            return 32.4 + 21.0 * std::log10(d3) + 20.0 * std::log10(fc_ghz_);
        const double dh = h_ru_ - h_ue_;
        return 32.4 + 40.0 * std::log10(d3) + 20.0 * std::log10(fc_ghz_) - 9.5 * std::log10(bp * bp + dh * dh);
    }

    PathlossKind kind_;
    double fc_ghz_, h_ru_, h_ue_, d_min_, alpha_;
};

/// Radius of a disk whose area equals the area per RU.
inline double ru_radius(const SimConfig& cfg) {
    return std::sqrt(cfg.area_side * cfg.area_side / (std::numbers::pi * cfg.rus));
}

/// Transmit SNR such that mean-beta(3 d_L) * M * SNR = 1, or the configured
/// value when one is given.
inline double calibrated_snr(const SimConfig& cfg) {
    if (cfg.snr > 0.0)
        return cfg.snr;
    const PathlossModel model(cfg);
    return 1.0 / (model.mean_gain(3.0 * ru_radius(cfg)) * cfg.antennas);
}

struct NetworkGeometry {
    double area_side = 0.0;
    int antennas = 0;
    std::vector<Point> ru_positions;
    std::vector<Point> ue_positions;
    /// lsfc[k][l]: linear power gain between UE k and RU l.
    std::vector<std::vector<double>> lsfc;
    std::vector<std::vector<bool>> los;
    /// supports[k][l]: sorted DFT indices in the angular support of (l, k).
    std::vector<std::vector<std::vector<int>>> supports;
    double snr = 1.0;

    int num_rus() const { return static_cast<int>(ru_positions.size()); }
    int num_ues() const { return static_cast<int>(ue_positions.size()); }

    double distance(int ue, int ru) const { return torus_distance(ru_positions[ru], ue_positions[ue], area_side); }

    /// Direction from RU to UE in [0, 2 pi).
    double angle(int ue, int ru) const {
        const Point d = torus_displacement(ru_positions[ru], ue_positions[ue], area_side);
        double a = std::atan2(d.y, d.x);
        if (a < 0)
            a += 2.0 * std::numbers::pi;
        return a;
    }
};

/// Rows x cols of the RU grid. rows * cols == L, rows <= cols.
inline std::pair<int, int> grid_shape(const SimConfig& cfg) {
    const int l = cfg.rus;
    if (cfg.grid_rows > 0) {
        if (l % cfg.grid_rows != 0)
            throw ConfigError("rus=" + std::to_string(l) + " does not factor into grid-rows=" +
                              std::to_string(cfg.grid_rows));
        return {cfg.grid_rows, l / cfg.grid_rows};
    }
    int rows = 1;
    for (int r = 1; r * r <= l; ++r)
        if (l % r == 0)
            rows = r;
    if (rows == 1 && l > 3)
        throw ConfigError("rus=" + std::to_string(l) + " has no near-square grid factorization; set grid-rows");
    return {rows, l / rows};
}

/// RU grid with half-cell offsets and a uniform UE drop on the square.
inline NetworkGeometry build_geometry(const SimConfig& cfg, Engine& rng) {
    cfg.validate();
    NetworkGeometry g;
    g.area_side = cfg.area_side;
    g.antennas = cfg.antennas;
    const auto [rows, cols] = grid_shape(cfg);
    const double dx = cfg.area_side / cols;
    const double dy = cfg.area_side / rows;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            g.ru_positions.push_back({(c + 0.5) * dx, (r + 0.5) * dy});

    std::uniform_real_distribution<double> u(0.0, cfg.area_side);
    g.ue_positions.reserve(cfg.users);
    for (int k = 0; k < cfg.users; ++k) {
        const double x = u(rng);
        const double y = u(rng);
        g.ue_positions.push_back({x, y});
    }
    return g;
}

/// Draws the LOS state of every (l, k) pair once and evaluates the gains.
inline void compute_lsfc(NetworkGeometry& g, const SimConfig& cfg, Engine& rng) {
    const PathlossModel model(cfg);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    g.lsfc.assign(g.num_ues(), std::vector<double>(g.num_rus()));
    g.los.assign(g.num_ues(), std::vector<bool>(g.num_rus()));
    for (int k = 0; k < g.num_ues(); ++k)
        for (int l = 0; l < g.num_rus(); ++l) {
            const double d = g.distance(k, l);
            const bool los = u(rng) < model.los_probability(d);
            g.los[k][l] = los;
            g.lsfc[k][l] = los ? model.gain_los(d) : model.gain_nlos(d);
        }
    g.snr = calibrated_snr(cfg);
}

/// DFT angles 2 pi m / M within delta/2 of theta. Never empty: when the
/// window misses every grid angle the nearest one is used.
inline std::vector<int> support_from_angle(double theta, int m_antennas, double delta) {
    std::vector<int> s;
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < m_antennas; ++m) {
        const double d = wrapped_angle_distance(2.0 * std::numbers::pi * m / m_antennas, theta);
        if (d <= delta / 2.0)
            s.push_back(m);
        if (d < best) {
            best = d;
            nearest = m;
        }
    }
    if (s.empty())
        s.push_back(nearest);
    return s;
}

inline void compute_supports(NetworkGeometry& g, const SimConfig& cfg) {
    g.supports.assign(g.num_ues(), std::vector<std::vector<int>>(g.num_rus()));
    for (int k = 0; k < g.num_ues(); ++k)
        for (int l = 0; l < g.num_rus(); ++l)
            g.supports[k][l] = support_from_angle(g.angle(k, l), cfg.antennas, cfg.angular_spread);
}

/// Full setup from the master seed: drop, LOS draws, supports.
inline NetworkGeometry make_geometry(const SimConfig& cfg) {
    Engine drop = make_engine(cfg.seed, Stream::Drop);
    NetworkGeometry g = build_geometry(cfg, drop);
    Engine los = make_engine(cfg.seed, Stream::LineOfSight);
    compute_lsfc(g, cfg, los);
    compute_supports(g, cfg);
    return g;
}

inline int support_overlap(const std::vector<int>& a, const std::vector<int>& b) {
    int n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

/// Writes ru_positions.csv, ue_positions.csv and lsfc.csv into `dir`.
inline void export_geometry(const NetworkGeometry& g, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream ru(dir / "ru_positions.csv");
    ru.precision(10);
    ru << "ru,x,y\n";
    for (int l = 0; l < g.num_rus(); ++l)
        ru << l << ',' << g.ru_positions[l].x << ',' << g.ru_positions[l].y << '\n';
    std::ofstream ue(dir / "ue_positions.csv");
    ue.precision(10);
    ue << "ue,x,y\n";
    for (int k = 0; k < g.num_ues(); ++k)
        ue << k << ',' << g.ue_positions[k].x << ',' << g.ue_positions[k].y << '\n';
    std::ofstream ls(dir / "lsfc.csv");
    ls.precision(10);
    ls << "ue,ru,distance,los,beta,support\n";
    for (int k = 0; k < g.num_ues(); ++k)
        for (int l = 0; l < g.num_rus(); ++l) {
            ls << k << ',' << l << ',' << g.distance(k, l) << ',' << int(g.los[k][l]) << ',' << g.lsfc[k][l] << ',';
            const auto& s = g.supports[k][l];
            for (std::size_t i = 0; i < s.size(); ++i)
                ls << (i ? ";" : "") << s[i];
            ls << '\n';
        }
}

} // namespace cfmimo
