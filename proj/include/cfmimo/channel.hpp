#pragma once

#include "association.hpp"
#include "config.hpp"
#include "rng.hpp"
#include "topology.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace cfmimo {

/// Unitary M x M DFT, entries exp(-j 2 pi m n / M) / sqrt(M).
inline Eigen::MatrixXcd dft_matrix(int m_antennas) {
    Eigen::MatrixXcd f(m_antennas, m_antennas);
    const double scale = 1.0 / std::sqrt(double(m_antennas));
    for (int m = 0; m < m_antennas; ++m)
        for (int n = 0; n < m_antennas; ++n) {
            // reduce the phase index first so large M keeps full accuracy
            const int idx = (m * n) % m_antennas;
            const double phase = -2.0 * std::numbers::pi * idx / m_antennas;
            f(m, n) = std::polar(scale, phase);
        }
    return f;
}

/// Columns of the unitary DFT selected by `support`.
inline Eigen::MatrixXcd dft_columns(int m_antennas, const std::vector<int>& support) {
    const Eigen::MatrixXcd f = dft_matrix(m_antennas);
    Eigen::MatrixXcd out(m_antennas, static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = f.col(support[i]);
    return out;
}

/// Channels of one slot, per RB.
///
/// Every M-block is stored in the DFT (beam) basis of its RU: the antenna
/// domain vector is `F * g`. For the single-ring model `g` is zero outside
/// the angular support, so subspace projection is an exact mask. SINR and
/// LMMSE combining are invariant under this per-RU unitary change of basis.
struct SlotRealization {
    int slot = 0;
    int num_rus = 0;
    int antennas = 0;
    std::vector<int> active;                // ascending
    std::vector<Eigen::MatrixXcd> channels; // per RB: (L*M) x K_tot
};

/// Per-RB channel estimates in the beam basis, (L*M) x K_tot, zero for
/// pairs that are not estimated.
struct ChannelEstimates {
    std::vector<Eigen::MatrixXcd> estimates;

    /// Optional decomposition of every estimate. estimate equals
    /// own + served_contamination + leakage + noise (up to rounding).
    struct Terms {
        Eigen::MatrixXcd own;
        Eigen::MatrixXcd served_contamination; // co-pilot UEs served by the same RU
        Eigen::MatrixXcd leakage;              // co-pilot UEs not served by the RU
        Eigen::MatrixXcd noise;
    };
    std::vector<Terms> terms;
};

/// Blockwise F * g: beam basis to antenna domain.
inline Eigen::MatrixXcd to_antenna_domain(const Eigen::MatrixXcd& beam, int num_rus, int m_antennas) {
    const Eigen::MatrixXcd f = dft_matrix(m_antennas);
    Eigen::MatrixXcd out(beam.rows(), beam.cols());
    for (int l = 0; l < num_rus; ++l)
        out.middleRows(l * m_antennas, m_antennas) = f * beam.middleRows(l * m_antennas, m_antennas);
    return out;
}

/// h_{l,k}(t, f) = sqrt(beta M / |S|) F_S nu with nu ~ CN(0, I), for every
/// active UE. Each (t, f, k) uses its own stream so the draw does not depend
/// on which other UEs are active.
inline SlotRealization draw_channel(const NetworkGeometry& g, const std::vector<int>& active, const SimConfig& cfg,
                                    int slot) {
    SlotRealization r;
    r.slot = slot;
    r.num_rus = g.num_rus();
    r.antennas = cfg.antennas;
    r.active = active;
    std::sort(r.active.begin(), r.active.end());
    const int lm = g.num_rus() * cfg.antennas;
    r.channels.assign(cfg.rbs, Eigen::MatrixXcd::Zero(lm, g.num_ues()));
    for (int f = 0; f < cfg.rbs; ++f)
        for (int k : r.active) {
            Engine rng = make_engine(cfg.seed, Stream::Fading,
                                     {std::uint64_t(slot), std::uint64_t(f), std::uint64_t(k)});
            auto col = r.channels[f].col(k);
            for (int l = 0; l < g.num_rus(); ++l) {
                const auto& s = g.supports[k][l];
                const double amp = std::sqrt(g.lsfc[k][l] * cfg.antennas / double(s.size()));
                for (int m : s)
                    col(l * cfg.antennas + m) = amp * complex_normal(rng);
            }
        }
    return r;
}

/// Subspace-projection estimates from orthogonal UL pilots.
///
/// RU l observes, per pilot p and RB, the sum of the channels of all active
/// UEs holding p plus CN(0, 1/(tau_p SNR)) noise per antenna, and estimates
/// each served active UE by projecting onto its angular support. With
/// `pilot_leakage` off only co-pilot UEs served by l are heard.
inline ChannelEstimates estimate_channels(const SlotRealization& r, const AssociationState& a,
                                          const NetworkGeometry& g, const SimConfig& cfg, bool with_terms = false) {
    const int m_ant = cfg.antennas;
    const int lm = g.num_rus() * m_ant;
    for (int k : r.active)
        if (a.pilots[k] == kNoPilot || a.pilots[k] >= cfg.pilots)
            throw InvariantViolation("slot " + std::to_string(r.slot) + ": active UE " + std::to_string(k) +
                                     " has no valid pilot");

    const double sigma = cfg.pilot_noise ? std::sqrt(1.0 / (cfg.pilots * g.snr)) : 0.0;
    ChannelEstimates out;
    out.estimates.assign(cfg.rbs, Eigen::MatrixXcd::Zero(lm, g.num_ues()));
    if (with_terms)
        out.terms.assign(cfg.rbs, {Eigen::MatrixXcd::Zero(lm, g.num_ues()), Eigen::MatrixXcd::Zero(lm, g.num_ues()),
                                   Eigen::MatrixXcd::Zero(lm, g.num_ues()), Eigen::MatrixXcd::Zero(lm, g.num_ues())});

    // active UEs grouped by pilot
    std::vector<std::vector<int>> by_pilot(cfg.pilots);
    for (int k : r.active)
        by_pilot[a.pilots[k]].push_back(k);

    Eigen::MatrixXcd y(m_ant, cfg.pilots);
    Eigen::MatrixXcd noise(m_ant, cfg.pilots);
    for (int f = 0; f < cfg.rbs; ++f) {
        const auto& h = r.channels[f];
        for (int l = 0; l < g.num_rus(); ++l) {
            Engine rng = make_engine(cfg.seed, Stream::PilotNoise,
                                     {std::uint64_t(r.slot), std::uint64_t(f), std::uint64_t(l)});
            for (int p = 0; p < cfg.pilots; ++p)
                for (int m = 0; m < m_ant; ++m)
                    noise(m, p) = sigma * complex_normal(rng);

            y = noise;
            for (int p = 0; p < cfg.pilots; ++p)
                for (int k : by_pilot[p])
                    if (cfg.pilot_leakage || a.serves(l, k))
                        y.col(p) += h.col(k).segment(l * m_ant, m_ant);

            for (int k : a.served[l]) {
                if (!std::binary_search(r.active.begin(), r.active.end(), k))
                    continue;
                const int p = a.pilots[k];
                auto est = out.estimates[f].col(k).segment(l * m_ant, m_ant);
                for (int m : g.supports[k][l])
                    est(m) = y(m, p);
                if (!with_terms)
                    continue;
                auto& t = out.terms[f];
                for (int m : g.supports[k][l]) {
                    const int row = l * m_ant + m;
                    t.own(row, k) = h(row, k);
                    t.noise(row, k) = noise(m, p);
                    for (int other : by_pilot[p]) {
                        if (other == k)
                            continue;
                        if (a.serves(l, other))
                            t.served_contamination(row, k) += h(row, other);
                        else if (cfg.pilot_leakage)
                            t.leakage(row, k) += h(row, other);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace cfmimo
