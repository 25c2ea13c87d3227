#pragma once

#include "association.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace cfmimo {

/// Unit-norm cluster receive vectors per RB, (L*M) x K_tot in the beam
/// basis. Columns of inactive UEs are zero.
struct ReceiveVectors {
    std::vector<Eigen::MatrixXcd> vectors;
};

struct SlotRates {
    std::vector<std::vector<double>> sinr; // [f][k]
    std::vector<double> mutual_info;       // [k], bit/s/Hz
};

/// LMMSE combiners of one RU for the UEs whose estimates are the columns of
/// `estimates` (M x n): (sum_j h_j h_j^H + I / SNR)^-1 h_k, unnormalized.
inline Eigen::MatrixXcd local_lmmse(const Eigen::MatrixXcd& estimates, double snr) {
    // scaled by SNR: (SNR * H H^H + I) v = SNR * h has the same solution
    Eigen::MatrixXcd a = snr * estimates.lazyProduct(estimates.adjoint());
    a.diagonal().array() += 1.0;
    return a.ldlt().solve(snr * estimates);
}

/// Per-RU scalar fusion weights for one UE.
///
/// `signal[c] = v_c^H hhat_{c,k}`, `interference(c, j) = v_c^H hhat_{c,j}`
/// for the other active UEs j, `vnorm2[c] = |v_c|^2`. The GeneralizedEigen
/// rule maximizes the nominal SINR |w^H s|^2 / (w^H B w) with
/// B = sum_j i_j i_j^H + diag(|v|^2) / SNR, whose maximizer is B^-1 s. The
/// NominalSnr rule ignores the interference term. Dead RUs (v = 0) get
/// weight zero.
inline Eigen::VectorXcd fusion_weights(const Eigen::VectorXcd& signal, const Eigen::MatrixXcd& interference,
                                       const Eigen::VectorXd& vnorm2, double snr, FusionRule rule) {
    const auto c = signal.size();
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(c);
    std::vector<Eigen::Index> live;
    for (Eigen::Index i = 0; i < c; ++i)
        if (vnorm2[i] > 0.0)
            live.push_back(i);
    if (live.empty())
        return w;
    const auto n = static_cast<Eigen::Index>(live.size());
    Eigen::VectorXcd s(n);
    for (Eigen::Index i = 0; i < n; ++i)
        s[i] = signal[live[i]];
    if (rule == FusionRule::NominalSnr) {
        for (Eigen::Index i = 0; i < n; ++i)
            w[live[i]] = s[i] / vnorm2[live[i]];
        return w;
    }
    Eigen::MatrixXcd rows(n, interference.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        rows.row(i) = interference.row(live[i]);
    // scaled by SNR, same maximizer
    Eigen::MatrixXcd b = snr * rows.lazyProduct(rows.adjoint());
    for (Eigen::Index i = 0; i < n; ++i)
        b(i, i) += vnorm2[live[i]];
    const Eigen::VectorXcd sol = b.ldlt().solve(s);
    for (Eigen::Index i = 0; i < n; ++i)
        w[live[i]] = sol[i];
    return w;
}

/// Per-RU combiners and cluster fusion for every active UE on every RB.
inline ReceiveVectors combine(const SlotRealization& r, const ChannelEstimates& est, const AssociationState& a,
                              const NetworkGeometry& g, const SimConfig& cfg) {
    const int m_ant = cfg.antennas;
    const int num_rus = g.num_rus();
    const int lm = num_rus * m_ant;
    const auto& active = r.active;
    const auto n_act = static_cast<Eigen::Index>(active.size());

    std::vector<int> slot_of(g.num_ues(), -1);
    for (Eigen::Index i = 0; i < n_act; ++i)
        slot_of[active[i]] = static_cast<int>(i);

    ReceiveVectors out;
    out.vectors.assign(cfg.rbs, Eigen::MatrixXcd::Zero(lm, g.num_ues()));

    for (int f = 0; f < cfg.rbs; ++f) {
        const auto& hhat = est.estimates[f];
        // per RU: combiners of the served active UEs and their projections
        // onto each other's estimates (other estimates at this RU are zero)
        std::vector<std::vector<int>> users(num_rus);
        std::vector<Eigen::MatrixXcd> combiners(num_rus);
        std::vector<Eigen::MatrixXcd> projections(num_rus);
        std::vector<std::vector<int>> row_of(num_rus);
        for (int l = 0; l < num_rus; ++l) {
            for (int k : a.served[l])
                if (slot_of[k] >= 0)
                    users[l].push_back(k);
            if (users[l].empty())
                continue;
            const auto n = static_cast<Eigen::Index>(users[l].size());
            Eigen::MatrixXcd h_served(m_ant, n);
            for (Eigen::Index i = 0; i < n; ++i)
                h_served.col(i) = hhat.col(users[l][i]).segment(l * m_ant, m_ant);
            combiners[l] = local_lmmse(h_served, g.snr);
            projections[l] = combiners[l].adjoint().lazyProduct(h_served);
            row_of[l].assign(g.num_ues(), -1);
            for (Eigen::Index i = 0; i < n; ++i)
                row_of[l][users[l][i]] = static_cast<int>(i);
        }

        for (int k : active) {
            const auto& cluster = a.clusters[k];
            if (cluster.empty())
                continue;
            const auto c = static_cast<Eigen::Index>(cluster.size());
            Eigen::VectorXcd signal(c);
            Eigen::VectorXd vnorm2(c);
            Eigen::MatrixXcd interference = Eigen::MatrixXcd::Zero(c, n_act);
            for (Eigen::Index i = 0; i < c; ++i) {
                const int l = cluster[i];
                const int row = row_of[l][k];
                signal[i] = projections[l](row, row);
                vnorm2[i] = combiners[l].col(row).squaredNorm();
                for (std::size_t u = 0; u < users[l].size(); ++u)
                    if (users[l][u] != k)
                        interference(i, slot_of[users[l][u]]) = projections[l](row, static_cast<Eigen::Index>(u));
            }
            const Eigen::VectorXcd w = fusion_weights(signal, interference, vnorm2, g.snr, cfg.fusion);
            auto v = out.vectors[f].col(k);
            for (Eigen::Index i = 0; i < c; ++i) {
                const int l = cluster[i];
                v.segment(l * m_ant, m_ant) = w[i] * combiners[l].col(row_of[l][k]);
            }
            double norm = v.norm();
            if (norm == 0.0) {
                // no usable combiner: fall back to the estimated directions
                for (int l : cluster)
                    v.segment(l * m_ant, m_ant) = hhat.col(k).segment(l * m_ant, m_ant);
                norm = v.norm();
            }
            if (norm > 0.0)
                v /= norm;
        }
    }
    return out;
}

/// SINR_k = |v_k^H h_k|^2 / (1/SNR + sum_{j != k} |v_k^H h_j|^2) on true
/// channels, and I_k = (1/F) sum_f log2(1 + SINR_k).
inline SlotRates compute_sinr(const SlotRealization& r, const ReceiveVectors& rv, double snr) {
    const int rbs = static_cast<int>(r.channels.size());
    const int num_ues = rbs > 0 ? static_cast<int>(r.channels[0].cols()) : 0;
    const auto n_act = static_cast<Eigen::Index>(r.active.size());
    SlotRates out;
    out.sinr.assign(rbs, std::vector<double>(num_ues, 0.0));
    out.mutual_info.assign(num_ues, 0.0);
    if (n_act == 0)
        return out;
    const auto lm = r.channels[0].rows();
    for (int f = 0; f < rbs; ++f) {
        Eigen::MatrixXcd v(lm, n_act);
        for (Eigen::Index i = 0; i < n_act; ++i)
            v.col(i) = rv.vectors[f].col(r.active[i]);
        // channels are sparse in the beam basis: visit nonzero rows only
        Eigen::MatrixXcd prod = Eigen::MatrixXcd::Zero(n_act, n_act);
        for (Eigen::Index j = 0; j < n_act; ++j) {
            const auto h = r.channels[f].col(r.active[j]);
            for (Eigen::Index row = 0; row < lm; ++row)
                if (h[row] != cplx(0.0))
                    prod.col(j) += v.row(row).adjoint() * h[row];
        }
        const Eigen::MatrixXd gain = prod.cwiseAbs2();
        for (Eigen::Index i = 0; i < n_act; ++i) {
            const double sig = gain(i, i);
            const double interf = gain.row(i).sum() - sig;
            const double s = sig / (1.0 / snr + interf);
            const int k = r.active[i];
            out.sinr[f][k] = s;
            out.mutual_info[k] += std::log2(1.0 + s) / rbs;
        }
    }
    return out;
}

} // namespace cfmimo
