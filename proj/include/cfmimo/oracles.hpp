#pragma once

// Slow reference implementations used to cross-check the fast code paths.
// They share no code with the routines they check beyond the data types.

#include "channel.hpp"
#include "rate_control.hpp"
#include "receiver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace cfmimo::oracles {

/// Best objective of the cardinality-capped independent-set problem by
/// enumerating every subset of the schedulable UEs (positive queue and
/// eligible). Only for small instances.
inline double brute_force_selection(std::span<const double> weights, std::span<const double> queues,
                                    const std::vector<std::vector<int>>& conflicts, int k_act,
                                    const std::vector<bool>& eligible = {}) {
    std::vector<int> cand;
    for (std::size_t k = 0; k < weights.size(); ++k)
        if (queues[k] > 0.0 && (eligible.empty() || eligible[k]))
            cand.push_back(static_cast<int>(k));
    const int n = static_cast<int>(cand.size());
    double best = 0.0;
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        int count = 0;
        double value = 0.0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1UL))
                continue;
            ++count;
            value += weights[cand[i]];
            for (int j = i + 1; j < n; ++j) {
                if (!(mask >> j & 1UL))
                    continue;
                for (int other : conflicts[cand[i]])
                    if (other == cand[j])
                        ok = false;
            }
        }
        if (ok && count <= k_act && value > best)
            best = value;
    }
    return best;
}

/// optimize_rate by direct counting: every sample value is a candidate and
/// P(I >= z) is recounted from scratch for each.
inline RateChoice scan_rate(const std::vector<double>& samples) {
    RateChoice best;
    bool first = true;
    for (double z : samples) {
        int hits = 0;
        for (double x : samples)
            if (x >= z)
                ++hits;
        const double value = z * hits / double(samples.size());
        if (first || value > best.expected || (value == best.expected && z < best.rate)) {
            best = {z, value};
            first = false;
        }
    }
    return best;
}

/// SINR of every active UE evaluated with scalar loops on antenna-domain
/// vectors (F times the beam-basis blocks), [f][k].
inline std::vector<std::vector<double>> sinr_scalar(const SlotRealization& r, const ReceiveVectors& rv, double snr) {
    const int m_ant = r.antennas;
    const int lm = r.num_rus * m_ant;
    const int num_ues = r.channels.empty() ? 0 : static_cast<int>(r.channels[0].cols());
    std::vector<std::vector<double>> out(r.channels.size(), std::vector<double>(num_ues, 0.0));
    const double pi = std::acos(-1.0);
    auto to_antenna = [&](const Eigen::MatrixXcd& beam, int k) {
        std::vector<cplx> a(lm, cplx(0.0));
        for (int l = 0; l < r.num_rus; ++l)
            for (int m = 0; m < m_ant; ++m)
                for (int n = 0; n < m_ant; ++n)
                    a[l * m_ant + m] += std::polar(1.0 / std::sqrt(double(m_ant)), -2.0 * pi * m * n / m_ant) *
                                        beam(l * m_ant + n, k);
        return a;
    };
    for (std::size_t f = 0; f < r.channels.size(); ++f) {
        std::vector<std::vector<cplx>> h(num_ues), v(num_ues);
        for (int k : r.active) {
            h[k] = to_antenna(r.channels[f], k);
            v[k] = to_antenna(rv.vectors[f], k);
        }
        for (int k : r.active) {
            double sig = 0.0;
            double interf = 0.0;
            for (int j : r.active) {
                cplx dot(0.0);
                for (int i = 0; i < lm; ++i)
                    dot += std::conj(v[k][i]) * h[j][i];
                const double p = std::norm(dot);
                if (j == k)
                    sig = p;
                else
                    interf += p;
            }
            out[f][k] = sig / (1.0 / snr + interf);
        }
    }
    return out;
}

/// Nominal SINR |w^H s|^2 / (SNR * sum_j |w^H i_j|^2 + sum_c |w_c|^2 |v_c|^2)
/// that the fusion rule maximizes.
inline double nominal_sinr(const Eigen::VectorXcd& w, const Eigen::VectorXcd& signal,
                           const Eigen::MatrixXcd& interference, const Eigen::VectorXd& vnorm2, double snr) {
    const double num = std::norm(w.dot(signal)) * snr;
    double den = 0.0;
    for (Eigen::Index j = 0; j < interference.cols(); ++j)
        den += snr * std::norm(w.dot(interference.col(j)));
    for (Eigen::Index c = 0; c < w.size(); ++c)
        den += std::norm(w[c]) * vnorm2[c];
    return den > 0.0 ? num / den : 0.0;
}

} // namespace cfmimo::oracles
