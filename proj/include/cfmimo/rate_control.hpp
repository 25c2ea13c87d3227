#pragma once

#include "config.hpp"

#include <algorithm>
#include <deque>
#include <span>
#include <vector>

namespace cfmimo {

struct RateChoice {
    double rate = 0.0;     // r*
    double expected = 0.0; // r* times the empirical P(I >= r*)
};

/// argmax_z z * P(I >= z) under the empirical distribution of `samples`.
///
/// The objective is piecewise increasing between sample values and drops
/// right after each one, so only sample values need to be checked. Ties go
/// to the smaller rate.
inline RateChoice optimize_rate(std::span<const double> samples) {
    if (samples.empty())
        return {};
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    RateChoice best;
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1])
            continue; // same candidate, same count
        const double value = sorted[i] * double(n - i) / double(n);
        if (first || value > best.expected) {
            best = {sorted[i], value};
            first = false;
        }
    }
    return best;
}

/// Effective service rate: (1 - tau_p/T) * r when active and r < I, else 0.
inline double service_rate(bool active, double rate, double mutual_info, const SimConfig& cfg) {
    if (!active || !(rate < mutual_info))
        return 0.0;
    return cfg.data_fraction() * rate;
}

/// Sliding window of the most recent mutual-information samples of one UE
/// and the outage-optimal rate derived from them.
class RateWindow {
  public:
    explicit RateWindow(int capacity = 100) : capacity_(static_cast<std::size_t>(capacity)) {}

    void record_sample(double mutual_info) {
        samples_.push_back(mutual_info);
        if (samples_.size() > capacity_)
            samples_.pop_front();
        std::vector<double> buf(samples_.begin(), samples_.end());
        choice_ = optimize_rate(buf);
    }

    double rate() const { return choice_.rate; }
    double expected_rate() const { return choice_.expected; }
    std::size_t size() const { return samples_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<double>& samples() const { return samples_; }

  private:
    std::size_t capacity_;
    std::deque<double> samples_;
    RateChoice choice_;
};

} // namespace cfmimo
