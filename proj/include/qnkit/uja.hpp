#pragma once

#include "qnkit/aggregate.hpp"

#include <vector>

namespace qnkit {

/// Deviation moments of a demand vector around its mean.
struct DemandMoments {
    int stations = 0;
    double mean = 0.0;                   ///< X0
    std::vector<double> deviations;      ///< e_n = (X_n - X0) / X0
    std::vector<double> power_sums;      ///< power_sums[j] = E_j = sum e_n^j, j = 0..max_order
    double cv = 0.0;                     ///< coefficient of variation c
    double skewness = 0.0;               ///< beta, with E3 = M beta c^3

    int max_order() const { return static_cast<int>(power_sums.size()) - 1; }
    double E(int j) const { return power_sums.at(static_cast<std::size_t>(j)); }
};

inline constexpr int kDefaultMomentOrder = 8;

DemandMoments moments(const std::vector<double>& demands, int max_order = kDefaultMomentOrder);

/// Throughput of M balanced stations with demand X0 and k jobs.
double t0(const DemandMoments& m, int jobs);

/// Order-j approximation T_j(k): ratio of truncated coefficients
/// V_j(k-1) / V_j(k), V_j(k) = V_0(k) [1 + sum_{i=2}^{j+1} (E_i/i) prod_{l<i} (k-l)/(M+l)].
/// Throws NumericError when a truncated bracket is not positive.
double t_series(const DemandMoments& m, int jobs, int order);

/// Same values as t_series orders 1 and 2, written with c and beta.
double t1_closed(const DemandMoments& m, int jobs);
double t2_closed(const DemandMoments& m, int jobs);

/// T(k) = t_series for k = 1..K_max clamped at 1/max X_n and made non-decreasing.
ThroughputCharacteristic uja_characteristic(const std::vector<double>& demands, int order, int max_population);

} // namespace qnkit
