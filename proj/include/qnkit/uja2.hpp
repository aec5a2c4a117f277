#pragma once

#include <utility>
#include <vector>

namespace qnkit {

/// Joint deviation moments of two per-station demand vectors.
struct TwoClassMoments {
    int stations = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double e10 = 0.0;
    double e01 = 0.0;
    double e20 = 0.0;
    double e02 = 0.0;
    double e11 = 0.0;
    double cv_x = 0.0;
    double cv_y = 0.0;
    double correlation = 0.0; ///< c_XY; 0 when either class is balanced
};

TwoClassMoments two_class_moments(const std::vector<double>& x, const std::vector<double>& y);

struct ClassThroughputs {
    double class1 = 0.0;
    double class2 = 0.0;
};

/// Balanced two-class aggregate: T1 = K / ((M+K+L-1) X0), T2 = L / ((M+K+L-1) Y0).
ClassThroughputs balanced_two_class(int stations, double mean_x, double mean_y, int k, int l);

/// First-order two-class approximation from the ratio of the truncated
/// coefficients V_1(K-1, L) / V_1(K, L) (and symmetrically for class 2).
ClassThroughputs uja2_first_order(const std::vector<double>& x, const std::vector<double>& y, int k, int l);

} // namespace qnkit
