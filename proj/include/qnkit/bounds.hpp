#pragma once

#include "qnkit/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace qnkit {

enum class BoundMethod { ABA, BJB, PBH, KRIZ, AE, GB, GSB, PB };

const char* to_string(BoundMethod method);
BoundMethod parse_bound_method(const std::string& name);

/// Certified throughput interval for one population.
struct BoundInterval {
    double lower = 0.0;
    double upper = 0.0;
    BoundMethod method = BoundMethod::ABA;
    int level = 0;
    int population = 0;

    double width() const { return upper - lower; }
    bool contains(double x, double tol = 0.0) const { return lower - tol <= x && x <= upper + tol; }
    bool within(const BoundInterval& outer, double tol = 0.0) const
    {
        return outer.lower - tol <= lower && upper <= outer.upper + tol;
    }
    std::string label() const;
};

/// Aggregated quantities of a single-class model used by the bounding methods.
///
/// Stations are queueing stations (delay stations folded into `think_time`);
/// `servers[i]` is 1 for single servers and m for multiserver stations.
struct BoundModelView {
    std::vector<double> loadings;
    std::vector<int> servers;
    double think_time = 0.0;
    int population = 0;

    double total = 0.0;   ///< L = sum L_i
    double max = 0.0;     ///< L_max
    double average = 0.0; ///< L / M
    int max_count = 0;    ///< M_max, stations with L_i = L_max
    std::size_t bottleneck = 0;

    /// Relative utilizations L_i / (s_i L_b), normalized to max 1.
    std::vector<double> relative_utilization;
    std::vector<std::size_t> bottleneck_set;
    double bottleneck_tolerance = 1e-6;

    static BoundModelView from_loadings(std::vector<double> loadings, double think_time, int population,
                                        std::vector<int> servers = {}, double bottleneck_tolerance = 1e-6);
    /// Requires fixed-rate, delay, or multiserver (a(j) = min(j, m)) stations.
    static BoundModelView from_model(const ClosedModel& model, double bottleneck_tolerance = 1e-6);
    /// Loadings from visit ratios normalized at `reference`.
    static BoundModelView from_routing(const RoutingSpec& spec, std::size_t reference, int population,
                                       double think_time = 0.0, double bottleneck_tolerance = 1e-6);

    BoundModelView at_population(int n) const;
    /// Maximum throughput min_i s_i / L_i.
    double max_throughput() const;
    std::size_t size() const { return loadings.size(); }
};

/// Asymptotic bounds: N/(Z + L N) <= X(N) <= min(N/(Z + L), X_max).
BoundInterval aba(const BoundModelView& view);

struct BjbOptions {
    /// Re-feed the Z > 0 brackets with the BJB interval at N-1 instead of the
    /// ABA interval.
    bool refine = false;
};

/// Balanced job bounds. Z = 0 uses
///   K/((K+M-1) L_max) <= X <= min(1/L_max, K/((K+M-1) L_avg));
/// Z > 0 uses bjb_with_brackets seeded from ABA at N-1. The result is
/// intersected with the ABA interval.
BoundInterval bjb(const BoundModelView& view, BjbOptions options = {});

/// N/(Z + L + L_max (N-1-Z X-)) <= X(N) <= min(N/(Z + L + L_avg (N-1-Z X+)), X_max)
/// where X- <= X(N-1) <= X+.
BoundInterval bjb_with_brackets(const BoundModelView& view, double x_plus, double x_minus);

enum class PbhDirection { Optimistic, Pessimistic };

inline constexpr int kMaxPbhLevel = 4;

/// Raw throughput bound of one side of the performance bound hierarchy at
/// level i: i applications of the arrival-theorem residence-time recursion
/// over populations, starting from the optimistic (even split of
/// max[N L_b - Z, L]) or pessimistic (everything at the bottleneck) seed.
double pbh_bound(const BoundModelView& view, int level, PbhDirection direction);

/// PBH interval at level i: the intersection of the raw bounds of levels 0..i.
BoundInterval pbh(const BoundModelView& view, int level);

/// Kriz iterated bounds at iteration i >= 1.
BoundInterval kriz(const BoundModelView& view, int iterations);

/// Multi-bottleneck asymptotic upper bound
/// min[N/(D+Z), s_b/L_b (1 - 1/N)^{|B|-1}]; lower side is the ABA lower bound.
BoundInterval ae_bound(const BoundModelView& view);

struct QueueBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Geometric queue-length bounds at population n, given x_plus >= X(n) and
/// x_minus <= X(n).
QueueBounds geometric_queue_bounds(const BoundModelView& view, int n, double x_plus, double x_minus);

struct GeometricResult {
    QueueBounds queues;   ///< at population N
    BoundInterval gb;     ///< from R = Z + L + sum L_i Q_i(N-1)
    BoundInterval gsb;    ///< quadratic (square-root) form
};

/// x_plus bounds X(N) from above, x_minus bounds X(N-1) from below.
/// Throws NumericError when the quadratic discriminant is negative.
GeometricResult geometric_bounds(const BoundModelView& view, double x_plus, double x_minus);
/// Brackets from the BJB intervals at N and N-1.
GeometricResult geometric_bounds(const BoundModelView& view);

/// Proportional bounds; x_plus >= X(N-1) >= x_minus.
BoundInterval proportional_bounds(const BoundModelView& view, double x_plus, double x_minus);
BoundInterval proportional_bounds(const BoundModelView& view);

/// (upper - lower) / (upper + lower) * 100.
double pbh_error_measure(const BoundInterval& interval);

/// One method evaluated at the view's population; GB/GSB fall back to BJB
/// (tagged with the requested method) on a negative discriminant.
BoundInterval evaluate_bound(const BoundModelView& view, BoundMethod method, int level);

} // namespace qnkit
