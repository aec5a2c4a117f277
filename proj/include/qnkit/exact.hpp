#pragma once

#include "qnkit/model.hpp"
#include "qnkit/scaled.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace qnkit {

/// Normalization constants G(k, l) for 0 <= k <= K, 0 <= l <= L. A single-class
/// table has L = 0. Entries are kept in scaled form.
class NormalizationTable {
public:
    NormalizationTable() = default;
    NormalizationTable(int max_k, int max_l);

    int max_k() const { return max_k_; }
    int max_l() const { return max_l_; }

    const ScaledReal& at(int k, int l = 0) const { return g_[index(k, l)]; }
    ScaledReal& at(int k, int l = 0) { return g_[index(k, l)]; }

    /// Unscaled value; may overflow for large populations.
    double value(int k, int l = 0) const { return at(k, l).value(); }

    /// T(k) = G(k-1) / G(k) for a single-class table.
    double throughput(int k) const;

    /// Per-class throughputs of a two-class table at (k, l).
    double class1_throughput(int k, int l) const;
    double class2_throughput(int k, int l) const;

    friend bool operator==(const NormalizationTable&, const NormalizationTable&) = default;

private:
    std::size_t index(int k, int l) const
    {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(max_l_ + 1) + static_cast<std::size_t>(l);
    }

    int max_k_ = 0;
    int max_l_ = 0;
    std::vector<ScaledReal> g_;
};

/// Metrics of a single-class model for every population k = 1..K.
///
/// Index k-1 of each outer vector holds the values at population k; station
/// columns follow `station_ids` (the canonical model's queueing stations).
struct SolverResult {
    std::vector<std::string> station_ids;
    double think_time = 0.0;
    std::vector<double> throughput;
    std::vector<std::vector<double>> utilization;
    std::vector<std::vector<double>> queue_length;
    std::vector<std::vector<double>> residence_time;

    int population() const { return static_cast<int>(throughput.size()); }
    /// Throughput at the full population; 0 when K = 0.
    double final_throughput() const { return throughput.empty() ? 0.0 : throughput.back(); }
};

/// Upper limit on the number of job distributions enumerated by the oracle.
inline constexpr double kOracleStateLimit = 1e7;

/// G(k) by explicit summation of the product-form terms over every job
/// distribution. Exponential cost; a reference for the other solvers.
NormalizationTable oracle_enumerate(const ClosedModel& model);

/// Convolution algorithm. Fixed-rate stations use the G_n(k) = G_{n-1}(k) +
/// X_n G_n(k-1) recursion; think time and load-dependent stations are folded
/// by full convolution afterwards.
NormalizationTable convolution(const ClosedModel& model);

/// T, U, Q and R for k = 1..K from a table computed for `model`.
SolverResult metrics_from_G(const ClosedModel& model, const NormalizationTable& table);

/// convolution followed by metrics_from_G.
SolverResult solve_convolution(const ClosedModel& model);

/// Two-class convolution for fixed-rate and delay stations. A one-chain model
/// is treated as L = 0.
NormalizationTable convolution_two_class(const MultichainModel& model);

struct TwoClassResult {
    double class1_throughput = 0.0;
    double class2_throughput = 0.0;
    std::vector<std::string> station_ids;
    std::vector<double> class1_utilization;
    std::vector<double> class2_utilization;
};

TwoClassResult solve_two_class(const MultichainModel& model);

/// Exact single-class MVA for fixed-rate stations plus think time.
SolverResult mva(const ClosedModel& model);

/// Upper limit on prod(N_k + 1) for the multichain MVA lattice.
inline constexpr double kLatticeLimit = 1e7;

struct MultichainResult {
    std::vector<std::string> station_ids;
    std::vector<double> throughput;                  ///< per chain
    std::vector<std::vector<double>> queue_length;   ///< [station][chain]
    std::vector<std::vector<double>> utilization;    ///< [station][chain]
    std::vector<std::vector<double>> residence_time; ///< [station][chain]
};

/// Exact multichain MVA over the full population lattice.
MultichainResult mva_multichain(const MultichainModel& model);

} // namespace qnkit
