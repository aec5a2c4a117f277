#pragma once

#include "qnkit/model.hpp"

#include <string>
#include <vector>

namespace qnkit {

enum class CharacteristicSource {
    BalancedExact,
    Uja,
    ExternalSolver,
};

const char* to_string(CharacteristicSource source);

/// Throughput characteristic T(k), k = 1..K_max, of a subnetwork: the
/// interface through which a flow-equivalent service center (FESC) stands in
/// for the stations it replaces.
struct ThroughputCharacteristic {
    std::vector<double> throughput; ///< index k-1 holds T(k)
    CharacteristicSource source = CharacteristicSource::ExternalSolver;
    int order = 0;                  ///< series order for Uja sources

    int max_population() const { return static_cast<int>(throughput.size()); }
    /// T(k), held at T(K_max) beyond the table.
    double at(int k) const;
    /// True when every T(k) > 0 and the sequence never decreases.
    bool valid() const;
    std::string describe() const;
};

/// Characteristic of M balanced stations with demand X: T(k) = k / ((M+k-1) X).
ThroughputCharacteristic aggregate_balanced(int stations, double demand, int max_population);

/// Residence time at one of M balanced stations with k jobs in the subnetwork.
double balanced_residence(int stations, double demand, int jobs);

/// Single delay demand equivalent to a set of infinite-server stations.
double aggregate_delay(const std::vector<Station>& stations);

/// Exact characteristic of a set of fixed-rate/load-dependent stations solved
/// in isolation by convolution.
ThroughputCharacteristic exact_characteristic(const std::vector<Station>& stations, int max_population);

/// Load-dependent station with base demand 1/T(1) and rates a(j) = T(j)/T(1).
Station fesc_to_station(const ThroughputCharacteristic& tc, std::string id = "fesc");

/// Replace the stations named in `subset` by `fesc`, placed where the first
/// replaced station was.
ClosedModel replace_with_fesc(const ClosedModel& model, const std::vector<std::string>& subset, Station fesc);

} // namespace qnkit
