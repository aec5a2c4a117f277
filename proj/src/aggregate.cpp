#include "qnkit/aggregate.hpp"

#include "qnkit/error.hpp"
#include "qnkit/exact.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qnkit {

const char* to_string(CharacteristicSource source)
{
    switch (source) {
    case CharacteristicSource::BalancedExact:
        return "balanced-exact";
    case CharacteristicSource::Uja:
        return "uja";
    case CharacteristicSource::ExternalSolver:
        return "external-solver";
    }
    return "unknown";
}

double ThroughputCharacteristic::at(int k) const
{
    if (throughput.empty() || k <= 0) {
        return 0.0;
    }
    return throughput[static_cast<std::size_t>(std::min(k, max_population())) - 1];
}

bool ThroughputCharacteristic::valid() const
{
    if (throughput.empty()) {
        return false;
    }
    for (std::size_t k = 0; k < throughput.size(); ++k) {
        if (!(throughput[k] > 0.0) || !std::isfinite(throughput[k])) {
            return false;
        }
        if (k > 0 && throughput[k] < throughput[k - 1]) {
            return false;
        }
    }
    return true;
}

std::string ThroughputCharacteristic::describe() const
{
    if (source == CharacteristicSource::Uja) {
        return "uja-order-" + std::to_string(order);
    }
    return to_string(source);
}

ThroughputCharacteristic aggregate_balanced(int stations, double demand, int max_population)
{
    if (stations < 1) {
        throw ModelError("balanced aggregation needs at least one station");
    }
    if (!(demand > 0.0)) {
        throw ModelError("balanced aggregation needs a positive demand");
    }
    ThroughputCharacteristic tc;
    tc.source = CharacteristicSource::BalancedExact;
    for (int k = 1; k <= max_population; ++k) {
        // Rounded ratio first so the sequence stays monotone in floating point.
        tc.throughput.push_back(static_cast<double>(k) / (stations + k - 1) / demand);
    }
    return tc;
}

double balanced_residence(int stations, double demand, int jobs)
{
    return demand * (1.0 + static_cast<double>(jobs - 1) / stations);
}

double aggregate_delay(const std::vector<Station>& stations)
{
    double sum = 0.0;
    for (const auto& s : stations) {
        if (s.kind != StationKind::Delay) {
            throw ModelError("station " + s.id + " is not an infinite-server station");
        }
        sum += s.demand();
    }
    return sum;
}

ThroughputCharacteristic exact_characteristic(const std::vector<Station>& stations, int max_population)
{
    ClosedModel sub;
    sub.population = max_population;
    for (const auto& s : stations) {
        if (s.kind == StationKind::Delay) {
            throw ModelError("station " + s.id + ": delay stations belong in the think time, not in an FESC");
        }
        sub.stations.push_back(s);
    }
    const auto table = convolution(sub);
    ThroughputCharacteristic tc;
    tc.source = CharacteristicSource::ExternalSolver;
    for (int k = 1; k <= max_population; ++k) {
        tc.throughput.push_back(table.throughput(k));
    }
    return tc;
}

Station fesc_to_station(const ThroughputCharacteristic& tc, std::string id)
{
    if (!tc.valid()) {
        throw ModelError("throughput characteristic must be positive and non-decreasing");
    }
    const double base = tc.throughput.front();
    std::vector<double> rates;
    rates.reserve(tc.throughput.size());
    rates.push_back(1.0);
    for (std::size_t j = 1; j < tc.throughput.size(); ++j) {
        rates.push_back(tc.throughput[j] / base);
    }
    return Station::load_dependent(std::move(id), 1.0 / base, std::move(rates));
}

ClosedModel replace_with_fesc(const ClosedModel& model, const std::vector<std::string>& subset, Station fesc)
{
    const std::set<std::string> names(subset.begin(), subset.end());
    ClosedModel out;
    out.population = model.population;
    out.think_time = model.think_time;
    bool placed = false;
    std::size_t matched = 0;
    for (const auto& s : model.stations) {
        if (names.count(s.id) == 0) {
            out.stations.push_back(s);
            continue;
        }
        ++matched;
        if (!placed) {
            out.stations.push_back(fesc);
            placed = true;
        }
    }
    if (matched != names.size()) {
        throw ModelError("FESC subset names a station that is not in the model");
    }
    return out;
}

} // namespace qnkit
