#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qnkit {

enum class StationKind {
    FixedRate,     ///< single server, rate independent of queue length
    Delay,         ///< infinite server (think time)
    LoadDependent, ///< rate scaled by a(j) with j jobs present
};

const char* to_string(StationKind kind);

/// A service center. `demands[r]` is the loading of class r in seconds
/// (visits times mean service time per visit).
///
/// For LoadDependent stations `rates[j-1]` holds a(j) for j = 1..j_max with
/// a(1) = 1; the rate is held at a(j_max) for larger queues.
struct Station {
    std::string id;
    StationKind kind = StationKind::FixedRate;
    std::vector<double> demands;
    std::vector<double> rates;

    double demand(std::size_t cls = 0) const { return cls < demands.size() ? demands[cls] : 0.0; }

    /// a(j) for j >= 1, extended past the table by the last entry.
    double rate(std::size_t jobs) const;

    static Station fixed(std::string id, double demand);
    static Station delay(std::string id, double demand);
    static Station load_dependent(std::string id, double demand, std::vector<double> rates);
    /// m identical servers, expressed as a(j) = min(j, m).
    static Station multiserver(std::string id, double demand, int servers);

    friend bool operator==(const Station&, const Station&) = default;
};

/// Single-class closed network.
struct ClosedModel {
    std::vector<Station> stations;
    int population = 0;
    double think_time = 0.0;

    /// Copy with every Delay station folded into `think_time`. Solvers only
    /// ever operate on canonical models.
    ClosedModel canonical() const;

    /// Sum of queueing-station demands.
    double total_demand() const;
    std::vector<double> demands() const;
    bool has_load_dependent() const;

    friend bool operator==(const ClosedModel&, const ClosedModel&) = default;
};

/// Closed network with several routing chains; `stations[m].demands[k]` is the
/// loading of chain k at station m.
struct MultichainModel {
    std::vector<Station> stations;
    std::vector<int> populations;

    std::size_t chains() const { return populations.size(); }
    double loading(std::size_t station, std::size_t chain) const { return stations[station].demand(chain); }

    friend bool operator==(const MultichainModel&, const MultichainModel&) = default;
};

/// Routing description from which visit ratios and loadings are derived.
///
/// `transitions[i][j]` is the probability of moving from station i to j. For a
/// closed network every row sums to one; for an open network the deficit of a
/// row is the exit probability. `servers[n]` is the server count of station n
/// (1 when empty); a value of 0 marks an infinite-server station.
struct RoutingSpec {
    std::vector<std::vector<double>> transitions;
    std::vector<double> service_times;
    std::vector<double> external_rates;
    std::vector<int> servers;
    std::vector<std::string> ids;

    std::size_t size() const { return transitions.size(); }
    std::string station_name(std::size_t n) const;
    int server_count(std::size_t n) const { return n < servers.size() ? servers[n] : 1; }
};

struct Diagnostic {
    std::string subject;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::vector<Diagnostic> validate(const ClosedModel& model);
std::vector<Diagnostic> validate(const MultichainModel& model);
std::vector<Diagnostic> validate(const RoutingSpec& spec, bool closed);

/// Throws ModelError listing every diagnostic when the model is invalid.
void require_valid(const ClosedModel& model);
void require_valid(const MultichainModel& model);

/// Relative visit counts v = vP normalized so that v[reference] = 1. The
/// routing must be closed and irreducible.
std::vector<double> visit_ratios(const RoutingSpec& spec, std::size_t reference);

/// Closed model whose demands are v_n * service_time_n.
ClosedModel closed_model_from_routing(const RoutingSpec& spec, std::size_t reference, int population,
                                      double think_time = 0.0);

struct OpenStationResult {
    double arrival_rate = 0.0;
    double utilization = 0.0;
    double residence_time = 0.0;
};

/// Open Jackson network: traffic equations, then M/M/1 (or Erlang-C M/M/m,
/// or pure delay) per station.
std::vector<OpenStationResult> analyze_open(const RoutingSpec& spec);

/// Erlang-C probability that an arrival waits in an M/M/m queue with offered
/// load `offered` = lambda * service time.
double erlang_c(int servers, double offered);

} // namespace qnkit
