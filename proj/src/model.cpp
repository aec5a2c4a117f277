#include "qnkit/model.hpp"

#include "linalg.hpp"
#include "qnkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace qnkit {

namespace {

constexpr double kRowTolerance = 1e-9;

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

void check_station(const Station& s, std::size_t classes, std::vector<Diagnostic>& out)
{
    if (s.demands.size() != classes) {
        std::ostringstream msg;
        msg << "expected " << classes << " demand value(s), found " << s.demands.size();
        out.push_back({s.id, msg.str()});
    }
    for (double d : s.demands) {
        if (!finite_non_negative(d)) {
            std::ostringstream msg;
            msg << "demand must be a finite non-negative number, got " << d;
            out.push_back({s.id, msg.str()});
            break;
        }
    }
    if (s.kind == StationKind::LoadDependent) {
        if (s.rates.empty()) {
            out.push_back({s.id, "load-dependent station needs a rate table"});
        } else {
            if (s.rates.front() != 1.0) {
                std::ostringstream msg;
                msg << "rate table must start with a(1) = 1, got " << s.rates.front();
                out.push_back({s.id, msg.str()});
            }
            for (std::size_t j = 0; j < s.rates.size(); ++j) {
                if (!(std::isfinite(s.rates[j]) && s.rates[j] > 0.0)) {
                    std::ostringstream msg;
                    msg << "rate a(" << j + 1 << ") must be positive, got " << s.rates[j];
                    out.push_back({s.id, msg.str()});
                    break;
                }
            }
        }
    } else if (!s.rates.empty()) {
        out.push_back({s.id, std::string("rate table given for a ") + to_string(s.kind) + " station"});
    }
}

void check_unique_ids(const std::vector<Station>& stations, std::vector<Diagnostic>& out)
{
    std::set<std::string> seen;
    for (const auto& s : stations) {
        if (!seen.insert(s.id).second) {
            out.push_back({s.id, "duplicate station id"});
        }
    }
}

std::string join_diagnostics(const std::vector<Diagnostic>& diags)
{
    std::ostringstream msg;
    msg << "invalid model:";
    for (const auto& d : diags) {
        msg << "\n  " << (d.subject.empty() ? "<model>" : d.subject) << ": " << d.message;
    }
    return msg.str();
}

std::vector<bool> reachable(const RoutingSpec& spec, std::size_t start, bool forward)
{
    const std::size_t n = spec.size();
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> todo;
    seen[start] = true;
    todo.push(start);
    while (!todo.empty()) {
        const auto i = todo.front();
        todo.pop();
        for (std::size_t j = 0; j < n; ++j) {
            const double p = forward ? spec.transitions[i][j] : spec.transitions[j][i];
            if (p > 0.0 && !seen[j]) {
                seen[j] = true;
                todo.push(j);
            }
        }
    }
    return seen;
}

} // namespace

const char* to_string(StationKind kind)
{
    switch (kind) {
    case StationKind::FixedRate:
        return "fixed";
    case StationKind::Delay:
        return "delay";
    case StationKind::LoadDependent:
        return "load_dependent";
    }
    return "unknown";
}

double Station::rate(std::size_t jobs) const
{
    switch (kind) {
    case StationKind::FixedRate:
        return 1.0;
    case StationKind::Delay:
        return static_cast<double>(jobs);
    case StationKind::LoadDependent:
        if (rates.empty() || jobs == 0) {
            return 1.0;
        }
        return rates[std::min(jobs, rates.size()) - 1];
    }
    return 1.0;
}

Station Station::fixed(std::string id, double demand)
{
    return Station{std::move(id), StationKind::FixedRate, {demand}, {}};
}

Station Station::delay(std::string id, double demand)
{
    return Station{std::move(id), StationKind::Delay, {demand}, {}};
}

Station Station::load_dependent(std::string id, double demand, std::vector<double> rates)
{
    return Station{std::move(id), StationKind::LoadDependent, {demand}, std::move(rates)};
}

Station Station::multiserver(std::string id, double demand, int servers)
{
    std::vector<double> rates;
    for (int j = 1; j <= std::max(servers, 1); ++j) {
        rates.push_back(static_cast<double>(j));
    }
    return load_dependent(std::move(id), demand, std::move(rates));
}

ClosedModel ClosedModel::canonical() const
{
    ClosedModel out;
    out.population = population;
    out.think_time = think_time;
    for (const auto& s : stations) {
        if (s.kind == StationKind::Delay) {
            out.think_time += s.demand();
        } else {
            out.stations.push_back(s);
        }
    }
    return out;
}

double ClosedModel::total_demand() const
{
    double sum = 0.0;
    for (const auto& s : stations) {
        if (s.kind != StationKind::Delay) {
            sum += s.demand();
        }
    }
    return sum;
}

std::vector<double> ClosedModel::demands() const
{
    std::vector<double> out;
    for (const auto& s : stations) {
        if (s.kind != StationKind::Delay) {
            out.push_back(s.demand());
        }
    }
    return out;
}

bool ClosedModel::has_load_dependent() const
{
    return std::any_of(stations.begin(), stations.end(),
                       [](const Station& s) { return s.kind == StationKind::LoadDependent; });
}

std::string RoutingSpec::station_name(std::size_t n) const
{
    if (n < ids.size() && !ids[n].empty()) {
        return ids[n];
    }
    return "station " + std::to_string(n + 1);
}

std::vector<Diagnostic> validate(const ClosedModel& model)
{
    std::vector<Diagnostic> out;
    if (model.population < 0) {
        out.push_back({"", "population must be non-negative"});
    }
    if (!finite_non_negative(model.think_time)) {
        out.push_back({"", "think time must be a finite non-negative number"});
    }
    check_unique_ids(model.stations, out);
    bool any_positive = model.think_time > 0.0;
    for (const auto& s : model.stations) {
        check_station(s, 1, out);
        any_positive = any_positive || s.demand() > 0.0;
    }
    if (!any_positive) {
        out.push_back({"", "no station has a positive demand"});
    }
    return out;
}

std::vector<Diagnostic> validate(const MultichainModel& model)
{
    std::vector<Diagnostic> out;
    if (model.populations.empty()) {
        out.push_back({"", "at least one chain is required"});
    }
    for (std::size_t k = 0; k < model.populations.size(); ++k) {
        if (model.populations[k] < 0) {
            out.push_back({"chain " + std::to_string(k + 1), "population must be non-negative"});
        }
    }
    check_unique_ids(model.stations, out);
    for (const auto& s : model.stations) {
        check_station(s, model.chains(), out);
    }
    for (std::size_t k = 0; k < model.chains(); ++k) {
        const bool visits = std::any_of(model.stations.begin(), model.stations.end(),
                                        [k](const Station& s) { return s.demand(k) > 0.0; });
        if (!visits) {
            out.push_back({"chain " + std::to_string(k + 1), "chain has no station with positive demand"});
        }
    }
    return out;
}

std::vector<Diagnostic> validate(const RoutingSpec& spec, bool closed)
{
    std::vector<Diagnostic> out;
    const std::size_t n = spec.size();
    if (n == 0) {
        out.push_back({"", "routing matrix is empty"});
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = spec.transitions[i];
        if (row.size() != n) {
            out.push_back({spec.station_name(i), "routing row has wrong length"});
            continue;
        }
        double sum = 0.0;
        for (double p : row) {
            if (!(std::isfinite(p) && p >= 0.0)) {
                out.push_back({spec.station_name(i), "routing probabilities must be non-negative"});
                break;
            }
            sum += p;
        }
        if (closed && std::abs(sum - 1.0) > kRowTolerance) {
            std::ostringstream msg;
            msg << "routing row sums to " << sum << ", expected 1";
            out.push_back({spec.station_name(i), msg.str()});
        } else if (!closed && sum > 1.0 + kRowTolerance) {
            std::ostringstream msg;
            msg << "routing row sums to " << sum << ", expected at most 1";
            out.push_back({spec.station_name(i), msg.str()});
        }
    }
    if (spec.service_times.size() != n) {
        out.push_back({"", "service_times must have one entry per station"});
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (!finite_non_negative(spec.service_times[i])) {
                out.push_back({spec.station_name(i), "service time must be non-negative"});
            }
        }
    }
    if (!closed) {
        if (spec.external_rates.size() != n) {
            out.push_back({"", "external_rates must have one entry per station"});
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (!finite_non_negative(spec.external_rates[i])) {
                    out.push_back({spec.station_name(i), "external arrival rate must be non-negative"});
                }
            }
        }
    }
    if (!spec.servers.empty() && spec.servers.size() != n) {
        out.push_back({"", "servers must have one entry per station"});
    }
    for (int m : spec.servers) {
        if (m < 0) {
            out.push_back({"", "server counts must be non-negative"});
            break;
        }
    }
    return out;
}

void require_valid(const ClosedModel& model)
{
    if (auto diags = validate(model); !diags.empty()) {
        throw ModelError(join_diagnostics(diags));
    }
}

void require_valid(const MultichainModel& model)
{
    if (auto diags = validate(model); !diags.empty()) {
        throw ModelError(join_diagnostics(diags));
    }
}

std::vector<double> visit_ratios(const RoutingSpec& spec, std::size_t reference)
{
    if (auto diags = validate(spec, true); !diags.empty()) {
        throw ModelError(join_diagnostics(diags));
    }
    const std::size_t n = spec.size();
    if (reference >= n) {
        throw ModelError("reference station index out of range");
    }

    const auto from_ref = reachable(spec, reference, true);
    const auto to_ref = reachable(spec, reference, false);
    std::vector<std::string> stranded;
    for (std::size_t i = 0; i < n; ++i) {
        if (!from_ref[i] || !to_ref[i]) {
            stranded.push_back(spec.station_name(i));
        }
    }
    if (!stranded.empty()) {
        std::ostringstream msg;
        msg << "routing chain is reducible; not mutually reachable with " << spec.station_name(reference) << ":";
        for (const auto& s : stranded) {
            msg << ' ' << s;
        }
        throw ModelError(msg.str());
    }

    // v_j - sum_i v_i p_ij = 0 for j != reference, v_reference = 1.
    detail::Matrix a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == reference) {
            a[j][j] = 1.0;
            b[j] = 1.0;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            a[j][i] = (i == j ? 1.0 : 0.0) - spec.transitions[i][j];
        }
    }
    auto v = detail::solve_dense(std::move(a), std::move(b));
    if (!v) {
        throw NumericError("visit-ratio system is singular");
    }
    return *v;
}

ClosedModel closed_model_from_routing(const RoutingSpec& spec, std::size_t reference, int population,
                                      double think_time)
{
    const auto v = visit_ratios(spec, reference);
    ClosedModel model;
    model.population = population;
    model.think_time = think_time;
    for (std::size_t n = 0; n < spec.size(); ++n) {
        const double demand = v[n] * spec.service_times[n];
        const int m = spec.server_count(n);
        if (m == 0) {
            model.stations.push_back(Station::delay(spec.station_name(n), demand));
        } else if (m == 1) {
            model.stations.push_back(Station::fixed(spec.station_name(n), demand));
        } else {
            model.stations.push_back(Station::multiserver(spec.station_name(n), demand, m));
        }
    }
    return model;
}

double erlang_c(int servers, double offered)
{
    // Erlang-B by recurrence, then C = B / (1 - rho (1 - B)).
    double b = 1.0;
    for (int k = 1; k <= servers; ++k) {
        b = offered * b / (k + offered * b);
    }
    const double rho = offered / servers;
    return b / (1.0 - rho * (1.0 - b));
}

std::vector<OpenStationResult> analyze_open(const RoutingSpec& spec)
{
    if (auto diags = validate(spec, false); !diags.empty()) {
        throw ModelError(join_diagnostics(diags));
    }
    const std::size_t n = spec.size();
    // lambda_j - sum_i lambda_i p_ij = gamma_j
    detail::Matrix a(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            a[j][i] = (i == j ? 1.0 : 0.0) - spec.transitions[i][j];
        }
    }
    auto lambda = detail::solve_dense(std::move(a), spec.external_rates);
    if (!lambda) {
        throw NumericError("traffic equations are singular (I - P is not invertible)");
    }

    std::vector<OpenStationResult> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rate = (*lambda)[i];
        const double x = spec.service_times[i];
        const int m = spec.server_count(i);
        auto& r = out[i];
        r.arrival_rate = rate;
        if (m == 0) {
            r.utilization = rate * x;
            r.residence_time = x;
            continue;
        }
        r.utilization = rate * x / m;
        if (r.utilization >= 1.0) {
            std::ostringstream msg;
            msg << "unstable station " << spec.station_name(i) << ": utilization " << r.utilization << " >= 1";
            throw NumericError(msg.str());
        }
        if (m == 1) {
            r.residence_time = x / (1.0 - r.utilization);
        } else {
            const double wait = erlang_c(m, rate * x) * x / (m * (1.0 - r.utilization));
            r.residence_time = x + wait;
        }
    }
    return out;
}

} // namespace qnkit
