#include "qnkit/exact.hpp"

#include "qnkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace qnkit {

namespace {

// F_n(k) for k = 0..max_k: X^k for fixed rate, X^k / k! for delay,
// X^k / prod a(j) for load dependent.
std::vector<ScaledReal> station_factors(const Station& s, int max_k)
{
    std::vector<ScaledReal> f(static_cast<std::size_t>(max_k) + 1);
    f[0] = ScaledReal::one();
    const double x = s.demand();
    for (int k = 1; k <= max_k; ++k) {
        f[k] = f[k - 1] * x;
        if (s.kind != StationKind::FixedRate) {
            f[k] /= s.rate(static_cast<std::size_t>(k));
        }
    }
    return f;
}

std::vector<ScaledReal> delay_factors(double think_time, int max_k)
{
    return station_factors(Station::delay("", think_time), max_k);
}

// g <- g (*) f over 0..max_k.
void fold(std::vector<ScaledReal>& g, const std::vector<ScaledReal>& f)
{
    const int max_k = static_cast<int>(g.size()) - 1;
    for (int k = max_k; k >= 0; --k) {
        ScaledReal sum;
        for (int j = 0; j <= k; ++j) {
            if (!f[j].is_zero() && !g[k - j].is_zero()) {
                sum += f[j] * g[k - j];
            }
        }
        g[k] = sum;
    }
}

void fold_fixed(std::vector<ScaledReal>& g, double x)
{
    if (x == 0.0) {
        return;
    }
    for (std::size_t k = 1; k < g.size(); ++k) {
        g[k] += g[k - 1] * x;
    }
}

// G over 0..max_k for the given stations and think time, fixed-rate stations
// first, then think time, then load-dependent stations.
std::vector<ScaledReal> build_g(const std::vector<const Station*>& stations, double think_time, int max_k)
{
    std::vector<ScaledReal> g(static_cast<std::size_t>(max_k) + 1);
    g[0] = ScaledReal::one();
    for (const Station* s : stations) {
        if (s->kind == StationKind::FixedRate) {
            fold_fixed(g, s->demand());
        }
    }
    if (think_time > 0.0) {
        fold(g, delay_factors(think_time, max_k));
    }
    for (const Station* s : stations) {
        if (s->kind == StationKind::LoadDependent && s->demand() > 0.0) {
            fold(g, station_factors(*s, max_k));
        }
    }
    return g;
}

void require_feasible(const ClosedModel& canon)
{
    const bool any = canon.think_time > 0.0
        || std::any_of(canon.stations.begin(), canon.stations.end(),
                       [](const Station& s) { return s.demand() > 0.0; });
    if (!any) {
        throw ModelError("all demands are zero");
    }
}

double log_binomial(double n, double k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require_multichain_supported(const MultichainModel& model)
{
    for (const auto& s : model.stations) {
        if (s.kind == StationKind::LoadDependent) {
            throw ModelError("station " + s.id + ": load-dependent stations are not supported for multiple chains");
        }
    }
}

} // namespace

NormalizationTable::NormalizationTable(int max_k, int max_l)
    : max_k_(max_k)
    , max_l_(max_l)
    , g_(static_cast<std::size_t>(max_k + 1) * static_cast<std::size_t>(max_l + 1))
{
}

double NormalizationTable::throughput(int k) const
{
    return ratio(at(k - 1), at(k));
}

double NormalizationTable::class1_throughput(int k, int l) const
{
    return k == 0 ? 0.0 : ratio(at(k - 1, l), at(k, l));
}

double NormalizationTable::class2_throughput(int k, int l) const
{
    return l == 0 ? 0.0 : ratio(at(k, l - 1), at(k, l));
}

NormalizationTable oracle_enumerate(const ClosedModel& model)
{
    require_valid(model);
    const ClosedModel canon = model.canonical();
    require_feasible(canon);
    const int max_k = canon.population;

    std::vector<std::vector<double>> factors;
    for (const auto& s : canon.stations) {
        std::vector<double> f(static_cast<std::size_t>(max_k) + 1, 1.0);
        for (int k = 1; k <= max_k; ++k) {
            f[k] = f[k - 1] * s.demand() / (s.kind == StationKind::FixedRate ? 1.0 : s.rate(k));
        }
        factors.push_back(std::move(f));
    }
    if (canon.think_time > 0.0) {
        std::vector<double> f(static_cast<std::size_t>(max_k) + 1, 1.0);
        for (int k = 1; k <= max_k; ++k) {
            f[k] = f[k - 1] * canon.think_time / k;
        }
        factors.push_back(std::move(f));
    }
    const int parts = static_cast<int>(factors.size());
    if (parts == 0) {
        throw ModelError("model has no stations");
    }
    const double states = std::exp(log_binomial(max_k + parts - 1, parts - 1));
    if (states > kOracleStateLimit) {
        std::ostringstream msg;
        msg << "state space of " << states << " distributions exceeds the enumeration guard; use convolution";
        throw NumericError(msg.str());
    }

    NormalizationTable table(max_k, 0);
    std::vector<int> jobs(static_cast<std::size_t>(parts), 0);
    for (int k = 0; k <= max_k; ++k) {
        double total = 0.0;
        // Visit every composition of k into `parts` non-negative parts.
        std::function<void(int, int, double)> walk = [&](int station, int left, double product) {
            if (station == parts - 1) {
                total += product * factors[station][left];
                return;
            }
            for (int j = 0; j <= left; ++j) {
                walk(station + 1, left - j, product * factors[station][j]);
            }
        };
        walk(0, k, 1.0);
        table.at(k) = ScaledReal(total);
    }
    return table;
}

NormalizationTable convolution(const ClosedModel& model)
{
    require_valid(model);
    const ClosedModel canon = model.canonical();
    require_feasible(canon);
    std::vector<const Station*> stations;
    for (const auto& s : canon.stations) {
        stations.push_back(&s);
    }
    const auto g = build_g(stations, canon.think_time, canon.population);
    NormalizationTable table(canon.population, 0);
    for (int k = 0; k <= canon.population; ++k) {
        table.at(k) = g[k];
    }
    return table;
}

SolverResult metrics_from_G(const ClosedModel& model, const NormalizationTable& table)
{
    const ClosedModel canon = model.canonical();
    const int max_k = canon.population;
    if (table.max_k() < max_k) {
        throw ModelError("normalization table is smaller than the model population");
    }

    SolverResult result;
    result.think_time = canon.think_time;
    for (const auto& s : canon.stations) {
        result.station_ids.push_back(s.id);
    }
    if (max_k == 0) {
        return result;
    }

    const std::size_t n = canon.stations.size();
    // Marginal-based tables for load-dependent stations: complement G without
    // station n, and its factors.
    std::vector<std::vector<ScaledReal>> complement(n);
    std::vector<std::vector<ScaledReal>> factors(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (canon.stations[i].kind != StationKind::LoadDependent) {
            continue;
        }
        std::vector<const Station*> others;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                others.push_back(&canon.stations[j]);
            }
        }
        complement[i] = build_g(others, canon.think_time, max_k);
        factors[i] = station_factors(canon.stations[i], max_k);
    }

    for (int k = 1; k <= max_k; ++k) {
        const double t = table.throughput(k);
        std::vector<double> u(n), q(n), r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = canon.stations[i];
            u[i] = s.demand() * t;
            if (s.kind == StationKind::FixedRate) {
                // Q = sum_{j=1}^{k} X^j G(k-j) / G(k)
                ScaledReal power = ScaledReal::one();
                double sum = 0.0;
                for (int j = 1; j <= k && s.demand() > 0.0; ++j) {
                    power *= s.demand();
                    sum += ratio(power * table.at(k - j), table.at(k));
                }
                q[i] = sum;
            } else {
                // Q = sum_j j F(j) G_complement(k-j) / G(k)
                double sum = 0.0;
                for (int j = 1; j <= k && s.demand() > 0.0; ++j) {
                    sum += j * ratio(factors[i][j] * complement[i][k - j], table.at(k));
                }
                q[i] = sum;
            }
            r[i] = t > 0.0 ? q[i] / t : 0.0;
        }
        result.throughput.push_back(t);
        result.utilization.push_back(std::move(u));
        result.queue_length.push_back(std::move(q));
        result.residence_time.push_back(std::move(r));
    }
    return result;
}

SolverResult solve_convolution(const ClosedModel& model)
{
    return metrics_from_G(model, convolution(model));
}

NormalizationTable convolution_two_class(const MultichainModel& model)
{
    if (model.chains() > 2) {
        throw ModelError("two-class convolution accepts at most two chains");
    }
    for (int p : model.populations) {
        if (p < 0) {
            throw ModelError("negative population");
        }
    }
    require_valid(model);
    require_multichain_supported(model);

    const int max_k = model.populations[0];
    const int max_l = model.chains() == 2 ? model.populations[1] : 0;
    auto y_of = [&](const Station& s) { return model.chains() == 2 ? s.demand(1) : 0.0; };

    NormalizationTable g(max_k, max_l);
    g.at(0, 0) = ScaledReal::one();

    // Fixed-rate stations: h_n = (1 - X t - Y u)^{-1} gives
    // G_n(k,l) = G_{n-1}(k,l) + X G_n(k-1,l) + Y G_n(k,l-1).
    for (const auto& s : model.stations) {
        if (s.kind != StationKind::FixedRate) {
            continue;
        }
        const double x = s.demand(0);
        const double y = y_of(s);
        for (int k = 0; k <= max_k; ++k) {
            for (int l = 0; l <= max_l; ++l) {
                if (k > 0 && x != 0.0) {
                    g.at(k, l) += g.at(k - 1, l) * x;
                }
                if (l > 0 && y != 0.0) {
                    g.at(k, l) += g.at(k, l - 1) * y;
                }
            }
        }
    }

    // All delay stations aggregate into one with e^{Zx t + Zy u}.
    double zx = 0.0;
    double zy = 0.0;
    for (const auto& s : model.stations) {
        if (s.kind == StationKind::Delay) {
            zx += s.demand(0);
            zy += y_of(s);
        }
    }
    if (zx > 0.0 || zy > 0.0) {
        const auto fx = delay_factors(zx, max_k);
        const auto fy = delay_factors(zy, max_l);
        NormalizationTable folded(max_k, max_l);
        for (int k = max_k; k >= 0; --k) {
            for (int l = max_l; l >= 0; --l) {
                ScaledReal sum;
                for (int i = 0; i <= k; ++i) {
                    for (int j = 0; j <= l; ++j) {
                        const ScaledReal f = fx[i] * fy[j];
                        if (!f.is_zero() && !g.at(k - i, l - j).is_zero()) {
                            sum += f * g.at(k - i, l - j);
                        }
                    }
                }
                folded.at(k, l) = sum;
            }
        }
        g = std::move(folded);
    }
    return g;
}

TwoClassResult solve_two_class(const MultichainModel& model)
{
    const auto table = convolution_two_class(model);
    TwoClassResult out;
    const int k = table.max_k();
    const int l = table.max_l();
    out.class1_throughput = table.class1_throughput(k, l);
    out.class2_throughput = table.class2_throughput(k, l);
    for (const auto& s : model.stations) {
        out.station_ids.push_back(s.id);
        const bool queueing = s.kind == StationKind::FixedRate;
        out.class1_utilization.push_back(queueing ? s.demand(0) * out.class1_throughput : 0.0);
        out.class2_utilization.push_back(queueing && model.chains() == 2 ? s.demand(1) * out.class2_throughput : 0.0);
    }
    return out;
}

SolverResult mva(const ClosedModel& model)
{
    require_valid(model);
    const ClosedModel canon = model.canonical();
    require_feasible(canon);
    for (const auto& s : canon.stations) {
        if (s.kind != StationKind::FixedRate) {
            throw ModelError("station " + s.id + ": mva supports fixed-rate stations only; use convolution");
        }
    }

    SolverResult result;
    result.think_time = canon.think_time;
    const std::size_t n = canon.stations.size();
    for (const auto& s : canon.stations) {
        result.station_ids.push_back(s.id);
    }
    std::vector<double> q(n, 0.0);
    for (int pop = 1; pop <= canon.population; ++pop) {
        std::vector<double> w(n);
        double residence = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = canon.stations[i].demand() * (1.0 + q[i]);
            residence += w[i];
        }
        const double x = pop / (canon.think_time + residence);
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = x * w[i];
            u[i] = canon.stations[i].demand() * x;
        }
        result.throughput.push_back(x);
        result.utilization.push_back(std::move(u));
        result.queue_length.push_back(q);
        result.residence_time.push_back(std::move(w));
    }
    return result;
}

MultichainResult mva_multichain(const MultichainModel& model)
{
    require_valid(model);
    require_multichain_supported(model);

    const std::size_t chains = model.chains();
    const std::size_t m = model.stations.size();
    double lattice = 1.0;
    std::vector<std::size_t> stride(chains);
    for (std::size_t k = 0; k < chains; ++k) {
        stride[k] = static_cast<std::size_t>(lattice);
        lattice *= model.populations[k] + 1;
    }
    if (lattice > kLatticeLimit) {
        std::ostringstream msg;
        msg << "population lattice of " << lattice << " points exceeds the MVA guard; use PAM";
        throw NumericError(msg.str());
    }
    const auto points = static_cast<std::size_t>(lattice);

    // Total queue length per station at every lattice point.
    std::vector<double> totals(points * m, 0.0);
    std::vector<int> pop(chains, 0);
    MultichainResult result;
    result.throughput.assign(chains, 0.0);
    result.queue_length.assign(m, std::vector<double>(chains, 0.0));
    result.utilization.assign(m, std::vector<double>(chains, 0.0));
    result.residence_time.assign(m, std::vector<double>(chains, 0.0));
    for (const auto& s : model.stations) {
        result.station_ids.push_back(s.id);
    }

    std::vector<double> w(m * chains);
    std::vector<double> t(chains);
    for (std::size_t idx = 1; idx < points; ++idx) {
        // Mixed-radix increment of the population vector.
        for (std::size_t k = 0; k < chains; ++k) {
            if (pop[k] < model.populations[k]) {
                ++pop[k];
                break;
            }
            pop[k] = 0;
        }
        for (std::size_t k = 0; k < chains; ++k) {
            t[k] = 0.0;
            if (pop[k] == 0) {
                continue;
            }
            const std::size_t prev = idx - stride[k];
            double residence = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const auto& s = model.stations[i];
                const double tau = s.demand(k);
                w[i * chains + k] = s.kind == StationKind::Delay ? tau : tau * (1.0 + totals[prev * m + i]);
                residence += w[i * chains + k];
            }
            t[k] = pop[k] / residence;
        }
        for (std::size_t i = 0; i < m; ++i) {
            double q = 0.0;
            for (std::size_t k = 0; k < chains; ++k) {
                if (pop[k] > 0) {
                    q += t[k] * w[i * chains + k];
                }
            }
            totals[idx * m + i] = q;
        }
        if (idx == points - 1) {
            for (std::size_t k = 0; k < chains; ++k) {
                result.throughput[k] = t[k];
                for (std::size_t i = 0; i < m; ++i) {
                    if (pop[k] == 0) {
                        continue;
                    }
                    result.residence_time[i][k] = w[i * chains + k];
                    result.queue_length[i][k] = t[k] * w[i * chains + k];
                    result.utilization[i][k] = model.stations[i].demand(k) * t[k];
                }
            }
        }
    }
    return result;
}

} // namespace qnkit
