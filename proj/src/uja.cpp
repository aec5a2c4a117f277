#include "qnkit/uja.hpp"

#include "qnkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qnkit {

namespace {

// 1 + R_j(k): the bracket multiplying V_0(k). Terms with k - l <= 0 vanish.
double series_bracket(const DemandMoments& m, int jobs, int order)
{
    double sum = 1.0;
    for (int i = 2; i <= order + 1; ++i) {
        double product = 1.0;
        for (int l = 0; l < i; ++l) {
            product *= static_cast<double>(jobs - l) / (m.stations + l);
        }
        if (product == 0.0) {
            break;
        }
        sum += m.E(i) / i * product;
    }
    return sum;
}

void require_order(const DemandMoments& m, int order)
{
    if (order < 0) {
        throw ModelError("series order must be non-negative");
    }
    if (order + 1 > m.max_order()) {
        std::ostringstream msg;
        msg << "series order " << order << " needs moments up to E_" << order + 1 << ", computed up to E_"
            << m.max_order();
        throw ModelError(msg.str());
    }
}

void require_positive(double bracket, int jobs, int order)
{
    if (!(bracket > 0.0)) {
        std::ostringstream msg;
        msg << "series divergence: network too unbalanced for order " << order << " at k = " << jobs;
        throw NumericError(msg.str());
    }
}

} // namespace

DemandMoments moments(const std::vector<double>& demands, int max_order)
{
    if (demands.empty()) {
        throw ModelError("moments need at least one demand");
    }
    for (double x : demands) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ModelError("every demand must be positive; remove zero-demand stations first");
        }
    }
    DemandMoments m;
    m.stations = static_cast<int>(demands.size());
    const auto [lo, hi] = std::minmax_element(demands.begin(), demands.end());
    // Exact mean for balanced input, so that every E_j is exactly zero.
    m.mean = *lo == *hi ? *lo : std::accumulate(demands.begin(), demands.end(), 0.0) / m.stations;
    for (double x : demands) {
        m.deviations.push_back((x - m.mean) / m.mean);
    }
    m.power_sums.assign(static_cast<std::size_t>(std::max(max_order, 3)) + 1, 0.0);
    for (double e : m.deviations) {
        double p = 1.0;
        for (std::size_t j = 0; j < m.power_sums.size(); ++j) {
            m.power_sums[j] += p;
            p *= e;
        }
    }
    m.cv = std::sqrt(m.E(2) / m.stations);
    m.skewness = m.cv > 0.0 ? m.E(3) / (m.stations * m.cv * m.cv * m.cv) : 0.0;
    return m;
}

double t0(const DemandMoments& m, int jobs)
{
    return jobs / ((m.stations + jobs - 1) * m.mean);
}

double t_series(const DemandMoments& m, int jobs, int order)
{
    require_order(m, order);
    const double base = t0(m, jobs);
    if (order == 0) {
        return base;
    }
    const double now = series_bracket(m, jobs, order);
    const double before = series_bracket(m, jobs - 1, order);
    require_positive(now, jobs, order);
    require_positive(before, jobs - 1, order);
    return base * before / now;
}

double t1_closed(const DemandMoments& m, int jobs)
{
    const double k = jobs;
    const double c2 = m.cv * m.cv;
    const double denom = 1.0 + k * (k - 1.0) / (2.0 * (m.stations + 1)) * c2;
    require_positive(denom, jobs, 1);
    return t0(m, jobs) * (1.0 - ((k - 1.0) / (m.stations + 1) * c2) / denom);
}

double t2_closed(const DemandMoments& m, int jobs)
{
    const double k = jobs;
    const double mm = m.stations;
    const double c2 = m.cv * m.cv;
    const double cb = m.cv * m.skewness;
    const double numer = (k - 1.0) / (mm + 1.0) * c2 * (1.0 + (k - 2.0) / (mm + 2.0) * cb);
    const double denom = 1.0 + k * (k - 1.0) / (mm + 1.0) * c2 * (0.5 + (k - 2.0) / (3.0 * (mm + 2.0)) * cb);
    require_positive(denom, jobs, 2);
    require_positive(denom - numer, jobs - 1, 2);
    return t0(m, jobs) * (1.0 - numer / denom);
}

ThroughputCharacteristic uja_characteristic(const std::vector<double>& demands, int order, int max_population)
{
    const auto m = moments(demands, std::max(kDefaultMomentOrder, order + 1));
    const double cap = 1.0 / *std::max_element(demands.begin(), demands.end());
    ThroughputCharacteristic tc;
    tc.source = CharacteristicSource::Uja;
    tc.order = order;
    double running = 0.0;
    for (int k = 1; k <= max_population; ++k) {
        running = std::max(running, std::min(t_series(m, k, order), cap));
        tc.throughput.push_back(running);
    }
    return tc;
}

} // namespace qnkit
