#include "qnkit/bounds.hpp"

#include "qnkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace qnkit {

namespace {

void require_single_servers(const BoundModelView& view, const char* method)
{
    for (int s : view.servers) {
        if (s != 1) {
            throw ModelError(std::string(method) + " requires single-server stations");
        }
    }
}

// sum_{k=1}^{n} y^k
double geometric_sum(double y, int n)
{
    if (n <= 0 || y == 0.0) {
        return 0.0;
    }
    if (std::abs(1.0 - y) < 1e-6) {
        double sum = 0.0;
        double p = 1.0;
        for (int k = 1; k <= n; ++k) {
            p *= y;
            sum += p;
        }
        return sum;
    }
    return y * (1.0 - std::pow(y, n)) / (1.0 - y);
}

bool is_bottleneck_loading(double li, double lmax) { return li >= lmax * (1.0 - 1e-12); }

BoundInterval make(double lower, double upper, BoundMethod method, int level, int n)
{
    BoundInterval b;
    b.lower = lower;
    b.upper = upper;
    b.method = method;
    b.level = level;
    b.population = n;
    return b;
}

// Per-station residence times of one side of the hierarchy, memoized by
// (level, population).
class PbhRecursion {
public:
    PbhRecursion(const BoundModelView& view, PbhDirection direction)
        : view_(view)
        , direction_(direction)
    {
    }

    const std::vector<double>& residence(int level, int n)
    {
        const auto key = std::make_pair(level, n);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        std::vector<double> r(view_.size(), 0.0);
        if (level == 0) {
            seed(n, r);
        } else if (n <= 1) {
            r = view_.loadings;
        } else {
            const auto& prev = residence(level - 1, n - 1);
            const double total = std::accumulate(prev.begin(), prev.end(), 0.0);
            for (std::size_t k = 0; k < r.size(); ++k) {
                const double share = prev[k] / (view_.think_time + total);
                r[k] = view_.loadings[k] * (1.0 + (n - 1) * share);
            }
        }
        return memo_.emplace(key, std::move(r)).first->second;
    }

private:
    void seed(int n, std::vector<double>& r) const
    {
        if (direction_ == PbhDirection::Optimistic) {
            const double a = std::max(n * view_.max - view_.think_time, view_.total);
            std::fill(r.begin(), r.end(), a / static_cast<double>(r.size()));
        } else {
            r[view_.bottleneck] = n * view_.total;
        }
    }

    const BoundModelView& view_;
    PbhDirection direction_;
    std::map<std::pair<int, int>, std::vector<double>> memo_;
};

} // namespace

const char* to_string(BoundMethod method)
{
    switch (method) {
    case BoundMethod::ABA:
        return "ABA";
    case BoundMethod::BJB:
        return "BJB";
    case BoundMethod::PBH:
        return "PBH";
    case BoundMethod::KRIZ:
        return "KRIZ";
    case BoundMethod::AE:
        return "AE";
    case BoundMethod::GB:
        return "GB";
    case BoundMethod::GSB:
        return "GSB";
    case BoundMethod::PB:
        return "PB";
    }
    return "?";
}

BoundMethod parse_bound_method(const std::string& name)
{
    std::string upper;
    for (char c : name) {
        upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    for (auto m : {BoundMethod::ABA, BoundMethod::BJB, BoundMethod::PBH, BoundMethod::KRIZ, BoundMethod::AE,
                   BoundMethod::GB, BoundMethod::GSB, BoundMethod::PB}) {
        if (upper == to_string(m)) {
            return m;
        }
    }
    throw ParseError("unknown bound method '" + name + "'");
}

std::string BoundInterval::label() const
{
    if (method == BoundMethod::PBH || method == BoundMethod::KRIZ) {
        return std::string(to_string(method)) + "(" + std::to_string(level) + ")";
    }
    return to_string(method);
}

BoundModelView BoundModelView::from_loadings(std::vector<double> loadings, double think_time, int population,
                                             std::vector<int> servers, double bottleneck_tolerance)
{
    if (servers.empty()) {
        servers.assign(loadings.size(), 1);
    }
    if (servers.size() != loadings.size()) {
        throw ModelError("one server count per loading is required");
    }
    BoundModelView v;
    for (std::size_t i = 0; i < loadings.size(); ++i) {
        if (loadings[i] < 0.0 || !std::isfinite(loadings[i])) {
            throw ModelError("loadings must be finite and non-negative");
        }
        if (servers[i] < 1) {
            throw ModelError("server counts must be at least 1");
        }
        if (loadings[i] > 0.0) {
            v.loadings.push_back(loadings[i]);
            v.servers.push_back(servers[i]);
        }
    }
    if (v.loadings.empty()) {
        throw ModelError("bounds need at least one station with positive loading");
    }
    if (think_time < 0.0 || population < 0) {
        throw ModelError("think time and population must be non-negative");
    }
    v.think_time = think_time;
    v.population = population;
    v.bottleneck_tolerance = bottleneck_tolerance;
    v.total = std::accumulate(v.loadings.begin(), v.loadings.end(), 0.0);
    v.max = *std::max_element(v.loadings.begin(), v.loadings.end());
    v.average = v.total / static_cast<double>(v.loadings.size());
    for (double l : v.loadings) {
        v.max_count += is_bottleneck_loading(l, v.max) ? 1 : 0;
    }

    double top = 0.0;
    for (std::size_t i = 0; i < v.loadings.size(); ++i) {
        const double rho = v.loadings[i] / v.servers[i];
        if (rho > top) {
            top = rho;
            v.bottleneck = i;
        }
    }
    for (std::size_t i = 0; i < v.loadings.size(); ++i) {
        const double rho = v.loadings[i] / v.servers[i] / top;
        v.relative_utilization.push_back(rho);
        if (rho >= 1.0 - bottleneck_tolerance) {
            v.bottleneck_set.push_back(i);
        }
    }
    return v;
}

BoundModelView BoundModelView::from_model(const ClosedModel& model, double bottleneck_tolerance)
{
    require_valid(model);
    const ClosedModel canon = model.canonical();
    std::vector<double> loadings;
    std::vector<int> servers;
    for (const auto& s : canon.stations) {
        int m = 1;
        if (s.kind == StationKind::LoadDependent) {
            m = static_cast<int>(s.rates.size());
            for (std::size_t j = 0; j < s.rates.size(); ++j) {
                if (s.rates[j] != static_cast<double>(j + 1)) {
                    throw ModelError("station " + s.id + ": bounds support only multiserver load dependence");
                }
            }
        }
        loadings.push_back(s.demand());
        servers.push_back(m);
    }
    return from_loadings(std::move(loadings), canon.think_time, canon.population, std::move(servers),
                         bottleneck_tolerance);
}

BoundModelView BoundModelView::from_routing(const RoutingSpec& spec, std::size_t reference, int population,
                                            double think_time, double bottleneck_tolerance)
{
    return from_model(closed_model_from_routing(spec, reference, population, think_time), bottleneck_tolerance);
}

BoundModelView BoundModelView::at_population(int n) const
{
    BoundModelView v = *this;
    v.population = n;
    return v;
}

double BoundModelView::max_throughput() const
{
    double best = HUGE_VAL;
    for (std::size_t i = 0; i < loadings.size(); ++i) {
        best = std::min(best, servers[i] / loadings[i]);
    }
    return best;
}

BoundInterval aba(const BoundModelView& view)
{
    const int n = view.population;
    if (n == 0) {
        return make(0.0, 0.0, BoundMethod::ABA, 0, 0);
    }
    const double lower = n / (view.think_time + view.total * n);
    const double upper = std::min(n / (view.think_time + view.total), view.max_throughput());
    return make(lower, upper, BoundMethod::ABA, 0, n);
}

BoundInterval bjb_with_brackets(const BoundModelView& view, double x_plus, double x_minus)
{
    require_single_servers(view, "BJB");
    const int n = view.population;
    if (n == 0) {
        return make(0.0, 0.0, BoundMethod::BJB, 0, 0);
    }
    const double z = view.think_time;
    const double lower = n / (z + view.total + view.max * (n - 1 - z * x_minus));
    const double queued = std::max(0.0, n - 1 - z * x_plus);
    const double upper = std::min(n / (z + view.total + view.average * queued), view.max_throughput());
    return make(lower, upper, BoundMethod::BJB, 0, n);
}

BoundInterval bjb(const BoundModelView& view, BjbOptions options)
{
    require_single_servers(view, "BJB");
    const int n = view.population;
    const auto outer = aba(view);
    if (n == 0) {
        return make(0.0, 0.0, BoundMethod::BJB, 0, 0);
    }
    BoundInterval b;
    if (view.think_time == 0.0) {
        const double m = static_cast<double>(view.size());
        b = make(n / ((n + m - 1.0) * view.max),
                 std::min(1.0 / view.max, n / ((n + m - 1.0) * view.average)), BoundMethod::BJB, 0, n);
    } else {
        const auto prev_view = view.at_population(n - 1);
        const auto brackets = options.refine ? bjb(prev_view, options) : aba(prev_view);
        b = bjb_with_brackets(view, brackets.upper, brackets.lower);
    }
    b.lower = std::max(b.lower, outer.lower);
    b.upper = std::min(b.upper, outer.upper);
    return b;
}

double pbh_bound(const BoundModelView& view, int level, PbhDirection direction)
{
    require_single_servers(view, "PBH");
    if (level < 0 || level > kMaxPbhLevel) {
        std::ostringstream msg;
        msg << "PBH level " << level << " is outside the supported range 0.." << kMaxPbhLevel;
        throw ModelError(msg.str());
    }
    const int n = view.population;
    if (n == 0) {
        return 0.0;
    }
    PbhRecursion recursion(view, direction);
    const auto& r = recursion.residence(level, n);
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    return n / (view.think_time + total);
}

BoundInterval pbh(const BoundModelView& view, int level)
{
    require_single_servers(view, "PBH");
    if (level < 0 || level > kMaxPbhLevel) {
        std::ostringstream msg;
        msg << "PBH level " << level << " is outside the supported range 0.." << kMaxPbhLevel;
        throw ModelError(msg.str());
    }
    const int n = view.population;
    if (n == 0) {
        return make(0.0, 0.0, BoundMethod::PBH, level, 0);
    }
    PbhRecursion optimistic(view, PbhDirection::Optimistic);
    PbhRecursion pessimistic(view, PbhDirection::Pessimistic);
    double lower = 0.0;
    double upper = HUGE_VAL;
    for (int i = 0; i <= level; ++i) {
        const auto& ro = optimistic.residence(i, n);
        const auto& rp = pessimistic.residence(i, n);
        upper = std::min(upper, n / (view.think_time + std::accumulate(ro.begin(), ro.end(), 0.0)));
        lower = std::max(lower, n / (view.think_time + std::accumulate(rp.begin(), rp.end(), 0.0)));
    }
    return make(lower, upper, BoundMethod::PBH, level, n);
}

BoundInterval kriz(const BoundModelView& view, int iterations)
{
    require_single_servers(view, "Kriz");
    if (iterations < 1) {
        throw ModelError("Kriz bounds need at least one iteration");
    }
    const int n_max = view.population;
    if (n_max == 0) {
        return make(0.0, 0.0, BoundMethod::KRIZ, iterations, 0);
    }
    const double z = view.think_time;
    const double r = z + view.total;
    const double t_max = view.max;
    const double t_avg = view.average;

    // Index n holds the level-(i-1) values at population n.
    std::vector<double> lower(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::vector<double> upper(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        upper[n] = std::min(n / r, 1.0 / t_max);
    }
    for (int i = 1; i <= iterations; ++i) {
        std::vector<double> next_lower(lower.size(), 0.0);
        std::vector<double> next_upper(upper.size(), 0.0);
        for (int n = 1; n <= n_max; ++n) {
            next_lower[n] = n / (r + (n - 1 - z * lower[n - 1]) * t_max);
            next_upper[n] = std::min(n / (r + (n - 1 - z * upper[n - 1]) * t_avg), 1.0 / t_max);
        }
        lower = std::move(next_lower);
        upper = std::move(next_upper);
    }
    return make(lower[n_max], upper[n_max], BoundMethod::KRIZ, iterations, n_max);
}

BoundInterval ae_bound(const BoundModelView& view)
{
    const auto base = aba(view);
    const int n = view.population;
    if (n <= 1) {
        return make(base.lower, base.upper, BoundMethod::AE, 0, n);
    }
    const double extra = static_cast<double>(view.bottleneck_set.size()) - 1.0;
    const double saturation = view.max_throughput() * std::pow(1.0 - 1.0 / n, extra);
    const double upper = std::min(n / (view.think_time + view.total), saturation);
    return make(base.lower, upper, BoundMethod::AE, 0, n);
}

QueueBounds geometric_queue_bounds(const BoundModelView& view, int n, double x_plus, double x_minus)
{
    require_single_servers(view, "GB");
    const std::size_t m = view.size();
    QueueBounds q{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    if (n <= 0) {
        return q;
    }
    const double z = view.think_time;
    const double queued_max = std::max(0.0, n - z * x_minus);
    double sum_lower = 0.0;
    double sum_upper = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double li = view.loadings[i];
        if (is_bottleneck_loading(li, view.max)) {
            continue;
        }
        const double y = li * n / (z + view.total + view.max * n);
        const double big_y = li * x_plus;
        q.lower[i] = geometric_sum(y, n);
        q.upper[i] = big_y < 1.0 ? std::min(geometric_sum(big_y, n), queued_max) : queued_max;
        sum_lower += q.lower[i];
        sum_upper += q.upper[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!is_bottleneck_loading(view.loadings[i], view.max)) {
            continue;
        }
        q.lower[i] = std::max(0.0, (n - z * x_plus - sum_upper) / view.max_count);
        q.upper[i] = std::max(0.0, (n - z * x_minus - sum_lower) / view.max_count);
    }
    return q;
}

GeometricResult geometric_bounds(const BoundModelView& view, double x_plus, double x_minus)
{
    require_single_servers(view, "GB");
    const int n = view.population;
    GeometricResult out;
    out.gb = make(0.0, 0.0, BoundMethod::GB, 0, n);
    out.gsb = make(0.0, 0.0, BoundMethod::GSB, 0, n);
    if (n <= 1) {
        // X(0) = 0 is known, so a single job needs no quadratic.
        if (n == 1) {
            const double x1 = 1.0 / (view.think_time + view.total);
            out.gb.lower = out.gb.upper = out.gsb.lower = out.gsb.upper = x1;
        }
        out.queues = geometric_queue_bounds(view, n, x_plus, x_minus);
        return out;
    }
    const double z = view.think_time;
    const double cap = view.max_throughput();
    const auto prev = geometric_queue_bounds(view, n - 1, x_plus, x_minus);

    double weighted_lower = 0.0;
    double weighted_upper = 0.0;
    double deficit_lower = 0.0;
    double deficit_upper = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        const double li = view.loadings[i];
        weighted_lower += li * prev.lower[i];
        weighted_upper += li * prev.upper[i];
        if (!is_bottleneck_loading(li, view.max)) {
            deficit_lower += (view.max - li) * prev.lower[i];
            deficit_upper += (view.max - li) * prev.upper[i];
        }
    }
    out.gb.lower = n / (z + view.total + weighted_upper);
    out.gb.upper = std::min(n / (z + view.total + weighted_lower), cap);

    // X(N) = N / (b(N) - Z L_max X(N-1)) with (N-1)/N X(N) <= X(N-1) <= X(N).
    const double b_low = z + view.total + view.max * (n - 1) - deficit_lower;
    const double b_high = z + view.total + view.max * (n - 1) - deficit_upper;
    const double disc_low = b_low * b_low - 4.0 * z * view.max * (n - 1);
    const double disc_high = b_high * b_high - 4.0 * z * view.max * n;
    if (disc_low < 0.0 || disc_high < 0.0 || b_high <= 0.0) {
        std::ostringstream msg;
        msg << "geometric square-root bound: negative discriminant at N = " << n;
        throw NumericError(msg.str());
    }
    out.gsb.lower = 2.0 * n / (b_low + std::sqrt(disc_low));
    out.gsb.upper = std::min(2.0 * n / (b_high + std::sqrt(disc_high)), cap);

    out.queues = geometric_queue_bounds(view, n, x_plus, x_minus);
    return out;
}

GeometricResult geometric_bounds(const BoundModelView& view)
{
    const int n = view.population;
    const double x_plus = bjb(view).upper;
    const double x_minus = n > 0 ? bjb(view.at_population(n - 1)).lower : 0.0;
    return geometric_bounds(view, x_plus, x_minus);
}

BoundInterval proportional_bounds(const BoundModelView& view, double x_plus, double x_minus)
{
    require_single_servers(view, "PB");
    const int n = view.population;
    if (n == 0) {
        return make(0.0, 0.0, BoundMethod::PB, 0, 0);
    }
    const double z = view.think_time;
    // sum L^N / sum L^{N-1} = L_max * sum r^N / sum r^{N-1}, r = L / L_max,
    // with powers taken through logs.
    double top = 0.0;
    double bottom = 0.0;
    double squares = 0.0;
    for (double l : view.loadings) {
        const double log_r = std::log(l / view.max);
        top += std::exp(n * log_r);
        bottom += std::exp((n - 1) * log_r);
        squares += l * l;
    }
    const double heavy = view.max * top / bottom;
    const double light = squares / view.total;
    const double lower = n / (z + view.total + heavy * (n - 1 - z * x_minus));
    const double upper = n / (z + view.total + light * std::max(0.0, n - 1 - z * x_plus));
    return make(lower, std::min(upper, view.max_throughput()), BoundMethod::PB, 0, n);
}

BoundInterval proportional_bounds(const BoundModelView& view)
{
    const int n = view.population;
    if (n == 0) {
        return proportional_bounds(view, 0.0, 0.0);
    }
    const auto brackets = aba(view.at_population(n - 1));
    return proportional_bounds(view, brackets.upper, brackets.lower);
}

double pbh_error_measure(const BoundInterval& interval)
{
    const double sum = interval.upper + interval.lower;
    if (sum == 0.0) {
        throw NumericError("error measure undefined for a zero interval");
    }
    return (interval.upper - interval.lower) / sum * 100.0;
}

BoundInterval evaluate_bound(const BoundModelView& view, BoundMethod method, int level)
{
    switch (method) {
    case BoundMethod::ABA:
        return aba(view);
    case BoundMethod::BJB:
        return bjb(view);
    case BoundMethod::PBH:
        return pbh(view, level);
    case BoundMethod::KRIZ:
        return kriz(view, std::max(level, 1));
    case BoundMethod::AE:
        return ae_bound(view);
    case BoundMethod::GB:
    case BoundMethod::GSB:
        try {
            const auto g = geometric_bounds(view);
            return method == BoundMethod::GB ? g.gb : g.gsb;
        } catch (const NumericError&) {
            auto fallback = bjb(view);
            fallback.method = method;
            return fallback;
        }
    case BoundMethod::PB:
        return proportional_bounds(view);
    }
    throw ModelError("unknown bound method");
}

} // namespace qnkit
