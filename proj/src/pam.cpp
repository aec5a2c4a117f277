#include "qnkit/pam.hpp"

#include "qnkit/error.hpp"

#include <algorithm>

namespace qnkit {

namespace {

struct Prepared {
    std::size_t stations = 0;
    std::size_t chains = 0;
    std::vector<double> tau;      // [m * chains + k]
    std::vector<double> gamma;    // tau_mk / sum_i tau_ik
    std::vector<bool> delay;      // per station
    std::vector<double> q_full;   // sum_h gamma_mh N_h per station

    double t(std::size_t m, std::size_t k) const { return tau[m * chains + k]; }
    double g(std::size_t m, std::size_t k) const { return gamma[m * chains + k]; }
};

void tick(PamCounter* counter, std::uint64_t n = 1)
{
    if (counter) {
        counter->station_chain_terms += n;
    }
}

Prepared prepare(const MultichainModel& model, PamCounter* counter)
{
    require_valid(model);
    Prepared p;
    p.stations = model.stations.size();
    p.chains = model.chains();
    p.tau.resize(p.stations * p.chains);
    p.gamma.resize(p.stations * p.chains);
    p.q_full.assign(p.stations, 0.0);
    for (const auto& s : model.stations) {
        if (s.kind == StationKind::LoadDependent) {
            throw ModelError("station " + s.id + ": PAM supports fixed-rate and delay stations only");
        }
        p.delay.push_back(s.kind == StationKind::Delay);
    }
    std::vector<double> chain_total(p.chains, 0.0);
    for (std::size_t m = 0; m < p.stations; ++m) {
        for (std::size_t k = 0; k < p.chains; ++k) {
            p.tau[m * p.chains + k] = model.loading(m, k);
            chain_total[k] += model.loading(m, k);
            tick(counter);
        }
    }
    for (std::size_t k = 0; k < p.chains; ++k) {
        if (!(chain_total[k] > 0.0)) {
            throw ModelError("chain " + std::to_string(k + 1) + " has zero total loading");
        }
    }
    for (std::size_t m = 0; m < p.stations; ++m) {
        for (std::size_t k = 0; k < p.chains; ++k) {
            const double g = p.tau[m * p.chains + k] / chain_total[k];
            p.gamma[m * p.chains + k] = g;
            p.q_full[m] += g * model.populations[k];
            tick(counter);
        }
    }
    return p;
}

// T_k = N_k / sum_m D_mk with D_mk = tau_mk (1 + Q_m(N - 1_k)) at queues.
// `queue_without(m, k)` supplies Q_m(N - 1_k).
template <typename QueueFn>
std::vector<double> final_step(const Prepared& p, const std::vector<int>& pop, QueueFn queue_without,
                               PamCounter* counter)
{
    std::vector<double> t(p.chains, 0.0);
    for (std::size_t k = 0; k < p.chains; ++k) {
        if (pop[k] == 0) {
            continue;
        }
        double delay = 0.0;
        for (std::size_t m = 0; m < p.stations; ++m) {
            const double tau = p.t(m, k);
            delay += p.delay[m] ? tau : tau * (1.0 + queue_without(m, k));
            tick(counter);
        }
        t[k] = pop[k] / delay;
    }
    return t;
}

std::vector<double> utilizations(const Prepared& p, const std::vector<double>& t, PamCounter* counter)
{
    std::vector<double> u(p.stations, 0.0);
    for (std::size_t m = 0; m < p.stations; ++m) {
        for (std::size_t k = 0; k < p.chains; ++k) {
            u[m] += p.t(m, k) * t[k];
            tick(counter);
        }
    }
    return u;
}

PamResult finish(const Prepared& p, std::vector<double> t, PamVariant variant, bool scale, PamCounter* counter)
{
    PamResult r;
    r.variant = variant;
    r.scaled.assign(p.chains, false);
    if (scale) {
        const auto u = utilizations(p, t, counter);
        for (std::size_t k = 0; k < p.chains; ++k) {
            double largest = 0.0;
            for (std::size_t m = 0; m < p.stations; ++m) {
                if (!p.delay[m] && p.t(m, k) > 0.0) {
                    largest = std::max(largest, u[m]);
                }
                tick(counter);
            }
            if (largest > 1.0) {
                t[k] /= largest;
                r.scaled[k] = true;
            }
        }
    }
    r.utilization = utilizations(p, t, counter);
    for (double x : t) {
        r.total_throughput += x;
    }
    r.throughput = std::move(t);
    return r;
}

std::vector<double> basic_throughputs(const Prepared& p, const std::vector<int>& pop, PamCounter* counter)
{
    return final_step(
        p, pop, [&](std::size_t m, std::size_t k) { return p.q_full[m] - p.g(m, k); }, counter);
}

} // namespace

const char* to_string(PamVariant variant)
{
    switch (variant) {
    case PamVariant::Basic:
        return "PAM_BASIC";
    case PamVariant::Improved:
        return "PAM_IMPROVED";
    case PamVariant::Two:
        return "PAM_TWO";
    }
    return "?";
}

PamResult pam_basic(const MultichainModel& model, PamCounter* counter)
{
    const auto p = prepare(model, counter);
    return finish(p, basic_throughputs(p, model.populations, counter), PamVariant::Basic, false, counter);
}

PamResult pam_improved(const MultichainModel& model, PamCounter* counter)
{
    const auto p = prepare(model, counter);
    return finish(p, basic_throughputs(p, model.populations, counter), PamVariant::Improved, true, counter);
}

PamResult pam_two(const MultichainModel& model, PamCounter* counter)
{
    const auto p = prepare(model, counter);
    const auto& pop = model.populations;

    // queue[k][m] = Q_m(N - 1_k) from one exact MVA step at N - 1_k, seeded
    // with proportional estimates at N - 1_k - 1_h.
    std::vector<std::vector<double>> queue(p.chains, std::vector<double>(p.stations, 0.0));
    for (std::size_t k = 0; k < p.chains; ++k) {
        if (pop[k] == 0) {
            continue;
        }
        std::vector<int> reduced = pop;
        --reduced[k];
        std::vector<double> t(p.chains, 0.0);
        for (std::size_t h = 0; h < p.chains; ++h) {
            if (reduced[h] == 0) {
                continue;
            }
            double delay = 0.0;
            for (std::size_t m = 0; m < p.stations; ++m) {
                const double tau = p.t(m, h);
                const double seed = p.q_full[m] - p.g(m, k) - p.g(m, h);
                delay += p.delay[m] ? tau : tau * (1.0 + seed);
                tick(counter);
            }
            t[h] = reduced[h] / delay;
        }
        for (std::size_t m = 0; m < p.stations; ++m) {
            const double seed_base = p.q_full[m] - p.g(m, k);
            double q = 0.0;
            for (std::size_t h = 0; h < p.chains; ++h) {
                if (reduced[h] == 0) {
                    continue;
                }
                const double tau = p.t(m, h);
                const double w = p.delay[m] ? tau : tau * (1.0 + seed_base - p.g(m, h));
                q += t[h] * w;
                tick(counter);
            }
            queue[k][m] = q;
        }
    }
    auto t = final_step(
        p, pop, [&](std::size_t m, std::size_t k) { return queue[k][m]; }, counter);
    return finish(p, std::move(t), PamVariant::Two, true, counter);
}

} // namespace qnkit
