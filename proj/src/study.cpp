#include "qnkit/study.hpp"

#include "qnkit/error.hpp"
#include "qnkit/exact.hpp"
#include "qnkit/pam.hpp"
#include "qnkit/uja.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace qnkit {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
    throw ParseError(path + ": " + message);
}

std::pair<double, double> range(const json& v, const std::string& path)
{
    if (v.is_number()) {
        return {v.get<double>(), v.get<double>()};
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(path, "expected a number or a [min, max] pair");
    }
    const double lo = v[0].get<double>();
    const double hi = v[1].get<double>();
    if (lo > hi) {
        fail(path, "min exceeds max");
    }
    return {lo, hi};
}

std::pair<int, int> int_range(const json& v, const std::string& path)
{
    const bool ok = v.is_number_integer()
                    || (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer());
    if (!ok) {
        fail(path, "expected an integer or a [min, max] pair of integers");
    }
    const auto r = range(v, path);
    return {static_cast<int>(r.first), static_cast<int>(r.second)};
}

int positive_int(const json& v, const std::string& path, int minimum)
{
    if (!v.is_number_integer() || v.get<long long>() < minimum) {
        fail(path, "expected an integer >= " + std::to_string(minimum));
    }
    return v.get<int>();
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double relative_error(double approx, double exact)
{
    return std::abs(approx - exact) / exact;
}

// One draw; false when the utilization band is missed.
bool draw_sample(const StudyConfig& cfg, int index, StudySample& out)
{
    auto rng = sample_rng(cfg.seed, 0, static_cast<std::uint64_t>(index));
    std::uniform_int_distribution<int> station_dist(cfg.stations_min, cfg.stations_max);
    std::uniform_real_distribution<double> cv_dist(cfg.cv_min, cfg.cv_max);
    const int m = station_dist(rng);
    const double c = cfg.cv_min == cfg.cv_max ? cfg.cv_min : cv_dist(rng);
    const double a = c * std::sqrt(3.0);
    std::uniform_real_distribution<double> u_dist(-a, a);

    ClosedModel model;
    model.population = cfg.population_max;
    for (int n = 0; n < m; ++n) {
        const double u = a > 0.0 ? u_dist(rng) : 0.0;
        model.stations.push_back(Station::fixed("s" + std::to_string(n + 1), 1.0 + u));
    }
    const auto exact = solve_convolution(model);
    const double mean_demand = model.total_demand() / m;

    // Population whose exact mean utilization is closest to the band centre.
    const double centre = 0.5 * (cfg.utilization_lo + cfg.utilization_hi);
    int chosen = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = std::max(1, cfg.population_min); k <= cfg.population_max; ++k) {
        const double u = mean_demand * exact.throughput[static_cast<std::size_t>(k - 1)];
        if (std::abs(u - centre) < best) {
            best = std::abs(u - centre);
            chosen = k;
        }
        if (u > centre) {
            break;
        }
    }
    const double t = exact.throughput[static_cast<std::size_t>(chosen - 1)];
    if (mean_demand * t < cfg.utilization_lo || mean_demand * t > cfg.utilization_hi) {
        return false;
    }

    const auto demands = model.demands();
    const auto mom = moments(demands, std::max(kDefaultMomentOrder, cfg.order + 1));
    out.index = index;
    out.stations = m;
    out.target_cv = c;
    out.cv = mom.cv;
    out.population = chosen;
    out.utilization = mean_demand * t;
    out.exact = t;
    for (int j = 0; j <= cfg.order; ++j) {
        try {
            const double v = t_series(mom, chosen, j);
            out.approx.push_back(v);
            out.error.push_back(relative_error(v, t));
        } catch (const NumericError&) {
            out.approx.push_back(std::numeric_limits<double>::quiet_NaN());
            out.error.push_back(std::numeric_limits<double>::infinity());
        }
    }
    if (!cfg.bounds.empty()) {
        const auto view = BoundModelView::from_loadings(demands, 0.0, chosen);
        for (auto method : cfg.bounds) {
            out.bounds.push_back(evaluate_bound(view, method, cfg.bound_level));
        }
    }
    return true;
}

MultichainModel draw_pam_model(std::uint64_t seed, int index)
{
    auto rng = sample_rng(seed, 1, static_cast<std::uint64_t>(index));
    std::uniform_int_distribution<int> m_dist(3, 10);
    std::uniform_int_distribution<int> k_dist(2, 5);
    std::uniform_int_distribution<int> n_dist(1, 8);
    std::uniform_real_distribution<double> load(0.1, 1.0);
    MultichainModel model;
    const int m = m_dist(rng);
    const int k = k_dist(rng);
    for (int c = 0; c < k; ++c) {
        model.populations.push_back(n_dist(rng));
    }
    for (int s = 0; s < m; ++s) {
        Station st;
        st.id = "s" + std::to_string(s + 1);
        for (int c = 0; c < k; ++c) {
            st.demands.push_back(load(rng));
        }
        model.stations.push_back(std::move(st));
    }
    return model;
}

std::vector<PamSummary> run_pam(const StudyConfig& cfg)
{
    std::vector<PamSummary> out(3);
    out[0].name = to_string(PamVariant::Basic);
    out[1].name = to_string(PamVariant::Improved);
    out[2].name = to_string(PamVariant::Two);
    for (int i = 0; i < cfg.pam_samples; ++i) {
        const auto model = draw_pam_model(cfg.seed, i);
        const auto exact = mva_multichain(model);
        const PamResult results[3] = {pam_basic(model), pam_improved(model), pam_two(model)};
        for (std::size_t v = 0; v < 3; ++v) {
            double err = 0.0;
            for (std::size_t k = 0; k < model.chains(); ++k) {
                err += relative_error(results[v].throughput[k], exact.throughput[k]);
            }
            err /= static_cast<double>(model.chains());
            out[v].count += 1;
            out[v].mean += err;
            out[v].max = std::max(out[v].max, err);
            for (double u : results[v].utilization) {
                out[v].max_utilization = std::max(out[v].max_utilization, u);
            }
        }
    }
    for (auto& s : out) {
        if (s.count > 0) {
            s.mean /= s.count;
        }
    }
    return out;
}

std::string fmt(const char* format, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

} // namespace

StudyConfig parse_study_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("study config: ") + e.what());
    }
    if (!root.is_object()) {
        fail("<root>", "study config must be a JSON object");
    }
    StudyConfig cfg;
    for (auto it = root.begin(); it != root.end(); ++it) {
        const auto& key = it.key();
        const auto& v = it.value();
        if (key == "samples") {
            cfg.samples = positive_int(v, key, 1);
        } else if (key == "stations") {
            std::tie(cfg.stations_min, cfg.stations_max) = int_range(v, key);
            if (cfg.stations_min < 1) {
                fail(key, "station counts must be at least 1");
            }
        } else if (key == "cv") {
            std::tie(cfg.cv_min, cfg.cv_max) = range(v, key);
            // a = c sqrt(3) must stay below one to keep every demand positive.
            if (cfg.cv_min < 0.0 || cfg.cv_max * std::sqrt(3.0) >= 1.0) {
                fail(key, "coefficient of variation must lie in [0, 1/sqrt(3))");
            }
        } else if (key == "population") {
            std::tie(cfg.population_min, cfg.population_max) = int_range(v, key);
            if (cfg.population_min < 1) {
                fail(key, "populations must be at least 1");
            }
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) {
                fail(key, "expected a non-negative integer");
            }
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "utilization") {
            std::tie(cfg.utilization_lo, cfg.utilization_hi) = range(v, key);
            if (cfg.utilization_lo <= 0.0 || cfg.utilization_hi >= 1.0) {
                fail(key, "utilization band must lie inside (0, 1)");
            }
        } else if (key == "order") {
            cfg.order = positive_int(v, key, 0);
        } else if (key == "bounds") {
            if (!v.is_array()) {
                fail(key, "expected an array of method names");
            }
            cfg.bounds.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string path = key + "[" + std::to_string(i) + "]";
                if (!v[i].is_string()) {
                    fail(path, "expected a method name");
                }
                try {
                    cfg.bounds.push_back(parse_bound_method(v[i].get<std::string>()));
                } catch (const Error& e) {
                    fail(path, e.what());
                }
            }
        } else if (key == "levels") {
            cfg.bound_level = positive_int(v, key, 0);
        } else if (key == "pam_samples") {
            cfg.pam_samples = positive_int(v, key, 0);
        } else if (key == "attempts_per_sample") {
            cfg.attempts_per_sample = positive_int(v, key, 1);
        } else {
            fail(key, "unknown field");
        }
    }
    return cfg;
}

StudyConfig load_study_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_study_config(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

ErrorSummary summarize_errors(std::string name, std::vector<double> errors)
{
    ErrorSummary s;
    s.name = std::move(name);
    s.count = static_cast<int>(errors.size());
    if (errors.empty()) {
        return s;
    }
    std::sort(errors.begin(), errors.end());
    const auto rank = [&](double p) {
        const auto n = errors.size();
        auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
        return errors[std::min(n, std::max<std::size_t>(idx, 1)) - 1];
    };
    double sum = 0.0;
    int finite = 0;
    int w10 = 0;
    int w15 = 0;
    for (double e : errors) {
        if (std::isinf(e)) {
            ++s.diverged;
            continue;
        }
        sum += e;
        ++finite;
        w10 += e <= 0.10;
        w15 += e <= 0.15;
    }
    s.mean = finite > 0 ? sum / finite : std::numeric_limits<double>::infinity();
    s.p50 = rank(0.50);
    s.p90 = rank(0.90);
    s.p95 = rank(0.95);
    s.p99 = rank(0.99);
    s.max = errors.back();
    s.within10 = static_cast<double>(w10) / s.count;
    s.within15 = static_cast<double>(w15) / s.count;
    return s;
}

StudyResult run_study(const StudyConfig& config)
{
    if (config.stations_min < 1 || config.stations_min > config.stations_max) {
        throw ModelError("study config: invalid station-count range");
    }
    if (config.population_min < 1 || config.population_min > config.population_max) {
        throw ModelError("study config: invalid population range");
    }
    if (!(config.utilization_lo > 0.0 && config.utilization_lo <= config.utilization_hi
          && config.utilization_hi < 1.0)) {
        throw ModelError("study config: invalid utilization band");
    }
    StudyResult result;
    result.config = config;
    const long long budget = static_cast<long long>(config.samples) * config.attempts_per_sample;
    int attempt = 0;
    while (static_cast<int>(result.samples.size()) < config.samples) {
        if (attempt >= budget) {
            std::ostringstream msg;
            msg << "infeasible utilization band [" << config.utilization_lo << ", " << config.utilization_hi
                << "]: only " << result.samples.size() << " of " << config.samples << " samples landed in "
                << attempt << " draws";
            throw ModelError(msg.str());
        }
        StudySample s;
        if (draw_sample(config, attempt, s)) {
            result.samples.push_back(std::move(s));
        }
        ++attempt;
    }
    result.attempts = attempt;

    for (int j = 0; j <= config.order; ++j) {
        std::vector<double> errs;
        for (const auto& s : result.samples) {
            errs.push_back(s.error[static_cast<std::size_t>(j)]);
        }
        result.errors.push_back(summarize_errors("T" + std::to_string(j), std::move(errs)));
    }
    for (std::size_t b = 0; b < config.bounds.size(); ++b) {
        BoundSummary bs;
        for (const auto& s : result.samples) {
            const auto& iv = s.bounds[b];
            bs.name = iv.label();
            bs.count += 1;
            bs.violations += !iv.contains(s.exact, 1e-9 * s.exact);
            bs.mean_error_measure += pbh_error_measure(iv);
        }
        if (bs.count > 0) {
            bs.mean_error_measure /= bs.count;
        }
        result.bounds.push_back(bs);
    }
    if (config.pam_samples > 0) {
        result.pam = run_pam(config);
    }
    return result;
}

std::string format_study_report(const StudyResult& result)
{
    const auto& cfg = result.config;
    std::ostringstream out;
    out << "UJA accuracy study\n";
    out << "  seed            " << cfg.seed << "\n";
    out << "  samples         " << result.samples.size() << " (" << result.attempts << " draws)\n";
    out << "  stations        " << cfg.stations_min << ".." << cfg.stations_max << "\n";
    out << "  cv              " << fmt("%.4f", cfg.cv_min) << ".." << fmt("%.4f", cfg.cv_max) << "\n";
    out << "  population      " << cfg.population_min << ".." << cfg.population_max << "\n";
    out << "  utilization     " << fmt("%.4f", cfg.utilization_lo) << ".." << fmt("%.4f", cfg.utilization_hi)
        << "\n\n";

    double mean_util = 0.0;
    double mean_pop = 0.0;
    for (const auto& s : result.samples) {
        mean_util += s.utilization;
        mean_pop += s.population;
    }
    if (!result.samples.empty()) {
        mean_util /= static_cast<double>(result.samples.size());
        mean_pop /= static_cast<double>(result.samples.size());
    }
    out << "mean utilization " << fmt("%.4f", mean_util) << ", mean population " << fmt("%.2f", mean_pop)
        << "\n\n";

    out << "relative error of T_j against exact convolution (percent)\n";
    out << "order      mean      p50      p90      p95      p99      max  <=10%   <=15%  diverged\n";
    for (const auto& e : result.errors) {
        char line[200];
        std::snprintf(line, sizeof line, "%-5s %9.4f %8.4f %8.4f %8.4f %8.4f %8.4f %6.2f%% %6.2f%% %9d\n",
                      e.name.c_str(), 100 * e.mean, 100 * e.p50, 100 * e.p90, 100 * e.p95, 100 * e.p99,
                      100 * e.max, 100 * e.within10, 100 * e.within15, e.diverged);
        out << line;
    }
    if (!result.bounds.empty()) {
        out << "\nthroughput bounds at the sampled population\n";
        out << "method    violations  mean error measure\n";
        for (const auto& b : result.bounds) {
            char line[160];
            std::snprintf(line, sizeof line, "%-9s %10d %19.4f\n", b.name.c_str(), b.violations,
                          b.mean_error_measure);
            out << line;
        }
    }
    if (!result.pam.empty()) {
        out << "\nPAM against exact multichain MVA (" << result.pam.front().count << " models)\n";
        out << "variant        mean err %   max err %   max utilization\n";
        for (const auto& p : result.pam) {
            char line[160];
            std::snprintf(line, sizeof line, "%-13s %11.4f %11.4f %17.6f\n", p.name.c_str(), 100 * p.mean,
                          100 * p.max, p.max_utilization);
            out << line;
        }
    }
    return out.str();
}

} // namespace qnkit
