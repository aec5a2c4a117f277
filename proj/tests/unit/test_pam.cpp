#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "qnkit/error.hpp"
#include "qnkit/pam.hpp"

using namespace qnkit;

namespace {

Station fixed_multi(std::string id, std::vector<double> d)
{
    Station s = Station::fixed(std::move(id), 0.0);
    s.demands = std::move(d);
    return s;
}

MultichainModel single_chain(const std::vector<double>& loadings, int population)
{
    MultichainModel m;
    for (std::size_t i = 0; i < loadings.size(); ++i) {
        m.stations.push_back(Station::fixed("s" + std::to_string(i), loadings[i]));
    }
    m.populations = {population};
    return m;
}

MultichainModel random_model(oracle::Rng& rng, int stations, int chains)
{
    MultichainModel m;
    for (int i = 0; i < stations; ++i) {
        std::vector<double> d;
        for (int k = 0; k < chains; ++k) {
            d.push_back(rng.uniform(0.1, 1.0));
        }
        m.stations.push_back(fixed_multi("s" + std::to_string(i), d));
    }
    for (int k = 0; k < chains; ++k) {
        m.populations.push_back(rng.integer(1, 8));
    }
    return m;
}

} // namespace

TEST_CASE("single chain examples")
{
    const auto two = single_chain({1.0, 1.0}, 2);
    CHECK(pam_basic(two).throughput[0] == doctest::Approx(2.0 / 3.0));

    const auto lone = single_chain({1.0}, 5);
    for (auto r : {pam_basic(lone), pam_improved(lone), pam_two(lone)}) {
        CHECK(r.throughput[0] == doctest::Approx(1.0));
    }

    const auto one_job = single_chain({0.5}, 1);
    CHECK(pam_basic(one_job).throughput[0] == doctest::Approx(2.0));
}

TEST_CASE("empty chain")
{
    MultichainModel m = single_chain({0.4, 0.6}, 3);
    m.stations[0] = fixed_multi("s0", {0.4, 0.3});
    m.stations[1] = fixed_multi("s1", {0.6, 0.2});
    m.populations = {3, 0};
    for (auto r : {pam_basic(m), pam_improved(m), pam_two(m)}) {
        CHECK(r.throughput[1] == 0.0);
        CHECK(r.throughput[0] > 0.0);
    }
}

TEST_CASE("PAM_TWO is exact on a balanced single chain")
{
    for (int n = 1; n <= 12; ++n) {
        const auto m = single_chain({0.3, 0.3, 0.3, 0.3}, n);
        CHECK(pam_two(m).throughput[0] == doctest::Approx(n / ((4 + n - 1) * 0.3)).epsilon(1e-12));
    }
}

TEST_CASE("scaling")
{
    oracle::Rng rng(8);
    int scaled = 0;
    for (int s = 0; s < 200; ++s) {
        const auto m = random_model(rng, rng.integer(3, 10), rng.integer(2, 5));
        const auto basic = pam_basic(m);
        const auto improved = pam_improved(m);
        for (double u : improved.utilization) {
            CHECK(u <= 1.0 + 1e-12);
        }
        for (double u : pam_two(m).utilization) {
            CHECK(u <= 1.0 + 1e-12);
        }
        bool any = false;
        for (std::size_t k = 0; k < m.chains(); ++k) {
            any = any || improved.scaled[k];
            if (!improved.scaled[k]) {
                CHECK(improved.throughput[k] == basic.throughput[k]);
            }
        }
        scaled += any;
        CHECK(improved.total_throughput <= basic.total_throughput + 1e-12);
    }
    MESSAGE("models with a scaled chain: " << scaled << "/200");
}

TEST_CASE("cost grows as MK and MK^2")
{
    auto model = [](int stations, int chains) {
        MultichainModel m;
        for (int i = 0; i < stations; ++i) {
            m.stations.push_back(fixed_multi("s" + std::to_string(i), std::vector<double>(chains, 0.5)));
        }
        m.populations.assign(static_cast<std::size_t>(chains), 3);
        return m;
    };
    auto cost = [&](int stations, int chains, bool two) {
        PamCounter c;
        const auto m = model(stations, chains);
        two ? pam_two(m, &c) : pam_basic(m, &c);
        return static_cast<double>(c.station_chain_terms);
    };
    for (int stations : {3, 10}) {
        // Linear in K for the basic variant, quadratic for the two-step one:
        // constant first and second differences respectively.
        const double step = cost(stations, 2, false) - cost(stations, 1, false);
        const double curve = cost(stations, 3, true) - 2 * cost(stations, 2, true) + cost(stations, 1, true);
        CHECK(step > 0.0);
        CHECK(curve > 0.0);
        for (int k = 2; k <= 20; ++k) {
            CHECK(cost(stations, k + 1, false) - cost(stations, k, false) == step);
            CHECK(cost(stations, k + 1, true) - 2 * cost(stations, k, true) + cost(stations, k - 1, true) == curve);
        }
        // Both are linear in M.
        CHECK(cost(2 * stations, 5, false) == 2 * cost(stations, 5, false));
        CHECK(cost(2 * stations, 5, true) == 2 * cost(stations, 5, true));
    }
}

TEST_CASE("delay stations and validation")
{
    MultichainModel m = single_chain({0.5, 0.5}, 4);
    m.stations.push_back(Station::delay("think", 2.0));
    const auto r = pam_basic(m);
    CHECK(r.throughput[0] > 0.0);
    CHECK(r.throughput[0] < 4.0 / 2.0);

    MultichainModel bad;
    bad.populations = {1};
    CHECK_THROWS_AS(pam_basic(bad), ModelError);
}

TEST_CASE("names")
{
    CHECK(std::string(to_string(PamVariant::Basic)) == "PAM_BASIC");
    CHECK(std::string(to_string(PamVariant::Improved)) == "PAM_IMPROVED");
    CHECK(std::string(to_string(PamVariant::Two)) == "PAM_TWO");
}
