#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "qnkit/error.hpp"
#include "qnkit/exact.hpp"

using namespace qnkit;

namespace {

ClosedModel fixed_model(std::vector<double> demands, int population, double think = 0.0)
{
    ClosedModel m;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        m.stations.push_back(Station::fixed("s" + std::to_string(i + 1), demands[i]));
    }
    m.population = population;
    m.think_time = think;
    return m;
}

} // namespace

TEST_CASE("scaled reals")
{
    ScaledReal a(3.0);
    a *= 1e300;
    a *= 1e300;
    CHECK(a.log2() == doctest::Approx(std::log2(3.0) + 600 * std::log2(10.0)));
    ScaledReal b = a * 2.0;
    CHECK(ratio(a, b) == doctest::Approx(0.5));
    CHECK((ScaledReal(1.0) + ScaledReal(2.0)).value() == 3.0);
    CHECK(ScaledReal().is_zero());
}

TEST_CASE("normalization constants")
{
    const auto m = fixed_model({1, 2}, 2);
    const auto g = convolution(m);
    const auto o = oracle_enumerate(m);
    CHECK(g.value(0) == 1.0);
    CHECK(g.value(1) == doctest::Approx(3.0));
    CHECK(g.value(2) == doctest::Approx(7.0));
    CHECK(o.value(2) == doctest::Approx(7.0));
    CHECK(g.throughput(2) == doctest::Approx(3.0 / 7.0));

    const auto single = convolution(fixed_model({0.7}, 5));
    CHECK(single.value(5) == doctest::Approx(std::pow(0.7, 5)));
}

TEST_CASE("five-station model")
{
    const auto m = fixed_model({0.25, 0.23, 0.19, 0.18, 0.15}, 6);
    const auto g = convolution(m);
    CHECK(g.value(2) == doctest::Approx(0.6032).epsilon(1e-4));
    CHECK(g.throughput(2) == doctest::Approx(1.6578).epsilon(1e-4));
    const auto r = solve_convolution(m);
    const auto ref = oracle::mva({0.25, 0.23, 0.19, 0.18, 0.15}, 0.0, 6);
    for (int k = 1; k <= 6; ++k) {
        CHECK(r.throughput[static_cast<std::size_t>(k - 1)] == doctest::Approx(ref[static_cast<std::size_t>(k - 1)]));
    }
    CHECK(r.throughput[5] == doctest::Approx(2.92332402).epsilon(1e-8));
    CHECK(mva(m).throughput[2] == doctest::Approx(2.1203).epsilon(1e-4));
}

TEST_CASE("balanced closed form")
{
    const auto r = solve_convolution(fixed_model({0.5, 0.5, 0.5, 0.5}, 10));
    for (int k = 1; k <= 10; ++k) {
        CHECK(r.throughput[static_cast<std::size_t>(k - 1)] == doctest::Approx(k / ((4.0 + k - 1) * 0.5)));
    }
}

TEST_CASE("metrics")
{
    const auto r = solve_convolution(fixed_model({1, 1}, 1));
    CHECK(r.queue_length[0][0] == doctest::Approx(0.5));
    CHECK(r.queue_length[0][1] == doctest::Approx(0.5));

    // Little's law and job conservation with think time.
    const auto m = fixed_model({0.3, 0.2, 0.1}, 8, 1.5);
    const auto s = solve_convolution(m);
    for (int k = 1; k <= 8; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        double q = 0.0;
        for (double x : s.queue_length[i]) {
            q += x;
        }
        CHECK(q + s.throughput[i] * 1.5 == doctest::Approx(k));
        CHECK(s.utilization[i][0] == doctest::Approx(0.3 * s.throughput[i]));
    }
}

TEST_CASE("K = 0 gives an empty result")
{
    const auto r = solve_convolution(fixed_model({1, 2}, 0));
    CHECK(r.throughput.empty());
    CHECK(r.final_throughput() == 0.0);
}

TEST_CASE("large populations stay finite")
{
    const auto r = solve_convolution(fixed_model({2.0, 1.0, 0.5}, 3000));
    CHECK(r.final_throughput() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("load-dependent and delay stations against brute force")
{
    oracle::Rng rng(11);
    for (int s = 0; s < 200; ++s) {
        ClosedModel m;
        std::vector<oracle::Node> nodes;
        const int n = rng.integer(1, 4);
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(0.1, 2.0);
            if (rng.coin(0.3)) {
                std::vector<double> rates{1.0};
                for (int j = 1; j < rng.integer(1, 4); ++j) {
                    rates.push_back(rates.back() + rng.uniform(0.0, 1.0));
                }
                m.stations.push_back(Station::load_dependent("l" + std::to_string(i), x, rates));
                nodes.push_back({2, x, 0.0, rates});
            } else {
                m.stations.push_back(Station::fixed("f" + std::to_string(i), x));
                nodes.push_back({0, x, 0.0, {}});
            }
        }
        if (rng.coin()) {
            const double z = rng.uniform(0.1, 3.0);
            m.stations.push_back(Station::delay("z", z));
            nodes.push_back({1, z, 0.0, {}});
        }
        m.population = rng.integer(0, 6);
        const auto g = convolution(m);
        const auto ref = oracle::brute_force_G(nodes, m.population);
        for (int k = 0; k <= m.population; ++k) {
            CHECK(oracle::relative_difference(g.value(k), ref[static_cast<std::size_t>(k)]) < 1e-12);
        }
        if (m.population > 0) {
            // Queue lengths of every station, including the load-dependent
            // ones, add up to the population minus the delay jobs.
            const auto r = solve_convolution(m);
            const auto i = static_cast<std::size_t>(m.population - 1);
            double total = 0.0;
            for (double q : r.queue_length[i]) {
                total += q;
            }
            total += r.throughput[i] * r.think_time;
            CHECK(total == doctest::Approx(m.population));
        }
    }
}

TEST_CASE("oracle refuses oversized state spaces")
{
    ClosedModel m = fixed_model(std::vector<double>(30, 1.0), 40);
    CHECK_THROWS_AS(oracle_enumerate(m), NumericError);
}

TEST_CASE("mva needs fixed-rate stations")
{
    ClosedModel m = fixed_model({1.0}, 3);
    CHECK(mva(m).throughput[1] == doctest::Approx(1.0));
    m.stations.push_back(Station::multiserver("m", 1.0, 2));
    CHECK_THROWS_AS(mva(m), ModelError);

    const auto two = mva(fixed_model({1, 1}, 2));
    CHECK(two.throughput[1] == doctest::Approx(2.0 / 3.0));
    CHECK(mva(fixed_model({1, 2}, 1, 3.0)).throughput[0] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("two-class convolution")
{
    MultichainModel m;
    m.stations = {Station{"a", StationKind::FixedRate, {1.0, 1.0}, {}}, Station{"b", StationKind::FixedRate, {1.0, 1.0}, {}}};
    m.populations = {1, 1};
    const auto r = solve_two_class(m);
    CHECK(r.class1_throughput == doctest::Approx(1.0 / 3.0));
    CHECK(r.class2_throughput == doctest::Approx(1.0 / 3.0));

    MultichainModel one;
    one.stations = {Station{"a", StationKind::FixedRate, {1.0, 1.0}, {}}};
    one.populations = {1, 1};
    CHECK(convolution_two_class(one).value(1, 1) == doctest::Approx(2.0));
    CHECK(solve_two_class(one).class1_throughput == doctest::Approx(0.5));

    SUBCASE("L = 0 matches single class bit for bit")
    {
        const auto single = fixed_model({0.4, 0.3, 0.9}, 7, 2.0);
        MultichainModel mc;
        for (const auto& s : single.stations) {
            mc.stations.push_back(Station{s.id, StationKind::FixedRate, {s.demand(), 0.5}, {}});
        }
        mc.stations.push_back(Station{"z", StationKind::Delay, {2.0, 0.0}, {}});
        mc.populations = {7, 0};
        const auto t2 = convolution_two_class(mc);
        const auto t1 = convolution(single);
        for (int k = 0; k <= 7; ++k) {
            CHECK(t2.at(k, 0) == t1.at(k));
        }
    }

    SUBCASE("brute force")
    {
        oracle::Rng rng(5);
        for (int s = 0; s < 60; ++s) {
            MultichainModel mc;
            std::vector<oracle::Node> nodes;
            const int n = rng.integer(1, 3);
            for (int i = 0; i < n; ++i) {
                const double x = rng.uniform(0.1, 2.0);
                const double y = rng.uniform(0.1, 2.0);
                const bool delay = rng.coin(0.25);
                mc.stations.push_back(Station{"s" + std::to_string(i), delay ? StationKind::Delay : StationKind::FixedRate, {x, y}, {}});
                nodes.push_back({delay ? 1 : 0, x, y, {}});
            }
            mc.populations = {rng.integer(0, 4), rng.integer(0, 4)};
            const auto g = convolution_two_class(mc);
            for (int k = 0; k <= mc.populations[0]; ++k) {
                for (int l = 0; l <= mc.populations[1]; ++l) {
                    CHECK(oracle::relative_difference(g.value(k, l), oracle::brute_force_G2(nodes, k, l)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("multichain MVA")
{
    MultichainModel m;
    m.stations = {Station{"a", StationKind::FixedRate, {1.0, 1.0}, {}}, Station{"b", StationKind::FixedRate, {1.0, 1.0}, {}}};
    m.populations = {1, 1};
    const auto r = mva_multichain(m);
    CHECK(r.throughput[0] == doctest::Approx(1.0 / 3.0));
    CHECK(r.throughput[1] == doctest::Approx(1.0 / 3.0));

    SUBCASE("one chain is single-class MVA")
    {
        const auto single = fixed_model({0.4, 0.3, 0.9}, 6);
        MultichainModel mc;
        mc.stations = single.stations;
        mc.populations = {6};
        CHECK(mva_multichain(mc).throughput[0] == doctest::Approx(mva(single).final_throughput()).epsilon(1e-14));
    }

    SUBCASE("agrees with two-class convolution")
    {
        oracle::Rng rng(9);
        for (int s = 0; s < 50; ++s) {
            MultichainModel mc;
            for (int i = 0; i < rng.integer(1, 5); ++i) {
                mc.stations.push_back(Station{"s" + std::to_string(i), rng.coin(0.2) ? StationKind::Delay : StationKind::FixedRate,
                                              {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)}, {}});
            }
            mc.populations = {rng.integer(0, 6), rng.integer(0, 6)};
            const auto a = mva_multichain(mc);
            const auto b = solve_two_class(mc);
            CHECK(a.throughput[0] == doctest::Approx(b.class1_throughput).epsilon(1e-10));
            CHECK(a.throughput[1] == doctest::Approx(b.class2_throughput).epsilon(1e-10));
        }
    }

    SUBCASE("lattice guard")
    {
        MultichainModel big;
        big.stations = {Station{"a", StationKind::FixedRate, std::vector<double>(8, 1.0), {}}};
        big.populations = std::vector<int>(8, 20);
        CHECK_THROWS_AS(mva_multichain(big), NumericError);
    }
}
