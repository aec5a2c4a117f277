#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "qnkit/cli.hpp"
#include "qnkit/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qnkit;
using namespace qnkit::cli;

namespace {

const char* kFiveStation = R"({"population": 6, "stations": [
  {"id": "s1", "demand": 0.25}, {"id": "s2", "demand": 0.23}, {"id": "s3", "demand": 0.19},
  {"id": "s4", "demand": 0.18}, {"id": "s5", "demand": 0.15}]})";

class TempDir {
public:
    TempDir() : path_(std::filesystem::temp_directory_path() / "qnkit-cli-test")
    {
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string write(const std::string& name, const std::string& content) const
    {
        const auto p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        return *d;
    }
    return static_cast<double>(std::get<long long>(c));
}

std::size_t column(const Table& t, const std::string& name)
{
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == name) {
            return i;
        }
    }
    FAIL("missing column " << name);
    return 0;
}

ModelDocument model_doc(const std::vector<double>& demands, int population, double think = 0.0)
{
    ClosedModel m;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        m.stations.push_back(Station::fixed("s" + std::to_string(i + 1), demands[i]));
    }
    m.population = population;
    m.think_time = think;
    return document_from(m);
}

std::vector<double> exact_throughput(const ModelDocument& doc)
{
    return solve_convolution(to_closed_model(doc)).throughput;
}

} // namespace

TEST_CASE("tables come from the backend alone")
{
    Backend fake = Backend::standard();
    fake.convolution = [](const ClosedModel& m) {
        SolverResult r;
        for (const auto& s : m.stations) {
            r.station_ids.push_back(s.id);
        }
        for (int k = 1; k <= m.population; ++k) {
            r.throughput.push_back(100.0 + k);
            r.utilization.push_back(std::vector<double>(m.stations.size(), 0.5));
            r.queue_length.push_back(std::vector<double>(m.stations.size(), 7.0));
            r.residence_time.push_back(std::vector<double>(m.stations.size(), 1.0));
        }
        return r;
    };
    fake.uja = [](const DemandMoments&, int k, int j) { return 10.0 * j + k; };
    const auto doc = parse_model(kFiveStation);

    const auto solved = solve_table(doc, SolveMethod::Convolution, fake);
    REQUIRE(solved.rows.size() == 6);
    CHECK(solved.header.size() == 2 + 2 * 5);
    CHECK(number(solved.rows[2][column(solved, "T")]) == 103.0);
    CHECK(number(solved.rows[2][column(solved, "U_s3")]) == 0.5);
    CHECK(number(solved.rows[2][column(solved, "Q_s5")]) == 7.0);

    const auto uja = uja_table(doc, {}, fake);
    CHECK(number(uja.rows[3][column(uja, "T1")]) == 14.0);
    CHECK(number(uja.rows[3][column(uja, "exact")]) == 104.0);
    CHECK(number(uja.rows[3][column(uja, "relerr_T2")]) == doctest::Approx((104.0 - 24.0) / 104.0));

    const auto bounds = bounds_table(doc, {{BoundMethod::ABA}, 0, 0}, fake);
    CHECK(number(bounds.table.rows[0][column(bounds.table, "exact")]) == 101.0);
    CHECK(bounds.violations == 6);
}

TEST_CASE("solve")
{
    const auto doc = parse_model(kFiveStation);
    const auto t = solve_table(doc, SolveMethod::Mva, Backend::standard());
    const auto ref = oracle::mva({0.25, 0.23, 0.19, 0.18, 0.15}, 0.0, 6);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(number(t.rows[k][1]) == doctest::Approx(ref[k]));
    }
    CHECK(t.render_text().find("2.9233") != std::string::npos);

    auto empty = doc;
    empty.populations = {0};
    CHECK(solve_table(empty, SolveMethod::Convolution, Backend::standard()).rows.empty());

    CHECK(parse_solve_method("mva-multichain") == SolveMethod::MvaMultichain);
    CHECK_THROWS_AS(parse_solve_method("simplex"), ParseError);

    const auto two = parse_model(R"({"classes": ["a", "b"], "population": [2, 1],
        "stations": [{"id": "x", "demand": {"a": 0.3, "b": 0.2}}, {"id": "y", "demand": {"a": 0.1, "b": 0.4}}]})");
    CHECK_THROWS_AS(solve_table(two, SolveMethod::Mva, Backend::standard()), ModelError);
    const auto mc = solve_table(two, SolveMethod::MvaMultichain, Backend::standard());
    const auto tc = solve_table(two, SolveMethod::TwoClass, Backend::standard());
    REQUIRE(mc.rows.size() == 2);
    REQUIRE(tc.rows.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(number(mc.rows[c][2]) == doctest::Approx(number(tc.rows[c][2])));
    }
}

TEST_CASE("rendering")
{
    Table t;
    t.header = {"name", "n", "value"};
    t.rows.push_back({std::string("plain"), 3LL, 1.0 / 3.0});
    t.rows.push_back({std::string("a,b \"q\""), -1LL, 12345.678901234});
    CHECK(t.render_csv()
          == "name,n,value\r\nplain,3,0.3333333333\r\n\"a,b \"\"q\"\"\",-1,12345.6789\r\n");
    const auto text = t.render_text();
    CHECK(text.find("0.3333") != std::string::npos);
    CHECK(text.find("12345.6789") != std::string::npos);
    CHECK(text.find("0.33333") == std::string::npos);
}

TEST_CASE("command exit codes")
{
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    const auto model = dir.write("five.json", kFiveStation);

    CHECK(cmd_solve(model, "convolution", dir.file("t1.csv"), out, err) == kOk);
    const auto csv = slurp(dir.file("t1.csv"));
    CHECK(csv.rfind("k,T,U_s1", 0) == 0);
    CHECK(csv.find("\r\n6,2.92332") != std::string::npos);

    CHECK(cmd_solve(dir.write("bad.json", "{\"population\": 3,"), "mva", std::nullopt, out, err) == kUsage);
    CHECK(err.str().find("line") != std::string::npos);
    CHECK(cmd_solve(model, "two-class-ish", std::nullopt, out, err) == kUsage);
    CHECK(cmd_solve(dir.file("missing.json"), "mva", std::nullopt, out, err) == kUsage);

    const auto multi = dir.write("mc.json", R"({"classes": ["a", "b"], "population": [1, 1],
        "stations": [{"id": "x", "demand": {"a": 0.3, "b": 0.2}}]})");
    CHECK(cmd_solve(multi, "mva", std::nullopt, out, err) == kUsage);
}

TEST_CASE("uja divergence")
{
    TempDir dir;
    const auto path = dir.write("skew.json", R"({"population": 30, "stations": [
      {"id": "a", "demand": 0.01}, {"id": "b", "demand": 1}, {"id": "c", "demand": 1},
      {"id": "d", "demand": 1}, {"id": "e", "demand": 1}, {"id": "f", "demand": 1}]})");
    const auto t = uja_table(load_model_file(path), {2, true}, Backend::standard());
    const auto note = column(t, "note");
    int flagged = 0;
    for (const auto& row : t.rows) {
        const auto& text = std::get<std::string>(row[note]);
        if (!text.empty()) {
            ++flagged;
            CHECK(text.find("T2 diverged, exact used") != std::string::npos);
            CHECK(number(row[column(t, "T2")]) == number(row[column(t, "exact")]));
        }
    }
    CHECK(flagged > 0);

    std::ostringstream out;
    std::ostringstream err;
    CHECK(cmd_uja(path, {2, false}, std::nullopt, out, err) == kNumeric);
    CHECK(err.str().find("series divergence") != std::string::npos);
    CHECK(cmd_uja(path, {1, false}, std::nullopt, out, err) == kOk);
    CHECK(cmd_uja(path, {-1, true}, std::nullopt, out, err) == kUsage);

    const auto delay = dir.write("delay.json", R"({"population": 2, "think_time": 1,
        "stations": [{"id": "a", "demand": 0.2}]})");
    CHECK(cmd_uja(delay, {}, std::nullopt, out, err) == kUsage);
}

TEST_CASE("two-class uja")
{
    const auto doc = parse_model(R"({"classes": ["a", "b"], "population": [4, 3], "stations": [
        {"id": "x", "demand": {"a": 0.3, "b": 0.2}}, {"id": "y", "demand": {"a": 0.25, "b": 0.3}},
        {"id": "z", "demand": {"a": 0.28, "b": 0.22}}]})");
    const auto t = uja_table(doc, {}, Backend::standard());
    REQUIRE(t.rows.size() == 2);
    for (const auto& row : t.rows) {
        CHECK(number(row[column(t, "relerr_T1")]) < 0.1);
    }
}

TEST_CASE("bounds")
{
    TempDir dir;
    std::ostringstream out;
    std::ostringstream err;
    const auto model = dir.write("five.json", kFiveStation);
    CHECK(cmd_bounds(model, {}, dir.file("b.csv"), out, err) == kOk);
    CHECK(out.str().find("PBH(3)") != std::string::npos);
    CHECK(out.str().find("KRIZ(1)") != std::string::npos);
    CHECK(out.str().find(" NO ") == std::string::npos);

    Backend broken = Backend::standard();
    broken.bound = [](const BoundModelView& v, BoundMethod m, int level) {
        auto iv = evaluate_bound(v, m, level);
        iv.upper = iv.lower * 0.5;
        return iv;
    };
    CHECK(cmd_bounds(model, {{BoundMethod::BJB}, 0, 0}, std::nullopt, out, err, broken) == kInvariant);
    CHECK(err.str().find("do not contain") != std::string::npos);

    const auto balanced = bounds_table(model_doc({0.4, 0.4, 0.4}, 5),
                                       {{BoundMethod::BJB, BoundMethod::PBH, BoundMethod::PB}, 2, 0},
                                       Backend::standard());
    for (const auto& row : balanced.table.rows) {
        if (std::get<std::string>(row[0]) != "PBH(0)") {
            CHECK(number(row[2]) == doctest::Approx(number(row[3])));
        }
    }

    const auto twin = bounds_table(model_doc({1.0, 1.0, 0.3, 0.2}, 12), {{BoundMethod::ABA, BoundMethod::AE}, 0, 0},
                                   Backend::standard());
    const auto& aba_row = twin.table.rows[11];
    const auto& ae_row = twin.table.rows[23];
    CHECK(std::get<std::string>(ae_row[0]) == "AE");
    CHECK(number(ae_row[3]) < number(aba_row[3]));

    CHECK(parse_method_list("aba,pbh,gsb")
          == std::vector<BoundMethod>{BoundMethod::ABA, BoundMethod::PBH, BoundMethod::GSB});
    CHECK_THROWS_AS(parse_method_list(""), ParseError);
    CHECK_THROWS_AS(parse_method_list("aba,nope"), ParseError);
    CHECK(cmd_bounds(model, {{BoundMethod::ABA}, -1, 0}, std::nullopt, out, err) == kUsage);
}

TEST_CASE("fesc")
{
    const auto standard = Backend::standard();

    SUBCASE("balanced subset is exact")
    {
        const auto doc = model_doc({0.3, 0.3, 0.3, 0.5}, 8, 1.5);
        const auto reduced = fesc_document(doc, {{"s1", "s2", "s3"}, 2, 0, "fesc"}, standard);
        CHECK(reduced.stations.size() == 2);
        CHECK(reduced.metadata.at("fesc.replaced") == "s1,s2,s3");
        CHECK(reduced.metadata.at("fesc.max_population") == "8");
        const auto again = parse_model(serialize_model(reduced));
        const auto full = exact_throughput(doc);
        const auto approx = exact_throughput(again);
        for (std::size_t k = 0; k < full.size(); ++k) {
            CHECK(std::abs(full[k] - approx[k]) <= 1e-10);
        }
    }
    SUBCASE("whole network")
    {
        const auto doc = model_doc({0.3, 0.3, 0.3}, 5);
        const auto reduced = fesc_document(doc, {{"s1", "s2", "s3"}, 2, 0, "agg"}, standard);
        REQUIRE(reduced.stations.size() == 1);
        CHECK(reduced.stations[0].id == "agg");
        CHECK(reduced.stations[0].kind == StationKind::LoadDependent);
        const auto t = exact_throughput(reduced);
        for (int k = 1; k <= 5; ++k) {
            CHECK(t[static_cast<std::size_t>(k - 1)] == doctest::Approx(k / ((3.0 + k - 1) * 0.3)).epsilon(1e-12));
        }
    }
    SUBCASE("unbalanced subset at second order")
    {
        const auto doc = model_doc({0.22, 0.2, 0.18, 0.19, 0.6}, 10, 2.0);
        const auto reduced = fesc_document(doc, {{"s1", "s2", "s3", "s4"}, 2, 0, "fesc"}, standard);
        const auto full = exact_throughput(doc);
        const auto approx = exact_throughput(reduced);
        for (std::size_t k = 0; k < full.size(); ++k) {
            CHECK(oracle::relative_difference(full[k], approx[k]) <= 0.05);
        }
    }
    SUBCASE("errors")
    {
        auto doc = model_doc({0.3, 0.3}, 4);
        doc.stations.push_back(Station::multiserver("m", 0.5, 2));
        CHECK_THROWS_AS(fesc_document(doc, {{"s1", "m"}, 2, 0, "f"}, standard), ModelError);
        CHECK_THROWS_AS(fesc_document(doc, {{"nowhere"}, 2, 0, "f"}, standard), ModelError);
        CHECK_THROWS_AS(fesc_document(doc, {{}, 2, 0, "f"}, standard), ParseError);

        TempDir dir;
        std::ostringstream out;
        std::ostringstream err;
        const auto path = dir.write("m.json", serialize_model(doc));
        CHECK(cmd_fesc(path, {{"s1", "m"}, 2, 0, "f"}, "", out, err) == kUsage);
        CHECK(cmd_fesc(path, {{"s1", "s2"}, 2, 0, "f"}, "", out, err) == kOk);
        CHECK(parse_model(out.str()).stations.size() == 2);
        CHECK(cmd_fesc(path, {{"s1", "s2"}, 2, 0, "f"}, dir.file("out.json"), out, err) == kOk);
        CHECK(load_model_file(dir.file("out.json")).metadata.count("fesc.characteristic") == 1);
    }
}
