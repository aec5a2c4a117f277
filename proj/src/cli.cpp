#include "qnkit/cli.hpp"

#include "qnkit/error.hpp"
#include "qnkit/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace qnkit::cli {

namespace {

std::string format_real(double v, const char* format)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string cell_text(const Cell& c, const char* real_format)
{
    if (const auto* s = std::get_if<std::string>(&c)) {
        return *s;
    }
    if (const auto* i = std::get_if<long long>(&c)) {
        return std::to_string(*i);
    }
    return format_real(std::get<double>(c), real_format);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + "\"";
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error(path + ": cannot write file");
    }
    f << content;
}

double relative_error(double approx, double exact)
{
    return exact == 0.0 ? 0.0 : std::abs(approx - exact) / exact;
}

void require_fixed_rate(const ClosedModel& model, const char* what)
{
    if (model.think_time > 0.0) {
        throw ModelError(std::string(what) + " needs queueing stations only (no delay stations or think time)");
    }
    for (const auto& s : model.stations) {
        if (s.kind != StationKind::FixedRate) {
            throw ModelError(std::string(what) + " needs fixed-rate stations; station " + s.id + " is "
                             + to_string(s.kind));
        }
    }
}

Table single_class_table(const SolverResult& r)
{
    Table t;
    t.header = {"k", "T"};
    for (const auto& id : r.station_ids) {
        t.header.push_back("U_" + id);
    }
    for (const auto& id : r.station_ids) {
        t.header.push_back("Q_" + id);
    }
    for (std::size_t k = 0; k < r.throughput.size(); ++k) {
        std::vector<Cell> row{static_cast<long long>(k + 1), r.throughput[k]};
        for (double u : r.utilization[k]) {
            row.emplace_back(u);
        }
        for (double q : r.queue_length[k]) {
            row.emplace_back(q);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Maps exceptions to exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

void emit(const Table& table, const std::optional<std::string>& csv_path, std::ostream& out)
{
    out << table.render_text();
    if (csv_path) {
        write_file(*csv_path, table.render_csv());
    }
}

} // namespace

std::string Table::render_text() const
{
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
    }
    for (const auto& row : rows) {
        std::vector<std::string> line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line.push_back(cell_text(row[c], "%.4f"));
            if (c < width.size()) {
                width[c] = std::max(width[c], line.back().size());
            }
        }
        cells.push_back(std::move(line));
    }
    std::ostringstream out;
    const auto put = [&](const std::vector<std::string>& line, const std::vector<Cell>* row) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            const auto pad = c < width.size() && width[c] > line[c].size() ? width[c] - line[c].size() : 0;
            const bool left = row == nullptr || std::holds_alternative<std::string>((*row)[c]);
            if (c > 0) {
                out << "  ";
            }
            if (left) {
                out << line[c];
                if (c + 1 < line.size()) {
                    out << std::string(pad, ' ');
                }
            } else {
                out << std::string(pad, ' ') << line[c];
            }
        }
        out << "\n";
    };
    put(header, nullptr);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        put(cells[r], &rows[r]);
    }
    return out.str();
}

std::string Table::render_csv() const
{
    std::ostringstream out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << (c ? "," : "") << csv_field(header[c]);
    }
    out << "\r\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << csv_field(cell_text(row[c], "%.10g"));
        }
        out << "\r\n";
    }
    return out.str();
}

Backend Backend::standard()
{
    Backend b;
    b.convolution = solve_convolution;
    b.oracle = [](const ClosedModel& m) { return metrics_from_G(m, oracle_enumerate(m)); };
    b.mva = qnkit::mva;
    b.mva_multichain = qnkit::mva_multichain;
    b.two_class = solve_two_class;
    b.uja = t_series;
    b.uja2 = uja2_first_order;
    b.bound = evaluate_bound;
    b.characteristic = uja_characteristic;
    return b;
}

SolveMethod parse_solve_method(const std::string& name)
{
    if (name == "oracle") {
        return SolveMethod::Oracle;
    }
    if (name == "convolution") {
        return SolveMethod::Convolution;
    }
    if (name == "mva") {
        return SolveMethod::Mva;
    }
    if (name == "mva-multichain") {
        return SolveMethod::MvaMultichain;
    }
    if (name == "two-class") {
        return SolveMethod::TwoClass;
    }
    throw ParseError("unknown method '" + name + "' (expected oracle, convolution, mva, mva-multichain, two-class)");
}

Table solve_table(const ModelDocument& doc, SolveMethod method, const Backend& backend)
{
    switch (method) {
    case SolveMethod::Oracle:
    case SolveMethod::Convolution:
    case SolveMethod::Mva: {
        if (doc.class_count() != 1) {
            throw ModelError("method needs a single-class model; use mva-multichain or two-class");
        }
        const auto model = to_closed_model(doc);
        const auto& solver = method == SolveMethod::Oracle        ? backend.oracle
                             : method == SolveMethod::Convolution ? backend.convolution
                                                                  : backend.mva;
        return single_class_table(solver(model));
    }
    case SolveMethod::MvaMultichain: {
        const auto model = to_multichain_model(doc);
        const auto r = backend.mva_multichain(model);
        Table t;
        t.header = {"class", "N", "T"};
        for (const auto& id : r.station_ids) {
            t.header.push_back("U_" + id);
        }
        for (const auto& id : r.station_ids) {
            t.header.push_back("Q_" + id);
        }
        for (std::size_t k = 0; k < model.chains(); ++k) {
            std::vector<Cell> row{doc.classes[k], static_cast<long long>(model.populations[k]), r.throughput[k]};
            for (std::size_t m = 0; m < r.station_ids.size(); ++m) {
                row.emplace_back(r.utilization[m][k]);
            }
            for (std::size_t m = 0; m < r.station_ids.size(); ++m) {
                row.emplace_back(r.queue_length[m][k]);
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    case SolveMethod::TwoClass: {
        if (doc.class_count() > 2) {
            throw ModelError("two-class method needs at most two classes; the file declares "
                             + std::to_string(doc.class_count()));
        }
        const auto model = to_multichain_model(doc);
        const auto r = backend.two_class(model);
        Table t;
        t.header = {"class", "N", "T"};
        for (const auto& id : r.station_ids) {
            t.header.push_back("U_" + id);
        }
        for (std::size_t k = 0; k < doc.class_count(); ++k) {
            const auto& u = k == 0 ? r.class1_utilization : r.class2_utilization;
            std::vector<Cell> row{doc.classes[k], static_cast<long long>(doc.populations[k]),
                                  k == 0 ? r.class1_throughput : r.class2_throughput};
            for (double x : u) {
                row.emplace_back(x);
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    }
    throw ModelError("unhandled method");
}

Table uja_table(const ModelDocument& doc, const UjaOptions& options, const Backend& backend)
{
    if (options.order < 0) {
        throw ParseError("--order must be non-negative");
    }
    if (doc.class_count() == 2) {
        const auto model = to_multichain_model(doc);
        for (const auto& s : model.stations) {
            if (s.kind != StationKind::FixedRate) {
                throw ModelError("two-class UJA needs fixed-rate stations; station " + s.id + " is "
                                 + to_string(s.kind));
            }
        }
        std::vector<double> x;
        std::vector<double> y;
        for (const auto& s : model.stations) {
            x.push_back(s.demand(0));
            y.push_back(s.demand(1));
        }
        const int k = doc.populations[0];
        const int l = doc.populations[1];
        const auto m = two_class_moments(x, y);
        const auto t0 = balanced_two_class(m.stations, m.mean_x, m.mean_y, k, l);
        const auto t1 = backend.uja2(x, y, k, l);
        const auto exact = backend.two_class(model);
        Table t;
        t.header = {"class", "N", "T0", "T1", "exact", "relerr_T0", "relerr_T1"};
        for (int c = 0; c < 2; ++c) {
            const double a0 = c == 0 ? t0.class1 : t0.class2;
            const double a1 = c == 0 ? t1.class1 : t1.class2;
            const double ex = c == 0 ? exact.class1_throughput : exact.class2_throughput;
            t.rows.push_back({doc.classes[static_cast<std::size_t>(c)],
                              static_cast<long long>(doc.populations[static_cast<std::size_t>(c)]), a0, a1, ex,
                              relative_error(a0, ex), relative_error(a1, ex)});
        }
        return t;
    }
    if (doc.class_count() != 1) {
        throw ModelError("UJA needs a single-class or two-class model");
    }
    const auto model = to_closed_model(doc).canonical();
    require_fixed_rate(model, "UJA");
    const auto mom = moments(model.demands(), std::max(kDefaultMomentOrder, options.order + 1));
    const auto exact = backend.convolution(model);

    Table t;
    t.header = {"k"};
    for (int j = 0; j <= options.order; ++j) {
        t.header.push_back("T" + std::to_string(j));
    }
    t.header.push_back("exact");
    for (int j = 0; j <= options.order; ++j) {
        t.header.push_back("relerr_T" + std::to_string(j));
    }
    t.header.push_back("note");

    for (int k = 1; k <= model.population; ++k) {
        const double ex = exact.throughput[static_cast<std::size_t>(k - 1)];
        std::vector<double> approx;
        std::string note;
        for (int j = 0; j <= options.order; ++j) {
            try {
                approx.push_back(backend.uja(mom, k, j));
            } catch (const NumericError& e) {
                if (!options.fallback) {
                    throw NumericError("k=" + std::to_string(k) + ": " + e.what());
                }
                approx.push_back(ex);
                note += (note.empty() ? "" : "; ") + ("T" + std::to_string(j) + " diverged, exact used");
            }
        }
        std::vector<Cell> row{static_cast<long long>(k)};
        for (double a : approx) {
            row.emplace_back(a);
        }
        row.emplace_back(ex);
        for (double a : approx) {
            row.emplace_back(relative_error(a, ex));
        }
        row.emplace_back(note);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<BoundMethod> parse_method_list(const std::string& list)
{
    std::vector<BoundMethod> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(parse_bound_method(item));
        }
    }
    if (out.empty()) {
        throw ParseError("--methods needs at least one method");
    }
    return out;
}

BoundsReport bounds_table(const ModelDocument& doc, const BoundsOptions& options, const Backend& backend)
{
    if (options.levels < 0) {
        throw ParseError("--levels must be non-negative");
    }
    auto model = to_closed_model(doc);
    if (options.max_population > 0) {
        model.population = options.max_population;
    }
    const auto view = BoundModelView::from_model(model);
    const auto exact = backend.convolution(model);

    BoundsReport report;
    report.table.header = {"method", "N", "lower", "upper", "exact", "contains", "error_measure"};
    for (auto method : options.methods) {
        int first = 0;
        int last = 0;
        if (method == BoundMethod::PBH) {
            last = std::min(options.levels, kMaxPbhLevel);
        } else if (method == BoundMethod::KRIZ) {
            first = 1;
            last = std::max(options.levels, 1);
        }
        for (int level = first; level <= last; ++level) {
            for (int n = 1; n <= model.population; ++n) {
                const auto iv = backend.bound(view.at_population(n), method, level);
                const double ex = exact.throughput[static_cast<std::size_t>(n - 1)];
                const bool ok = iv.contains(ex, 1e-9 * std::max(1.0, ex));
                report.violations += !ok;
                report.table.rows.push_back({iv.label(), static_cast<long long>(n), iv.lower, iv.upper, ex,
                                             std::string(ok ? "yes" : "NO"), pbh_error_measure(iv)});
            }
        }
    }
    return report;
}

ModelDocument fesc_document(const ModelDocument& doc, const FescOptions& options, const Backend& backend)
{
    if (options.stations.empty()) {
        throw ParseError("--stations needs at least one station id");
    }
    const auto model = to_closed_model(doc);
    std::vector<double> demands;
    for (const auto& id : options.stations) {
        const auto it = std::find_if(model.stations.begin(), model.stations.end(),
                                     [&](const Station& s) { return s.id == id; });
        if (it == model.stations.end()) {
            throw ModelError("station '" + id + "' is not in the model");
        }
        if (it->kind != StationKind::FixedRate) {
            throw ModelError("station '" + id + "' is " + to_string(it->kind)
                             + "; FESC subsets must contain fixed-rate stations only");
        }
        demands.push_back(it->demand());
    }
    const int kmax = options.max_population > 0 ? options.max_population : std::max(model.population, 1);
    const bool balanced = std::all_of(demands.begin(), demands.end(), [&](double x) {
        return std::abs(x - demands.front()) <= 1e-12 * demands.front();
    });
    const auto tc = balanced ? aggregate_balanced(static_cast<int>(demands.size()), demands.front(), kmax)
                             : backend.characteristic(demands, options.order, kmax);
    const auto reduced = replace_with_fesc(model, options.stations, fesc_to_station(tc, options.id));

    auto out = document_from(reduced, doc.classes.front());
    out.metadata = doc.metadata;
    std::string names;
    for (const auto& id : options.stations) {
        names += (names.empty() ? "" : ",") + id;
    }
    out.metadata["fesc.replaced"] = names;
    out.metadata["fesc.characteristic"] = tc.describe();
    out.metadata["fesc.max_population"] = std::to_string(kmax);
    return out;
}

int cmd_solve(const std::string& model_path, const std::string& method, const std::optional<std::string>& csv_path,
              std::ostream& out, std::ostream& err, const Backend& backend)
{
    return guarded(err, [&] {
        const auto m = parse_solve_method(method);
        emit(solve_table(load_model_file(model_path), m, backend), csv_path, out);
        return kOk;
    });
}

int cmd_uja(const std::string& model_path, const UjaOptions& options, const std::optional<std::string>& csv_path,
            std::ostream& out, std::ostream& err, const Backend& backend)
{
    return guarded(err, [&] {
        emit(uja_table(load_model_file(model_path), options, backend), csv_path, out);
        return kOk;
    });
}

int cmd_bounds(const std::string& model_path, const BoundsOptions& options,
               const std::optional<std::string>& csv_path, std::ostream& out, std::ostream& err,
               const Backend& backend)
{
    return guarded(err, [&] {
        const auto report = bounds_table(load_model_file(model_path), options, backend);
        emit(report.table, csv_path, out);
        if (report.violations > 0) {
            err << "error: " << report.violations << " interval(s) do not contain the exact throughput\n";
            return kInvariant;
        }
        return kOk;
    });
}

int cmd_study(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::optional<std::string>& csv_path, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto config = load_study_config(config_path);
        if (seed) {
            config.seed = *seed;
        }
        const auto result = run_study(config);
        out << format_study_report(result);
        if (csv_path) {
            Table t;
            t.header = {"draw", "stations", "cv", "population", "utilization", "exact"};
            for (int j = 0; j <= config.order; ++j) {
                t.header.push_back("T" + std::to_string(j));
            }
            for (const auto& s : result.samples) {
                std::vector<Cell> row{static_cast<long long>(s.index), static_cast<long long>(s.stations), s.cv,
                                      static_cast<long long>(s.population), s.utilization, s.exact};
                for (double a : s.approx) {
                    row.emplace_back(a);
                }
                t.rows.push_back(std::move(row));
            }
            write_file(*csv_path, t.render_csv());
        }
        return kOk;
    });
}

int cmd_fesc(const std::string& model_path, const FescOptions& options, const std::string& output_path,
             std::ostream& out, std::ostream& err, const Backend& backend)
{
    return guarded(err, [&] {
        const auto doc = fesc_document(load_model_file(model_path), options, backend);
        if (output_path.empty()) {
            out << serialize_model(doc);
        } else {
            save_model_file(doc, output_path);
        }
        return kOk;
    });
}

} // namespace qnkit::cli
