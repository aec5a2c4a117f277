#include "qnkit/model_io.hpp"

#include "qnkit/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace qnkit {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
    throw ParseError((path.empty() ? std::string("<root>") : path) + ": " + message);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; })) {
            fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
        }
    }
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    return v.get<double>();
}

int integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) {
        fail(path, "expected an integer");
    }
    return v.get<int>();
}

std::string text(const json& v, const std::string& path)
{
    if (!v.is_string()) {
        fail(path, "expected a string");
    }
    return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path)
{
    if (!v.is_array()) {
        fail(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// Scalar (single class) or map keyed by class name.
std::vector<double> per_class(const json& v, const std::string& path, const std::vector<std::string>& classes)
{
    std::vector<double> out(classes.size(), 0.0);
    if (v.is_number()) {
        if (classes.size() != 1) {
            fail(path, "a scalar is only allowed for single-class models; use a map keyed by class name");
        }
        out[0] = v.get<double>();
        return out;
    }
    if (!v.is_object()) {
        fail(path, "expected a number or a map keyed by class name");
    }
    for (auto it = v.begin(); it != v.end(); ++it) {
        const auto pos = std::find(classes.begin(), classes.end(), it.key());
        if (pos == classes.end()) {
            fail(path + "." + it.key(), "unknown class");
        }
        out[static_cast<std::size_t>(pos - classes.begin())] = number(it.value(), path + "." + it.key());
    }
    return out;
}

StationKind parse_kind(const json& v, const std::string& path)
{
    const auto s = text(v, path);
    if (s == "fixed") {
        return StationKind::FixedRate;
    }
    if (s == "delay") {
        return StationKind::Delay;
    }
    if (s == "load_dependent") {
        return StationKind::LoadDependent;
    }
    fail(path, "kind must be one of fixed, delay, load_dependent (got '" + s + "')");
}

std::size_t line_of(const std::string& text, std::size_t byte)
{
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
    return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

ordered_json per_class_json(const std::vector<double>& values, const std::vector<std::string>& classes)
{
    if (classes.size() == 1) {
        return values.empty() ? 0.0 : values[0];
    }
    ordered_json obj = ordered_json::object();
    for (std::size_t r = 0; r < classes.size(); ++r) {
        obj[classes[r]] = r < values.size() ? values[r] : 0.0;
    }
    return obj;
}

} // namespace

ModelDocument parse_model(const std::string& input)
{
    json root;
    try {
        root = json::parse(input);
    } catch (const json::parse_error& e) {
        std::ostringstream msg;
        msg << "line " << line_of(input, e.byte) << ": " << e.what();
        throw ParseError(msg.str());
    }
    if (!root.is_object()) {
        fail("", "model file must contain a JSON object");
    }
    reject_unknown(root, "", {"classes", "population", "think_time", "stations", "routing", "metadata"});

    ModelDocument doc;
    if (root.contains("classes")) {
        const auto& c = root["classes"];
        if (!c.is_array() || c.empty()) {
            fail("classes", "expected a non-empty array of class names");
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            doc.classes.push_back(text(c[i], "classes[" + std::to_string(i) + "]"));
        }
        const std::set<std::string> unique(doc.classes.begin(), doc.classes.end());
        if (unique.size() != doc.classes.size()) {
            fail("classes", "class names must be unique");
        }
    } else {
        doc.classes = {"jobs"};
    }

    if (!root.contains("population")) {
        fail("population", "missing required field");
    }
    const auto& pop = root["population"];
    if (pop.is_number_integer()) {
        if (doc.class_count() != 1) {
            fail("population", "expected one population per class");
        }
        doc.populations = {pop.get<int>()};
    } else if (pop.is_array()) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            doc.populations.push_back(integer(pop[i], "population[" + std::to_string(i) + "]"));
        }
        if (doc.populations.size() != doc.class_count()) {
            fail("population", "expected one population per class");
        }
    } else {
        fail("population", "expected an integer or an array of integers");
    }

    doc.think_times.assign(doc.class_count(), 0.0);
    if (root.contains("think_time")) {
        doc.think_times = per_class(root["think_time"], "think_time", doc.classes);
    }

    if (root.contains("routing")) {
        const auto& r = root["routing"];
        if (!r.is_object()) {
            fail("routing", "expected an object");
        }
        if (doc.class_count() != 1) {
            fail("routing", "routing-derived loadings are supported for single-class models only");
        }
        reject_unknown(r, "routing", {"P", "service_times", "external_rates", "reference"});
        RoutingBlock block;
        if (!r.contains("P") || !r["P"].is_array()) {
            fail("routing.P", "expected a matrix (array of rows)");
        }
        for (std::size_t i = 0; i < r["P"].size(); ++i) {
            block.transitions.push_back(number_array(r["P"][i], "routing.P[" + std::to_string(i) + "]"));
        }
        if (!r.contains("service_times")) {
            fail("routing.service_times", "missing required field");
        }
        block.service_times = number_array(r["service_times"], "routing.service_times");
        if (r.contains("external_rates")) {
            block.external_rates = number_array(r["external_rates"], "routing.external_rates");
        }
        if (r.contains("reference")) {
            const int ref = integer(r["reference"], "routing.reference");
            if (ref < 0) {
                fail("routing.reference", "must be non-negative");
            }
            block.reference = static_cast<std::size_t>(ref);
        }
        doc.routing = std::move(block);
    }

    if (!root.contains("stations") || !root["stations"].is_array()) {
        fail("stations", "expected an array of stations");
    }
    const auto& stations = root["stations"];
    for (std::size_t i = 0; i < stations.size(); ++i) {
        const std::string path = "stations[" + std::to_string(i) + "]";
        const auto& s = stations[i];
        if (!s.is_object()) {
            fail(path, "expected an object");
        }
        reject_unknown(s, path, {"id", "kind", "demand", "rates"});
        Station st;
        if (!s.contains("id")) {
            fail(path + ".id", "missing required field");
        }
        st.id = text(s["id"], path + ".id");
        st.kind = s.contains("kind") ? parse_kind(s["kind"], path + ".kind") : StationKind::FixedRate;
        if (s.contains("demand")) {
            if (doc.routing) {
                fail(path + ".demand", "demands are derived from the routing block and must be omitted");
            }
            st.demands = per_class(s["demand"], path + ".demand", doc.classes);
        } else if (!doc.routing) {
            fail(path + ".demand", "missing required field");
        }
        if (s.contains("rates")) {
            st.rates = number_array(s["rates"], path + ".rates");
        }
        doc.stations.push_back(std::move(st));
    }
    if (doc.routing && doc.routing->transitions.size() != doc.stations.size()) {
        fail("routing.P", "matrix size must match the number of stations");
    }

    if (root.contains("metadata")) {
        const auto& meta = root["metadata"];
        if (!meta.is_object()) {
            fail("metadata", "expected an object of strings");
        }
        for (auto it = meta.begin(); it != meta.end(); ++it) {
            doc.metadata[it.key()] = text(it.value(), "metadata." + it.key());
        }
    }
    return doc;
}

ModelDocument load_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_model(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string serialize_model(const ModelDocument& doc)
{
    ordered_json root;
    root["classes"] = doc.classes;
    root["population"] = doc.populations;
    root["think_time"] = per_class_json(doc.think_times, doc.classes);
    if (doc.routing) {
        ordered_json r;
        r["P"] = doc.routing->transitions;
        r["service_times"] = doc.routing->service_times;
        if (!doc.routing->external_rates.empty()) {
            r["external_rates"] = doc.routing->external_rates;
        }
        r["reference"] = doc.routing->reference;
        root["routing"] = r;
    }
    ordered_json stations = ordered_json::array();
    for (const auto& s : doc.stations) {
        ordered_json js;
        js["id"] = s.id;
        js["kind"] = to_string(s.kind);
        if (!doc.routing) {
            js["demand"] = per_class_json(s.demands, doc.classes);
        }
        if (!s.rates.empty()) {
            js["rates"] = s.rates;
        }
        stations.push_back(js);
    }
    root["stations"] = stations;
    if (!doc.metadata.empty()) {
        root["metadata"] = doc.metadata;
    }
    return root.dump(2) + "\n";
}

void save_model_file(const ModelDocument& doc, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(path + ": cannot write file");
    }
    out << serialize_model(doc);
}

ClosedModel to_closed_model(const ModelDocument& doc)
{
    if (doc.class_count() != 1) {
        throw ModelError("this operation needs a single-class model; the file declares "
                         + std::to_string(doc.class_count()) + " classes");
    }
    ClosedModel model;
    model.population = doc.populations.at(0);
    model.think_time = doc.think_times.at(0);
    if (doc.routing) {
        RoutingSpec spec;
        spec.transitions = doc.routing->transitions;
        spec.service_times = doc.routing->service_times;
        spec.external_rates = doc.routing->external_rates;
        for (const auto& s : doc.stations) {
            spec.ids.push_back(s.id);
        }
        const auto v = visit_ratios(spec, doc.routing->reference);
        for (std::size_t n = 0; n < doc.stations.size(); ++n) {
            Station s = doc.stations[n];
            s.demands = {v[n] * spec.service_times.at(n)};
            model.stations.push_back(std::move(s));
        }
    } else {
        model.stations = doc.stations;
    }
    require_valid(model);
    return model;
}

MultichainModel to_multichain_model(const ModelDocument& doc)
{
    if (doc.routing) {
        return [&] {
            MultichainModel m;
            m.stations = to_closed_model(doc).stations;
            m.populations = doc.populations;
            if (doc.think_times.at(0) > 0.0) {
                m.stations.push_back(Station::delay("think", doc.think_times[0]));
            }
            require_valid(m);
            return m;
        }();
    }
    MultichainModel m;
    m.stations = doc.stations;
    m.populations = doc.populations;
    if (std::any_of(doc.think_times.begin(), doc.think_times.end(), [](double z) { return z > 0.0; })) {
        Station think;
        think.id = "think";
        think.kind = StationKind::Delay;
        think.demands = doc.think_times;
        m.stations.push_back(std::move(think));
    }
    require_valid(m);
    return m;
}

ModelDocument document_from(const ClosedModel& model, std::string class_name)
{
    ModelDocument doc;
    doc.classes = {std::move(class_name)};
    doc.populations = {model.population};
    doc.think_times = {model.think_time};
    doc.stations = model.stations;
    return doc;
}

} // namespace qnkit
