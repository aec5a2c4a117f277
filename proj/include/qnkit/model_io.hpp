#pragma once

#include "qnkit/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qnkit {

/// Routing block of a model file.
struct RoutingBlock {
    std::vector<std::vector<double>> transitions;
    std::vector<double> service_times;
    std::vector<double> external_rates;
    std::size_t reference = 0;

    friend bool operator==(const RoutingBlock&, const RoutingBlock&) = default;
};

/// In-memory form of a model file (JSON).
///
/// ```json
/// {
///   "classes": ["batch"],
///   "population": [6],
///   "think_time": 0.0,
///   "stations": [
///     {"id": "cpu", "kind": "fixed", "demand": 0.25},
///     {"id": "disks", "kind": "load_dependent", "demand": 0.4, "rates": [1, 2]},
///     {"id": "users", "kind": "delay", "demand": {"batch": 5.0}}
///   ],
///   "metadata": {"source": "capacity plan"}
/// }
/// ```
///
/// With a `routing` block (single class only) station demands are omitted and
/// derived as visit ratio times `service_times`.
struct ModelDocument {
    std::vector<std::string> classes;
    std::vector<int> populations;
    std::vector<double> think_times; ///< per class
    std::vector<Station> stations;
    std::optional<RoutingBlock> routing;
    std::map<std::string, std::string> metadata;

    std::size_t class_count() const { return classes.size(); }

    friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

/// Throws ParseError with a line number for syntax errors and a field path
/// (e.g. `stations[2].demand`) for schema errors.
ModelDocument parse_model(const std::string& text);
ModelDocument load_model_file(const std::string& path);

std::string serialize_model(const ModelDocument& doc);
void save_model_file(const ModelDocument& doc, const std::string& path);

/// Single-class view; throws ModelError for multi-class documents.
ClosedModel to_closed_model(const ModelDocument& doc);
/// Multichain view; think times become a delay station named "think".
MultichainModel to_multichain_model(const ModelDocument& doc);

ModelDocument document_from(const ClosedModel& model, std::string class_name = "jobs");

} // namespace qnkit
