#pragma once

#include "qnkit/aggregate.hpp"
#include "qnkit/bounds.hpp"
#include "qnkit/exact.hpp"
#include "qnkit/model_io.hpp"
#include "qnkit/uja.hpp"
#include "qnkit/uja2.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qnkit::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kNumeric = 2,
    kInvariant = 3,
};

/// A table cell: text, integer, or real.
using Cell = std::variant<std::string, long long, double>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    /// Fixed-width text; reals rounded to 4 decimals.
    std::string render_text() const;
    /// RFC 4180 CSV; reals with 10 significant digits.
    std::string render_csv() const;
};

/// Solvers used by the commands. Tests replace individual entries to check
/// that tables are built from solver output alone.
struct Backend {
    std::function<SolverResult(const ClosedModel&)> convolution;
    std::function<SolverResult(const ClosedModel&)> oracle;
    std::function<SolverResult(const ClosedModel&)> mva;
    std::function<MultichainResult(const MultichainModel&)> mva_multichain;
    std::function<TwoClassResult(const MultichainModel&)> two_class;
    std::function<double(const DemandMoments&, int jobs, int order)> uja;
    std::function<ClassThroughputs(const std::vector<double>&, const std::vector<double>&, int, int)> uja2;
    std::function<BoundInterval(const BoundModelView&, BoundMethod, int level)> bound;
    std::function<ThroughputCharacteristic(const std::vector<double>&, int order, int max_population)>
        characteristic;

    static Backend standard();
};

enum class SolveMethod { Oracle, Convolution, Mva, MvaMultichain, TwoClass };

SolveMethod parse_solve_method(const std::string& name);

/// T(k), U_n and Q_n for k = 1..K (single class) or per chain at the full
/// population (multichain methods).
Table solve_table(const ModelDocument& doc, SolveMethod method, const Backend& backend);

struct UjaOptions {
    int order = 2;
    bool fallback = true; ///< replace diverged cells by the exact value
};

/// Columns T_0..T_j, exact and relative errors for k = 1..K; a two-class
/// document is routed to the first-order two-class approximation.
/// Throws NumericError on divergence when fallback is off.
Table uja_table(const ModelDocument& doc, const UjaOptions& options, const Backend& backend);

struct BoundsOptions {
    std::vector<BoundMethod> methods{BoundMethod::ABA, BoundMethod::BJB, BoundMethod::PBH, BoundMethod::KRIZ,
                                     BoundMethod::AE,  BoundMethod::GB,  BoundMethod::GSB, BoundMethod::PB};
    int levels = 3;       ///< PBH levels 0..levels, Kriz iterations 1..levels
    int max_population = 0; ///< 0: the model population
};

struct BoundsReport {
    Table table;
    int violations = 0;
};

BoundsReport bounds_table(const ModelDocument& doc, const BoundsOptions& options, const Backend& backend);

std::vector<BoundMethod> parse_method_list(const std::string& list);

struct FescOptions {
    std::vector<std::string> stations;
    int order = 2;
    int max_population = 0; ///< 0: the model population
    std::string id = "fesc";
};

/// Model document with the subset replaced by a load-dependent station.
ModelDocument fesc_document(const ModelDocument& doc, const FescOptions& options, const Backend& backend);

/// Command entry points: write the table (and CSV when `csv_path` is set),
/// report errors on `err`, and return an ExitCode.
int cmd_solve(const std::string& model_path, const std::string& method, const std::optional<std::string>& csv_path,
              std::ostream& out, std::ostream& err, const Backend& backend = Backend::standard());
int cmd_uja(const std::string& model_path, const UjaOptions& options, const std::optional<std::string>& csv_path,
            std::ostream& out, std::ostream& err, const Backend& backend = Backend::standard());
int cmd_bounds(const std::string& model_path, const BoundsOptions& options,
               const std::optional<std::string>& csv_path, std::ostream& out, std::ostream& err,
               const Backend& backend = Backend::standard());
int cmd_study(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::optional<std::string>& csv_path, std::ostream& out, std::ostream& err);
/// Writes the reduced model to `output_path`, or to `out` when empty.
int cmd_fesc(const std::string& model_path, const FescOptions& options, const std::string& output_path,
             std::ostream& out, std::ostream& err, const Backend& backend = Backend::standard());

} // namespace qnkit::cli
