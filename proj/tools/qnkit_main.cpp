#include "qnkit/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace qnkit;

    CLI::App app{"qnkit: analytic models of closed queueing networks"};
    app.require_subcommand(1);

    std::string model_path;
    std::optional<std::string> csv;
    int order = 2;

    auto* solve = app.add_subcommand("solve", "exact T(k), U and Q for k = 1..K");
    std::string method = "convolution";
    solve->add_option("model", model_path, "model file")->required();
    solve->add_option("--method", method, "oracle, convolution, mva, mva-multichain, two-class");
    solve->add_option("--csv", csv, "also write the table as CSV");

    auto* uja = app.add_subcommand("uja", "UJA series against exact throughput");
    bool no_fallback = false;
    uja->add_option("model", model_path, "model file")->required();
    uja->add_option("--order", order, "series order j");
    uja->add_flag("--no-fallback", no_fallback, "fail instead of substituting exact values on divergence");
    uja->add_option("--csv", csv, "also write the table as CSV");

    auto* bounds = app.add_subcommand("bounds", "throughput bounds against exact throughput");
    std::string methods;
    cli::BoundsOptions bounds_opts;
    bounds->add_option("model", model_path, "model file")->required();
    bounds->add_option("--methods", methods, "comma-separated list, e.g. aba,bjb,pbh");
    bounds->add_option("--levels", bounds_opts.levels, "PBH levels 0..I and Kriz iterations 1..I");
    bounds->add_option("--kmax", bounds_opts.max_population, "populations 1..K (default: model population)");
    bounds->add_option("--csv", csv, "also write the table as CSV");

    auto* study = app.add_subcommand("study", "randomized UJA accuracy study");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    study->add_option("config", config_path, "study config file")->required();
    study->add_option("--seed", seed, "override the config seed");
    study->add_option("--csv", csv, "write per-sample results as CSV");

    auto* fesc = app.add_subcommand("fesc", "replace a station subset by a flow-equivalent station");
    cli::FescOptions fesc_opts;
    std::string output;
    fesc->add_option("model", model_path, "model file")->required();
    fesc->add_option("--stations", fesc_opts.stations, "station ids to aggregate")->required()->delimiter(',');
    fesc->add_option("--order", fesc_opts.order, "UJA order for unbalanced subsets");
    fesc->add_option("--kmax", fesc_opts.max_population, "characteristic length (default: model population)");
    fesc->add_option("--id", fesc_opts.id, "id of the new station");
    fesc->add_option("-o,--output", output, "output model file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kUsage;
    }

    if (solve->parsed()) {
        return cli::cmd_solve(model_path, method, csv, std::cout, std::cerr);
    }
    if (uja->parsed()) {
        return cli::cmd_uja(model_path, {order, !no_fallback}, csv, std::cout, std::cerr);
    }
    if (bounds->parsed()) {
        if (!methods.empty()) {
            try {
                bounds_opts.methods = cli::parse_method_list(methods);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return cli::kUsage;
            }
        }
        return cli::cmd_bounds(model_path, bounds_opts, csv, std::cout, std::cerr);
    }
    if (study->parsed()) {
        return cli::cmd_study(config_path, seed, csv, std::cout, std::cerr);
    }
    return cli::cmd_fesc(model_path, fesc_opts, output, std::cout, std::cerr);
}
