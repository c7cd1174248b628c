#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace idxcast::cli;

    CLI::App app{"idxcast: stock index forecasting with random forests and LSTMs"};
    app.require_subcommand(1);

    GlobalOptions global;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t threads = 1;
    app.add_option("--config", global.config, "Experiment config (JSON)");
    auto* seed_opt = app.add_option("--seed", seed, "Override tuner.seed");
    auto* out_opt = app.add_option("--out", out_dir, "Override the output directory");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--verbose,-v", global.verbose, "Write the data access log and progress lines");

    auto* ingest = app.add_subcommand("ingest", "Clean a raw price CSV");
    std::string csv_path, index_name;
    ingest->add_option("csv", csv_path, "Raw CSV file")->required();
    ingest->add_option("--index", index_name, "Index name")->required();

    auto* tune = app.add_subcommand("tune", "Tune hyperparameters for one index/slice/model");
    TuneRequest request;
    std::string method;
    std::size_t budget = 0;
    tune->add_option("--index", request.index, "Index name from the config")->required();
    tune->add_option("--slice", request.slice, "Slice name from the config")->required();
    tune->add_option("--model", request.model, "forest or lstm")->required();
    auto* method_opt = tune->add_option("--method", method, "random or bayesian");
    auto* budget_opt = tune->add_option("--budget", budget, "Number of evaluations");

    auto* run = app.add_subcommand("run", "Run every index x slice x model cell in the config");

    auto* forecast = app.add_subcommand("forecast", "Recursive multi-step forecast from a saved model");
    std::string model_path, series_path, forecast_out;
    std::size_t n_steps = 1;
    forecast->add_option("--model", model_path, "model.json written by run")->required();
    forecast->add_option("--series", series_path, "Cleaned series CSV (date,close)")->required();
    forecast->add_option("--steps", n_steps, "Number of future steps")->required();
    auto* forecast_out_opt = forecast->add_option("--output", forecast_out, "Write CSV here instead of stdout");

    auto* report = app.add_subcommand("report", "Compare run results with the published tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    if (*seed_opt) global.seed = seed;
    if (*out_opt) global.out = out_dir;
    if (*threads_opt) global.threads = threads;

    if (*ingest) {
        return cmd_ingest(csv_path, index_name, global.out.value_or("."), std::cout, std::cerr);
    }
    if (*tune) {
        if (*method_opt) request.method = method;
        if (*budget_opt) request.budget = budget;
        return cmd_tune(global, request, std::cout, std::cerr);
    }
    if (*run) return cmd_run(global, std::cout, std::cerr);
    if (*forecast) {
        std::optional<std::filesystem::path> output;
        if (*forecast_out_opt) output = forecast_out;
        return cmd_forecast(model_path, series_path, n_steps, output, std::cout, std::cerr);
    }
    if (*report) {
        std::filesystem::path dir = global.out.value_or("out");
        if (!global.out && !global.config.empty()) {
            try {
                dir = resolve_config(global).output_dir;
            } catch (const ConfigError& e) {
                std::cerr << "configuration error:\n" << e.what() << '\n';
                return kExitUsageError;
            }
        }
        return cmd_report(dir, std::cout, std::cerr);
    }
    return kExitUsageError;
}
