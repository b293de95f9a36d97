// dtsp: exact Bayes risks, optimal plans and Monte Carlo checks for
// exponential life-test sampling plans.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtsp/commands.hpp"
#include "dtsp/errors.hpp"

namespace {

double parse_time(const std::string& text, const char* flag) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw dtsp::ConfigError(std::string(flag) + ": not a number: '" + text + "'");
    return v;
}

int config_error(const std::string& message) {
    std::cerr << nlohmann::json{{"error", "config"}, {"message", message}}.dump() << '\n';
    return dtsp::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayes risks and optimal sampling plans for exponential life tests"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<long long> validate;
    std::optional<int> threads;
    bool exhaustive = false;
    bool as_printed = false;
    bool dump = false;
    std::string out_path;
    std::string rule = "dsp";
    std::optional<int> n;
    std::optional<int> r;
    std::string tau = "0";
    std::string xi = "0";
    std::string c = "0";
    int table_id = 1;
    std::string mode = "point";

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "simulation seed (overrides the config)");
    app.add_option("--validate", validate, "attach a Monte Carlo estimate with N replications")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--exhaustive", exhaustive, "search the full fine grid");
    app.add_flag("--as-printed", as_printed, "hybrid risk with the uncorrected mixture and duration terms");
    app.add_option("--out", out_path, "CSV output path for the table command");
    app.add_flag("--dump-config", dump, "print the effective configuration and exit");

    const auto add_plan = [&](CLI::App* sub) {
        sub->add_option("--rule", rule, "dsp, lsp or lam")->check(CLI::IsMember({"dsp", "lsp", "lam"}));
        sub->add_option("--n", n, "sample size")->required();
        sub->add_option("--r", r, "failure threshold (hybrid censoring)");
        sub->add_option("--tau", tau, "censoring time");
        sub->add_option("--xi", xi, "acceptance threshold; 'inf' rejects without inspection");
        sub->add_option("--c", c, "shrinkage constant");
    };
    auto* risk = app.add_subcommand("risk", "exact Bayes risk of one plan");
    add_plan(risk);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo risk and acceptance proportion of one plan");
    add_plan(simulate);
    auto* optimize = app.add_subcommand("optimize", "optimal plan for the configuration");
    optimize->add_option("--rule", rule, "dsp, lsp or lam")->check(CLI::IsMember({"dsp", "lsp", "lam"}));
    auto* table = app.add_subcommand("table", "recompute a reference table as CSV");
    table->add_option("id", table_id, "table number")->required()->check(CLI::Range(1, 9));
    table->add_option("--mode", mode, "point or optimize")->check(CLI::IsMember({"point", "optimize"}));
    app.add_subcommand("compare", "optimal DSP, Bayes plan and Lam plan side by side");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return config_error(e.what());
    }

    dtsp::CommandOptions options;
    try {
        if (!config_path.empty()) options.config = dtsp::load_config(config_path);
        if (seed) options.config.seed = *seed;
        if (threads) options.config.search.threads = *threads;
        if (exhaustive) options.config.search.exhaustive = true;
        options.rule = dtsp::parse_rule(rule);
        options.validate = validate;
        options.formula = as_printed ? dtsp::HybridFormula::as_printed : dtsp::HybridFormula::corrected;
        if (n) {
            options.plan = dtsp::PlanArguments{*n, r, parse_time(tau, "--tau"), parse_time(xi, "--xi"),
                                               parse_time(c, "--c")};
        }
        options.table = table_id;
        options.table_mode = mode == "optimize" ? dtsp::TableMode::optimize : dtsp::TableMode::point;
        if (!out_path.empty()) options.out_path = out_path;
    } catch (const dtsp::ConfigError& e) {
        return config_error(e.what());
    }

    if (dump) {
        std::cout << dtsp::dump_config(options.config);
        return dtsp::kExitOk;
    }
    if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return dtsp::kExitConfig;
    }
    return dtsp::run_command(app.get_subcommands().front()->get_name(), options, std::cout, std::cerr);
}
