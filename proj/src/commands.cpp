#include "dtsp/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/lsp.hpp"
#include "dtsp/optimizer.hpp"

namespace dtsp {

namespace {

using nlohmann::json;

constexpr const char* kLambdaAssumption = "lambda redrawn from the prior on every replication";

json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

json plan_json(const SamplingPlan& plan, std::optional<int> r) {
    return {{"n", plan.n},
            {"r", r ? json(*r) : json(nullptr)},
            {"tau", number(plan.tau)},
            {"xi", number(plan.xi)},
            {"c", number(plan.c)}};
}

json estimate_json(const MonteCarloEstimate& e) {
    return {{"mean", e.mean}, {"standard_error", e.standard_error}, {"replications", e.replications}};
}

json report_json(const RiskReport& report) {
    json j = {{"plan", plan_json(report.plan, report.failure_threshold)},
              {"risk", number(report.risk)},
              {"risk_4dp", std::round(report.risk * 1e4) / 1e4},
              {"cancellation_ratio", number(report.cancellation_ratio)},
              {"precision_warning", report.precision_warning}};
    if (report.monte_carlo) {
        j["monte_carlo"] = estimate_json(*report.monte_carlo);
        j["monte_carlo"]["z_score"] = number(*report.mc_z_score());
        j["monte_carlo"]["flagged"] = report.mc_flagged();
    }
    return j;
}

void emit(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

bool hybrid(const CommandOptions& o) { return o.config.censoring == Censoring::hybrid; }

SimulationOptions simulation_options(const RunConfig& cfg, long long replications) {
    return {replications, cfg.seed, cfg.search.threads};
}

Design design_from(const CommandOptions& o) {
    if (!o.plan) throw ConfigError("this command needs plan coordinates (--n, --tau, --xi, --c)");
    const auto& p = *o.plan;
    Design d{{p.n, p.tau, p.xi, p.c}, std::nullopt};
    if (hybrid(o)) {
        if (!p.r) throw ConfigError("hybrid censoring needs --r");
        d.failure_threshold = *p.r;
    } else if (p.r) {
        throw ConfigError("--r given but censoring.kind is type1");
    }
    d.validate();
    return d;
}

RiskReport closed_form_risk(const CommandOptions& o, const Design& d) {
    const auto& cfg = o.config;
    if (d.hybrid()) {
        if (o.rule != Rule::dsp) {
            throw UnsupportedError(std::string("no closed-form hybrid risk for rule ") + to_string(o.rule) +
                                   "; use the simulate command");
        }
        return dsp_risk_hybrid({d.plan, *d.failure_threshold}, cfg.prior, cfg.costs, cfg.loss, o.formula);
    }
    switch (o.rule) {
        case Rule::dsp:
            return dsp_risk_type1(d.plan, cfg.prior, cfg.costs, cfg.loss);
        case Rule::lsp:
            return lsp_risk_type1(d.plan.n, d.plan.tau, cfg.prior, cfg.costs, cfg.loss);
        case Rule::lam:
            return lam_risk_type1(d.plan.n, d.plan.tau, d.plan.xi, cfg.prior, cfg.costs, cfg.loss);
    }
    throw DomainError("unknown rule");
}

OptimizationResult optimize_rule(const CommandOptions& o, Rule rule) {
    const auto& cfg = o.config;
    if (hybrid(o)) {
        if (rule != Rule::dsp) {
            throw UnsupportedError(std::string("hybrid optimization is available for the dsp rule only, not ") +
                                   to_string(rule));
        }
        return optimize_dsp_hybrid(cfg.prior, cfg.costs, cfg.loss, cfg.search, o.formula);
    }
    switch (rule) {
        case Rule::dsp:
            return optimize_dsp_type1(cfg.prior, cfg.costs, cfg.loss, cfg.search);
        case Rule::lsp:
            return optimize_lsp_type1(cfg.prior, cfg.costs, cfg.loss, cfg.search);
        case Rule::lam:
            return optimize_lam_type1(cfg.prior, cfg.costs, cfg.loss, cfg.search);
    }
    throw DomainError("unknown rule");
}

json base_record(const char* command, const CommandOptions& o, Rule rule) {
    return {{"command", command},
            {"rule", to_string(rule)},
            {"censoring", hybrid(o) ? "hybrid" : "type1"},
            {"formula", o.formula == HybridFormula::as_printed ? "as_printed" : "corrected"}};
}

json error_record(const char* kind, const std::string& message) {
    return {{"error", kind}, {"message", message}};
}

}  // namespace

Rule parse_rule(const std::string& name) {
    if (name == "dsp") return Rule::dsp;
    if (name == "lsp") return Rule::lsp;
    if (name == "lam") return Rule::lam;
    throw ConfigError("unknown rule '" + name + "'; expected dsp, lsp or lam");
}

const char* to_string(Rule rule) {
    switch (rule) {
        case Rule::dsp:
            return "dsp";
        case Rule::lsp:
            return "lsp";
        case Rule::lam:
            return "lam";
    }
    return "?";
}

int cmd_risk(const CommandOptions& o, std::ostream& out) {
    const Design d = design_from(o);
    RiskReport report = closed_form_risk(o, d);
    json record = base_record("risk", o, o.rule);
    if (o.validate) {
        report.monte_carlo = mc_bayes_risk(o.rule, d, o.config.prior, o.config.costs, o.config.loss,
                                           simulation_options(o.config, *o.validate));
    }
    record.update(report_json(report));
    if (report.monte_carlo) {
        record["monte_carlo"]["seed"] = o.config.seed;
        record["assumptions"] = {kLambdaAssumption};
    }
    emit(out, record);
    return kExitOk;
}

int cmd_optimize(const CommandOptions& o, std::ostream& out) {
    const auto result = optimize_rule(o, o.rule);
    json record = base_record("optimize", o, o.rule);
    record.update(report_json(result.report));
    record["evaluations"] = result.evaluations;
    record["wall_seconds"] = result.wall_seconds;
    record["exhaustive"] = o.config.search.exhaustive;
    emit(out, record);
    return kExitOk;
}

int cmd_simulate(const CommandOptions& o, std::ostream& out) {
    const Design d = design_from(o);
    const auto opts = simulation_options(o.config, o.validate.value_or(o.config.replications));
    const auto& cfg = o.config;
    const auto risk = mc_bayes_risk(o.rule, d, cfg.prior, cfg.costs, cfg.loss, opts);
    const auto accept = proportion_of_acceptance(o.rule, d, cfg.prior, cfg.costs, cfg.loss, opts);
    json record = base_record("simulate", o, o.rule);
    record["plan"] = plan_json(d.plan, d.failure_threshold);
    record["risk"] = estimate_json(risk);
    record["proportion_of_acceptance"] = estimate_json(accept);
    record["seed"] = cfg.seed;
    record["assumptions"] = {kLambdaAssumption};
    emit(out, record);
    return kExitOk;
}

int cmd_table(const CommandOptions& o, std::ostream& out) {
    TableOptions t;
    t.mode = o.table_mode;
    t.search = o.config.search;
    t.simulation = {10'000, o.config.seed, o.config.search.threads};
    t.formula = o.formula;
    const auto rows = reference_table(o.table);

    std::ofstream file;
    if (o.out_path) {
        file.open(*o.out_path);
        if (!file) throw ConfigError("cannot write '" + *o.out_path + "'");
    }
    std::ostream& csv = o.out_path ? static_cast<std::ostream&>(file) : out;
    write_csv_header(csv);
    int failed = 0;
    for (const auto& row : rows) {
        const auto res = run_row(row, t);
        if (!res.error.empty()) ++failed;
        write_csv_row(csv, res);
        csv.flush();
    }
    if (o.out_path) {
        emit(out, {{"command", "table"},
                   {"table", o.table},
                   {"mode", o.table_mode == TableMode::point ? "point" : "optimize"},
                   {"rows", rows.size()},
                   {"failed_rows", failed},
                   {"out", *o.out_path}});
    }
    return kExitOk;
}

int cmd_compare(const CommandOptions& o, std::ostream& out) {
    const auto& cfg = o.config;
    for (Rule rule : {Rule::dsp, Rule::lsp, Rule::lam}) {
        json record = base_record("compare", o, rule);
        try {
            const auto result = optimize_rule(o, rule);
            record.update(report_json(result.report));
            record["evaluations"] = result.evaluations;
            record["wall_seconds"] = result.wall_seconds;
            const Design d{result.report.plan, result.report.failure_threshold};
            const auto accept = proportion_of_acceptance(rule, d, cfg.prior, cfg.costs, cfg.loss,
                                                         simulation_options(cfg, cfg.replications));
            record["proportion_of_acceptance"] = estimate_json(accept);
            record["seed"] = cfg.seed;
            record["assumptions"] = {kLambdaAssumption};
        } catch (const UnsupportedError& e) {
            record.update(error_record("unsupported", e.what()));
        }
        emit(out, record);
    }
    return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (name == "risk") return cmd_risk(options, out);
        if (name == "optimize") return cmd_optimize(options, out);
        if (name == "simulate") return cmd_simulate(options, out);
        if (name == "table") return cmd_table(options, out);
        if (name == "compare") return cmd_compare(options, out);
        throw ConfigError("unknown command '" + name + "'");
    } catch (const ConfigError& e) {
        emit(err, error_record("config", e.what()));
        return kExitConfig;
    } catch (const DomainError& e) {
        emit(err, error_record("domain", e.what()));
        return kExitDomain;
    } catch (const UnsupportedError& e) {
        emit(err, error_record("unsupported", e.what()));
        return kExitDomain;
    } catch (const UnboundedSearchError& e) {
        emit(err, error_record("unbounded", e.what()));
        return kExitDomain;
    } catch (const std::exception& e) {
        emit(err, error_record("internal", e.what()));
        return kExitFailure;
    }
}

}  // namespace dtsp
