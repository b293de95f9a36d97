#pragma once

// Batch commands behind the dtsp executable. Each writes JSON Lines records to
// `out`; failures produce one error record on `err` and a nonzero status.
//
// Exit status: 0 success, 2 configuration error, 3 numeric-domain,
// unsupported-parameter or unbounded-search error, 1 anything else.

#include <iosfwd>
#include <optional>
#include <string>

#include "dtsp/config.hpp"
#include "dtsp/hybrid_risk.hpp"
#include "dtsp/simulate.hpp"
#include "dtsp/tables.hpp"

namespace dtsp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;

struct PlanArguments {
    int n = 0;
    std::optional<int> r;
    double tau = 0.0;
    double xi = 0.0;
    double c = 0.0;
};

struct CommandOptions {
    RunConfig config;
    Rule rule = Rule::dsp;
    std::optional<PlanArguments> plan;
    std::optional<long long> validate;  ///< attach an MC estimate with this many replications
    HybridFormula formula = HybridFormula::corrected;
    int table = 1;
    TableMode table_mode = TableMode::point;
    std::optional<std::string> out_path;  ///< CSV destination for `table`; stdout otherwise
};

Rule parse_rule(const std::string& name);
const char* to_string(Rule rule);

int cmd_risk(const CommandOptions& options, std::ostream& out);
int cmd_optimize(const CommandOptions& options, std::ostream& out);
int cmd_simulate(const CommandOptions& options, std::ostream& out);
int cmd_table(const CommandOptions& options, std::ostream& out);
int cmd_compare(const CommandOptions& options, std::ostream& out);

/// Dispatches by name and maps exceptions to exit codes and error records.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace dtsp
