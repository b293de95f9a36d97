#pragma once

// Reference rows of the published result tables and the harness that
// recomputes them.
//
//   1  optimal DSP, quadratic loss, varying (a, b)
//   2  optimal DSP against Lam's plan, C_τ = 0
//   3  DSP against the Bayes plan (risk), plus acceptance proportions over (a, b)
//   4  acceptance proportions over a_0, a_1, a_2
//   5  acceptance proportions over C_s, C_τ, C_r
//   6  DSP against the Bayes plan, cubic loss
//   7  DSP for g(λ) = 2 + 2λ + 2λ^{5/2}
//   8  hybrid DSP over (a, b) and C_τ
//   9  hybrid DSP over C_s and C_r
//
// The simulated Bayes-plan risks printed next to the hybrid DSP rows are not
// reproduced.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtsp/hybrid_risk.hpp"
#include "dtsp/model.hpp"
#include "dtsp/optimizer.hpp"
#include "dtsp/simulate.hpp"

namespace dtsp {

enum class RowKind { dsp, lam, lsp, hybrid_dsp };

const char* to_string(RowKind kind);

struct ReferenceRow {
    int table = 0;
    int index = 0;
    std::string label;
    RowKind kind = RowKind::dsp;
    GammaPrior prior{1.0, 1.0};
    CostModel costs;
    AcceptanceLoss loss = AcceptanceLoss::polynomial({2.0, 2.0, 2.0});
    double c_max = 1.0;
    std::optional<double> tau_max;
    std::optional<double> printed_risk;
    std::optional<SamplingPlan> printed_plan;  ///< for the Bayes plan only n and τ are meaningful
    std::optional<int> printed_r;
    std::optional<double> printed_proportion;  ///< set on proportion rows, which carry no plan

    bool proportion_row() const { return printed_proportion.has_value(); }
};

/// Rows of table 1..9; throws DomainError for other ids.
std::vector<ReferenceRow> reference_table(int id);

enum class TableMode {
    point,     ///< evaluate the risk at the printed plan
    optimize,  ///< search for the optimum
};

struct RowResult {
    ReferenceRow row;
    TableMode mode = TableMode::point;
    std::optional<RiskReport> report;
    std::optional<MonteCarloEstimate> proportion;
    long long evaluations = 0;
    double seconds = 0.0;
    std::string error;

    /// |computed - printed| risk, or proportion on proportion rows.
    std::optional<double> abs_delta() const;
};

struct TableOptions {
    TableMode mode = TableMode::point;
    SearchConfig search;  ///< c_max and τ_max come from each row
    SimulationOptions simulation{10'000, 1, 1};
    HybridFormula formula = HybridFormula::corrected;
};

/// Proportion rows always optimize first, whatever the mode. Failures are
/// recorded in RowResult::error.
RowResult run_row(const ReferenceRow& row, const TableOptions& options);
std::vector<RowResult> run_table(int id, const TableOptions& options);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const RowResult& result);

}  // namespace dtsp
