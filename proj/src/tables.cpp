#include "dtsp/tables.hpp"

#include <chrono>
#include <cmath>
#include <locale>
#include <ostream>
#include <sstream>

#include "dtsp/dsp_risk.hpp"
#include "dtsp/errors.hpp"
#include "dtsp/lsp.hpp"

namespace dtsp {

namespace {

const AcceptanceLoss kQuadratic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0});
const AcceptanceLoss kCubic = AcceptanceLoss::polynomial({2.0, 2.0, 2.0, 2.0});
const CostModel kBaseCosts{0.5, 0.5, 30.0, 0.0};
const CostModel kHybridCosts{0.5, 5.0, 30.0, 0.3};

AcceptanceLoss non_polynomial() { return AcceptanceLoss({{0.0, 2.0}, {1.0, 2.0}, {2.5, 2.0}}); }

std::string prior_label(double a, double b) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << "a=" << a << " b=" << b;
    return s.str();
}

struct PlanRow {
    double a, b, risk;
    int n;
    double tau, xi, c;
};

void add(std::vector<ReferenceRow>& rows, ReferenceRow row) {
    row.index = static_cast<int>(rows.size()) + 1;
    rows.push_back(std::move(row));
}

ReferenceRow base_row(int table, RowKind kind, std::string label, const GammaPrior& prior, const CostModel& costs,
                      const AcceptanceLoss& loss, double c_max) {
    ReferenceRow r;
    r.table = table;
    r.kind = kind;
    r.label = std::move(label);
    r.prior = prior;
    r.costs = costs;
    r.loss = loss;
    r.c_max = c_max;
    return r;
}

std::vector<ReferenceRow> table1() {
    static const PlanRow data[] = {
        {0.2, 0.2, 9.0726, 2, 0.4625, 0.2000, 0.9600},   {1.5, 0.8, 16.8439, 3, 0.4750, 0.2250, 0.1100},
        {2.0, 0.8, 21.5046, 3, 0.6000, 0.2750, 0.1025},  {2.5, 0.6, 28.1949, 3, 0.8625, 0.3125, 0.8650},
        {2.5, 0.8, 25.2777, 3, 0.7250, 0.3000, 0.3550},  {2.5, 1.0, 22.0361, 3, 0.5625, 0.2625, 0.0725},
        {3.0, 0.8, 28.0087, 3, 0.8250, 0.3125, 0.7125},  {3.5, 0.8, 29.7131, 2, 0.8125, 0.4125, 0.4400},
        {10.0, 3.0, 29.8053, 1, 0.4375, 0.4750, 0.8075},
    };
    std::vector<ReferenceRow> rows;
    for (const auto& d : data) {
        auto r = base_row(1, RowKind::dsp, prior_label(d.a, d.b), GammaPrior(d.a, d.b), kBaseCosts, kQuadratic, 1.0);
        r.printed_risk = d.risk;
        r.printed_plan = SamplingPlan{d.n, d.tau, d.xi, d.c};
        add(rows, r);
    }
    return rows;
}

std::vector<ReferenceRow> table2() {
    struct Pair {
        double a, b;
        PlanRow dsp;
        double lam_risk;
        int lam_n;
        double lam_tau, lam_xi;
    };
    static const Pair data[] = {
        {0.2, 0.2, {0, 0, 8.8228, 2, 0.6000, 0.1875, 1.1575}, 12.1499, 4, 0.0270, 0.1080},
        {1.5, 0.8, {0, 0, 16.5825, 3, 0.7000, 0.1750, 1.0000}, 16.6233, 3, 0.5262, 0.2631},
        {2.0, 0.8, {0, 0, 21.1398, 4, 1.1625, 0.2000, 1.7975}, 21.2153, 3, 0.6051, 0.3026},
        {2.5, 0.4, {0, 0, 29.7506, 1, 0.8000, 0.3250, 1.4400}, 29.7506, 1, 0.7978, 0.7978},
        {2.5, 0.6, {0, 0, 27.7266, 3, 1.2125, 0.2750, 1.3875}, 27.7834, 3, 0.8537, 0.4268},
        {2.5, 0.8, {0, 0, 24.8419, 4, 1.3125, 0.3000, 0.3750}, 24.9367, 3, 0.7077, 0.3539},
        {2.5, 1.0, {0, 0, 21.7081, 4, 1.1125, 0.2250, 0.9450}, 21.7640, 3, 0.5483, 0.2742},
        {3.0, 0.8, {0, 0, 27.5581, 3, 1.1625, 0.3000, 0.8650}, 27.6136, 3, 0.8170, 0.4085},
        {3.5, 0.8, {0, 0, 29.2789, 2, 1.0125, 0.2750, 1.6600}, 29.2789, 2, 1.0037, 0.5019},
        {10.0, 3.0, {0, 0, 29.5166, 2, 0.8000, 0.2625, 1.0250}, 29.5166, 2, 0.7928, 0.3964},
    };
    const CostModel costs{0.5, 0.0, 30.0, 0.0};
    std::vector<ReferenceRow> rows;
    for (const auto& d : data) {
        const GammaPrior prior(d.a, d.b);
        auto dsp = base_row(2, RowKind::dsp, prior_label(d.a, d.b), prior, costs, kQuadratic, 2.0);
        dsp.tau_max = 2.0;
        dsp.printed_risk = d.dsp.risk;
        dsp.printed_plan = SamplingPlan{d.dsp.n, d.dsp.tau, d.dsp.xi, d.dsp.c};
        add(rows, dsp);
        auto lam = base_row(2, RowKind::lam, prior_label(d.a, d.b), prior, costs, kQuadratic, 2.0);
        lam.tau_max = 2.0;
        lam.printed_risk = d.lam_risk;
        lam.printed_plan = SamplingPlan{d.lam_n, d.lam_tau, d.lam_xi, 0.0};
        add(rows, lam);
    }
    return rows;
}

// Tables 3 and 6 print one risk for each plan type and a single (n, τ), shared
// by both plans.
std::vector<ReferenceRow> dsp_lsp_rows(int table, const std::vector<std::pair<double, PlanRow>>& data,
                                       const AcceptanceLoss& loss, double c_max) {
    std::vector<ReferenceRow> rows;
    for (const auto& [lsp_risk, d] : data) {
        const GammaPrior prior(d.a, d.b);
        auto lsp = base_row(table, RowKind::lsp, prior_label(d.a, d.b), prior, kBaseCosts, loss, c_max);
        lsp.printed_risk = lsp_risk;
        lsp.printed_plan = SamplingPlan{d.n, d.tau, 0.0, 0.0};
        add(rows, lsp);
        auto dsp = base_row(table, RowKind::dsp, prior_label(d.a, d.b), prior, kBaseCosts, loss, c_max);
        dsp.printed_risk = d.risk;
        dsp.printed_plan = SamplingPlan{d.n, d.tau, d.xi, d.c};
        add(rows, dsp);
    }
    return rows;
}

void add_proportions(std::vector<ReferenceRow>& rows, int table, const std::string& label, const GammaPrior& prior,
                     const CostModel& costs, const AcceptanceLoss& loss, double dsp, double lsp) {
    auto d = base_row(table, RowKind::dsp, label, prior, costs, loss, 1.0);
    d.printed_proportion = dsp;
    add(rows, d);
    auto l = base_row(table, RowKind::lsp, label, prior, costs, loss, 1.0);
    l.printed_proportion = lsp;
    add(rows, l);
}

std::vector<ReferenceRow> table3() {
    auto rows = dsp_lsp_rows(3,
                             {
                                 {6.1832, {0.1, 0.2, 6.1832, 2, 0.4000, 0.2000, 0.8050}},
                                 {24.8966, {1.0, 0.2, 24.8966, 3, 0.8250, 0.3125, 0.6700}},
                                 {16.8439, {1.5, 0.8, 16.8439, 3, 0.4750, 0.2250, 0.1100}},
                                 {5.3750, {1.5, 2.0, 5.3750, 0, 0.0, 0.0, 0.0}},
                                 {25.2777, {2.5, 0.8, 25.2777, 3, 0.7250, 0.3000, 0.3550}},
                                 {22.0361, {2.5, 1.0, 22.0361, 3, 0.5625, 0.2625, 0.0725}},
                                 {18.3194, {2.5, 1.2, 18.3194, 0, 0.0, 0.0, 0.0}},
                                 {28.0087, {3.0, 0.8, 28.0087, 3, 0.8250, 0.3125, 0.7125}},
                                 {29.7131, {3.5, 0.8, 29.7131, 2, 0.8125, 0.4125, 0.4400}},
                             },
                             kQuadratic, 1.0);
    struct P {
        double a, b, dsp, lsp;
    };
    for (const auto& p : {P{1.7, 0.2, 0.8440, 0.8424}, P{2.1, 0.3, 0.7428, 0.7443}, P{2.4, 0.4, 0.7414, 0.7262}}) {
        add_proportions(rows, 3, prior_label(p.a, p.b), GammaPrior(p.a, p.b), kBaseCosts, kQuadratic, p.dsp, p.lsp);
    }
    return rows;
}

std::vector<ReferenceRow> table4() {
    struct P {
        int coefficient;
        double value, dsp, lsp;
    };
    static const P data[] = {
        {0, 13.5, 0.7348, 0.7219}, {0, 14.0, 0.7170, 0.7096}, {0, 14.5, 0.8198, 0.8134},
        {1, 10.2, 0.6176, 0.6122}, {1, 10.5, 0.6193, 0.5956}, {1, 10.8, 0.5981, 0.5822},
        {2, 6.0, 0.8595, 0.8624},  {2, 6.5, 0.7662, 0.7686},  {2, 6.8, 0.7661, 0.7586},
    };
    std::vector<ReferenceRow> rows;
    for (const auto& p : data) {
        double coefs[3] = {2.0, 2.0, 2.0};
        coefs[p.coefficient] = p.value;
        std::ostringstream label;
        label.imbue(std::locale::classic());
        label << "a" << p.coefficient << "=" << p.value;
        add_proportions(rows, 4, label.str(), GammaPrior(2.5, 0.8), kBaseCosts, AcceptanceLoss::polynomial(coefs),
                        p.dsp, p.lsp);
    }
    return rows;
}

std::vector<ReferenceRow> table5() {
    struct P {
        int cost;
        double value, dsp, lsp;
    };
    static const P data[] = {
        {0, 3.0, 0.9309, 0.9354},  {0, 3.5, 0.8911, 0.8988},  {0, 4.0, 0.8913, 0.8981},
        {1, 3.0, 0.9980, 0.9976},  {1, 3.5, 0.9988, 0.9988},  {1, 4.0, 0.9981, 0.9980},
        {2, 17.5, 0.7494, 0.7389}, {2, 18.0, 0.7180, 0.7081}, {2, 18.5, 0.8030, 0.8008},
    };
    static const char* names[] = {"Cs", "Ctau", "Cr"};
    std::vector<ReferenceRow> rows;
    for (const auto& p : data) {
        CostModel costs = kBaseCosts;
        (p.cost == 0 ? costs.sampling : p.cost == 1 ? costs.time : costs.rejection) = p.value;
        std::ostringstream label;
        label.imbue(std::locale::classic());
        label << names[p.cost] << "=" << p.value;
        add_proportions(rows, 5, label.str(), GammaPrior(2.5, 0.8), costs, kQuadratic, p.dsp, p.lsp);
    }
    return rows;
}

std::vector<ReferenceRow> table6() {
    return dsp_lsp_rows(6,
                        {
                            {7.4606, {0.1, 0.2, 7.4606, 2, 0.8875, 0.3500, 1.4875}},
                            {10.0670, {0.5, 0.8, 10.0670, 3, 0.8500, 0.4250, 0.0875}},
                            {27.6919, {1.0, 0.2, 27.6919, 3, 1.3625, 0.5125, 1.2750}},
                            {17.0625, {1.0, 0.8, 17.0625, 4, 1.1375, 0.5000, 0.1750}},
                            {22.9149, {1.5, 0.8, 22.9149, 4, 1.3000, 0.5000, 0.6875}},
                            {29.7994, {2.5, 0.8, 29.7994, 2, 1.4500, 0.5750, 1.2000}},
                            {28.2333, {2.5, 1.0, 28.2333, 4, 1.3250, 0.5000, 1.2875}},
                            {26.3146, {2.5, 1.2, 26.3146, 4, 1.3250, 0.5000, 0.8875}},
                        },
                        kCubic, 2.0);
}

std::vector<ReferenceRow> table7() {
    static const PlanRow data[] = {
        {0.1, 0.2, 6.6966, 2, 0.6125, 0.2250, 1.6750},  {1.0, 0.2, 26.1494, 3, 1.0875, 0.3750, 1.1500},
        {1.5, 0.8, 19.4142, 4, 0.9000, 0.3750, 0.0750}, {2.5, 0.8, 27.5525, 4, 1.0625, 0.3750, 1.0875},
        {3.0, 0.8, 29.6926, 2, 1.0750, 0.3500, 1.8250},
    };
    std::vector<ReferenceRow> rows;
    for (const auto& d : data) {
        auto r = base_row(7, RowKind::dsp, prior_label(d.a, d.b), GammaPrior(d.a, d.b), kBaseCosts, non_polynomial(),
                          2.0);
        r.printed_risk = d.risk;
        r.printed_plan = SamplingPlan{d.n, d.tau, d.xi, d.c};
        add(rows, r);
    }
    return rows;
}

struct HybridRow {
    std::string label;
    double a, b;
    CostModel costs;
    double risk;
    int n, r;
    double tau, xi, c;
};

std::vector<ReferenceRow> hybrid_rows(int table, const std::vector<HybridRow>& data) {
    std::vector<ReferenceRow> rows;
    for (const auto& d : data) {
        auto row = base_row(table, RowKind::hybrid_dsp, d.label, GammaPrior(d.a, d.b), d.costs, kQuadratic, 1.0);
        row.printed_risk = d.risk;
        row.printed_plan = SamplingPlan{d.n, d.tau, d.xi, d.c};
        row.printed_r = d.r;
        add(rows, row);
    }
    return rows;
}

CostModel with(CostModel costs, double CostModel::*field, double value) {
    costs.*field = value;
    return costs;
}

std::vector<ReferenceRow> table8() {
    return hybrid_rows(8, {
                              {"a=2.5 b=0.8", 2.5, 0.8, kHybridCosts, 26.0338, 6, 3, 0.2000, 0.2750, 0.6600},
                              {"a=2.5 b=1", 2.5, 1.0, kHybridCosts, 22.6437, 5, 3, 0.1875, 0.2625, 0.0725},
                              {"a=3 b=0.8", 3.0, 0.8, kHybridCosts, 28.7890, 4, 2, 0.2375, 0.4250, 0.0075},
                              {"Ctau=0", 2.5, 0.8, with(kHybridCosts, &CostModel::time, 0.0), 24.6736, 4, 4, 0.8500,
                               0.3000, 0.3725},
                              {"Ctau=8", 2.5, 0.8, with(kHybridCosts, &CostModel::time, 8.0), 26.4672, 7, 3, 0.1625,
                               0.2750, 0.6600},
                              {"Ctau=16", 2.5, 0.8, with(kHybridCosts, &CostModel::time, 16.0), 27.2513, 7, 2, 0.1000,
                               0.2875, 0.5775},
                          });
}

std::vector<ReferenceRow> table9() {
    return hybrid_rows(
        9, {
               {"Cs=0.5", 2.5, 0.8, kHybridCosts, 26.0338, 6, 3, 0.2000, 0.2750, 0.6600},
               {"Cs=0.6", 2.5, 0.8, with(kHybridCosts, &CostModel::sampling, 0.6), 26.5626, 5, 3, 0.2500, 0.2750,
                0.6600},
               {"Cs=0.7", 2.5, 0.8, with(kHybridCosts, &CostModel::sampling, 0.7), 26.9114, 3, 2, 0.2750, 0.3125,
                0.2400},
               {"Cr=25", 2.5, 0.8, with(kHybridCosts, &CostModel::rejection, 25.0), 23.3581, 4, 2, 0.2375, 0.3750,
                0.3350},
               {"Cr=30", 2.5, 0.8, kHybridCosts, 26.0338, 6, 3, 0.2000, 0.2750, 0.6600},
               {"Cr=40", 2.5, 0.8, with(kHybridCosts, &CostModel::rejection, 40.0), 30.0071, 7, 4, 0.1750, 0.2375,
                0.1075},
           });
}

SearchConfig row_search(const ReferenceRow& row, const SearchConfig& base) {
    SearchConfig s = base;
    s.c_max = row.c_max;
    if (row.tau_max) s.tau_max = row.tau_max;
    return s;
}

OptimizationResult optimize_row(const ReferenceRow& row, const TableOptions& options) {
    const SearchConfig search = row_search(row, options.search);
    switch (row.kind) {
        case RowKind::dsp:
            return optimize_dsp_type1(row.prior, row.costs, row.loss, search);
        case RowKind::lam:
            return optimize_lam_type1(row.prior, row.costs, row.loss, search);
        case RowKind::lsp:
            return optimize_lsp_type1(row.prior, row.costs, row.loss, search);
        case RowKind::hybrid_dsp:
            return optimize_dsp_hybrid(row.prior, row.costs, row.loss, search, options.formula);
    }
    throw DomainError("unknown row kind");
}

RiskReport evaluate_row(const ReferenceRow& row, const TableOptions& options) {
    const SamplingPlan& p = *row.printed_plan;
    switch (row.kind) {
        case RowKind::dsp:
            return dsp_risk_type1(p, row.prior, row.costs, row.loss);
        case RowKind::lam:
            return lam_risk_type1(p.n, p.tau, p.xi, row.prior, row.costs, row.loss);
        case RowKind::lsp:
            return lsp_risk_type1(p.n, p.tau, row.prior, row.costs, row.loss);
        case RowKind::hybrid_dsp:
            return dsp_risk_hybrid({p, *row.printed_r}, row.prior, row.costs, row.loss, options.formula);
    }
    throw DomainError("unknown row kind");
}

Rule simulation_rule(RowKind kind) {
    switch (kind) {
        case RowKind::dsp:
        case RowKind::hybrid_dsp:
            return Rule::dsp;
        case RowKind::lsp:
            return Rule::lsp;
        case RowKind::lam:
            return Rule::lam;
    }
    return Rule::dsp;
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

std::string full(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    s.precision(17);
    s << v;
    return s.str();
}

std::string quoted(const std::string& text) {
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string loss_label(const AcceptanceLoss& loss) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    bool first = true;
    for (const auto& t : loss.terms()) {
        if (!first) s << ' ';
        first = false;
        s << t.coefficient << "*l^" << t.exponent;
    }
    return s.str();
}

}  // namespace

const char* to_string(RowKind kind) {
    switch (kind) {
        case RowKind::dsp:
            return "dsp";
        case RowKind::lam:
            return "lam";
        case RowKind::lsp:
            return "lsp";
        case RowKind::hybrid_dsp:
            return "hybrid_dsp";
    }
    return "?";
}

std::vector<ReferenceRow> reference_table(int id) {
    switch (id) {
        case 1:
            return table1();
        case 2:
            return table2();
        case 3:
            return table3();
        case 4:
            return table4();
        case 5:
            return table5();
        case 6:
            return table6();
        case 7:
            return table7();
        case 8:
            return table8();
        case 9:
            return table9();
        default:
            throw DomainError("unknown table id " + std::to_string(id) + "; expected 1..9");
    }
}

std::optional<double> RowResult::abs_delta() const {
    if (row.proportion_row()) {
        if (!proportion) return std::nullopt;
        return std::abs(proportion->mean - *row.printed_proportion);
    }
    if (!report || !row.printed_risk) return std::nullopt;
    return std::abs(report->risk - *row.printed_risk);
}

RowResult run_row(const ReferenceRow& row, const TableOptions& options) {
    RowResult result;
    result.row = row;
    result.mode = row.proportion_row() ? TableMode::optimize : options.mode;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (result.mode == TableMode::optimize) {
            auto opt = optimize_row(row, options);
            result.report = opt.report;
            result.evaluations = opt.evaluations;
        } else {
            result.report = evaluate_row(row, options);
            result.evaluations = 1;
        }
        if (row.proportion_row()) {
            Design design{result.report->plan, result.report->failure_threshold};
            result.proportion = proportion_of_acceptance(simulation_rule(row.kind), design, row.prior, row.costs,
                                                         row.loss, options.simulation);
        }
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<RowResult> run_table(int id, const TableOptions& options) {
    std::vector<RowResult> out;
    for (const auto& row : reference_table(id)) out.push_back(run_row(row, options));
    return out;
}

void write_csv_header(std::ostream& out) {
    out << "table,row,label,rule,mode,a,b,Cs,Ctau,Cr,rs,loss,n,r,tau,xi,c,risk,risk_full,printed_risk,"
           "proportion,proportion_se,printed_proportion,abs_delta,printed_n,printed_r,printed_tau,printed_xi,printed_c,"
           "evaluations,seconds,error\n";
}

void write_csv_row(std::ostream& out, const RowResult& res) {
    const auto& row = res.row;
    const auto opt = [](const auto& o, auto fn) { return o ? fn(*o) : std::string(); };
    const auto f4 = [](double v) { return fixed(v, 4); };
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << row.table << ',' << row.index << ',' << quoted(row.label) << ',' << to_string(row.kind) << ','
      << (res.mode == TableMode::point ? "point" : "optimize") << ',' << full(row.prior.a()) << ','
      << full(row.prior.b()) << ',' << full(row.costs.sampling) << ',' << full(row.costs.time) << ','
      << full(row.costs.rejection) << ',' << full(row.costs.salvage) << ',' << quoted(loss_label(row.loss)) << ',';
    if (res.report) {
        const auto& p = res.report->plan;
        s << p.n << ',' << opt(res.report->failure_threshold, [](int r) { return std::to_string(r); }) << ','
          << f4(p.tau) << ',' << f4(p.xi) << ',' << f4(p.c) << ',' << f4(res.report->risk) << ','
          << full(res.report->risk) << ',';
    } else {
        s << ",,,,,,,";
    }
    s << opt(row.printed_risk, f4) << ',';
    if (res.proportion) {
        s << f4(res.proportion->mean) << ',' << f4(res.proportion->standard_error) << ',';
    } else {
        s << ",,";
    }
    s << opt(row.printed_proportion, f4) << ',' << opt(res.abs_delta(), [](double d) { return fixed(d, 6); }) << ',';
    if (row.printed_plan) {
        const auto& p = *row.printed_plan;
        s << p.n << ',' << opt(row.printed_r, [](int r) { return std::to_string(r); }) << ',' << f4(p.tau) << ','
          << (row.kind == RowKind::lsp ? std::string() : f4(p.xi)) << ','
          << (row.kind == RowKind::lsp || row.kind == RowKind::lam ? std::string() : f4(p.c)) << ',';
    } else {
        s << ",,,,,";
    }
    s << res.evaluations << ',' << fixed(res.seconds, 3) << ',' << quoted(res.error) << '\n';
    out << s.str();
}

}  // namespace dtsp
