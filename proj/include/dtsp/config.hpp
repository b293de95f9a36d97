#pragma once

// Run configuration: one JSON document carrying the prior, costs, loss,
// censoring scheme, search grid and simulation settings.
//
// {
//   "prior":      {"a": 2.5, "b": 0.8},
//   "costs":      {"Cs": 0.5, "Ctau": 0.5, "Cr": 30, "rs": 0},
//   "loss":       {"exponents": [0, 1, 2], "coefficients": [2, 2, 2]},
//   "censoring":  {"kind": "type1"},               // or "hybrid"
//   "search":     {"xi_max": 2, "c_max": 1, "xi_step": 0.0125, "c_step": 0.0025,
//                  "tau_step": 0.0125, "tau_max": null, "alpha": 0.01,
//                  "refine_factor": 10, "xi_refine_factor": 4,
//                  "tau_refine_factor": 4, "refine_candidates": 6,
//                  "exhaustive": false, "threads": 1},
//   "simulation": {"replications": 1000000, "seed": 1}
// }
//
// Every section and field is optional; missing values take the defaults above.

#include <cstdint>
#include <string>
#include <string_view>

#include "dtsp/model.hpp"
#include "dtsp/optimizer.hpp"

namespace dtsp {

struct RunConfig {
    GammaPrior prior{2.5, 0.8};
    CostModel costs{0.5, 0.5, 30.0, 0.0};
    AcceptanceLoss loss = AcceptanceLoss::polynomial({2.0, 2.0, 2.0});
    Censoring censoring = Censoring::type1;
    SearchConfig search;
    long long replications = 1'000'000;
    std::uint64_t seed = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Pretty-printed JSON that parse_config reads back to an equal RunConfig.
std::string dump_config(const RunConfig& config);

}  // namespace dtsp
