#include "dtsp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dtsp/errors.hpp"

namespace dtsp {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(section + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ConfigError(section + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

template <class Fn>
auto validated(const std::string& what, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc, "config", {"prior", "costs", "loss", "censoring", "search", "simulation"});
    RunConfig cfg;

    if (doc.contains("prior")) {
        const auto& s = doc["prior"];
        check_keys(s, "prior", {"a", "b"});
        double a = cfg.prior.a();
        double b = cfg.prior.b();
        read(s, "a", a, "prior");
        read(s, "b", b, "prior");
        cfg.prior = validated("prior", [&] { return GammaPrior(a, b); });
    }
    if (doc.contains("costs")) {
        const auto& s = doc["costs"];
        check_keys(s, "costs", {"Cs", "Ctau", "Cr", "rs"});
        read(s, "Cs", cfg.costs.sampling, "costs");
        read(s, "Ctau", cfg.costs.time, "costs");
        read(s, "Cr", cfg.costs.rejection, "costs");
        read(s, "rs", cfg.costs.salvage, "costs");
        validated("costs", [&] {
            cfg.costs.validate();
            return 0;
        });
    }
    if (doc.contains("loss")) {
        const auto& s = doc["loss"];
        check_keys(s, "loss", {"exponents", "coefficients"});
        std::vector<double> exps;
        std::vector<double> coefs;
        read(s, "coefficients", coefs, "loss");
        if (s.contains("exponents")) {
            read(s, "exponents", exps, "loss");
        } else {
            for (std::size_t i = 0; i < coefs.size(); ++i) exps.push_back(static_cast<double>(i));
        }
        if (exps.size() != coefs.size()) throw ConfigError("loss: exponents and coefficients differ in length");
        std::vector<AcceptanceLoss::Term> terms;
        for (std::size_t i = 0; i < exps.size(); ++i) terms.push_back({exps[i], coefs[i]});
        cfg.loss = validated("loss", [&] { return AcceptanceLoss(std::move(terms)); });
    }
    if (doc.contains("censoring")) {
        const auto& s = doc["censoring"];
        check_keys(s, "censoring", {"kind"});
        std::string kind = "type1";
        read(s, "kind", kind, "censoring");
        if (kind == "type1") {
            cfg.censoring = Censoring::type1;
        } else if (kind == "hybrid") {
            cfg.censoring = Censoring::hybrid;
        } else {
            throw ConfigError("censoring.kind: expected \"type1\" or \"hybrid\"");
        }
    }
    if (doc.contains("search")) {
        const auto& s = doc["search"];
        check_keys(s, "search",
                   {"xi_max", "c_max", "xi_step", "c_step", "tau_step", "tau_max", "alpha", "refine_factor",
                    "xi_refine_factor", "tau_refine_factor", "refine_candidates", "exhaustive", "threads"});
        auto& q = cfg.search;
        read(s, "xi_max", q.xi_max, "search");
        read(s, "c_max", q.c_max, "search");
        read(s, "xi_step", q.xi_step, "search");
        read(s, "c_step", q.c_step, "search");
        read(s, "tau_step", q.tau_step, "search");
        if (s.contains("tau_max") && !s["tau_max"].is_null()) {
            double t = 0.0;
            read(s, "tau_max", t, "search");
            q.tau_max = t;
        }
        read(s, "alpha", q.alpha, "search");
        read(s, "refine_factor", q.refine_factor, "search");
        read(s, "xi_refine_factor", q.xi_refine_factor, "search");
        read(s, "tau_refine_factor", q.tau_refine_factor, "search");
        read(s, "refine_candidates", q.refine_candidates, "search");
        read(s, "exhaustive", q.exhaustive, "search");
        read(s, "threads", q.threads, "search");
        validated("search", [&] {
            q.validate();
            return 0;
        });
    }
    if (doc.contains("simulation")) {
        const auto& s = doc["simulation"];
        check_keys(s, "simulation", {"replications", "seed"});
        read(s, "replications", cfg.replications, "simulation");
        read(s, "seed", cfg.seed, "simulation");
        if (cfg.replications < 1) throw ConfigError("simulation.replications must be positive");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& cfg) {
    json doc;
    doc["prior"] = {{"a", cfg.prior.a()}, {"b", cfg.prior.b()}};
    doc["costs"] = {{"Cs", cfg.costs.sampling},
                    {"Ctau", cfg.costs.time},
                    {"Cr", cfg.costs.rejection},
                    {"rs", cfg.costs.salvage}};
    json exps = json::array();
    json coefs = json::array();
    for (const auto& t : cfg.loss.terms()) {
        exps.push_back(t.exponent);
        coefs.push_back(t.coefficient);
    }
    doc["loss"] = {{"exponents", exps}, {"coefficients", coefs}};
    doc["censoring"] = {{"kind", cfg.censoring == Censoring::hybrid ? "hybrid" : "type1"}};
    const auto& q = cfg.search;
    doc["search"] = {{"xi_max", q.xi_max},
                     {"c_max", q.c_max},
                     {"xi_step", q.xi_step},
                     {"c_step", q.c_step},
                     {"tau_step", q.tau_step},
                     {"tau_max", q.tau_max ? json(*q.tau_max) : json(nullptr)},
                     {"alpha", q.alpha},
                     {"refine_factor", q.refine_factor},
                     {"xi_refine_factor", q.xi_refine_factor},
                     {"tau_refine_factor", q.tau_refine_factor},
                     {"refine_candidates", q.refine_candidates},
                     {"exhaustive", q.exhaustive},
                     {"threads", q.threads}};
    doc["simulation"] = {{"replications", cfg.replications}, {"seed", cfg.seed}};
    return doc.dump(2) + "\n";
}

}  // namespace dtsp
