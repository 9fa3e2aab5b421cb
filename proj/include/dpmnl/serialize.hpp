#ifndef DPMNL_SERIALIZE_HPP
#define DPMNL_SERIALIZE_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "dpm_em.hpp"
#include "evaluate.hpp"
#include "lc_em.hpp"

namespace dpmnl {

using nlohmann::json;

inline std::string transform_label(const CoefTransform& t) {
    switch (t.kind) {
        case Transform::Identity: return "identity";
        case Transform::NegExp: return "negative_exponential";
        case Transform::BoundedNegative: return "bounded_negative";
    }
    return "identity";
}

inline json to_json(const ParamVector& beta) {
    json coefs = json::array();
    for (std::size_t i = 0; i < beta.size(); ++i) {
        json c;
        c["value"] = beta.values[i];
        c["transform"] = transform_label(beta.transforms[i]);
        if (beta.transforms[i].kind == Transform::BoundedNegative)
            c["bound"] = beta.transforms[i].bound;
        coefs.push_back(c);
    }
    return coefs;
}

inline json to_json(const UtilitySpec& spec) {
    json j;
    j["space"] = spec.space == UtilitySpace::Wtp ? "wtp" : "preference";
    j["cost_index"] = spec.cost_index;
    return j;
}

inline json to_json(const DPMModel& model) {
    json j;
    j["model"] = "dpm";
    j["alpha_hat"] = model.alpha_hat;
    j["truncation"] = model.K();
    j["converged"] = model.converged;
    j["utility"] = to_json(model.spec);
    j["components"] = json::array();
    for (std::size_t k = 0; k < model.K(); ++k) {
        json c;
        c["beta"] = to_json(model.betas[k]);
        c["empirical_share"] = model.empirical_shares[k];
        c["prior_share"] = model.prior_shares[k];
        j["components"].push_back(c);
    }
    j["trace"] = json::array();
    for (const auto& r : model.trace)
        j["trace"].push_back({{"iteration", r.iteration}, {"Q", r.Q}, {"incomplete", r.incomplete}});
    j["warnings"] = model.warnings;
    return j;
}

inline json to_json(const LCModel& model) {
    json j;
    j["model"] = "lc";
    j["K"] = model.K;
    j["loglik"] = model.loglik;
    j["converged"] = model.converged;
    j["utility"] = to_json(model.spec);
    j["components"] = json::array();
    for (std::size_t k = 0; k < model.K; ++k)
        j["components"].push_back({{"beta", to_json(model.betas[k])}, {"share", model.pi[k]}});
    j["loglik_trace"] = model.loglik_trace;
    j["warnings"] = model.warnings;
    return j;
}

inline json to_json(const WeightedFit& fit, const UtilitySpec& spec) {
    json j;
    j["model"] = "mnl";
    j["loglik"] = fit.objective;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["utility"] = to_json(spec);
    j["beta"] = to_json(fit.beta);
    return j;
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline void write_trace_csv(const DPMModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "iteration,Q,incomplete\n";
    char buf[128];
    for (const auto& r : model.trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.8f,%.8f\n", r.iteration, r.Q, r.incomplete);
        out << buf;
    }
}

}  // namespace dpmnl

#endif
