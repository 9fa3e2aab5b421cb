#ifndef DPMNL_LC_EM_HPP
#define DPMNL_LC_EM_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dpm_em.hpp"

namespace dpmnl {

struct LCConfig {
    double rel_tol = 1e-4;
    std::size_t max_iter = 500;
    std::uint64_t seed = 1;
    double empty_component_weight_threshold = 1e-8;
    double inner_tol = 1e-6;
    std::size_t inner_max_iter = 500;
    std::size_t threads = 1;

    DPMConfig as_dpm() const {
        DPMConfig d;
        d.rel_tol = rel_tol;
        d.max_iter = max_iter;
        d.seed = seed;
        d.empty_component_weight_threshold = empty_component_weight_threshold;
        d.inner_tol = inner_tol;
        d.inner_max_iter = inner_max_iter;
        d.threads = threads;
        d.base_measure = PriorSpec{};  // placeholder, overwritten per use
        return d;
    }
};

struct LCModel {
    std::size_t K = 0;
    std::vector<double> pi;
    std::vector<ParamVector> betas;
    Responsibilities omega;
    double loglik = neg_inf;  // sample mixture log-likelihood
    std::vector<double> loglik_trace;
    bool converged = false;
    std::vector<std::string> warnings;
    UtilitySpec spec;
};

inline double lc_sample_loglik(const std::vector<double>& pi, const std::vector<double>& ll,
                               std::size_t N, std::size_t K) {
    double obj = 0.0;
    std::vector<double> row(K);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k)
            row[k] = (pi[k] > 0.0 ? std::log(pi[k]) : neg_inf) + ll[n * K + k];
        obj += log_sum_exp(row);
    }
    return obj;
}

// LC beta update: per-component maximum-likelihood weighted MNL fit.
inline std::vector<ParamVector> lc_m_step_betas(const Responsibilities& omega,
                                                const UtilitySpec& spec, const Dataset& data,
                                                const std::vector<ParamVector>& betas_init,
                                                const LCConfig& cfg,
                                                std::vector<std::string>* warnings = nullptr) {
    DPMConfig d = cfg.as_dpm();
    if (betas_init.empty()) return {};
    d.base_measure = no_prior(betas_init.front().size());
    return m_step_betas(omega, spec, data, *d.base_measure, betas_init, d, warnings);
}

inline LCModel fit_lc(const Dataset& data, const UtilitySpec& spec, std::size_t K,
                      const LCConfig& cfg) {
    if (K < 1) throw std::invalid_argument("fit_lc: K must be >= 1");
    const std::size_t N = data.n_individuals();
    auto transforms = transforms_from_specs(data.attribute_specs);

    LCModel model;
    model.spec = spec;
    model.K = K;
    DPMConfig dcfg = cfg.as_dpm();
    dcfg.base_measure = no_prior(transforms.size());
    model.betas = init_train(spec, data, K, cfg.seed, transforms, dcfg, &model.warnings);
    model.pi.assign(K, 1.0 / static_cast<double>(K));

    std::vector<bool> frozen(K, false);
    double prev = neg_inf;
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        auto ll = loglik_matrix(spec, model.betas, data, cfg.threads);
        std::vector<double> lp(K);
        for (std::size_t k = 0; k < K; ++k)
            lp[k] = model.pi[k] > 0.0 ? std::log(model.pi[k]) : neg_inf;
        model.omega = detail::e_step_from_logliks(lp, ll, N, K);

        auto tot = model.omega.column_totals();
        for (std::size_t k = 0; k < K; ++k) {
            model.pi[k] = tot[k] / static_cast<double>(N);
            if (model.pi[k] < 1e-8 && !frozen[k]) {
                frozen[k] = true;
                model.warnings.push_back("component " + std::to_string(k) + " emptied; beta frozen");
            }
        }
        auto updated = lc_m_step_betas(model.omega, spec, data, model.betas, cfg, &model.warnings);
        for (std::size_t k = 0; k < K; ++k)
            if (!frozen[k]) model.betas[k] = updated[k];

        ll = loglik_matrix(spec, model.betas, data, cfg.threads);
        model.loglik = lc_sample_loglik(model.pi, ll, N, K);
        model.loglik_trace.push_back(model.loglik);
        if (iter > 0 && std::fabs(model.loglik - prev) < cfg.rel_tol * std::fabs(model.loglik)) {
            model.converged = true;
            break;
        }
        prev = model.loglik;
    }
    if (!model.converged) model.warnings.push_back("EM did not converge within max_iter");
    return model;
}

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n_params = 0;
};

// n_params = K*P + (K-1); BIC uses the number of individuals.
inline InformationCriteria information_criteria(const LCModel& model, const Dataset& data) {
    const std::size_t P = data.n_attributes();
    InformationCriteria ic;
    ic.n_params = model.K * P + (model.K - 1);
    ic.aic = 2.0 * static_cast<double>(ic.n_params) - 2.0 * model.loglik;
    ic.bic = static_cast<double>(ic.n_params) * std::log(static_cast<double>(data.n_individuals()))
             - 2.0 * model.loglik;
    return ic;
}

struct SweepRow {
    std::size_t K = 0;
    std::size_t n_params = 0;
    double loglik = neg_inf;
    double aic = 0.0;
    double bic = 0.0;
    bool aic_optimal = false;
    bool bic_optimal = false;
    bool failed = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<LCModel> models;

    const SweepRow* bic_optimal() const {
        for (const auto& r : rows)
            if (r.bic_optimal) return &r;
        return nullptr;
    }
    const LCModel* bic_optimal_model() const {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].bic_optimal) return &models[i];
        return nullptr;
    }
};

inline SweepResult sweep(const Dataset& data, const UtilitySpec& spec, std::size_t K_min,
                         std::size_t K_max, const LCConfig& cfg) {
    if (K_min < 1 || K_min > K_max) throw std::invalid_argument("sweep: need 1 <= K_min <= K_max");
    SweepResult res;
    for (std::size_t K = K_min; K <= K_max; ++K) {
        SweepRow row;
        row.K = K;
        LCModel model;
        try {
            model = fit_lc(data, spec, K, cfg);
            auto ic = information_criteria(model, data);
            row.n_params = ic.n_params;
            row.loglik = model.loglik;
            row.aic = ic.aic;
            row.bic = ic.bic;
        } catch (const std::exception&) {
            row.failed = true;
        }
        res.rows.push_back(row);
        res.models.push_back(std::move(model));
    }
    double best_aic = std::numeric_limits<double>::infinity(), best_bic = best_aic;
    std::size_t i_aic = 0, i_bic = 0;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        if (res.rows[i].failed) continue;
        if (res.rows[i].aic < best_aic) { best_aic = res.rows[i].aic; i_aic = i; }
        if (res.rows[i].bic < best_bic) { best_bic = res.rows[i].bic; i_bic = i; }
    }
    if (!res.rows.empty()) {
        res.rows[i_aic].aic_optimal = true;
        res.rows[i_bic].bic_optimal = true;
    }
    return res;
}

inline void write_sweep_csv(const SweepResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "K,n_params,loglik,aic,bic,aic_optimal,bic_optimal,failed\n";
    char buf[160];
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%.6f,%d,%d,%d\n", r.K, r.n_params,
                      r.loglik, r.aic, r.bic, r.aic_optimal ? 1 : 0, r.bic_optimal ? 1 : 0,
                      r.failed ? 1 : 0);
        out << buf;
    }
}

}  // namespace dpmnl

#endif
