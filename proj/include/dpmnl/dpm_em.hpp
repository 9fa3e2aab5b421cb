#ifndef DPMNL_DPM_EM_HPP
#define DPMNL_DPM_EM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "choice_data.hpp"
#include "common.hpp"
#include "mnl.hpp"
#include "stick_breaking.hpp"

namespace dpmnl {

struct DPMConfig {
    std::size_t K = 150;
    ConcentrationPrior alpha_prior{2.0, 2.0};
    std::optional<PriorSpec> base_measure;  // default: normal(0,5) / half-normal(5) per transform
    double prior_scale = 5.0;
    double rel_tol = 1e-4;  // 0.01% of the expected log-posterior
    std::size_t max_iter = 500;
    std::uint64_t seed = 1;
    double empty_component_weight_threshold = 1e-8;
    double inner_tol = 1e-6;
    std::size_t inner_max_iter = 500;
    std::size_t threads = 1;

    PriorSpec resolve_base_measure(const std::vector<CoefTransform>& transforms) const {
        return base_measure ? *base_measure : default_base_measure(transforms, prior_scale);
    }
};

struct Responsibilities {
    std::size_t N = 0, K = 0;
    std::vector<double> w;  // row-major N x K

    Responsibilities() = default;
    Responsibilities(std::size_t n, std::size_t k) : N(n), K(k), w(n * k, 0.0) {}
    double& at(std::size_t n, std::size_t k) { return w[n * K + k]; }
    double at(std::size_t n, std::size_t k) const { return w[n * K + k]; }

    std::vector<double> column_totals() const {
        std::vector<double> tot(K, 0.0);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t k = 0; k < K; ++k) tot[k] += at(n, k);
        return tot;
    }
};

struct EMTraceRecord {
    std::size_t iteration = 0;
    double Q = neg_inf;
    double incomplete = neg_inf;
};

struct DPMModel {
    double alpha_hat = 0.0;
    std::vector<ParamVector> betas;
    Responsibilities omega;
    std::vector<EMTraceRecord> trace;
    std::vector<double> empirical_shares;  // (1/N) column sums of omega
    std::vector<double> prior_shares;      // P(q = k | alpha_hat)
    bool converged = false;
    std::vector<std::string> warnings;
    UtilitySpec spec;

    std::size_t K() const { return betas.size(); }
};

// N x K matrix of panel log-likelihoods per (individual, component)
inline std::vector<double> loglik_matrix(const UtilitySpec& spec,
                                         const std::vector<ParamVector>& betas,
                                         const Dataset& data, std::size_t threads = 1) {
    const std::size_t N = data.n_individuals(), K = betas.size();
    std::vector<double> ll(N * K);
    parallel_for(N, threads, [&](std::size_t n) {
        for (std::size_t k = 0; k < K; ++k)
            ll[n * K + k] = panel_log_likelihood(spec, betas[k], data.individuals[n].tasks);
    });
    return ll;
}

namespace detail {

inline Responsibilities e_step_from_logliks(const std::vector<double>& log_prior_k,
                                            const std::vector<double>& ll, std::size_t N,
                                            std::size_t K) {
    Responsibilities omega(N, K);
    std::vector<double> row(K);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k) row[k] = log_prior_k[k] + ll[n * K + k];
        double lse = log_sum_exp(row);
        if (!std::isfinite(lse)) throw std::runtime_error("degenerate individual likelihood");
        for (std::size_t k = 0; k < K; ++k) omega.at(n, k) = std::exp(row[k] - lse);
    }
    return omega;
}

// w_k = sum_{k' >= k} sum_n omega_{n,k'}, k = 1..K (0-based storage)
inline std::vector<double> cumulative_tail_weights(const Responsibilities& omega) {
    auto tot = omega.column_totals();
    std::vector<double> w(omega.K, 0.0);
    double acc = 0.0;
    for (std::size_t k = omega.K; k-- > 0;) {
        acc += tot[k];
        w[k] = acc;
    }
    return w;
}

// alpha-dependent part of the expected complete-data log posterior
inline double alpha_objective(double alpha, const std::vector<double>& w,
                              const ConcentrationPrior& prior) {
    const std::size_t K = w.size();
    double obj = static_cast<double>(K - 1) * std::log(alpha);
    for (std::size_t k = 0; k + 1 < K; ++k)
        obj += std::lgamma(alpha + w[k + 1]) - std::lgamma(1.0 + alpha + w[k]);
    return obj + prior.log_density(alpha);
}

inline double alpha_objective_deriv(double alpha, const std::vector<double>& w,
                                    const ConcentrationPrior& prior) {
    const std::size_t K = w.size();
    double d = static_cast<double>(K - 1) / alpha;
    for (std::size_t k = 0; k + 1 < K; ++k)
        d += digamma(alpha + w[k + 1]) - digamma(1.0 + alpha + w[k]);
    return d + prior.d_log_density(alpha);
}

}  // namespace detail

inline Responsibilities e_step(double alpha, const std::vector<ParamVector>& betas,
                               const UtilitySpec& spec, const Dataset& data,
                               std::size_t threads = 1) {
    if (alpha <= 0.0) throw std::invalid_argument("e_step: alpha must be > 0");
    const std::size_t N = data.n_individuals(), K = betas.size();
    auto ll = loglik_matrix(spec, betas, data, threads);
    std::vector<double> lp = K >= 2 ? log_component_prior_probs(alpha, K)
                                    : std::vector<double>{0.0};
    return detail::e_step_from_logliks(lp, ll, N, K);
}

inline double m_step_alpha(const Responsibilities& omega, const ConcentrationPrior& prior,
                           double alpha_init) {
    auto w = detail::cumulative_tail_weights(omega);
    if (w.size() < 2) return prior.mode() > 0.0 ? prior.mode() : alpha_init;
    // optimize in u = ln(alpha) to keep alpha positive
    auto f = [&](double u) { return detail::alpha_objective(std::exp(u), w, prior); };
    auto df = [&](double u) {
        double a = std::exp(u);
        return a * detail::alpha_objective_deriv(a, w, prior);
    };
    double u_star = scan_bisect_maximize(f, df, std::log(1e-6), std::log(1e6), 800, 1e-10);
    double alpha = std::exp(u_star);
    // ascent contract against the incoming value
    if (alpha_init > 0.0 && detail::alpha_objective(alpha_init, w, prior) > f(u_star))
        return alpha_init;
    return alpha;
}

inline std::vector<ParamVector> m_step_betas(const Responsibilities& omega, const UtilitySpec& spec,
                                             const Dataset& data, const PriorSpec& base_measure,
                                             const std::vector<ParamVector>& betas_init,
                                             const DPMConfig& cfg,
                                             std::vector<std::string>* warnings = nullptr) {
    const std::size_t K = betas_init.size();
    auto tot = omega.column_totals();
    std::vector<ParamVector> out(K);
    std::vector<std::string> warn(K);
    parallel_for(K, cfg.threads, [&](std::size_t k) {
        if (tot[k] < cfg.empty_component_weight_threshold) {
            out[k] = prior_mode(base_measure, betas_init[k].transforms);
            return;
        }
        CaseWeights weights(omega.N);
        for (std::size_t n = 0; n < omega.N; ++n) weights[n] = omega.at(n, k);
        try {
            auto fit = fit_weighted_mnl(spec, data, weights, base_measure, betas_init[k],
                                        cfg.inner_tol, cfg.inner_max_iter);
            bool finite = std::isfinite(fit.objective);
            for (double v : fit.beta.values) finite = finite && std::isfinite(v);
            if (!finite) throw std::runtime_error("non-finite component fit");
            out[k] = fit.beta;
        } catch (const std::exception& e) {
            out[k] = betas_init[k];
            warn[k] = "component " + std::to_string(k) + " M-step failed: " + e.what();
        }
    });
    if (warnings)
        for (auto& w : warn)
            if (!w.empty()) warnings->push_back(w);
    return out;
}

inline double surrogate_Q(double alpha, const std::vector<ParamVector>& betas,
                          const Responsibilities& omega, const UtilitySpec& spec,
                          const Dataset& data, const PriorSpec& base_measure,
                          const ConcentrationPrior& alpha_prior, std::size_t threads = 1) {
    const std::size_t N = data.n_individuals(), K = betas.size();
    auto ll = loglik_matrix(spec, betas, data, threads);
    auto w = detail::cumulative_tail_weights(omega);
    double Q = 0.0;
    if (K >= 2) {
        Q += std::lgamma(static_cast<double>(N) + 1.0) - std::lgamma(1.0 + w[K - 1]);
        Q += detail::alpha_objective(alpha, w, alpha_prior);
    } else {
        Q += alpha_prior.log_density(alpha);
    }
    double lik = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t k = 0; k < K; ++k)
            if (omega.at(n, k) > 0.0) lik += omega.at(n, k) * ll[n * K + k];
    Q += lik;
    for (const auto& beta : betas)
        Q += detail::log_prior_u(base_measure, beta, to_unconstrained(beta), nullptr);
    return Q;
}

// Monitoring proxy: marginal mixture log-likelihood under the independent
// component prior plus the parameter priors.
inline double incomplete_objective(double alpha, const std::vector<ParamVector>& betas,
                                   const UtilitySpec& spec, const Dataset& data,
                                   const PriorSpec& base_measure,
                                   const ConcentrationPrior& alpha_prior,
                                   std::size_t threads = 1) {
    const std::size_t N = data.n_individuals(), K = betas.size();
    auto ll = loglik_matrix(spec, betas, data, threads);
    std::vector<double> lp = K >= 2 ? log_component_prior_probs(alpha, K)
                                    : std::vector<double>{0.0};
    double obj = 0.0;
    std::vector<double> row(K);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k) row[k] = lp[k] + ll[n * K + k];
        obj += log_sum_exp(row);
    }
    obj += alpha_prior.log_density(alpha);
    for (const auto& beta : betas)
        obj += detail::log_prior_u(base_measure, beta, to_unconstrained(beta), nullptr);
    return obj;
}

// Train-style starting values: random K-way partition, maximum-likelihood MNL
// fit per group.
inline std::vector<ParamVector> init_train(const UtilitySpec& spec, const Dataset& data,
                                           std::size_t K, std::uint64_t seed,
                                           const std::vector<CoefTransform>& transforms,
                                           const DPMConfig& cfg,
                                           std::vector<std::string>* warnings = nullptr) {
    const std::size_t N = data.n_individuals();
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> groups(K);
    for (std::size_t pos = 0; pos < N; ++pos) groups[pos % K].push_back(order[pos]);

    const auto prior_none = no_prior(transforms.size());
    const ParamVector fallback = prior_mode(cfg.resolve_base_measure(transforms), transforms);
    const ParamVector ml_init = prior_mode(prior_none, transforms);
    std::vector<ParamVector> betas(K);
    std::vector<std::string> warn(K);
    parallel_for(K, cfg.threads, [&](std::size_t k) {
        if (groups[k].empty()) {
            betas[k] = fallback;
            return;
        }
        CaseWeights weights(N, 0.0);
        for (auto n : groups[k]) weights[n] = 1.0;
        try {
            auto fit = fit_weighted_mnl(spec, data, weights, prior_none, ml_init, cfg.inner_tol,
                                        std::min<std::size_t>(cfg.inner_max_iter, 200));
            bool finite = std::isfinite(fit.objective);
            for (double v : fit.beta.values) finite = finite && std::isfinite(v);
            if (!finite) throw std::runtime_error("non-finite group fit");
            betas[k] = fit.beta;
        } catch (const std::exception& e) {
            betas[k] = fallback;
            warn[k] = "starting-value fit for group " + std::to_string(k) + " failed: " + e.what();
        }
    });
    if (warnings)
        for (auto& w : warn)
            if (!w.empty()) warnings->push_back(w);
    return betas;
}

inline std::size_t occupied_components(const DPMModel& model, double threshold) {
    std::size_t c = 0;
    for (double s : model.empirical_shares)
        if (s >= threshold) ++c;
    return c;
}

inline std::size_t occupied_components(const DPMModel& model) {
    return occupied_components(model, 0.5 / static_cast<double>(model.omega.N));
}

inline DPMModel fit_dpm(const Dataset& data, const UtilitySpec& spec, const DPMConfig& cfg) {
    const std::size_t N = data.n_individuals(), K = cfg.K;
    if (K < 1) throw std::invalid_argument("fit_dpm: K must be >= 1");
    auto transforms = transforms_from_specs(data.attribute_specs);
    const PriorSpec base_measure = cfg.resolve_base_measure(transforms);

    DPMModel model;
    model.spec = spec;
    model.betas = init_train(spec, data, K, cfg.seed, transforms, cfg, &model.warnings);
    model.alpha_hat = cfg.alpha_prior.mode() > 0.0 ? cfg.alpha_prior.mode() : 1.0;

    double prev_Q = neg_inf;
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        auto ll = loglik_matrix(spec, model.betas, data, cfg.threads);
        std::vector<double> lp;
        if (K < 2)
            lp = {0.0};
        else if (iter == 0)
            lp.assign(K, -std::log(static_cast<double>(K)));  // equal initial mixture weights
        else
            lp = log_component_prior_probs(model.alpha_hat, K);
        model.omega = detail::e_step_from_logliks(lp, ll, N, K);

        model.alpha_hat = m_step_alpha(model.omega, cfg.alpha_prior, model.alpha_hat);
        model.betas = m_step_betas(model.omega, spec, data, base_measure, model.betas, cfg,
                                   &model.warnings);

        double Q = surrogate_Q(model.alpha_hat, model.betas, model.omega, spec, data, base_measure,
                               cfg.alpha_prior, cfg.threads);
        double inc = incomplete_objective(model.alpha_hat, model.betas, spec, data, base_measure,
                                          cfg.alpha_prior, cfg.threads);
        model.trace.push_back({iter, Q, inc});
        if (iter > 0 && std::fabs(Q - prev_Q) < cfg.rel_tol * std::fabs(Q)) {
            model.converged = true;
            prev_Q = Q;
            break;
        }
        prev_Q = Q;
    }
    if (!model.converged)
        model.warnings.push_back("EM did not converge within max_iter");

    model.empirical_shares.assign(K, 0.0);
    auto tot = model.omega.column_totals();
    for (std::size_t k = 0; k < K; ++k) model.empirical_shares[k] = tot[k] / static_cast<double>(N);
    model.prior_shares = K >= 2 ? component_prior_probs(model.alpha_hat, K)
                                : std::vector<double>{1.0};
    return model;
}

}  // namespace dpmnl

#endif
