#ifndef DPMNL_MNL_HPP
#define DPMNL_MNL_HPP

#include <vector>

#include "choice_data.hpp"
#include "common.hpp"
#include "optim.hpp"

namespace dpmnl {

enum class UtilitySpace { Preference, Wtp };

struct UtilitySpec {
    UtilitySpace space = UtilitySpace::Preference;
    int cost_index = -1;  // required for Wtp
};

inline UtilitySpec make_utility_spec(UtilitySpace space, const Dataset& data) {
    UtilitySpec spec;
    spec.space = space;
    spec.cost_index = data.cost_index();
    if (space == UtilitySpace::Wtp && spec.cost_index < 0)
        throw std::runtime_error("wtp space requires exactly one cost attribute");
    return spec;
}

enum class Transform { Identity, NegExp, BoundedNegative };

struct CoefTransform {
    Transform kind = Transform::Identity;
    double bound = 0.0;  // BoundedNegative upper bound, < 0
};

struct ParamVector {
    std::vector<double> values;  // natural scale
    std::vector<CoefTransform> transforms;

    std::size_t size() const { return values.size(); }
};

enum class PriorKind { None, Normal, HalfNormal };

struct CoefPrior {
    PriorKind kind = PriorKind::None;
    double scale = 5.0;
};

using PriorSpec = std::vector<CoefPrior>;
using CaseWeights = std::vector<double>;

inline PriorSpec no_prior(std::size_t dim) { return PriorSpec(dim, {PriorKind::None, 0.0}); }

// Transforms derived from the attribute constraints, plus the matching default
// base measure (normal for free coefficients, half-normal for sign-constrained).
inline std::vector<CoefTransform> transforms_from_specs(const std::vector<AttributeSpec>& specs) {
    std::vector<CoefTransform> ts;
    for (const auto& s : specs) {
        switch (s.constraint) {
            case AttrConstraint::Free: ts.push_back({Transform::Identity, 0.0}); break;
            case AttrConstraint::StrictlyNegative: ts.push_back({Transform::NegExp, 0.0}); break;
            case AttrConstraint::BoundedNegative: ts.push_back({Transform::BoundedNegative, s.upper_bound}); break;
        }
    }
    return ts;
}

inline PriorSpec default_base_measure(const std::vector<CoefTransform>& ts, double scale = 5.0) {
    PriorSpec ps;
    for (const auto& t : ts)
        ps.push_back({t.kind == Transform::Identity ? PriorKind::Normal : PriorKind::HalfNormal, scale});
    return ps;
}

inline std::vector<double> to_unconstrained(const ParamVector& beta) {
    std::vector<double> u(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) {
        double b = beta.values[i];
        switch (beta.transforms[i].kind) {
            case Transform::Identity:
                u[i] = b;
                break;
            case Transform::NegExp:
                if (b >= 0.0) throw std::domain_error("negative-exponential coefficient must be < 0");
                u[i] = std::log(-b);
                break;
            case Transform::BoundedNegative:
                if (b >= beta.transforms[i].bound)
                    throw std::domain_error("bounded-negative coefficient must be below its bound");
                u[i] = std::log(beta.transforms[i].bound - b);
                break;
        }
    }
    return u;
}

inline ParamVector from_unconstrained(const std::vector<double>& u,
                                      const std::vector<CoefTransform>& transforms) {
    ParamVector beta;
    beta.transforms = transforms;
    beta.values.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        switch (transforms[i].kind) {
            case Transform::Identity: beta.values[i] = u[i]; break;
            case Transform::NegExp: beta.values[i] = -std::exp(u[i]); break;
            case Transform::BoundedNegative: beta.values[i] = transforms[i].bound - std::exp(u[i]); break;
        }
    }
    return beta;
}

inline std::vector<double> utilities(const UtilitySpec& spec, const ParamVector& beta,
                                     const ChoiceTask& task) {
    std::vector<double> v(task.alternatives.size(), neg_inf);
    for (std::size_t j = 0; j < task.alternatives.size(); ++j) {
        const auto& alt = task.alternatives[j];
        if (!alt.available) continue;
        if (spec.space == UtilitySpace::Preference) {
            double s = 0.0;
            for (std::size_t a = 0; a < alt.attributes.size(); ++a)
                s += alt.attributes[a] * beta.values[a];
            v[j] = s;
        } else {
            const auto c = static_cast<std::size_t>(spec.cost_index);
            double bracket = alt.attributes[c];
            for (std::size_t a = 0; a < alt.attributes.size(); ++a)
                if (a != c) bracket += alt.attributes[a] * beta.values[a];
            v[j] = bracket * beta.values[c];
        }
        if (std::isnan(v[j])) throw std::runtime_error("non-finite utility");
    }
    return v;
}

// Softmax over available alternatives; zeros at unavailable slots.
inline std::vector<double> choice_probabilities(const UtilitySpec& spec, const ParamVector& beta,
                                                const ChoiceTask& task) {
    auto v = utilities(spec, beta, task);
    double lse = log_sum_exp(v);
    std::vector<double> p(v.size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j)
        if (task.alternatives[j].available) p[j] = std::exp(v[j] - lse);
    return p;
}

inline double task_log_likelihood(const UtilitySpec& spec, const ParamVector& beta,
                                  const ChoiceTask& task) {
    auto v = utilities(spec, beta, task);
    return v[task.chosen] - log_sum_exp(v);
}

inline double panel_log_likelihood(const UtilitySpec& spec, const ParamVector& beta,
                                   const std::vector<ChoiceTask>& tasks) {
    double ll = 0.0;
    for (const auto& task : tasks) ll += task_log_likelihood(spec, beta, task);
    return ll;
}

namespace detail {

inline double d_beta_d_u(const CoefTransform& t, double beta_value) {
    // identity: 1; negexp / bounded-negative: dβ/du = β - b with b = 0 or bound
    if (t.kind == Transform::Identity) return 1.0;
    return beta_value - (t.kind == Transform::BoundedNegative ? t.bound : 0.0);
}

// log prior density expressed in unconstrained coordinates (includes the
// log-Jacobian |dβ/du| for transformed coefficients); grad_u may be null.
inline double log_prior_u(const PriorSpec& prior, const ParamVector& beta,
                          const std::vector<double>& u, std::vector<double>* grad_u) {
    double lp = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        const auto& pr = prior[i];
        if (pr.kind == PriorKind::None) continue;
        double b = beta.values[i];
        double s2 = sq(pr.scale);
        lp += (pr.kind == PriorKind::Normal) ? normal_log_pdf(b, 0.0, pr.scale)
                                             : half_normal_log_pdf(b, pr.scale);
        double g = -b / s2 * d_beta_d_u(beta.transforms[i], b);
        if (beta.transforms[i].kind != Transform::Identity) {
            lp += u[i];  // ln|dβ/du| = u
            g += 1.0;
        }
        if (!std::isfinite(lp)) throw std::runtime_error("non-finite prior density");
        if (grad_u) (*grad_u)[i] += g;
    }
    return lp;
}

// gradient of the task log-likelihood with respect to natural-scale beta
inline void task_ll_grad_beta(const UtilitySpec& spec, const ParamVector& beta,
                              const ChoiceTask& task, std::vector<double>& grad) {
    auto p = choice_probabilities(spec, beta, task);
    const std::size_t d = beta.size();
    if (spec.space == UtilitySpace::Preference) {
        for (std::size_t a = 0; a < d; ++a) {
            double g = task.alternatives[task.chosen].attributes[a];
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[j] > 0.0) g -= p[j] * task.alternatives[j].attributes[a];
            grad[a] += g;
        }
    } else {
        const auto c = static_cast<std::size_t>(spec.cost_index);
        auto bracket = [&](std::size_t j) {
            double s = task.alternatives[j].attributes[c];
            for (std::size_t a = 0; a < d; ++a)
                if (a != c) s += task.alternatives[j].attributes[a] * beta.values[a];
            return s;
        };
        for (std::size_t a = 0; a < d; ++a) {
            double dv_chosen = (a == c) ? bracket(task.chosen)
                                        : beta.values[c] * task.alternatives[task.chosen].attributes[a];
            double g = dv_chosen;
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j] <= 0.0) continue;
                double dv = (a == c) ? bracket(j) : beta.values[c] * task.alternatives[j].attributes[a];
                g -= p[j] * dv;
            }
            grad[a] += g;
        }
    }
}

}  // namespace detail

inline double weighted_map_objective(const UtilitySpec& spec, const ParamVector& beta,
                                     const Dataset& data, const CaseWeights& weights,
                                     const PriorSpec& prior) {
    if (weights.size() != data.n_individuals())
        throw std::invalid_argument("weights length must equal N");
    double obj = 0.0;
    for (std::size_t n = 0; n < data.n_individuals(); ++n)
        if (weights[n] != 0.0)
            obj += weights[n] * panel_log_likelihood(spec, beta, data.individuals[n].tasks);
    obj += detail::log_prior_u(prior, beta, to_unconstrained(beta), nullptr);
    return obj;
}

// gradient in unconstrained coordinates
inline std::vector<double> weighted_map_gradient(const UtilitySpec& spec, const ParamVector& beta,
                                                 const Dataset& data, const CaseWeights& weights,
                                                 const PriorSpec& prior) {
    if (weights.size() != data.n_individuals())
        throw std::invalid_argument("weights length must equal N");
    const std::size_t d = beta.size();
    std::vector<double> grad_beta(d, 0.0);
    for (std::size_t n = 0; n < data.n_individuals(); ++n) {
        if (weights[n] == 0.0) continue;
        std::vector<double> g(d, 0.0);
        for (const auto& task : data.individuals[n].tasks)
            detail::task_ll_grad_beta(spec, beta, task, g);
        for (std::size_t a = 0; a < d; ++a) grad_beta[a] += weights[n] * g[a];
    }
    std::vector<double> grad_u(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
        grad_u[a] = grad_beta[a] * detail::d_beta_d_u(beta.transforms[a], beta.values[a]);
    detail::log_prior_u(prior, beta, to_unconstrained(beta), &grad_u);
    return grad_u;
}

// Natural-scale mode of the configured prior (starting point for empty components).
inline ParamVector prior_mode(const PriorSpec& prior, const std::vector<CoefTransform>& transforms) {
    ParamVector beta;
    beta.transforms = transforms;
    beta.values.resize(prior.size());
    for (std::size_t i = 0; i < prior.size(); ++i) {
        double b0 = (transforms[i].kind == Transform::BoundedNegative) ? transforms[i].bound : 0.0;
        if (prior[i].kind == PriorKind::None) {
            beta.values[i] = (transforms[i].kind == Transform::Identity) ? 0.0 : b0 - 1.0;
        } else if (transforms[i].kind == Transform::Identity) {
            beta.values[i] = 0.0;
        } else {
            // maximize log density in u space: -beta^2/(2 s^2) + u with beta = b0 - e^u
            double s = prior[i].scale;
            beta.values[i] = 0.5 * (b0 - std::sqrt(b0 * b0 + 4.0 * s * s));
        }
    }
    return beta;
}

struct WeightedFit {
    ParamVector beta;
    double objective = neg_inf;
    bool converged = false;
    std::size_t iterations = 0;
};

inline WeightedFit fit_weighted_mnl(const UtilitySpec& spec, const Dataset& data,
                                    const CaseWeights& weights, const PriorSpec& prior,
                                    const ParamVector& init, double tol = 1e-6,
                                    std::size_t max_iter = 500) {
    const auto& transforms = init.transforms;
    auto f_grad = [&](const std::vector<double>& u, std::vector<double>& g) {
        ParamVector beta = from_unconstrained(u, transforms);
        double obj;
        try {
            obj = weighted_map_objective(spec, beta, data, weights, prior);
            g = weighted_map_gradient(spec, beta, data, weights, prior);
        } catch (const std::exception&) {
            std::fill(g.begin(), g.end(), 0.0);
            return neg_inf;
        }
        return obj;
    };
    OptimResult res = bfgs_maximize(f_grad, to_unconstrained(init), tol, max_iter);
    WeightedFit fit;
    fit.beta = from_unconstrained(res.x, transforms);
    fit.objective = res.value;
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    return fit;
}

// Plain maximum-likelihood MNL (unit weights, no prior).
inline WeightedFit fit_mnl(const UtilitySpec& spec, const Dataset& data, const ParamVector& init,
                           double tol = 1e-6, std::size_t max_iter = 500) {
    return fit_weighted_mnl(spec, data, CaseWeights(data.n_individuals(), 1.0),
                            no_prior(init.size()), init, tol, max_iter);
}

}  // namespace dpmnl

#endif
