#ifndef DPMNL_SIMGEN_HPP
#define DPMNL_SIMGEN_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "choice_data.hpp"
#include "common.hpp"

namespace dpmnl::simgen {

struct MvnComponent {
    std::array<double, 2> mu{};
    std::array<std::array<double, 2>, 2> sigma{};  // covariance

    static MvnComponent from_corr(std::array<double, 2> mu, std::array<double, 2> tau,
                                  double corr) {
        MvnComponent c;
        c.mu = mu;
        c.sigma = {{{tau[0] * tau[0], corr * tau[0] * tau[1]},
                    {corr * tau[0] * tau[1], tau[1] * tau[1]}}};
        return c;
    }
};

struct ExperimentSpec {
    std::string id;
    std::vector<double> weights;  // mixture weights, sum to 1
    std::vector<MvnComponent> components;
    bool exp_ovtt = false;  // apply exp() to the ovtt marginal
    double cost_location = 0.75;
    double cost_scale = 0.25;

    void check() const {
        double ws = 0.0;
        for (double w : weights) ws += w;
        if (std::fabs(ws - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
        if (weights.size() != components.size())
            throw std::invalid_argument("weights/components length mismatch");
        for (const auto& c : components) {
            double det = c.sigma[0][0] * c.sigma[1][1] - c.sigma[0][1] * c.sigma[1][0];
            if (c.sigma[0][0] <= 0.0 || det <= 0.0)
                throw std::invalid_argument("covariance not positive definite");
        }
        if (cost_scale <= 0.0) throw std::invalid_argument("cost scale must be > 0");
    }
};

inline ExperimentSpec experiment_spec(const std::string& id) {
    ExperimentSpec e;
    e.id = id;
    if (id == "I") {
        e.weights = {1.0};
        e.components = {MvnComponent::from_corr({10.0, 15.0}, {1.5, 2.0}, 0.5)};
        e.cost_location = 0.75;
    } else if (id == "II") {
        e.weights = {1.0};
        e.components = {MvnComponent::from_corr({12.0, 2.8}, {1.5, 0.3}, 0.3)};
        e.exp_ovtt = true;
        e.cost_location = 0.60;
    } else if (id == "III") {
        e.weights = {0.75, 0.25};
        e.components = {MvnComponent::from_corr({12.0, 16.0}, {1.0, 2.0}, 0.2),
                        MvnComponent::from_corr({6.0, 10.0}, {1.0, 2.0}, -0.4)};
        e.cost_location = 0.80;
    } else if (id == "IV") {
        e.weights = {0.35, 0.25, 0.40};
        e.components = {MvnComponent::from_corr({10.0, 15.0}, {2.0, 2.0}, 0.0),
                        MvnComponent::from_corr({0.88, 24.12}, {1.2, 1.2}, 0.0),
                        MvnComponent::from_corr({19.12, 24.12}, {1.8, 1.2}, 0.0)};
        e.cost_location = 0.60;
    } else {
        throw std::invalid_argument("unknown experiment id: " + id);
    }
    e.check();
    return e;
}

struct SimConfig {
    std::size_t N = 2000;
    std::size_t T = 8;
    std::size_t J = 3;
    std::uint64_t seed = 1;

    void check() const {
        if (N == 0 || T == 0 || J < 2) throw std::invalid_argument("invalid SimConfig");
    }
};

struct AltAttributes {
    double ivtt = 0.0;  // hours
    double ovtt = 0.0;  // hours
    double cost = 0.0;
};

// covariates[n][t][j]
using Covariates = std::vector<std::vector<std::vector<AltAttributes>>>;

struct Taste {
    double ivtt = 0.0;
    double ovtt = 0.0;
    double cost = 0.0;  // strictly negative
};

// Distance s ~ U(2,20) per task; per alternative speed v ~ U(10,40),
// ivtt = s/v hours, ovtt ~ U(0,30) minutes, cost = U(0,2) + U(0,0.7)*s.
inline Covariates gen_covariates(const SimConfig& cfg, Rng& rng) {
    cfg.check();
    std::uniform_real_distribution<double> us(2.0, 20.0), uv(10.0, 40.0), uo(0.0, 30.0),
        uc1(0.0, 2.0), uc2(0.0, 0.7);
    Covariates cov(cfg.N);
    for (auto& ind : cov) {
        ind.resize(cfg.T);
        for (auto& task : ind) {
            double s = us(rng);
            task.resize(cfg.J);
            for (auto& alt : task) {
                alt.ivtt = s / uv(rng);
                alt.ovtt = uo(rng) / 60.0;
                alt.cost = uc1(rng) + uc2(rng) * s;
            }
        }
    }
    return cov;
}

inline std::array<double, 2> mvn2_draw(const MvnComponent& c, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    double l11 = std::sqrt(c.sigma[0][0]);
    double l21 = c.sigma[1][0] / l11;
    double l22 = std::sqrt(c.sigma[1][1] - l21 * l21);
    double z1 = z(rng), z2 = z(rng);
    return {c.mu[0] + l11 * z1, c.mu[1] + l21 * z1 + l22 * z2};
}

inline std::vector<Taste> gen_tastes(const ExperimentSpec& exp, std::size_t N, Rng& rng) {
    exp.check();
    std::discrete_distribution<std::size_t> cat(exp.weights.begin(), exp.weights.end());
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Taste> tastes(N);
    for (auto& t : tastes) {
        auto b = mvn2_draw(exp.components[cat(rng)], rng);
        t.ivtt = b[0];
        t.ovtt = exp.exp_ovtt ? std::exp(b[1]) : b[1];
        t.cost = -std::exp(exp.cost_location + exp.cost_scale * z(rng));
    }
    return tastes;
}

// WTP-space deterministic utility: (ivtt*b_ivtt + ovtt*b_ovtt + cost) * b_cost
inline double deterministic_utility(const AltAttributes& x, const Taste& b) {
    return (x.ivtt * b.ivtt + x.ovtt * b.ovtt + x.cost) * b.cost;
}

inline std::size_t deterministic_argmax(const std::vector<AltAttributes>& alts, const Taste& b) {
    std::size_t best = 0;
    double best_v = neg_inf;
    for (std::size_t j = 0; j < alts.size(); ++j) {
        double v = deterministic_utility(alts[j], b);
        if (v > best_v) {
            best_v = v;
            best = j;
        }
    }
    return best;
}

// chosen[n][t]
using Choices = std::vector<std::vector<std::size_t>>;

inline Choices gen_choices(const Covariates& cov, const std::vector<Taste>& tastes, Rng& rng,
                           bool with_noise = true) {
    if (cov.size() != tastes.size()) throw std::invalid_argument("gen_choices: size mismatch");
    Choices chosen(cov.size());
    for (std::size_t n = 0; n < cov.size(); ++n) {
        chosen[n].resize(cov[n].size());
        for (std::size_t t = 0; t < cov[n].size(); ++t) {
            std::size_t best = 0;
            double best_u = neg_inf;
            for (std::size_t j = 0; j < cov[n][t].size(); ++j) {
                double u = deterministic_utility(cov[n][t][j], tastes[n]);
                if (with_noise) u += gumbel_draw(rng);
                if (u > best_u) {
                    best_u = u;
                    best = j;
                }
            }
            chosen[n][t] = best;
        }
    }
    return chosen;
}

inline double measure_error_rate(const Covariates& cov, const std::vector<Taste>& tastes,
                                 const Choices& chosen) {
    std::size_t mismatches = 0, total = 0;
    for (std::size_t n = 0; n < cov.size(); ++n)
        for (std::size_t t = 0; t < cov[n].size(); ++t) {
            ++total;
            if (chosen[n][t] != deterministic_argmax(cov[n][t], tastes[n])) ++mismatches;
        }
    return total == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(total);
}

inline std::vector<AttributeSpec> attribute_specs() {
    return {{"ivtt", AttrRole::Generic, AttrConstraint::Free, 0.0},
            {"ovtt", AttrRole::Generic, AttrConstraint::Free, 0.0},
            {"cost", AttrRole::Cost, AttrConstraint::StrictlyNegative, 0.0}};
}

inline Dataset assemble_dataset(const Covariates& cov, const Choices& chosen) {
    Dataset data;
    data.attribute_specs = attribute_specs();
    for (std::size_t n = 0; n < cov.size(); ++n) {
        Individual ind;
        ind.id = std::to_string(n + 1);
        for (std::size_t t = 0; t < cov[n].size(); ++t) {
            ChoiceTask task;
            task.task_id = std::to_string(t + 1);
            task.chosen = chosen[n][t];
            for (std::size_t j = 0; j < cov[n][t].size(); ++j) {
                const auto& x = cov[n][t][j];
                task.alternatives.push_back(
                    {std::to_string(j + 1), true, {x.ivtt, x.ovtt, x.cost}});
            }
            ind.tasks.push_back(std::move(task));
        }
        data.individuals.push_back(std::move(ind));
    }
    validate(data);
    return data;
}

struct SimResult {
    Dataset data;
    Covariates covariates;
    std::vector<Taste> tastes;
    Choices chosen;
    double error_rate = 0.0;
};

inline SimResult simulate(const ExperimentSpec& exp, const SimConfig& cfg) {
    Rng rng(cfg.seed);
    SimResult r;
    r.tastes = gen_tastes(exp, cfg.N, rng);
    r.covariates = gen_covariates(cfg, rng);
    r.chosen = gen_choices(r.covariates, r.tastes, rng);
    r.error_rate = measure_error_rate(r.covariates, r.tastes, r.chosen);
    r.data = assemble_dataset(r.covariates, r.chosen);
    return r;
}

inline void write_truth_csv(const std::vector<Taste>& tastes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "individual_id,beta_ivtt,beta_ovtt,beta_cost\n";
    char buf[128];
    for (std::size_t n = 0; n < tastes.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", n + 1, tastes[n].ivtt,
                      tastes[n].ovtt, tastes[n].cost);
        out << buf;
    }
}

}  // namespace dpmnl::simgen

#endif
