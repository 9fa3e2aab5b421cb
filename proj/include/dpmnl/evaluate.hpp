#ifndef DPMNL_EVALUATE_HPP
#define DPMNL_EVALUATE_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dpm_em.hpp"
#include "lc_em.hpp"

namespace dpmnl {

// Point-mass mixture over real vectors (taste vectors or derived scalars).
struct DiscreteMixture {
    std::vector<std::vector<double>> points;
    std::vector<double> masses;

    void check() const {
        if (points.size() != masses.size()) throw std::invalid_argument("points/masses mismatch");
        double s = 0.0;
        for (double m : masses) {
            if (m < 0.0) throw std::invalid_argument("negative mass");
            s += m;
        }
        if (std::fabs(s - 1.0) > 1e-9) throw std::invalid_argument("masses must sum to 1");
        for (const auto& p : points)
            for (double v : p)
                if (!std::isfinite(v)) throw std::invalid_argument("non-finite support point");
    }

    DiscreteMixture marginal(std::size_t coord) const {
        DiscreteMixture m;
        m.masses = masses;
        for (const auto& p : points) m.points.push_back({p.at(coord)});
        return m;
    }
};

// Component mixture over MNL kernels; the common currency for prediction.
struct FittedMixture {
    UtilitySpec spec;
    std::vector<ParamVector> betas;
    std::vector<double> masses;
};

inline FittedMixture as_mixture(const DPMModel& model) {
    return {model.spec, model.betas, model.empirical_shares};
}

inline FittedMixture as_mixture(const LCModel& model) { return {model.spec, model.betas, model.pi}; }

inline double predictive_loglik(const FittedMixture& model, const Dataset& holdout,
                                std::size_t threads = 1) {
    const std::size_t K = model.betas.size();
    if (K == 0) throw std::invalid_argument("predictive_loglik: empty model");
    for (const auto& beta : model.betas)
        if (beta.size() != holdout.n_attributes())
            throw std::invalid_argument("predictive_loglik: attribute count mismatch");
    auto ll = loglik_matrix(model.spec, model.betas, holdout, threads);
    std::vector<double> lm(K);
    for (std::size_t k = 0; k < K; ++k)
        lm[k] = model.masses[k] > 0.0 ? std::log(model.masses[k]) : neg_inf;
    double obj = 0.0;
    std::vector<double> row(K);
    for (std::size_t n = 0; n < holdout.n_individuals(); ++n) {
        for (std::size_t k = 0; k < K; ++k) row[k] = lm[k] + ll[n * K + k];
        obj += log_sum_exp(row);
    }
    return obj;
}

struct CVReport {
    std::vector<double> fold_loglik;
    std::vector<bool> fold_ok;
    double mean = 0.0;
    bool complete = true;

    double stddev() const {
        std::size_t m = 0;
        double mu = 0.0;
        for (std::size_t i = 0; i < fold_loglik.size(); ++i)
            if (fold_ok[i]) {
                mu += fold_loglik[i];
                ++m;
            }
        if (m < 2) return 0.0;
        mu /= static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t i = 0; i < fold_loglik.size(); ++i)
            if (fold_ok[i]) ss += sq(fold_loglik[i] - mu);
        return std::sqrt(ss / static_cast<double>(m - 1));
    }
};

using ModelTrainer = std::function<FittedMixture(const Dataset&, std::uint64_t seed)>;

inline CVReport cross_validate(const Dataset& data, const ModelTrainer& train,
                               std::size_t n_folds, std::uint64_t seed) {
    auto folds = split_folds(data, n_folds, seed);
    CVReport report;
    double total = 0.0;
    std::size_t ok = 0;
    for (std::size_t f = 0; f < n_folds; ++f) {
        Dataset train_set = subset(data, [&](const std::string& id) { return folds.assignment.at(id) != f; });
        Dataset holdout = subset(data, [&](const std::string& id) { return folds.assignment.at(id) == f; });
        try {
            FittedMixture model = train(train_set, seed + f + 1);
            double ll = predictive_loglik(model, holdout);
            report.fold_loglik.push_back(ll);
            report.fold_ok.push_back(true);
            total += ll;
            ++ok;
        } catch (const std::exception&) {
            report.fold_loglik.push_back(neg_inf);
            report.fold_ok.push_back(false);
            report.complete = false;
        }
    }
    report.mean = ok > 0 ? total / static_cast<double>(ok) : neg_inf;
    return report;
}

// Per-component implicit attribute values (monetary units). In WTP space the
// non-cost coefficients already are the implicit values; in preference space
// they are beta_a / beta_cost. The cost coordinate is carried through last.
inline DiscreteMixture implicit_values(const FittedMixture& model) {
    DiscreteMixture mix;
    mix.masses = model.masses;
    const int c = model.spec.cost_index;
    if (c < 0) throw std::invalid_argument("implicit_values: model has no cost attribute");
    for (const auto& beta : model.betas) {
        std::vector<double> point;
        double bc = beta.values[static_cast<std::size_t>(c)];
        for (std::size_t a = 0; a < beta.size(); ++a) {
            if (static_cast<int>(a) == c) continue;
            if (model.spec.space == UtilitySpace::Wtp) {
                point.push_back(beta.values[a]);
            } else {
                if (bc == 0.0) throw std::runtime_error("implicit_values: zero cost coefficient");
                point.push_back(beta.values[a] / bc);
            }
        }
        point.push_back(bc);
        mix.points.push_back(std::move(point));
    }
    mix.check();
    return mix;
}

// Map a WTP-space mixture fitted on rescaled covariates back to original
// units: beta_a_orig = beta_a * c_a / c_cost, beta_cost_orig = beta_cost * c_cost,
// where c is the factor each column was multiplied by. Preference space:
// beta_a_orig = beta_a * c_a.
inline FittedMixture unscale_mixture(const FittedMixture& model,
                                     const std::vector<double>& scale_factors) {
    FittedMixture out = model;
    const int c = model.spec.cost_index;
    for (auto& beta : out.betas) {
        if (beta.size() != scale_factors.size())
            throw std::invalid_argument("unscale_mixture: scale factor length mismatch");
        for (std::size_t a = 0; a < beta.size(); ++a) {
            if (model.spec.space == UtilitySpace::Wtp) {
                if (static_cast<int>(a) == c)
                    beta.values[a] *= scale_factors[a];
                else
                    beta.values[a] *= scale_factors[a] / scale_factors[static_cast<std::size_t>(c)];
            } else {
                beta.values[a] *= scale_factors[a];
            }
        }
    }
    return out;
}

// Left-continuous generalized inverse of the weighted ECDF.
inline double weighted_quantile(const DiscreteMixture& mixture, double p) {
    mixture.check();
    if (mixture.points.empty()) throw std::invalid_argument("weighted_quantile: empty mixture");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("weighted_quantile: p must be in (0,1)");
    std::vector<std::pair<double, double>> pm;
    for (std::size_t i = 0; i < mixture.points.size(); ++i) {
        if (mixture.points[i].size() != 1)
            throw std::invalid_argument("weighted_quantile: scalar mixture required");
        pm.emplace_back(mixture.points[i][0], mixture.masses[i]);
    }
    std::sort(pm.begin(), pm.end());
    double cum = 0.0;
    for (const auto& [x, m] : pm) {
        cum += m;
        if (cum >= p - 1e-15) return x;
    }
    return pm.back().first;
}

struct WtpSummaryRow {
    std::string attribute;
    std::map<int, double> percentiles;
    double iqr = 0.0;
    double idr = 0.0;
};

inline std::vector<WtpSummaryRow> summarize_wtp(const FittedMixture& model,
                                                const std::vector<std::string>& attribute_names,
                                                const std::vector<int>& percentiles = {10, 25, 50,
                                                                                       75, 90}) {
    auto mix = implicit_values(model);
    std::vector<WtpSummaryRow> rows;
    for (std::size_t coord = 0; coord < mix.points.front().size(); ++coord) {
        WtpSummaryRow row;
        row.attribute = coord < attribute_names.size() ? attribute_names[coord]
                                                       : "coord" + std::to_string(coord);
        auto marg = mix.marginal(coord);
        for (int p : percentiles) row.percentiles[p] = weighted_quantile(marg, p / 100.0);
        row.iqr = weighted_quantile(marg, 0.75) - weighted_quantile(marg, 0.25);
        row.idr = weighted_quantile(marg, 0.90) - weighted_quantile(marg, 0.10);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<std::vector<double>> sample_mixture(const DiscreteMixture& mixture,
                                                       std::size_t n, Rng& rng) {
    mixture.check();
    if (mixture.points.empty()) throw std::invalid_argument("sample_mixture: empty mixture");
    std::discrete_distribution<std::size_t> cat(mixture.masses.begin(), mixture.masses.end());
    std::vector<std::vector<double>> draws(n);
    for (auto& d : draws) d = mixture.points[cat(rng)];
    return draws;
}

struct Kde1D {
    std::vector<double> grid;
    std::vector<double> density;
};

inline Kde1D kde(const std::vector<double>& draws, double bandwidth,
                 const std::vector<double>& grid) {
    if (draws.empty()) throw std::invalid_argument("kde: empty draws");
    if (bandwidth <= 0.0) throw std::invalid_argument("kde: bandwidth must be > 0");
    Kde1D out;
    out.grid = grid;
    out.density.resize(grid.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(draws.size()) * bandwidth * std::sqrt(2.0 * M_PI));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double x : draws) s += std::exp(-0.5 * sq((grid[g] - x) / bandwidth));
        out.density[g] = norm * s;
    }
    return out;
}

struct Kde2D {
    std::vector<double> xs, ys;
    std::vector<std::vector<double>> density;  // density[ix][iy]
};

// product normal kernel with a shared bandwidth
inline Kde2D kde2d(const std::vector<std::array<double, 2>>& draws, double bandwidth,
                   const std::vector<double>& xs, const std::vector<double>& ys) {
    if (draws.empty()) throw std::invalid_argument("kde2d: empty draws");
    if (bandwidth <= 0.0) throw std::invalid_argument("kde2d: bandwidth must be > 0");
    Kde2D out;
    out.xs = xs;
    out.ys = ys;
    out.density.assign(xs.size(), std::vector<double>(ys.size(), 0.0));
    const double norm =
        1.0 / (static_cast<double>(draws.size()) * 2.0 * M_PI * bandwidth * bandwidth);
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
        for (std::size_t iy = 0; iy < ys.size(); ++iy) {
            double s = 0.0;
            for (const auto& d : draws)
                s += std::exp(-0.5 * (sq((xs[ix] - d[0]) / bandwidth) + sq((ys[iy] - d[1]) / bandwidth)));
            out.density[ix][iy] = norm * s;
        }
    return out;
}

// strict local maxima over the interior 8-neighbourhood, strongest first
inline std::vector<std::array<double, 3>> kde2d_local_modes(const Kde2D& k) {
    std::vector<std::array<double, 3>> modes;  // {x, y, density}
    for (std::size_t i = 1; i + 1 < k.xs.size(); ++i)
        for (std::size_t j = 1; j + 1 < k.ys.size(); ++j) {
            double v = k.density[i][j];
            bool peak = true;
            for (int di = -1; di <= 1 && peak; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (k.density[i + di][j + dj] >= v) {
                        peak = false;
                        break;
                    }
                }
            if (peak) modes.push_back({k.xs[i], k.ys[j], v});
        }
    std::sort(modes.begin(), modes.end(),
              [](const auto& a, const auto& b) { return a[2] > b[2]; });
    return modes;
}

struct EcdfStep {
    double x = 0.0;
    double cumulative = 0.0;
};

inline std::vector<EcdfStep> export_ecdf(const DiscreteMixture& mixture) {
    mixture.check();
    std::map<double, double> mass_at;
    for (std::size_t i = 0; i < mixture.points.size(); ++i) {
        if (mixture.points[i].size() != 1)
            throw std::invalid_argument("export_ecdf: scalar mixture required");
        mass_at[mixture.points[i][0]] += mixture.masses[i];
    }
    std::vector<EcdfStep> steps;
    double cum = 0.0;
    for (const auto& [x, m] : mass_at) {
        cum += m;
        steps.push_back({x, cum});
    }
    if (!steps.empty()) steps.back().cumulative = 1.0;
    return steps;
}

inline void write_cv_csv(const CVReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "fold,predictive_loglik,ok\n";
    char buf[96];
    for (std::size_t f = 0; f < report.fold_loglik.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%d\n", f, report.fold_loglik[f],
                      report.fold_ok[f] ? 1 : 0);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6f,%d\n", report.mean, report.complete ? 1 : 0);
    out << buf;
}

inline void write_wtp_csv(const std::vector<WtpSummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "attribute,p10,p25,p50,p75,p90,iqr,idr\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      r.attribute.c_str(), r.percentiles.at(10), r.percentiles.at(25),
                      r.percentiles.at(50), r.percentiles.at(75), r.percentiles.at(90), r.iqr,
                      r.idr);
        out << buf;
    }
}

}  // namespace dpmnl

#endif
