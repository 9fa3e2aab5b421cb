#ifndef DPMNL_STICK_BREAKING_HPP
#define DPMNL_STICK_BREAKING_HPP

#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace dpmnl {

struct StickWeights {
    std::vector<double> eta;  // length K-1, entries in (0,1)
    std::vector<double> pi;   // length K, simplex
    std::size_t K = 0;
};

// Gamma prior on the concentration parameter, shape-scale convention:
// mode = (shape - 1) * scale. The default Gamma(2,2) has mode 2.
struct ConcentrationPrior {
    double shape = 2.0;
    double scale = 2.0;

    double log_density(double alpha) const {
        if (alpha <= 0.0) return neg_inf;
        return (shape - 1.0) * std::log(alpha) - alpha / scale
               - std::lgamma(shape) - shape * std::log(scale);
    }

    double d_log_density(double alpha) const { return (shape - 1.0) / alpha - 1.0 / scale; }

    double mode() const { return std::max(0.0, (shape - 1.0) * scale); }
};

struct GDParams {
    std::vector<double> a;  // length K-1
    std::vector<double> b;  // length K-1

    static GDParams gem(double alpha, std::size_t K) {
        if (alpha <= 0.0) throw std::invalid_argument("gem: alpha must be > 0");
        GDParams p;
        p.a.assign(K - 1, 1.0);
        p.b.assign(K - 1, alpha);
        return p;
    }
};

inline StickWeights gem_weights(const std::vector<double>& eta, std::size_t K) {
    if (eta.size() + 1 != K) throw std::invalid_argument("gem_weights: eta must have length K-1");
    for (double e : eta)
        if (!(e > 0.0 && e < 1.0)) throw std::domain_error("gem_weights: eta entries must be in (0,1)");
    StickWeights w;
    w.eta = eta;
    w.K = K;
    w.pi.resize(K);
    double remaining = 1.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        w.pi[k] = eta[k] * remaining;
        remaining *= 1.0 - eta[k];
    }
    double sum = std::accumulate(w.pi.begin(), w.pi.end() - 1, 0.0);
    w.pi[K - 1] = std::max(0.0, 1.0 - sum);
    return w;
}

// P(q = k | alpha) = alpha^{k-1} / (1+alpha)^k for k < K, residual at K.
inline std::vector<double> log_component_prior_probs(double alpha, std::size_t K) {
    if (alpha <= 0.0) throw std::invalid_argument("component_prior_probs: alpha must be > 0");
    if (K < 2) throw std::invalid_argument("component_prior_probs: K must be >= 2");
    const double la = std::log(alpha), l1a = std::log1p(alpha);
    std::vector<double> lp(K);
    for (std::size_t k = 0; k + 1 < K; ++k)
        lp[k] = static_cast<double>(k) * la - static_cast<double>(k + 1) * l1a;
    lp[K - 1] = static_cast<double>(K - 1) * (la - l1a);  // geometric-series residual
    return lp;
}

inline std::vector<double> component_prior_probs(double alpha, std::size_t K) {
    if (alpha <= 0.0) throw std::invalid_argument("component_prior_probs: alpha must be > 0");
    if (K < 2) throw std::invalid_argument("component_prior_probs: K must be >= 2");
    std::vector<double> p(K);
    const double r = alpha / (1.0 + alpha);
    p[0] = 1.0 / (1.0 + alpha);
    for (std::size_t k = 1; k + 1 < K; ++k) p[k] = p[k - 1] * r;
    double sum = std::accumulate(p.begin(), p.end() - 1, 0.0);
    p[K - 1] = std::max(0.0, 1.0 - sum);  // exact residual
    return p;
}

// joint density of K-1 iid Beta(1, alpha) stick fractions
inline double log_eta_density(const std::vector<double>& eta, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("log_eta_density: alpha must be > 0");
    double lp = static_cast<double>(eta.size()) * std::log(alpha);
    for (double e : eta) {
        if (e < 0.0 || e > 1.0) throw std::domain_error("log_eta_density: eta outside [0,1]");
        if (e == 1.0) {
            if (alpha < 1.0) throw std::domain_error("log_eta_density: density diverges at eta=1");
            if (alpha > 1.0) lp = neg_inf;
            continue;  // alpha == 1: Beta(1,1) contributes 0
        }
        lp += (alpha - 1.0) * std::log1p(-e);
    }
    return lp;
}

// log mass of the generalised-Dirichlet-multinomial at a count vector
inline double gdm_log_marginal(const std::vector<std::int64_t>& counts, const GDParams& params) {
    const std::size_t K = counts.size();
    if (params.a.size() != K - 1 || params.b.size() != K - 1)
        throw std::invalid_argument("gdm_log_marginal: parameter length must be K-1");
    std::int64_t N = 0;
    for (auto c : counts) {
        if (c < 0) throw std::domain_error("gdm_log_marginal: negative count");
        N += c;
    }
    if (N == 0) return 0.0;
    // m_k = sum_{k' >= k} x_{k'}
    std::vector<double> m(K + 1, 0.0);
    for (std::size_t k = K; k-- > 0;) m[k] = m[k + 1] + static_cast<double>(counts[k]);
    double lp = std::lgamma(static_cast<double>(N) + 1.0);
    for (auto c : counts) lp -= std::lgamma(static_cast<double>(c) + 1.0);
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double a = params.a[k], b = params.b[k], x = static_cast<double>(counts[k]);
        lp += std::lgamma(a + x) + std::lgamma(b + m[k + 1]) + std::lgamma(a + b)
              - std::lgamma(a) - std::lgamma(b) - std::lgamma(a + b + m[k]);
    }
    return lp;
}

// Draws from one realisation of a truncated stick-breaking DP with base G0.
inline std::vector<double> sample_stick_dp(double alpha,
                                           const std::function<double(Rng&)>& base_sampler,
                                           std::size_t K, std::size_t n_draws, Rng& rng) {
    if (alpha <= 0.0) throw std::invalid_argument("sample_stick_dp: alpha must be > 0");
    std::vector<double> atoms(K);
    for (auto& a : atoms) a = base_sampler(rng);
    std::vector<double> eta(K - 1);
    for (auto& e : eta) {
        // Beta(1, alpha) via inverse CDF: 1 - U^{1/alpha}
        std::uniform_real_distribution<double> u01(std::numeric_limits<double>::min(), 1.0);
        double e_raw = 1.0 - std::pow(u01(rng), 1.0 / alpha);
        e = std::clamp(e_raw, 1e-300, 1.0 - 1e-16);
    }
    auto w = gem_weights(eta, K);
    std::discrete_distribution<std::size_t> cat(w.pi.begin(), w.pi.end());
    std::vector<double> draws(n_draws);
    for (auto& d : draws) d = atoms[cat(rng)];
    return draws;
}

// Chinese Restaurant process partition of {0..N-1}; returns cluster labels.
inline std::vector<std::size_t> sample_crp_partition(double alpha, std::size_t N, Rng& rng) {
    if (alpha <= 0.0 || N == 0) throw std::invalid_argument("sample_crp_partition: need alpha > 0, N >= 1");
    std::vector<std::size_t> labels(N);
    std::vector<double> sizes;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t n = 0; n < N; ++n) {
        double total = alpha + static_cast<double>(n);
        double u = u01(rng) * total;
        std::size_t k = 0;
        for (; k < sizes.size(); ++k) {
            if (u < sizes[k]) break;
            u -= sizes[k];
        }
        if (k == sizes.size()) sizes.push_back(0.0);  // new table with prob alpha/total
        sizes[k] += 1.0;
        labels[n] = k;
    }
    return labels;
}

// E[#clusters] = sum_{n=1}^{N} alpha / (alpha + n - 1)
inline double expected_occupied_components(double alpha, std::size_t N) {
    if (alpha <= 0.0) throw std::invalid_argument("expected_occupied_components: alpha must be > 0");
    double s = 0.0;
    for (std::size_t n = 1; n <= N; ++n) s += alpha / (alpha + static_cast<double>(n - 1));
    return s;
}

}  // namespace dpmnl

#endif
