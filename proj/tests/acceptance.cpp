// Acceptance suite: one pass/fail line per criterion. argv[1] = path to the CLI binary.
#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dpmnl/dpm_em.hpp"
#include "dpmnl/evaluate.hpp"
#include "dpmnl/lc_em.hpp"
#include "dpmnl/simgen.hpp"

using namespace dpmnl;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
std::size_t hw_threads() { return std::max<std::size_t>(1, std::thread::hardware_concurrency()); }

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b) {
    std::vector<std::string> fa, fb;
    for (const auto& e : fs::directory_iterator(a)) fa.push_back(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) fb.push_back(e.path().filename().string());
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb || fa.empty()) return false;
    for (const auto& name : fa)
        if (slurp(a / name) != slurp(b / name)) return false;
    return true;
}

fs::path tmp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("accept_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// parse one named numeric field from a two-line csv (header + one data row)
double csv_field(const fs::path& file, const std::string& field) {
    std::ifstream in(file);
    std::string header, row;
    if (!std::getline(in, header) || !std::getline(in, row))
        throw std::runtime_error("bad csv " + file.string());
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ',')) out.push_back(c);
        return out;
    };
    auto h = split(header), r = split(row);
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] == field) return std::stod(r[i]);
    throw std::runtime_error("field " + field + " not in " + file.string());
}

Dataset sim(const std::string& exp, std::size_t N, std::size_t T, std::uint64_t seed) {
    simgen::SimConfig cfg;
    cfg.N = N;
    cfg.T = T;
    cfg.seed = seed;
    return simgen::simulate(simgen::experiment_spec(exp), cfg).data;
}

DPMModel fit_dpm_desk(const Dataset& data, std::size_t K, std::uint64_t seed,
                      std::size_t max_iter = 300) {
    auto spec = make_utility_spec(UtilitySpace::Wtp, data);
    DPMConfig cfg;
    cfg.K = K;
    cfg.seed = seed;
    cfg.threads = hw_threads();
    cfg.max_iter = max_iter;
    return fit_dpm(data, spec, cfg);
}

double mnl_loglik(const Dataset& data) {
    auto spec = make_utility_spec(UtilitySpace::Wtp, data);
    auto transforms = transforms_from_specs(data.attribute_specs);
    auto fit = fit_mnl(spec, data, prior_mode(no_prior(transforms.size()), transforms));
    return fit.objective;
}

std::vector<std::array<double, 2>> taste_draws(const DPMModel& model, std::size_t n,
                                               std::uint64_t seed) {
    auto values = implicit_values(as_mixture(model));  // (ivtt, ovtt, cost)
    Rng rng(seed);
    auto raw = sample_mixture(values, n, rng);
    std::vector<std::array<double, 2>> out;
    for (const auto& d : raw) out.push_back({d[0], d[1]});
    return out;
}

Kde2D kde_grid(const std::vector<std::array<double, 2>>& draws, double x0, double x1, double y0,
               double y1, double step) {
    std::vector<double> xs, ys;
    for (double x = x0; x <= x1 + 1e-9; x += step) xs.push_back(x);
    for (double y = y0; y <= y1 + 1e-9; y += step) ys.push_back(y);
    return kde2d(draws, 2.5, xs, ys);
}

struct Criterion {
    int id;
    std::string label;
    std::function<bool()> check;
};

bool criterion_1() {
    auto out = tmp_dir("ic");
    if (run(g_cli + " summarize --ic-k 6 --ic-p 5 --ic-n 455 --ic-loglik -1457.6 --out " +
            out.string()) != 0)
        return false;
    double aic6 = csv_field(out / "information_criteria.csv", "aic");
    double bic6 = csv_field(out / "information_criteria.csv", "bic");
    if (run(g_cli + " summarize --ic-k 14 --ic-p 5 --ic-n 455 --ic-loglik -1384.2 --out " +
            out.string()) != 0)
        return false;
    double aic14 = csv_field(out / "information_criteria.csv", "aic");
    double bic14 = csv_field(out / "information_criteria.csv", "bic");
    // the K=14 log-likelihood is quoted to one decimal; the tolerance covers
    // one reported decimal plus the propagated input rounding
    return std::fabs(aic6 - 2985.2) < 0.05 && std::fabs(bic6 - 3129.4) < 0.05 &&
           std::fabs(aic14 - 2934.3) < 0.15 && std::fabs(bic14 - 3276.3) < 0.15;
}

bool criterion_2() {
    auto out = tmp_dir("eoc");
    if (run(g_cli + " summarize --expected-alpha 11.7 --expected-n 455 --out " + out.string()) != 0)
        return false;
    double e = csv_field(out / "expected_components.csv", "expected_components");
    return std::lround(e) == 44 && std::lround(expected_occupied_components(11.7, 455)) == 44;
}

bool criterion_3() {
    for (const char* id : {"I", "II", "III", "IV"}) {
        simgen::SimConfig cfg;
        cfg.N = 2000;
        cfg.T = 8;
        cfg.seed = 20;
        auto r = simgen::simulate(simgen::experiment_spec(id), cfg);
        std::printf("    experiment %s error rate %.4f\n", id, r.error_rate);
        if (r.error_rate < 0.05 || r.error_rate > 0.09) return false;
    }
    return true;
}

bool criterion_4() {
    auto data = sim("I", 1000, 8, 101);
    auto model = fit_dpm_desk(data, 30, 202);
    auto draws = taste_draws(model, 2000, 303);
    auto k = kde_grid(draws, 0.0, 20.0, 5.0, 25.0, 0.25);
    double best = -1.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k.xs.size(); ++i)
        for (std::size_t j = 0; j < k.ys.size(); ++j)
            if (k.density[i][j] > best) {
                best = k.density[i][j];
                mx = k.xs[i];
                my = k.ys[j];
            }
    double dist = std::sqrt(sq(mx - 10.0) + sq(my - 15.0));
    double mix_ll = predictive_loglik(as_mixture(model), data, hw_threads());
    double mnl_ll = mnl_loglik(data);
    std::size_t occ = occupied_components(model);
    std::printf("    kde mode (%.2f, %.2f) dist %.3f; mixture LL %.1f vs MNL %.1f; occupied %zu/30\n",
                mx, my, dist, mix_ll, mnl_ll, occ);
    return dist <= 2.5 && mix_ll > mnl_ll && occ < 30;
}

bool criterion_5() {
    auto data = sim("III", 1000, 8, 111);
    auto model = fit_dpm_desk(data, 30, 222);
    auto draws = taste_draws(model, 4000, 333);
    auto k = kde_grid(draws, 0.0, 18.0, 2.0, 24.0, 0.25);
    auto modes = kde2d_local_modes(k);
    bool near_a = false, near_b = false;
    for (const auto& m : modes) {
        if (std::sqrt(sq(m[0] - 12.0) + sq(m[1] - 16.0)) <= 3.0) near_a = true;
        if (std::sqrt(sq(m[0] - 6.0) + sq(m[1] - 10.0)) <= 3.0) near_b = true;
    }
    std::printf("    found %zu local modes; strongest (%.2f, %.2f); near(12,16)=%d near(6,10)=%d\n",
                modes.size(), modes.empty() ? 0.0 : modes[0][0],
                modes.empty() ? 0.0 : modes[0][1], near_a, near_b);
    return near_a && near_b;
}

bool criterion_6() {
    auto data = sim("I", 400, 8, 505);
    auto spec = make_utility_spec(UtilitySpace::Wtp, data);
    auto transforms = transforms_from_specs(data.attribute_specs);

    LCConfig lc_cfg;
    lc_cfg.seed = 61;
    lc_cfg.threads = hw_threads();
    lc_cfg.max_iter = 200;
    auto sw = sweep(data, spec, 1, 5, lc_cfg);
    std::size_t k_bic = sw.bic_optimal()->K;

    ModelTrainer train_mnl = [&](const Dataset& train, std::uint64_t) {
        auto fit = fit_mnl(spec, train, prior_mode(no_prior(3), transforms));
        return FittedMixture{spec, {fit.beta}, {1.0}};
    };
    ModelTrainer train_lc = [&](const Dataset& train, std::uint64_t s) {
        LCConfig c = lc_cfg;
        c.seed = s;
        return as_mixture(fit_lc(train, spec, k_bic, c));
    };
    ModelTrainer train_dpm = [&](const Dataset& train, std::uint64_t s) {
        DPMConfig c;
        c.K = 15;
        c.seed = s;
        c.threads = hw_threads();
        c.max_iter = 250;
        return as_mixture(fit_dpm(train, spec, c));
    };

    const std::size_t folds = 10;
    const std::uint64_t seed = 77;
    auto cv_mnl = cross_validate(data, train_mnl, folds, seed);
    auto cv_lc = cross_validate(data, train_lc, folds, seed);
    auto cv_dpm = cross_validate(data, train_dpm, folds, seed);
    if (!cv_mnl.complete || !cv_lc.complete || !cv_dpm.complete) return false;

    auto paired_margin = [&](const CVReport& a, const CVReport& b) {
        // mean(a-b) plus one cross-fold standard error of the difference
        double m = 0.0;
        for (std::size_t f = 0; f < folds; ++f) m += (a.fold_loglik[f] - b.fold_loglik[f]) / folds;
        double ss = 0.0;
        for (std::size_t f = 0; f < folds; ++f)
            ss += sq(a.fold_loglik[f] - b.fold_loglik[f] - m);
        double se = std::sqrt(ss / (folds - 1.0) / folds);
        return std::pair<double, double>(m, se);
    };
    auto [d_dl, se_dl] = paired_margin(cv_dpm, cv_lc);
    auto [d_lm, se_lm] = paired_margin(cv_lc, cv_mnl);
    std::printf("    mean CV LL: dpm %.2f, lc(K=%zu) %.2f, mnl %.2f; gaps %.2f+-%.2f, %.2f+-%.2f\n",
                cv_dpm.mean, k_bic, cv_lc.mean, cv_mnl.mean, d_dl, se_dl, d_lm, se_lm);
    return d_dl >= -se_dl && d_lm >= -se_lm;
}

bool criterion_7() {
    Rng rng(401);
    std::vector<CoefTransform> ts = {{Transform::Identity, 0.0},
                                     {Transform::NegExp, 0.0},
                                     {Transform::BoundedNegative, -0.001}};
    std::uniform_real_distribution<double> uu(-1.0, 1.0), uw(0.0, 1.0), ux(0.1, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset data;
        data.attribute_specs = {{"x1", AttrRole::Generic, AttrConstraint::Free, 0.0},
                                {"x2", AttrRole::Generic, AttrConstraint::StrictlyNegative, 0.0},
                                {"cost", AttrRole::Cost, AttrConstraint::BoundedNegative, -0.001}};
        for (int n = 0; n < 4; ++n) {
            Individual ind;
            ind.id = std::to_string(n);
            for (int t = 0; t < 2; ++t) {
                ChoiceTask task;
                task.task_id = std::to_string(t);
                for (int j = 0; j < 3; ++j)
                    task.alternatives.push_back(
                        {std::to_string(j), true, {ux(rng), ux(rng), ux(rng)}});
                task.chosen = static_cast<std::size_t>(rng() % 3);
                ind.tasks.push_back(std::move(task));
            }
            data.individuals.push_back(std::move(ind));
        }
        UtilitySpec spec = (rep % 2 == 0) ? UtilitySpec{UtilitySpace::Preference, -1}
                                          : UtilitySpec{UtilitySpace::Wtp, 2};
        PriorSpec prior = (rep % 3 == 0) ? no_prior(3) : default_base_measure(ts, 5.0);
        CaseWeights w(4);
        for (auto& x : w) x = uw(rng);
        std::vector<double> u = {uu(rng), uu(rng), uu(rng)};
        auto beta = from_unconstrained(u, ts);
        auto grad = weighted_map_gradient(spec, beta, data, w, prior);
        const double h = 1e-5;
        for (std::size_t i = 0; i < 3; ++i) {
            auto up = u, um = u;
            up[i] += h;
            um[i] -= h;
            double fd = (weighted_map_objective(spec, from_unconstrained(up, ts), data, w, prior) -
                         weighted_map_objective(spec, from_unconstrained(um, ts), data, w, prior)) /
                        (2.0 * h);
            double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-4});
            if (std::fabs(grad[i] - fd) / denom >= 1e-6) {
                std::printf("    gradient mismatch rep %d coord %zu: %.10g vs %.10g\n", rep, i,
                            grad[i], fd);
                return false;
            }
        }
    }
    return true;
}

bool criterion_8() {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        auto data = sim("I", 30, 4, 900 + seed);
        auto spec = make_utility_spec(UtilitySpace::Wtp, data);
        auto transforms = transforms_from_specs(data.attribute_specs);
        DPMConfig cfg;
        cfg.K = 5;
        cfg.seed = seed;
        auto base = cfg.resolve_base_measure(transforms);
        auto betas = init_train(spec, data, cfg.K, seed, transforms, cfg);
        double alpha = cfg.alpha_prior.mode();
        for (int iter = 0; iter < 12; ++iter) {
            auto omega = e_step(alpha, betas, spec, data);
            double q_before = surrogate_Q(alpha, betas, omega, spec, data, base, cfg.alpha_prior);
            double alpha_new = m_step_alpha(omega, cfg.alpha_prior, alpha);
            auto betas_new = m_step_betas(omega, spec, data, base, betas, cfg);
            double q_after =
                surrogate_Q(alpha_new, betas_new, omega, spec, data, base, cfg.alpha_prior);
            if (q_after < q_before - 1e-8 * std::fabs(q_before)) {
                std::printf("    M-step descent at seed %llu iter %d: %.10f -> %.10f\n",
                            static_cast<unsigned long long>(seed), iter, q_before, q_after);
                return false;
            }
            alpha = alpha_new;
            betas = betas_new;
        }
        LCConfig lcfg;
        lcfg.seed = seed;
        lcfg.max_iter = 60;
        auto lc = fit_lc(data, spec, 3, lcfg);
        for (std::size_t i = 1; i < lc.loglik_trace.size(); ++i)
            if (lc.loglik_trace[i] <
                lc.loglik_trace[i - 1] - 1e-9 * std::fabs(lc.loglik_trace[i - 1])) {
                std::printf("    LC log-likelihood decreased at seed %llu\n",
                            static_cast<unsigned long long>(seed));
                return false;
            }
    }
    return true;
}

bool criterion_9() {
    Responsibilities zero(5, 6);
    bool a = std::fabs(m_step_alpha(zero, ConcentrationPrior{2.0, 2.0}, 1.0) - 2.0) <= 1e-3;
    bool b = std::fabs(gdm_log_marginal({1, 1}, GDParams::gem(1.0, 2)) - std::log(1.0 / 3.0)) <=
             1e-10;
    auto p = component_prior_probs(1.0, 3);
    bool c = p[0] == 0.5 && p[1] == 0.25 && p[2] == 0.25;
    if (!a || !b || !c) std::printf("    analytic oracle flags: alpha=%d gdm=%d probs=%d\n", a, b, c);
    return a && b && c;
}

bool criterion_10() {
    auto base = [](Rng& r) {
        std::normal_distribution<double> z(0.0, 1.0);
        return z(r);
    };
    const std::size_t reps = 200, n = 10000;
    for (double alpha : {1.0, 10.0}) {
        Rng rng(7000 + static_cast<std::uint64_t>(alpha));
        double mean = 0.0, m2 = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            auto draws = sample_stick_dp(alpha, base, 150, n, rng);
            std::size_t neg = 0;
            for (double d : draws) neg += d <= 0.0 ? 1 : 0;
            double mass = static_cast<double>(neg) / static_cast<double>(n);
            mean += mass;
            m2 += mass * mass;
        }
        mean /= reps;
        double var = m2 / reps - mean * mean;
        double se = std::sqrt(var / reps);
        double target_var = 0.25 / (alpha + 1.0);
        std::printf("    alpha %.0f: mean mass %.4f (se %.4f), var %.5f vs %.5f\n", alpha, mean,
                    se, var, target_var);
        if (std::fabs(mean - 0.5) >= 3.0 * se) return false;
        if (std::fabs(var - target_var) / target_var >= 0.25) return false;
    }
    // CRP cluster-count mean against the analytic expectation
    Rng rng(7100);
    const double alpha = 3.0;
    const std::size_t N = 100, creps = 10000;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < creps; ++r) {
        auto labels = sample_crp_partition(alpha, N, rng);
        double k = static_cast<double>(*std::max_element(labels.begin(), labels.end()) + 1);
        mean += k;
        m2 += k * k;
    }
    mean /= creps;
    double se = std::sqrt((m2 / creps - mean * mean) / creps);
    double expect = expected_occupied_components(alpha, N);
    std::printf("    crp mean clusters %.3f vs %.3f (se %.3f)\n", mean, expect, se);
    return std::fabs(mean - expect) < 3.0 * se;
}

bool criterion_11() {
    // large enough that the O(1/N) reparameterization term in the MAP
    // objective sits well inside the 1e-3 equivalence tolerance
    auto data = sim("I", 2000, 8, 808);
    auto spec = make_utility_spec(UtilitySpace::Wtp, data);
    auto transforms = transforms_from_specs(data.attribute_specs);
    auto mnl = fit_mnl(spec, data, prior_mode(no_prior(3), transforms), 1e-8, 1000);

    LCConfig lcfg;
    lcfg.seed = 5;
    auto lc = fit_lc(data, spec, 1, lcfg);
    for (std::size_t a = 0; a < 3; ++a)
        if (std::fabs(lc.betas[0].values[a] - mnl.beta.values[a]) >= 1e-6) {
            std::printf("    lc K=1 coef %zu: %.8f vs %.8f\n", a, lc.betas[0].values[a],
                        mnl.beta.values[a]);
            return false;
        }

    DPMConfig dcfg;
    dcfg.K = 1;
    dcfg.seed = 5;
    dcfg.prior_scale = 1e6;
    dcfg.inner_tol = 1e-9;
    dcfg.inner_max_iter = 1000;
    dcfg.threads = hw_threads();
    auto dpm = fit_dpm(data, spec, dcfg);
    for (std::size_t a = 0; a < 3; ++a)
        if (std::fabs(dpm.betas[0].values[a] - mnl.beta.values[a]) >= 1e-3) {
            std::printf("    dpm K=1 coef %zu: %.6f vs %.6f\n", a, dpm.betas[0].values[a],
                        mnl.beta.values[a]);
            return false;
        }
    return true;
}

bool criterion_12() {
    auto a = tmp_dir("det_a"), b = tmp_dir("det_b");
    auto run2 = [&](const std::string& args_a, const std::string& args_b) {
        if (run(g_cli + " " + args_a) > 1) return false;  // non-convergence exit 4 is acceptable
        if (run(g_cli + " " + args_b) > 1) return false;
        return true;
    };
    struct Step {
        std::string name, args_a, args_b;
    };
    std::string sim_a = " simulate --experiment I --n 40 --t 4 --seed 3 --out ";
    std::vector<Step> steps = {
        {"simulate", sim_a + a.string(), sim_a + b.string()},
        {"estimate-mnl", " estimate --model mnl --data " + (a / "dataset.csv").string() +
                             " --out " + (a / "mnl").string(),
         " estimate --model mnl --data " + (b / "dataset.csv").string() + " --out " +
             (b / "mnl").string()},
        {"estimate-dpm-threads",
         " estimate --model dpm --truncation 8 --seed 9 --max-iter 60 --threads 1 --data " +
             (a / "dataset.csv").string() + " --out " + (a / "dpm").string(),
         " estimate --model dpm --truncation 8 --seed 9 --max-iter 60 --threads 4 --data " +
             (b / "dataset.csv").string() + " --out " + (b / "dpm").string()},
        {"estimate-lc-sweep",
         " estimate --model lc --k-min 1 --k-max 2 --seed 9 --max-iter 60 --data " +
             (a / "dataset.csv").string() + " --out " + (a / "lc").string(),
         " estimate --model lc --k-min 1 --k-max 2 --seed 9 --max-iter 60 --data " +
             (b / "dataset.csv").string() + " --out " + (b / "lc").string()},
        {"crossval", " crossval --model mnl --folds 4 --seed 5 --data " +
                         (a / "dataset.csv").string() + " --out " + (a / "cv").string(),
         " crossval --model mnl --folds 4 --seed 5 --data " + (b / "dataset.csv").string() +
             " --out " + (b / "cv").string()},
        {"dp-demo", " dp-demo --alpha 1 10 100 1000 --seed 11 --out " + (a / "demo").string(),
         " dp-demo --alpha 1 10 100 1000 --seed 11 --out " + (b / "demo").string()},
        {"summarize", " summarize --model-json " + (a / "dpm" / "model.json").string() +
                          " --attribute-names ivtt ovtt cost --out " + (a / "summ").string(),
         " summarize --model-json " + (b / "dpm" / "model.json").string() +
             " --attribute-names ivtt ovtt cost --out " + (b / "summ").string()},
    };
    for (const auto& s : steps) {
        if (!run2(s.args_a, s.args_b)) {
            std::printf("    command failed: %s\n", s.name.c_str());
            return false;
        }
    }
    // re-run the whole A side a second time into fresh dirs and compare bytes
    for (const auto& sub : {"", "mnl", "dpm", "lc", "cv", "demo", "summ"}) {
        fs::path pa = a / sub, pb = b / sub;
        if (!dirs_identical(pa, pb)) {
            std::printf("    output mismatch under %s\n", sub[0] ? sub : "(root)");
            return false;
        }
    }
    // usage-error exit code check rides along
    if (run(g_cli + " simulate --experiment V --out " + a.string()) == 0) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <cli-binary>\n");
        return 2;
    }
    g_cli = argv[1];

    std::vector<Criterion> criteria = {
        {1, "information-criteria arithmetic (K=6 and K=14 rows)", criterion_1},
        {2, "expected occupied components rounds to 44 at (11.7, 455)", criterion_2},
        {3, "simulation error rates in [0.05, 0.09] for experiments I-IV", criterion_3},
        {4, "experiment I recovery: KDE mode, mixture fit, shrinkage", criterion_4},
        {5, "experiment III recovery: two KDE modes near the taste centers", criterion_5},
        {6, "cross-validated ordering dpm >= lc >= mnl within one SE", criterion_6},
        {7, "gradient matches finite differences on 20 random instances", criterion_7},
        {8, "M-step ascent of Q and monotone LC log-likelihood on 5 fixtures", criterion_8},
        {9, "analytic oracles: alpha prior mode, gdm mass, prior probabilities", criterion_9},
        {10, "DP law checks: mean/variance of G(A) and CRP cluster counts", criterion_10},
        {11, "degenerate-model equivalence with plain MNL", criterion_11},
        {12, "CLI determinism: byte-identical reruns, thread-count independence", criterion_12},
    };

    std::vector<int> only;
    for (int i = 2; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        bool ok = false;
        try {
            ok = c.check();
        } catch (const std::exception& e) {
            std::printf("    exception: %s\n", e.what());
        }
        std::printf("criterion %2d: %s — %s\n", c.id, ok ? "PASS" : "FAIL", c.label.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
