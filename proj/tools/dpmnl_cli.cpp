// Batch front end: simulate / estimate / crossval / summarize / dp-demo.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpmnl/choice_data.hpp"
#include "dpmnl/dpm_em.hpp"
#include "dpmnl/evaluate.hpp"
#include "dpmnl/lc_em.hpp"
#include "dpmnl/serialize.hpp"
#include "dpmnl/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dpmnl;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConverge = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
    const char* env = std::getenv("DPMNL_OUT");
    return env ? env : ".";
}

// Config-file values fill in flags the user did not pass; flags win.
// Unknown keys are rejected.
void apply_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw UsageError("config root must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt) throw UsageError("unknown config key: " + key);
        if (opt->count() > 0) continue;  // explicit flag wins
        std::string text = value.is_string() ? value.get<std::string>() : value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

struct DataArgs {
    std::string path;
    std::string cost_attr = "cost";
    std::vector<std::string> bounded;  // name=bound entries
    std::string space = "auto";        // auto | wtp | preference

    void attach(CLI::App* cmd, bool required = true) {
        auto* o = cmd->add_option("--data", path, "long-format choice dataset CSV");
        if (required) o->required();
        cmd->add_option("--cost-attr", cost_attr,
                        "column treated as the cost attribute (strictly negative coefficient)");
        cmd->add_option("--bounded-negative", bounded,
                        "attribute with coefficient bounded above by a negative value, name=bound");
        cmd->add_option("--space", space, "utility space: auto, wtp, preference")
            ->check(CLI::IsMember({"auto", "wtp", "preference"}));
    }

    std::vector<AttributeSpec> schema() const {
        csv::Table t = csv::read_file(path);
        std::map<std::string, double> bound_map;
        for (const auto& entry : bounded) {
            auto eq = entry.find('=');
            if (eq == std::string::npos) throw UsageError("--bounded-negative expects name=bound");
            bound_map[entry.substr(0, eq)] = csv::parse_double(entry.substr(eq + 1), "bound");
        }
        std::vector<AttributeSpec> specs;
        for (const auto& col : t.header) {
            if (col == "individual_id" || col == "task_id" || col == "alt_id" ||
                col == "available" || col == "chosen")
                continue;
            AttributeSpec s;
            s.name = col;
            if (col == cost_attr) {
                s.role = AttrRole::Cost;
                s.constraint = AttrConstraint::StrictlyNegative;
            } else if (auto it = bound_map.find(col); it != bound_map.end()) {
                s.constraint = AttrConstraint::BoundedNegative;
                s.upper_bound = it->second;
            }
            specs.push_back(s);
        }
        if (specs.empty()) throw UsageError("dataset has no attribute columns");
        return specs;
    }

    Dataset load() const { return load_csv(path, schema()); }

    UtilitySpec utility_spec(const Dataset& data) const {
        UtilitySpace sp;
        if (space == "wtp")
            sp = UtilitySpace::Wtp;
        else if (space == "preference")
            sp = UtilitySpace::Preference;
        else
            sp = data.cost_index() >= 0 ? UtilitySpace::Wtp : UtilitySpace::Preference;
        return make_utility_spec(sp, data);
    }
};

std::vector<std::string> attribute_names(const Dataset& data, const UtilitySpec& spec) {
    std::vector<std::string> names;
    for (std::size_t a = 0; a < data.attribute_specs.size(); ++a)
        if (static_cast<int>(a) != spec.cost_index) names.push_back(data.attribute_specs[a].name);
    names.push_back(spec.cost_index >= 0
                        ? data.attribute_specs[static_cast<std::size_t>(spec.cost_index)].name
                        : std::string("cost"));
    return names;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << body;
}

int cmd_simulate(const std::string& experiment, std::size_t n, std::size_t t, std::size_t j,
                 std::uint64_t seed, const std::string& out_dir) {
    simgen::SimConfig cfg;
    cfg.N = n;
    cfg.T = t;
    cfg.J = j;
    cfg.seed = seed;
    auto spec = simgen::experiment_spec(experiment);
    auto result = simgen::simulate(spec, cfg);
    fs::create_directories(out_dir);
    write_csv(result.data, out_dir + "/dataset.csv");
    simgen::write_truth_csv(result.tastes, out_dir + "/truth.csv");
    char buf[128];
    std::snprintf(buf, sizeof buf, "experiment,n,t,error_rate\n%s,%zu,%zu,%.6f\n",
                  experiment.c_str(), n, t, result.error_rate);
    write_text(out_dir + "/error_rate.csv", buf);
    return 0;
}

void write_estimate_reports(const FittedMixture& mix, const Dataset& data,
                            const std::string& out_dir) {
    if (mix.spec.cost_index >= 0)
        write_wtp_csv(summarize_wtp(mix, attribute_names(data, mix.spec)),
                      out_dir + "/wtp_summary.csv");
}

int cmd_estimate(const DataArgs& dargs, const std::string& model, std::size_t truncation,
                 std::size_t k, std::size_t k_min, std::size_t k_max, double prior_scale,
                 double tol, std::size_t max_iter, std::uint64_t seed, std::size_t threads,
                 const std::string& out_dir) {
    Dataset data = dargs.load();
    UtilitySpec spec = dargs.utility_spec(data);
    fs::create_directories(out_dir);
    bool converged = true;

    if (model == "mnl") {
        auto transforms = transforms_from_specs(data.attribute_specs);
        auto init = prior_mode(no_prior(transforms.size()), transforms);
        auto fit = fit_mnl(spec, data, init, tol, max_iter);
        write_json(to_json(fit, spec), out_dir + "/model.json");
        FittedMixture mix{spec, {fit.beta}, {1.0}};
        write_estimate_reports(mix, data, out_dir);
        converged = fit.converged;
    } else if (model == "dpm") {
        DPMConfig cfg;
        cfg.K = truncation;
        cfg.prior_scale = prior_scale;
        cfg.rel_tol = tol;
        cfg.max_iter = max_iter;
        cfg.seed = seed;
        cfg.threads = threads;
        auto fit = fit_dpm(data, spec, cfg);
        write_json(to_json(fit), out_dir + "/model.json");
        write_trace_csv(fit, out_dir + "/trace.csv");
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "truncation,occupied,threshold,alpha_hat\n%zu,%zu,%.8f,%.6f\n", fit.K(),
                      occupied_components(fit), 0.5 / static_cast<double>(fit.omega.N),
                      fit.alpha_hat);
        write_text(out_dir + "/occupied.csv", buf);
        write_estimate_reports(as_mixture(fit), data, out_dir);
        converged = fit.converged;
    } else if (model == "lc") {
        LCConfig cfg;
        cfg.rel_tol = tol;
        cfg.max_iter = max_iter;
        cfg.seed = seed;
        cfg.threads = threads;
        if (k_min > 0) {
            if (k_max < k_min) throw UsageError("--k-max must be >= --k-min");
            auto res = sweep(data, spec, k_min, k_max, cfg);
            write_sweep_csv(res, out_dir + "/sweep.csv");
            const LCModel* best = res.bic_optimal_model();
            if (!best) throw std::runtime_error("every sweep fit failed");
            write_json(to_json(*best), out_dir + "/model.json");
            write_estimate_reports(as_mixture(*best), data, out_dir);
            converged = best->converged;
        } else {
            auto fit = fit_lc(data, spec, k, cfg);
            write_json(to_json(fit), out_dir + "/model.json");
            write_estimate_reports(as_mixture(fit), data, out_dir);
            converged = fit.converged;
        }
    } else {
        throw UsageError("unknown model: " + model);
    }
    return converged ? 0 : kExitNoConverge;
}

int cmd_crossval(const DataArgs& dargs, const std::string& model, std::size_t truncation,
                 std::size_t k, double prior_scale, double tol, std::size_t max_iter,
                 std::size_t folds, std::uint64_t seed, std::size_t threads,
                 const std::string& out_dir) {
    Dataset data = dargs.load();
    UtilitySpec spec = dargs.utility_spec(data);
    if (folds > data.n_individuals()) throw UsageError("--folds exceeds the number of individuals");

    ModelTrainer trainer;
    if (model == "mnl") {
        trainer = [=](const Dataset& train, std::uint64_t) {
            auto transforms = transforms_from_specs(train.attribute_specs);
            auto init = prior_mode(no_prior(transforms.size()), transforms);
            auto fit = fit_mnl(spec, train, init, tol, max_iter);
            return FittedMixture{spec, {fit.beta}, {1.0}};
        };
    } else if (model == "dpm") {
        trainer = [=](const Dataset& train, std::uint64_t fold_seed) {
            DPMConfig cfg;
            cfg.K = truncation;
            cfg.prior_scale = prior_scale;
            cfg.rel_tol = tol;
            cfg.max_iter = max_iter;
            cfg.seed = fold_seed;
            cfg.threads = threads;
            return as_mixture(fit_dpm(train, spec, cfg));
        };
    } else if (model == "lc") {
        trainer = [=](const Dataset& train, std::uint64_t fold_seed) {
            LCConfig cfg;
            cfg.rel_tol = tol;
            cfg.max_iter = max_iter;
            cfg.seed = fold_seed;
            cfg.threads = threads;
            return as_mixture(fit_lc(train, spec, k, cfg));
        };
    } else {
        throw UsageError("unknown model: " + model);
    }

    auto report = cross_validate(data, trainer, folds, seed);
    fs::create_directories(out_dir);
    write_cv_csv(report, out_dir + "/cv.csv");
    write_folds_csv(split_folds(data, folds, seed), out_dir + "/folds.csv");
    return report.complete ? 0 : kExitNoConverge;
}

FittedMixture mixture_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j = json::parse(in);
    FittedMixture mix;
    mix.spec.space = j.at("utility").at("space") == "wtp" ? UtilitySpace::Wtp
                                                          : UtilitySpace::Preference;
    mix.spec.cost_index = j.at("utility").at("cost_index");
    auto parse_beta = [](const json& coefs) {
        ParamVector beta;
        for (const auto& c : coefs) {
            beta.values.push_back(c.at("value"));
            std::string label = c.at("transform");
            CoefTransform t;
            if (label == "negative_exponential")
                t.kind = Transform::NegExp;
            else if (label == "bounded_negative")
                t = {Transform::BoundedNegative, c.at("bound").get<double>()};
            beta.transforms.push_back(t);
        }
        return beta;
    };
    if (j.at("model") == "mnl") {
        mix.betas.push_back(parse_beta(j.at("beta")));
        mix.masses.push_back(1.0);
    } else {
        const char* share_key = j.at("model") == "dpm" ? "empirical_share" : "share";
        for (const auto& c : j.at("components")) {
            mix.betas.push_back(parse_beta(c.at("beta")));
            mix.masses.push_back(c.at(share_key));
        }
    }
    return mix;
}

int cmd_summarize(const std::string& model_json, const std::vector<std::string>& names,
                  double ic_loglik, std::size_t ic_k, std::size_t ic_p, std::size_t ic_n,
                  double eoc_alpha, std::size_t eoc_n, const std::string& out_dir) {
    fs::create_directories(out_dir);
    bool did_work = false;
    if (ic_k > 0) {
        if (ic_p == 0 || ic_n == 0) throw UsageError("--ic-k requires --ic-p and --ic-n");
        std::size_t n_params = ic_k * ic_p + (ic_k - 1);
        double aic = 2.0 * static_cast<double>(n_params) - 2.0 * ic_loglik;
        double bic = static_cast<double>(n_params) * std::log(static_cast<double>(ic_n))
                     - 2.0 * ic_loglik;
        char buf[200];
        std::snprintf(buf, sizeof buf, "K,P,N,loglik,n_params,aic,bic\n%zu,%zu,%zu,%.4f,%zu,%.4f,%.4f\n",
                      ic_k, ic_p, ic_n, ic_loglik, n_params, aic, bic);
        write_text(out_dir + "/information_criteria.csv", buf);
        std::cout << buf;
        did_work = true;
    }
    if (eoc_alpha > 0.0) {
        if (eoc_n == 0) throw UsageError("--expected-alpha requires --expected-n");
        double e = expected_occupied_components(eoc_alpha, eoc_n);
        char buf[128];
        std::snprintf(buf, sizeof buf, "alpha,N,expected_components\n%.6f,%zu,%.6f\n", eoc_alpha,
                      eoc_n, e);
        write_text(out_dir + "/expected_components.csv", buf);
        std::cout << buf;
        did_work = true;
    }
    if (!model_json.empty()) {
        FittedMixture mix = mixture_from_json(model_json);
        std::vector<std::string> use_names = names;
        if (use_names.empty())
            for (std::size_t a = 0; a < mix.betas.front().size(); ++a)
                use_names.push_back("attr" + std::to_string(a));
        write_wtp_csv(summarize_wtp(mix, use_names), out_dir + "/wtp_summary.csv");
        auto values = implicit_values(mix);
        for (std::size_t coord = 0; coord < values.points.front().size(); ++coord) {
            auto steps = export_ecdf(values.marginal(coord));
            std::string name = coord < use_names.size() ? use_names[coord]
                                                        : "coord" + std::to_string(coord);
            std::ofstream out(out_dir + "/ecdf_" + name + ".csv");
            if (!out) throw std::runtime_error("cannot write ecdf file");
            out << "x,cumulative\n";
            char buf[96];
            for (const auto& s : steps) {
                std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", s.x, s.cumulative);
                out << buf;
            }
        }
        did_work = true;
    }
    if (!did_work)
        throw UsageError("summarize: nothing to do (pass --model-json and/or --ic-k/--expected-alpha)");
    return 0;
}

int cmd_dp_demo(const std::vector<double>& alphas, std::size_t n_draws, std::size_t truncation,
                std::size_t bins, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/dp_histograms.csv");
    if (!out) throw std::runtime_error("cannot write dp_histograms.csv");
    out << "alpha,bin_left,bin_right,count\n";
    const double lo = -4.0, hi = 4.0;
    char buf[160];
    for (double alpha : alphas) {
        Rng rng(seed);
        auto draws = sample_stick_dp(
            alpha, [](Rng& r) { std::normal_distribution<double> z(0.0, 1.0); return z(r); },
            truncation, n_draws, rng);
        std::vector<std::size_t> hist(bins, 0);
        for (double d : draws) {
            auto b = static_cast<std::int64_t>((d - lo) / (hi - lo) * static_cast<double>(bins));
            b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bins) - 1);
            ++hist[static_cast<std::size_t>(b)];
        }
        for (std::size_t b = 0; b < bins; ++b) {
            double w = (hi - lo) / static_cast<double>(bins);
            std::snprintf(buf, sizeof buf, "%.10g,%.6f,%.6f,%zu\n", alpha,
                          lo + w * static_cast<double>(b), lo + w * static_cast<double>(b + 1),
                          hist[b]);
            out << buf;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-choice mixture estimation toolkit"};
    app.require_subcommand(1);

    std::string config_path;

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic choice dataset");
    std::string experiment = "I";
    std::size_t sim_n = 2000, sim_t = 8, sim_j = 3;
    std::uint64_t sim_seed = 1;
    std::string sim_out = default_out_dir();
    sim->add_option("--config", config_path, "JSON config file (flags override)");
    sim->add_option("--experiment", experiment, "experiment id: I, II, III, IV")->required();
    sim->add_option("--n", sim_n, "number of individuals");
    sim->add_option("--t", sim_t, "choice tasks per individual");
    sim->add_option("--j", sim_j, "alternatives per task");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--out", sim_out, "output directory");

    // estimate
    auto* est = app.add_subcommand("estimate", "fit mnl, lc, or dpm to a dataset");
    DataArgs est_data;
    std::string est_model = "dpm";
    std::size_t truncation = 150, est_k = 2, k_min = 0, k_max = 0, est_max_iter = 500,
                est_threads = 1;
    double prior_scale = 5.0, est_tol = 1e-4;
    std::uint64_t est_seed = 1;
    std::string est_out = default_out_dir();
    est->add_option("--config", config_path, "JSON config file (flags override)");
    est_data.attach(est);
    est->add_option("--model", est_model, "mnl, lc, or dpm")
        ->check(CLI::IsMember({"mnl", "lc", "dpm"}));
    est->add_option("--truncation", truncation, "dpm truncation level");
    est->add_option("--k", est_k, "lc class count");
    est->add_option("--k-min", k_min, "lc sweep lower bound");
    est->add_option("--k-max", k_max, "lc sweep upper bound");
    est->add_option("--prior-scale", prior_scale, "dpm base-measure scale");
    est->add_option("--tol", est_tol, "relative convergence tolerance");
    est->add_option("--max-iter", est_max_iter, "EM iteration cap");
    est->add_option("--seed", est_seed, "random seed");
    est->add_option("--threads", est_threads, "worker thread cap");
    est->add_option("--out", est_out, "output directory");

    // crossval
    auto* cv = app.add_subcommand("crossval", "k-fold cross-validated predictive log-likelihood");
    DataArgs cv_data;
    std::string cv_model = "dpm";
    std::size_t cv_folds = 10, cv_trunc = 150, cv_k = 2, cv_max_iter = 500, cv_threads = 1;
    double cv_prior_scale = 5.0, cv_tol = 1e-4;
    std::uint64_t cv_seed = 1;
    std::string cv_out = default_out_dir();
    cv->add_option("--config", config_path, "JSON config file (flags override)");
    cv_data.attach(cv);
    cv->add_option("--model", cv_model, "mnl, lc, or dpm")
        ->check(CLI::IsMember({"mnl", "lc", "dpm"}));
    cv->add_option("--folds", cv_folds, "number of folds");
    cv->add_option("--truncation", cv_trunc, "dpm truncation level");
    cv->add_option("--k", cv_k, "lc class count");
    cv->add_option("--prior-scale", cv_prior_scale, "dpm base-measure scale");
    cv->add_option("--tol", cv_tol, "relative convergence tolerance");
    cv->add_option("--max-iter", cv_max_iter, "EM iteration cap");
    cv->add_option("--seed", cv_seed, "random seed");
    cv->add_option("--threads", cv_threads, "worker thread cap");
    cv->add_option("--out", cv_out, "output directory");

    // summarize
    auto* summ = app.add_subcommand("summarize", "WTP tables, ECDFs, and selection arithmetic");
    std::string model_json;
    std::vector<std::string> attr_names;
    double ic_loglik = 0.0, eoc_alpha = 0.0;
    std::size_t ic_k = 0, ic_p = 0, ic_n = 0, eoc_n = 0;
    std::string summ_out = default_out_dir();
    summ->add_option("--config", config_path, "JSON config file (flags override)");
    summ->add_option("--model-json", model_json, "fitted model JSON to summarize");
    summ->add_option("--attribute-names", attr_names, "names for the implicit-value columns");
    summ->add_option("--ic-k", ic_k, "class count for AIC/BIC arithmetic");
    summ->add_option("--ic-p", ic_p, "coefficients per class");
    summ->add_option("--ic-n", ic_n, "number of individuals");
    summ->add_option("--ic-loglik", ic_loglik, "log-likelihood");
    summ->add_option("--expected-alpha", eoc_alpha, "concentration for expected component count");
    summ->add_option("--expected-n", eoc_n, "sample size for expected component count");
    summ->add_option("--out", summ_out, "output directory");

    // dp-demo
    auto* demo = app.add_subcommand("dp-demo", "stick-breaking draw histograms per alpha");
    std::vector<double> alphas{1.0, 10.0, 100.0, 1000.0};
    std::size_t demo_draws = 1000, demo_trunc = 150, demo_bins = 80;
    std::uint64_t demo_seed = 1;
    std::string demo_out = default_out_dir();
    demo->add_option("--config", config_path, "JSON config file (flags override)");
    demo->add_option("--alpha", alphas, "concentration values");
    demo->add_option("--draws", demo_draws, "draws per histogram");
    demo->add_option("--truncation", demo_trunc, "stick-breaking truncation");
    demo->add_option("--bins", demo_bins, "histogram bins over [-4,4]");
    demo->add_option("--seed", demo_seed, "random seed");
    demo->add_option("--out", demo_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(active, config_path);
        if (sim->parsed())
            return cmd_simulate(experiment, sim_n, sim_t, sim_j, sim_seed, sim_out);
        if (est->parsed())
            return cmd_estimate(est_data, est_model, truncation, est_k, k_min, k_max, prior_scale,
                                est_tol, est_max_iter, est_seed, est_threads, est_out);
        if (cv->parsed())
            return cmd_crossval(cv_data, cv_model, cv_trunc, cv_k, cv_prior_scale, cv_tol,
                                cv_max_iter, cv_folds, cv_seed, cv_threads, cv_out);
        if (summ->parsed())
            return cmd_summarize(model_json, attr_names, ic_loglik, ic_k, ic_p, ic_n, eoc_alpha,
                                 eoc_n, summ_out);
        if (demo->parsed())
            return cmd_dp_demo(alphas, demo_draws, demo_trunc, demo_bins, demo_seed, demo_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
