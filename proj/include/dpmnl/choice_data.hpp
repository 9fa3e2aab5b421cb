#ifndef DPMNL_CHOICE_DATA_HPP
#define DPMNL_CHOICE_DATA_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "csv.hpp"

namespace dpmnl {

enum class AttrRole { Generic, Cost };
enum class AttrConstraint { Free, StrictlyNegative, BoundedNegative };

struct AttributeSpec {
    std::string name;
    AttrRole role = AttrRole::Generic;
    AttrConstraint constraint = AttrConstraint::Free;
    double upper_bound = 0.0;  // used for BoundedNegative, must be < 0
};

struct Alternative {
    std::string alt_id;
    bool available = true;
    std::vector<double> attributes;
};

struct ChoiceTask {
    std::string task_id;
    std::vector<Alternative> alternatives;
    std::size_t chosen = 0;  // index into alternatives

    std::size_t n_available() const {
        std::size_t c = 0;
        for (const auto& a : alternatives) c += a.available ? 1 : 0;
        return c;
    }
};

struct Individual {
    std::string id;
    std::vector<ChoiceTask> tasks;
};

struct Dataset {
    std::vector<Individual> individuals;
    std::vector<AttributeSpec> attribute_specs;

    std::size_t n_individuals() const { return individuals.size(); }
    std::size_t n_attributes() const { return attribute_specs.size(); }

    std::size_t n_tasks() const {
        std::size_t c = 0;
        for (const auto& ind : individuals) c += ind.tasks.size();
        return c;
    }

    int cost_index() const {
        for (std::size_t a = 0; a < attribute_specs.size(); ++a)
            if (attribute_specs[a].role == AttrRole::Cost) return static_cast<int>(a);
        return -1;
    }
};

inline void validate(const Dataset& data) {
    std::set<std::string> ids;
    int cost_count = 0;
    for (const auto& spec : data.attribute_specs) {
        if (spec.role == AttrRole::Cost) ++cost_count;
        if (spec.constraint == AttrConstraint::BoundedNegative && spec.upper_bound >= 0.0)
            throw std::runtime_error("attribute " + spec.name + ": bounded-negative upper bound must be < 0");
    }
    if (cost_count > 1) throw std::runtime_error("more than one cost attribute");
    for (const auto& ind : data.individuals) {
        if (!ids.insert(ind.id).second)
            throw std::runtime_error("duplicate individual id " + ind.id);
        if (ind.tasks.empty())
            throw std::runtime_error("individual " + ind.id + " has no tasks");
        for (const auto& task : ind.tasks) {
            if (task.alternatives.empty() || task.chosen >= task.alternatives.size())
                throw std::runtime_error("malformed task " + task.task_id);
            if (!task.alternatives[task.chosen].available)
                throw std::runtime_error("chosen alternative unavailable (individual " +
                                         ind.id + ", task " + task.task_id + ")");
            if (task.n_available() < 2)
                throw std::runtime_error("fewer than 2 available alternatives (individual " +
                                         ind.id + ", task " + task.task_id + ")");
            for (const auto& alt : task.alternatives) {
                if (alt.attributes.size() != data.attribute_specs.size())
                    throw std::runtime_error("attribute length mismatch in task " + task.task_id);
                for (double v : alt.attributes)
                    if (!std::isfinite(v))
                        throw std::runtime_error("non-finite attribute value in task " + task.task_id);
            }
        }
    }
}

// Long format: individual_id,task_id,alt_id,available,chosen,<attr...>.
// Missing availability column means all-available.
inline Dataset load_csv(const std::string& path, const std::vector<AttributeSpec>& specs) {
    csv::Table t = csv::read_file(path);
    for (const char* col : {"individual_id", "task_id", "alt_id", "chosen"})
        if (t.column(col) < 0) throw std::runtime_error(std::string("missing column ") + col);
    const int c_ind = t.column("individual_id");
    const int c_task = t.column("task_id");
    const int c_alt = t.column("alt_id");
    const int c_avail = t.column("available");
    const int c_chosen = t.column("chosen");
    std::vector<int> c_attr;
    for (const auto& spec : specs) {
        int c = t.column(spec.name);
        if (c < 0) throw std::runtime_error("missing column " + spec.name);
        c_attr.push_back(c);
    }

    Dataset data;
    data.attribute_specs = specs;
    std::map<std::string, std::size_t> ind_index;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::map<std::pair<std::string, std::string>, int> chosen_count;
    for (const auto& row : t.rows) {
        const std::string& ind_id = row[c_ind];
        const std::string& task_id = row[c_task];
        const std::string& alt_id = row[c_alt];
        if (!seen.insert({ind_id, task_id, alt_id}).second)
            throw std::runtime_error("duplicate (individual, task, alt) triple: " +
                                     ind_id + "," + task_id + "," + alt_id);
        auto [it, fresh] = ind_index.try_emplace(ind_id, data.individuals.size());
        if (fresh) data.individuals.push_back({ind_id, {}});
        Individual& ind = data.individuals[it->second];
        if (ind.tasks.empty() || ind.tasks.back().task_id != task_id) {
            // a task may not be split across non-adjacent row blocks
            for (const auto& task : ind.tasks)
                if (task.task_id == task_id)
                    throw std::runtime_error("task " + task_id + " rows are not contiguous");
            ind.tasks.push_back({task_id, {}, 0});
        }
        ChoiceTask& task = ind.tasks.back();
        Alternative alt;
        alt.alt_id = alt_id;
        alt.available = c_avail < 0 || csv::parse_double(row[c_avail], "available") != 0.0;
        for (std::size_t a = 0; a < specs.size(); ++a)
            alt.attributes.push_back(csv::parse_double(row[c_attr[a]], specs[a].name));
        bool chosen = csv::parse_double(row[c_chosen], "chosen") != 0.0;
        if (chosen) {
            if (!alt.available)
                throw std::runtime_error("chosen alternative unavailable (individual " +
                                         ind_id + ", task " + task_id + ")");
            task.chosen = task.alternatives.size();
            ++chosen_count[{ind_id, task_id}];
        }
        task.alternatives.push_back(std::move(alt));
    }
    for (const auto& ind : data.individuals)
        for (const auto& task : ind.tasks) {
            int c = chosen_count[{ind.id, task.task_id}];
            if (c != 1)
                throw std::runtime_error("task " + task.task_id + " of individual " + ind.id +
                                         " has " + std::to_string(c) + " chosen rows");
        }
    validate(data);
    return data;
}

inline void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "individual_id,task_id,alt_id,available,chosen";
    for (const auto& spec : data.attribute_specs) out << "," << spec.name;
    out << "\n";
    char buf[64];
    for (const auto& ind : data.individuals)
        for (const auto& task : ind.tasks)
            for (std::size_t j = 0; j < task.alternatives.size(); ++j) {
                const auto& alt = task.alternatives[j];
                out << ind.id << "," << task.task_id << "," << alt.alt_id << ","
                    << (alt.available ? 1 : 0) << "," << (j == task.chosen ? 1 : 0);
                for (double v : alt.attributes) {
                    std::snprintf(buf, sizeof buf, "%.17g", v);
                    out << "," << buf;
                }
                out << "\n";
            }
}

// Power-of-ten rescaling so that plain-MNL coefficient magnitudes land in [0.1, 1).
// Returns scaled copy plus the per-attribute factor the column was multiplied by.
inline std::pair<Dataset, std::vector<double>> scale_covariates(
    const Dataset& data, const std::vector<double>& reference_coefs) {
    if (reference_coefs.size() != data.n_attributes())
        throw std::invalid_argument("scale_covariates: coefficient count mismatch");
    std::vector<double> factors(reference_coefs.size(), 1.0);
    for (std::size_t a = 0; a < reference_coefs.size(); ++a) {
        double c = std::fabs(reference_coefs[a]);
        if (c == 0.0 || !std::isfinite(c)) continue;  // cannot scale, leave as-is
        int m = -static_cast<int>(std::floor(std::log10(c))) - 1;
        factors[a] = std::pow(10.0, -m);
    }
    Dataset scaled = data;
    for (auto& ind : scaled.individuals)
        for (auto& task : ind.tasks)
            for (auto& alt : task.alternatives)
                for (std::size_t a = 0; a < factors.size(); ++a)
                    alt.attributes[a] *= factors[a];
    return {std::move(scaled), std::move(factors)};
}

struct FoldAssignment {
    std::size_t n_folds = 0;
    std::map<std::string, std::size_t> assignment;  // individual_id -> fold
};

inline FoldAssignment split_folds(const Dataset& data, std::size_t n_folds, std::uint64_t seed) {
    if (n_folds == 0 || n_folds > data.n_individuals())
        throw std::invalid_argument("split_folds: need 1 <= n_folds <= N");
    std::vector<std::size_t> order(data.n_individuals());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldAssignment fa;
    fa.n_folds = n_folds;
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        fa.assignment[data.individuals[order[pos]].id] = pos % n_folds;
    return fa;
}

inline void write_folds_csv(const FoldAssignment& fa, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "individual_id,fold\n";
    for (const auto& [id, fold] : fa.assignment) out << id << "," << fold << "\n";
}

// Subset containing the individuals for which keep(id) is true; order preserved.
template <typename Pred>
Dataset subset(const Dataset& data, Pred keep) {
    Dataset out;
    out.attribute_specs = data.attribute_specs;
    for (const auto& ind : data.individuals)
        if (keep(ind.id)) out.individuals.push_back(ind);
    return out;
}

}  // namespace dpmnl

#endif
