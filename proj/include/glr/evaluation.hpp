#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "glr/graph.hpp"
#include "glr/models.hpp"
#include "glr/rng.hpp"

namespace glr {

/// Deterministic stratified fold assignment: within each class, nodes are
/// shuffled by a seeded generator and dealt round-robin, so per-class fold
/// sizes differ by at most one.
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignments;  // node -> fold id in {0..k-1}

    std::vector<std::size_t> test_nodes(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t u = 0; u < assignments.size(); ++u)
            if (assignments[u] == fold) out.push_back(u);
        return out;
    }
    std::vector<std::size_t> train_nodes(std::size_t fold) const {
        std::vector<std::size_t> out;
        for (std::size_t u = 0; u < assignments.size(); ++u)
            if (assignments[u] != fold) out.push_back(u);
        return out;
    }
};

inline FoldPlan make_folds(std::span<const std::size_t> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t u = 0; u < labels.size(); ++u) by_class[labels[u]].push_back(u);
    for (const auto& [cls, members] : by_class)
        if (members.size() < k)
            throw std::invalid_argument("make_folds: class " + std::to_string(cls) + " has " +
                                        std::to_string(members.size()) + " members, fewer than k=" +
                                        std::to_string(k));
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), 0);
    for (auto& [cls, members] : by_class) {
        SplitMix64 rng(mix_seed(seed, cls + 1));
        shuffle(members, rng);
        for (std::size_t i = 0; i < members.size(); ++i) plan.assignments[members[i]] = i % k;
    }
    return plan;
}

/// One (dataset, model, fold, repeat) outcome. Exactly one of accuracy /
/// timed_out / error is meaningful: a clean record carries accuracy, a cell
/// past the time limit carries timed_out, a model failure carries error.
struct RunRecord {
    std::string dataset;
    ModelSpec model;
    std::size_t fold = 0;
    std::size_t repeat = 0;
    std::optional<double> accuracy;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
    bool timed_out = false;
    std::uint64_t seed = 0;
    std::optional<std::string> error;
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    j = nlohmann::json{
        {"schema_version", 1},
        {"dataset", r.dataset},
        {"model", r.model},
        {"config_hash", config_hash(r.model)},
        {"fold", r.fold},
        {"repeat", r.repeat},
        {"accuracy", r.accuracy ? nlohmann::json(*r.accuracy) : nlohmann::json(nullptr)},
        {"fit_seconds", r.fit_seconds},
        {"predict_seconds", r.predict_seconds},
        {"timed_out", r.timed_out},
        {"seed", r.seed},
    };
    if (r.error) j["error"] = *r.error;
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
    r.dataset = j.at("dataset").get<std::string>();
    r.model = j.at("model").get<ModelSpec>();
    r.fold = j.at("fold").get<std::size_t>();
    r.repeat = j.at("repeat").get<std::size_t>();
    if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
    r.fit_seconds = j.at("fit_seconds").get<double>();
    r.predict_seconds = j.at("predict_seconds").get<double>();
    r.timed_out = j.at("timed_out").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
}

inline void write_runs_jsonl(std::ostream& out, std::span<const RunRecord> records) {
    for (const auto& r : records) {
        nlohmann::json j = r;
        out << j.dump() << "\n";
    }
}

inline std::vector<RunRecord> read_runs_jsonl(std::istream& in) {
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(nlohmann::json::parse(line).get<RunRecord>());
        } catch (const std::exception& e) {
            throw std::runtime_error("runs.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

inline double accuracy_on(std::span<const std::size_t> predicted,
                          std::span<const std::size_t> truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw std::invalid_argument("accuracy_on: size mismatch or empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

struct BenchmarkConfig {
    std::size_t k = 4;
    std::size_t repeats = 3;
    std::uint64_t seed = 42;
    double time_limit_seconds = 300.0;
    bool deterministic = false;  // serial execution, zeroed wall-clock fields
    std::size_t threads = 1;
};

/// Run every (dataset, model, fold, repeat) cell of the benchmark. Folds are
/// derived once per dataset from the shared seed, so every model sees the
/// same splits. A cell whose cumulative wall-clock exceeds the time limit is
/// rewritten as timed-out records; a model exception becomes an error record
/// for each remaining experiment of that cell. The sink observes records as
/// each cell completes (thread-safe).
inline std::vector<RunRecord> run_benchmark(
    std::span<const SparseGraph> datasets, std::span<const ModelSpec> models,
    const BenchmarkConfig& cfg,
    const std::function<void(const RunRecord&)>& sink = nullptr) {
    struct Cell {
        std::size_t dataset_index;
        std::size_t model_index;
    };
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t m = 0; m < models.size(); ++m) cells.push_back({d, m});

    std::vector<FoldPlan> plans;
    plans.reserve(datasets.size());
    for (const auto& g : datasets) plans.push_back(make_folds(g.labels, cfg.k, cfg.seed));

    std::vector<std::vector<RunRecord>> per_cell(cells.size());
    std::mutex sink_mutex;

    auto run_cell = [&](std::size_t cell_index) {
        const auto [d, m] = cells[cell_index];
        const SparseGraph& g = datasets[d];
        const ModelSpec& spec = models[m];
        const FoldPlan& plan = plans[d];
        std::vector<RunRecord> records;
        double cell_seconds = 0.0;
        bool timed_out = false;

        for (std::size_t fold = 0; fold < cfg.k && !timed_out; ++fold) {
            const auto train = plan.train_nodes(fold);
            const auto test = plan.test_nodes(fold);
            std::vector<std::size_t> truth;
            truth.reserve(test.size());
            for (std::size_t u : test) truth.push_back(g.labels[u]);

            for (std::size_t repeat = 0; repeat < cfg.repeats && !timed_out; ++repeat) {
                RunRecord r;
                r.dataset = g.name;
                r.model = spec;
                r.fold = fold;
                r.repeat = repeat;
                r.seed = mix_seed(cfg.seed, fold + 1, repeat + 1);
                try {
                    TrainedModel trained = fit(spec, g, train, r.seed);
                    const auto t0 = std::chrono::steady_clock::now();
                    auto predicted = predict(trained, g, test);
                    r.predict_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    r.fit_seconds = trained.fit_seconds;
                    r.accuracy = accuracy_on(predicted, truth);
                } catch (const std::exception& e) {
                    r.error = e.what();
                }
                cell_seconds += r.fit_seconds + r.predict_seconds;
                if (cfg.deterministic) {
                    r.fit_seconds = 0.0;
                    r.predict_seconds = 0.0;
                }
                records.push_back(std::move(r));
                if (cell_seconds > cfg.time_limit_seconds) timed_out = true;
            }
        }

        if (timed_out) {
            // The limit disqualifies the whole (model, dataset) setting, not single folds.
            records.clear();
            for (std::size_t fold = 0; fold < cfg.k; ++fold)
                for (std::size_t repeat = 0; repeat < cfg.repeats; ++repeat) {
                    RunRecord r;
                    r.dataset = g.name;
                    r.model = spec;
                    r.fold = fold;
                    r.repeat = repeat;
                    r.seed = mix_seed(cfg.seed, fold + 1, repeat + 1);
                    r.timed_out = true;
                    records.push_back(std::move(r));
                }
        }
        if (sink) {
            std::lock_guard lock(sink_mutex);
            for (const auto& r : records) sink(r);
        }
        per_cell[cell_index] = std::move(records);
    };

    if (cfg.deterministic || cfg.threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::mutex queue_mutex;
        std::size_t next = 0;
        auto worker = [&] {
            for (;;) {
                std::size_t mine;
                {
                    std::lock_guard lock(queue_mutex);
                    if (next >= cells.size()) return;
                    mine = next++;
                }
                run_cell(mine);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<RunRecord> all;
    for (auto& records : per_cell)
        for (auto& r : records) all.push_back(std::move(r));
    return all;
}

struct CellStats {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_fit_seconds = 0.0;
    double mean_predict_seconds = 0.0;
    std::size_t record_count = 0;
    std::size_t accuracy_count = 0;
    bool timed_out = false;
};

/// Per-(dataset, model) aggregates plus competition ranks. Models are keyed
/// by kind name. Rank ties share the averaged rank; models without any
/// accuracy (timed out or failed) all receive the worst possible rank.
struct BenchmarkSummary {
    std::vector<std::string> datasets;  // first-seen order
    std::vector<std::string> models;    // first-seen order
    std::map<std::pair<std::string, std::string>, CellStats> cells;  // (dataset, model)
    std::map<std::string, std::map<std::string, double>> per_dataset_ranks;
    std::map<std::string, double> average_rank;
};

inline BenchmarkSummary summarize(std::span<const RunRecord> records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    BenchmarkSummary s;
    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        std::string model = to_string(r.model.kind);
        if (std::find(s.datasets.begin(), s.datasets.end(), r.dataset) == s.datasets.end())
            s.datasets.push_back(r.dataset);
        if (std::find(s.models.begin(), s.models.end(), model) == s.models.end())
            s.models.push_back(model);
        groups[{r.dataset, model}].push_back(&r);
    }

    for (const auto& [key, group] : groups) {
        CellStats stats;
        stats.record_count = group.size();
        std::vector<double> accuracies;
        double fit = 0.0, pred = 0.0;
        for (const RunRecord* r : group) {
            if (r->accuracy) accuracies.push_back(*r->accuracy);
            if (r->timed_out) stats.timed_out = true;
            fit += r->fit_seconds;
            pred += r->predict_seconds;
        }
        stats.accuracy_count = accuracies.size();
        if (!accuracies.empty()) {
            double mean = 0.0;
            for (double a : accuracies) mean += a;
            mean /= static_cast<double>(accuracies.size());
            double var = 0.0;
            for (double a : accuracies) var += (a - mean) * (a - mean);
            var /= static_cast<double>(accuracies.size());
            stats.mean_accuracy = mean;
            stats.std_accuracy = std::sqrt(var);
        }
        stats.mean_fit_seconds = fit / static_cast<double>(group.size());
        stats.mean_predict_seconds = pred / static_cast<double>(group.size());
        s.cells[key] = stats;
    }

    // Competition ranking per dataset with averaged ties.
    for (const auto& dataset : s.datasets) {
        std::vector<std::pair<std::string, const CellStats*>> present;
        for (const auto& model : s.models) {
            auto it = s.cells.find({dataset, model});
            if (it != s.cells.end()) present.emplace_back(model, &it->second);
        }
        const double worst = static_cast<double>(present.size());
        std::vector<std::pair<double, std::string>> scored;  // (mean accuracy, model)
        for (const auto& [model, stats] : present) {
            const bool has_accuracy = stats->accuracy_count > 0 && !stats->timed_out;
            if (has_accuracy) scored.emplace_back(stats->mean_accuracy, model);
            else s.per_dataset_ranks[dataset][model] = worst;
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::size_t i = 0;
        while (i < scored.size()) {
            std::size_t j = i;
            while (j < scored.size() && scored[j].first == scored[i].first) ++j;
            const double shared = 0.5 * static_cast<double>((i + 1) + j);  // mean of ranks i+1..j
            for (std::size_t t = i; t < j; ++t) s.per_dataset_ranks[dataset][scored[t].second] = shared;
            i = j;
        }
    }

    for (const auto& model : s.models) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& dataset : s.datasets) {
            auto dit = s.per_dataset_ranks.find(dataset);
            if (dit == s.per_dataset_ranks.end()) continue;
            auto mit = dit->second.find(model);
            if (mit == dit->second.end()) continue;
            total += mit->second;
            ++count;
        }
        if (count) s.average_rank[model] = total / static_cast<double>(count);
    }
    return s;
}

/// Table-style CSV: one row per model, one column per dataset with
/// "mean ± std" percent cells, final column the average rank.
inline std::string summary_csv(const BenchmarkSummary& s) {
    std::ostringstream out;
    out << "model";
    for (const auto& dataset : s.datasets) out << "," << dataset;
    out << ",rank\n";
    out << std::fixed;
    for (const auto& model : s.models) {
        out << model;
        for (const auto& dataset : s.datasets) {
            out << ",";
            auto it = s.cells.find({dataset, model});
            if (it == s.cells.end()) continue;
            if (it->second.timed_out) {
                out << "timeout";
            } else if (it->second.accuracy_count == 0) {
                out << "error";
            } else {
                out << std::setprecision(2) << 100.0 * it->second.mean_accuracy << " ± "
                    << std::setprecision(2) << 100.0 * it->second.std_accuracy;
            }
        }
        auto rit = s.average_rank.find(model);
        out << ",";
        if (rit != s.average_rank.end()) out << std::setprecision(2) << rit->second;
        out << "\n";
    }
    return out.str();
}

/// One point of the train/test split-size sweep.
struct SweepPoint {
    double test_fraction = 0.0;
    RunRecord record;
};

/// Single stratified holdout per fraction: within each class the shuffled
/// prefix of round(f·class size) nodes goes to test. Errors out if a
/// fraction empties a class on the training side.
inline std::vector<SweepPoint> split_size_sweep(const SparseGraph& g, const ModelSpec& spec,
                                                std::span<const double> test_fractions,
                                                std::uint64_t seed) {
    std::vector<SweepPoint> out;
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t u = 0; u < g.node_count(); ++u) by_class[g.labels[u]].push_back(u);

    for (std::size_t fi = 0; fi < test_fractions.size(); ++fi) {
        const double fraction = test_fractions[fi];
        if (!(fraction > 0.0 && fraction < 1.0))
            throw std::invalid_argument("split_size_sweep: fraction must be in (0,1)");
        std::vector<std::size_t> train, test;
        for (auto [cls, members] : by_class) {
            SplitMix64 rng(mix_seed(seed, fi + 1, cls + 1));
            shuffle(members, rng);
            auto test_count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
            if (test_count >= members.size())
                throw std::invalid_argument("split_size_sweep: fraction " + std::to_string(fraction) +
                                            " leaves class " + std::to_string(cls) + " empty in train");
            test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(test_count));
            train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(test_count), members.end());
        }
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());

        SweepPoint point;
        point.test_fraction = fraction;
        RunRecord& r = point.record;
        r.dataset = g.name;
        r.model = spec;
        r.fold = fi;
        r.seed = mix_seed(seed, fi + 1);
        if (test.empty()) {
            r.error = "empty test split";
            out.push_back(std::move(point));
            continue;
        }
        TrainedModel trained = fit(spec, g, train, r.seed);
        const auto t0 = std::chrono::steady_clock::now();
        auto predicted = predict(trained, g, test);
        r.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.fit_seconds = trained.fit_seconds;
        std::vector<std::size_t> truth;
        truth.reserve(test.size());
        for (std::size_t u : test) truth.push_back(g.labels[u]);
        r.accuracy = accuracy_on(predicted, truth);
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace glr
