// Command-line front door for the node-classification toolkit: dataset
// conversion, statistics, homophily profiles, the benchmark harness, split
// sweeps and report emission. Human-readable summaries go to stdout,
// machine-readable output to files only.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glr/glr.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

fs::path resolve_dataset_dir(const std::string& given) {
    fs::path p(given);
    if (fs::exists(p / "meta.json")) return p;
    if (const char* root = std::getenv("GLR_DATA_DIR")) {
        fs::path candidate = fs::path(root) / given;
        if (fs::exists(candidate / "meta.json")) return candidate;
    }
    throw std::runtime_error("dataset directory not found: " + given +
                             " (checked as given and under $GLR_DATA_DIR)");
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct EvaluateArgs {
    std::vector<std::string> datasets;
    std::vector<std::string> models;
    std::size_t k = 4;
    std::size_t repeats = 3;
    std::uint64_t seed = 42;
    double time_limit = 300.0;
    std::string out_dir = ".";
    bool deterministic = false;
    std::size_t threads = 0;  // 0 = machine parallelism
    std::map<std::string, double> overrides;
};

glr::ModelSpec make_spec(const std::string& name, const std::map<std::string, double>& overrides) {
    glr::ModelKind kind = glr::model_kind_from_string(name);
    std::map<std::string, double> applicable;
    for (const auto& [key, value] : overrides) {
        auto defaults = glr::default_hyperparams(kind);
        if (defaults.count(key)) applicable[key] = value;
    }
    return glr::ModelSpec::make(kind, applicable);
}

int cmd_evaluate(const EvaluateArgs& args) {
    bool partial = false;

    std::vector<glr::SparseGraph> graphs;
    for (const auto& name : args.datasets) {
        try {
            auto [graph, manifest] = glr::load_dataset(resolve_dataset_dir(name));
            graphs.push_back(std::move(graph));
        } catch (const std::exception& e) {
            std::cerr << "dataset " << name << ": " << e.what() << "\n";
            partial = true;
        }
    }
    if (graphs.empty()) {
        std::cerr << "evaluate: no loadable datasets\n";
        return kExitFatal;
    }

    std::vector<glr::ModelSpec> specs;
    for (const auto& name : args.models) specs.push_back(make_spec(name, args.overrides));

    glr::BenchmarkConfig cfg;
    cfg.k = args.k;
    cfg.repeats = args.repeats;
    cfg.seed = args.seed;
    cfg.time_limit_seconds = args.time_limit;
    cfg.deterministic = args.deterministic;
    cfg.threads = args.deterministic ? 1
                  : args.threads > 0 ? args.threads
                                     : std::max(1u, std::thread::hardware_concurrency());

    fs::create_directories(args.out_dir);
    std::ofstream runs(fs::path(args.out_dir) / "runs.jsonl", std::ios::binary);
    if (!runs) {
        std::cerr << "evaluate: cannot write runs.jsonl under " << args.out_dir << "\n";
        return kExitFatal;
    }
    auto sink = [&](const glr::RunRecord& r) {
        nlohmann::json j = r;
        runs << j.dump() << "\n";
        runs.flush();
    };

    auto records = glr::run_benchmark(graphs, specs, cfg, sink);
    for (const auto& r : records) {
        if (r.error) {
            std::cerr << "record " << r.dataset << "/" << glr::to_string(r.model.kind) << " fold "
                      << r.fold << " repeat " << r.repeat << ": " << *r.error << "\n";
            partial = true;
        }
    }

    auto summary = glr::summarize(records);
    write_text_file(fs::path(args.out_dir) / "summary.csv", glr::summary_csv(summary));

    // Human-readable grid.
    std::cout << std::left << std::setw(16) << "model";
    for (const auto& dataset : summary.datasets) std::cout << std::setw(18) << dataset;
    std::cout << std::setw(8) << "rank" << "\n";
    for (const auto& model : summary.models) {
        std::cout << std::left << std::setw(16) << model;
        for (const auto& dataset : summary.datasets) {
            std::ostringstream cell;
            auto it = summary.cells.find({dataset, model});
            if (it == summary.cells.end()) {
                cell << "-";
            } else if (it->second.timed_out) {
                cell << "timeout";
            } else if (it->second.accuracy_count == 0) {
                cell << "error";
            } else {
                cell << std::fixed << std::setprecision(2) << 100.0 * it->second.mean_accuracy
                     << " ± " << std::setprecision(2) << 100.0 * it->second.std_accuracy;
            }
            std::cout << std::setw(18) << cell.str();
        }
        std::ostringstream rank;
        if (auto it = summary.average_rank.find(model); it != summary.average_rank.end())
            rank << std::fixed << std::setprecision(2) << it->second;
        std::cout << std::setw(8) << rank.str() << "\n";
    }
    std::cout << records.size() << " records -> " << (fs::path(args.out_dir) / "runs.jsonl").string()
              << "\n";
    return partial ? kExitPartial : kExitOk;
}

int cmd_stats(const std::vector<std::string>& datasets, const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (const auto& name : datasets) {
        auto [graph, manifest] = glr::load_dataset(resolve_dataset_dir(name));
        glr::StatsReport stats = glr::dataset_stats(graph);
        std::cout << stats.name << ": n=" << stats.n << " m=" << stats.m << " L=" << stats.feature_dim
                  << " C=" << stats.class_count << std::scientific << std::setprecision(2)
                  << " density(n^2)=" << stats.density_n2 << " density(pairs)=" << stats.density_pairs
                  << "\n"
                  << std::defaultfloat;

        nlohmann::json j{{"name", stats.name},
                         {"n", stats.n},
                         {"m", stats.m},
                         {"L", stats.feature_dim},
                         {"feature_nnz", stats.feature_nnz},
                         {"C", stats.class_count},
                         {"density_n2", stats.density_n2},
                         {"density_pairs", stats.density_pairs},
                         {"per_class_counts", stats.per_class_counts}};
        nlohmann::json degrees = nlohmann::json::array();
        for (const auto& [degree, cumulative] : stats.cumulative_degree_counts)
            degrees.push_back({{"degree", degree}, {"cumulative_nodes", cumulative}});
        j["cumulative_degree_distribution"] = degrees;
        write_text_file(fs::path(out_dir) / (stats.name + "_stats.json"), j.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_homophily(const std::vector<std::string>& datasets, const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (const auto& name : datasets) {
        auto [graph, manifest] = glr::load_dataset(resolve_dataset_dir(name));
        glr::HomophilyProfile profile = glr::homophily_profile(graph);
        std::cout << graph.name << ": label_homophily=" << std::fixed << std::setprecision(4)
                  << profile.graph_label << " feature_homophily=" << profile.graph_feature
                  << " isolated_excluded=" << profile.excluded_isolated << "\n"
                  << std::defaultfloat;
        write_text_file(fs::path(out_dir) / (graph.name + "_homophily.csv"),
                        glr::homophily_csv(graph, profile));
    }
    return kExitOk;
}

int cmd_convert(const std::string& edges, const std::string& features, const std::string& labels,
                const std::string& out_dir, const glr::ConvertOptions& options) {
    glr::DatasetManifest manifest =
        glr::convert_edgelist(edges, features, labels, out_dir, options);
    std::cout << "converted " << manifest.name << ": n=" << manifest.n << " m=" << manifest.m
              << " L=" << manifest.feature_dim << " C=" << manifest.class_count << " -> " << out_dir
              << " (checksum " << manifest.checksum.value_or("-") << ")\n";
    return kExitOk;
}

int cmd_sweep(const std::string& dataset, const std::string& model,
              const std::vector<double>& fractions, std::uint64_t seed, const std::string& out_dir,
              bool deterministic, const std::map<std::string, double>& overrides) {
    auto [graph, manifest] = glr::load_dataset(resolve_dataset_dir(dataset));
    glr::ModelSpec spec = make_spec(model, overrides);
    auto points = glr::split_size_sweep(graph, spec, fractions, seed);
    if (deterministic) {
        for (auto& p : points) {
            p.record.fit_seconds = 0.0;
            p.record.predict_seconds = 0.0;
        }
    }
    fs::create_directories(out_dir);
    fs::path out = fs::path(out_dir) / (graph.name + "_" + model + "_sweep.csv");
    write_text_file(out, glr::sweep_csv(points));
    for (const auto& p : points)
        std::cout << graph.name << "/" << model << " test_fraction=" << p.test_fraction
                  << " accuracy=" << (p.record.accuracy ? std::to_string(*p.record.accuracy) : "-")
                  << "\n";
    std::cout << points.size() << " rows -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_report(const std::string& run_dir) {
    fs::path dir(run_dir);
    fs::path runs_path = dir / "runs.jsonl";
    if (!fs::exists(runs_path))
        throw std::runtime_error("report: missing " + runs_path.string());

    std::ifstream in(runs_path);
    auto records = glr::read_runs_jsonl(in);
    if (records.empty()) throw std::runtime_error("report: " + runs_path.string() + " is empty");
    auto summary = glr::summarize(records);

    write_text_file(dir / "tradeoff.csv", glr::tradeoff_csv(summary));
    std::cout << "tradeoff.csv: " << summary.cells.size() << " cells\n";

    // Homophily CSVs (produced by the homophily subcommand) provide both the
    // distribution export and the per-dataset graph feature homophily used
    // for the ranking threshold.
    std::vector<std::pair<std::string, std::string>> distributions;
    std::map<std::string, double> graph_feature;
    std::vector<std::string> missing;
    for (const auto& dataset : summary.datasets) {
        fs::path csv_path = dir / (dataset + "_homophily.csv");
        if (!fs::exists(csv_path)) {
            missing.push_back(csv_path.string());
            continue;
        }
        std::ifstream csv_in(csv_path);
        std::stringstream buffer;
        buffer << csv_in.rdbuf();
        std::string csv = buffer.str();
        distributions.emplace_back(dataset, csv);

        // graph-level feature homophily = mean over non-isolated rows
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);  // header
        double total = 0.0;
        std::size_t count = 0;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            auto fields = glr::detail::split_fields(line, ',');
            if (fields.size() < 4 || fields[2].empty()) continue;
            total += std::stod(std::string(fields[2]));
            ++count;
        }
        if (count) graph_feature[dataset] = total / static_cast<double>(count);
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& m : missing) joined += (joined.empty() ? "" : ", ") + m;
        throw std::runtime_error("report: missing homophily inputs: " + joined +
                                 " (run the homophily subcommand into the run directory)");
    }
    write_text_file(dir / "homophily_distributions.csv",
                    glr::homophily_distributions_csv(distributions));

    if (summary.datasets.size() >= 2) {
        auto ranking = glr::high_feature_homophily_ranking(summary.per_dataset_ranks, graph_feature);
        write_text_file(dir / "ranking_high_feature_homophily.csv", glr::ranking_csv(ranking));
        std::cout << "ranking_high_feature_homophily.csv: best average rank "
                  << ranking.front().model << " (" << std::setprecision(3)
                  << ranking.front().average_rank << " over " << ranking.front().dataset_count
                  << " datasets)\n";
    } else {
        std::cout << "ranking skipped: needs at least two datasets\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-graph node classification toolkit"};
    app.require_subcommand(1);

    // evaluate
    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Run the k-fold benchmark over datasets and models");
    evaluate->add_option("--dataset", eval_args.datasets, "Dataset directories")->required();
    evaluate->add_option("--model", eval_args.models, "Model kinds (" + glr::valid_model_kinds() + ")")
        ->required();
    evaluate->add_option("--k", eval_args.k, "Number of folds");
    evaluate->add_option("--repeats", eval_args.repeats, "Repeats per fold");
    evaluate->add_option("--seed", eval_args.seed, "Fold/fit seed");
    evaluate->add_option("--time-limit", eval_args.time_limit, "Per (model,dataset) time limit, seconds");
    evaluate->add_option("--out", eval_args.out_dir, "Output directory");
    evaluate->add_flag("--deterministic", eval_args.deterministic,
                       "Serial execution, zeroed wall-clock fields, byte-identical output");
    evaluate->add_option("--threads", eval_args.threads, "Worker threads (default: machine parallelism)");

    std::map<std::string, double> overrides;
    auto add_override = [&overrides](CLI::App* cmd, const std::string& flag, const std::string& key,
                                     const std::string& help) {
        cmd->add_option_function<double>(
            flag, [&overrides, key](double value) { overrides[key] = value; }, help);
    };
    auto add_all_overrides = [&](CLI::App* cmd) {
        add_override(cmd, "--l2-penalty", "l2_penalty", "LR-family L2 penalty");
        add_override(cmd, "--max-iter", "max_iter", "LR-family max iterations");
        add_override(cmd, "--grad-tol", "grad_tol", "LR-family gradient tolerance");
        add_override(cmd, "--row-normalize", "row_normalize", "LR-family per-row L2 normalization (0/1)");
        add_override(cmd, "--k-neighbors", "k_neighbors", "KNN neighbour count");
        add_override(cmd, "--embed-dim", "embed_dim", "KNN embedding dimension");
        add_override(cmd, "--diffusion-alpha", "diffusion_alpha", "Diffusion damping factor");
        add_override(cmd, "--diffusion-iters", "diffusion_iters", "Diffusion max iterations");
    };
    add_all_overrides(evaluate);

    // stats / homophily
    std::vector<std::string> stats_datasets;
    std::string stats_out = ".";
    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->add_option("dataset", stats_datasets, "Dataset directories")->required();
    stats->add_option("--out", stats_out, "Output directory for the JSON report");

    std::vector<std::string> homophily_datasets;
    std::string homophily_out = ".";
    auto* homophily = app.add_subcommand("homophily", "Label and feature homophily profiles");
    homophily->add_option("dataset", homophily_datasets, "Dataset directories")->required();
    homophily->add_option("--out", homophily_out, "Output directory for the per-node CSV");

    // convert
    std::string conv_edges, conv_features, conv_labels, conv_out;
    std::string conv_delimiter;
    glr::ConvertOptions conv_options;
    auto* convert = app.add_subcommand("convert", "Convert raw files to a canonical dataset directory");
    convert->add_option("--edges", conv_edges, "Edge list file")->required();
    convert->add_option("--features", conv_features, "Feature file (triplets, or dense rows)")->required();
    convert->add_option("--labels", conv_labels, "Label file (node label)")->required();
    convert->add_option("--out-dir", conv_out, "Canonical output directory")->required();
    convert->add_option("--name", conv_options.name, "Dataset name");
    convert->add_option("--delimiter", conv_delimiter, "Field delimiter (default: whitespace)");
    convert->add_flag("--string-ids", conv_options.string_ids, "Node tokens are strings");
    convert->add_flag("--dense-features", conv_options.dense_features,
                      "Feature rows are dense: node v1 ... vL");
    std::string conv_source;
    convert->add_option("--source-url", conv_source, "Provenance URL recorded in meta.json");

    // sweep
    std::string sweep_dataset, sweep_model = "glr", sweep_out = ".";
    std::vector<double> sweep_fractions;
    std::uint64_t sweep_seed = 42;
    bool sweep_deterministic = false;
    auto* sweep = app.add_subcommand("sweep", "Accuracy across train/test split sizes");
    sweep->add_option("--dataset", sweep_dataset, "Dataset directory")->required();
    sweep->add_option("--model", sweep_model, "Model kind");
    sweep->add_option("--fractions", sweep_fractions, "Test fractions in (0,1)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--seed", sweep_seed, "Split seed");
    sweep->add_option("--out", sweep_out, "Output directory");
    sweep->add_flag("--deterministic", sweep_deterministic, "Zero wall-clock fields in the CSV");
    add_all_overrides(sweep);

    // report
    std::string report_dir;
    auto* report = app.add_subcommand("report", "Emit tradeoff/ranking/distribution CSVs from a run");
    report->add_option("--run-dir", report_dir, "Directory containing runs.jsonl")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (evaluate->parsed()) {
            eval_args.overrides = overrides;
            return cmd_evaluate(eval_args);
        }
        if (stats->parsed()) return cmd_stats(stats_datasets, stats_out);
        if (homophily->parsed()) return cmd_homophily(homophily_datasets, homophily_out);
        if (convert->parsed()) {
            if (!conv_delimiter.empty()) conv_options.delimiter = conv_delimiter[0];
            if (!conv_source.empty()) conv_options.source_url = conv_source;
            return cmd_convert(conv_edges, conv_features, conv_labels, conv_out, conv_options);
        }
        if (sweep->parsed())
            return cmd_sweep(sweep_dataset, sweep_model, sweep_fractions, sweep_seed, sweep_out,
                             sweep_deterministic, overrides);
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}
