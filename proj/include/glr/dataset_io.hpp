#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glr/graph.hpp"

namespace glr {

/// Counts and provenance of a canonical dataset directory. Counts always
/// match the loaded content; the checksum pins the exact file bytes (the
/// same published graph circulates in several row orders).
struct DatasetManifest {
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;  // stored directed entries after canonicalization
    std::size_t feature_dim = 0;
    std::size_t class_count = 0;
    std::optional<std::string> source_url;
    std::optional<std::string> checksum;
};

namespace detail {

inline std::uint64_t fnv1a64(std::uint64_t h, const char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// FNV-1a over the bytes of edges.csv, features.csv, labels.csv in order.
inline std::string dataset_checksum(const std::filesystem::path& dir) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* file : {"edges.csv", "features.csv", "labels.csv"}) {
        std::ifstream in(dir / file, std::ios::binary);
        if (!in) throw std::runtime_error("checksum: cannot open " + (dir / file).string());
        char buf[1 << 16];
        while (in.read(buf, sizeof buf) || in.gcount() > 0)
            h = fnv1a64(h, buf, static_cast<std::size_t>(in.gcount()));
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

struct CsvError : std::runtime_error {
    CsvError(const std::filesystem::path& file, std::size_t line, const std::string& what)
        : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what) {}
};

/// Split on a delimiter; a 0 delimiter means any run of spaces/tabs.
inline std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    if (delimiter == 0) {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            if (i > start) fields.push_back(line.substr(start, i - start));
        }
    } else {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == delimiter) {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
    }
    return fields;
}

template <typename T>
T parse_number(std::string_view field, const std::filesystem::path& file, std::size_t line) {
    T value{};
    auto begin = field.data();
    auto end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw CsvError(file, line, "cannot parse '" + std::string(field) + "'");
    return value;
}

inline std::string trim_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace detail

/// Load a canonical dataset directory (meta.json, edges.csv, features.csv,
/// labels.csv). Validates every graph invariant and cross-checks the counts
/// declared in meta.json against the loaded content; verifies the checksum
/// when one is declared.
inline std::pair<SparseGraph, DatasetManifest> load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    for (const char* file : {"meta.json", "edges.csv", "features.csv", "labels.csv"})
        if (!fs::exists(dir / file))
            throw std::runtime_error("load_dataset: missing " + (dir / file).string());

    nlohmann::json meta;
    {
        std::ifstream in(dir / "meta.json");
        in >> meta;
    }
    DatasetManifest manifest;
    manifest.name = meta.at("name").get<std::string>();
    manifest.n = meta.at("n").get<std::size_t>();
    manifest.feature_dim = meta.at("L").get<std::size_t>();
    manifest.class_count = meta.at("C").get<std::size_t>();
    if (meta.contains("source_url")) manifest.source_url = meta.at("source_url").get<std::string>();
    if (meta.contains("checksum")) manifest.checksum = meta.at("checksum").get<std::string>();

    auto read_lines = [](const fs::path& file, const char* header, auto&& on_row) {
        std::ifstream in(file);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = detail::trim_cr(line);
            if (line_no == 1) {
                if (line != header)
                    throw detail::CsvError(file, 1, "expected header '" + std::string(header) + "'");
                continue;
            }
            if (line.empty()) continue;
            on_row(detail::split_fields(line, ','), line_no);
        }
    };

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    read_lines(dir / "edges.csv", "src,dst", [&](const auto& fields, std::size_t line_no) {
        if (fields.size() != 2) throw detail::CsvError(dir / "edges.csv", line_no, "expected 2 fields");
        edges.emplace_back(detail::parse_number<std::size_t>(fields[0], dir / "edges.csv", line_no),
                           detail::parse_number<std::size_t>(fields[1], dir / "edges.csv", line_no));
    });

    std::vector<Triplet> features;
    read_lines(dir / "features.csv", "row,col,value", [&](const auto& fields, std::size_t line_no) {
        if (fields.size() != 3)
            throw detail::CsvError(dir / "features.csv", line_no, "expected 3 fields");
        Triplet t;
        t.row = detail::parse_number<std::size_t>(fields[0], dir / "features.csv", line_no);
        t.col = detail::parse_number<std::size_t>(fields[1], dir / "features.csv", line_no);
        t.value = detail::parse_number<double>(fields[2], dir / "features.csv", line_no);
        features.push_back(t);
    });

    std::vector<std::int64_t> labels(manifest.n, -1);
    std::size_t label_rows = 0;
    read_lines(dir / "labels.csv", "node,label", [&](const auto& fields, std::size_t line_no) {
        if (fields.size() != 2) throw detail::CsvError(dir / "labels.csv", line_no, "expected 2 fields");
        auto node = detail::parse_number<std::size_t>(fields[0], dir / "labels.csv", line_no);
        auto label = detail::parse_number<std::int64_t>(fields[1], dir / "labels.csv", line_no);
        if (node >= manifest.n)
            throw detail::CsvError(dir / "labels.csv", line_no,
                                   "node " + std::to_string(node) + " out of range (meta.json n=" +
                                       std::to_string(manifest.n) + ")");
        labels[node] = label;
        ++label_rows;
    });
    if (label_rows != manifest.n)
        throw std::runtime_error("load_dataset: meta.json declares n=" + std::to_string(manifest.n) +
                                 " but labels.csv has " + std::to_string(label_rows) + " rows");

    SparseGraph g = build_graph(edges, features, labels, manifest.n, manifest.feature_dim,
                                manifest.name);
    validate_graph(g);

    if (g.class_count != manifest.class_count)
        throw std::runtime_error("load_dataset: meta.json declares C=" +
                                 std::to_string(manifest.class_count) + " but labels span " +
                                 std::to_string(g.class_count) + " classes");
    manifest.m = g.adjacency.nnz();
    if (meta.contains("m")) {
        auto declared = meta.at("m").get<std::size_t>();
        if (declared != manifest.m)
            throw std::runtime_error("load_dataset: meta.json declares m=" + std::to_string(declared) +
                                     " but adjacency has " + std::to_string(manifest.m) + " entries");
    }
    if (manifest.checksum) {
        std::string actual = detail::dataset_checksum(dir);
        if (actual != *manifest.checksum)
            throw std::runtime_error("load_dataset: checksum mismatch, meta.json says " +
                                     *manifest.checksum + ", files hash to " + actual);
    }
    return {std::move(g), std::move(manifest)};
}

/// Write a graph back out in canonical form. Deterministic: CSR order for
/// edges and features, node order for labels, LF endings. Returns the
/// manifest including the fresh checksum.
inline DatasetManifest save_dataset(const SparseGraph& g, const std::filesystem::path& dir,
                                    const std::optional<std::string>& source_url = std::nullopt) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "edges.csv", std::ios::binary);
        out << "src,dst\n";
        for (std::size_t u = 0; u < g.node_count(); ++u)
            for (std::size_t v : g.adjacency.row_cols(u)) out << u << "," << v << "\n";
    }
    {
        std::ofstream out(dir / "features.csv", std::ios::binary);
        out << "row,col,value\n";
        std::ostringstream value;
        value << std::setprecision(17);
        for (std::size_t r = 0; r < g.features.n_rows; ++r) {
            auto cols = g.features.row_cols(r);
            auto vals = g.features.row_values(r);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                value.str("");
                value << vals[k];
                out << r << "," << cols[k] << "," << value.str() << "\n";
            }
        }
    }
    {
        std::ofstream out(dir / "labels.csv", std::ios::binary);
        out << "node,label\n";
        for (std::size_t u = 0; u < g.node_count(); ++u) out << u << "," << g.labels[u] << "\n";
    }

    DatasetManifest manifest;
    manifest.name = g.name;
    manifest.n = g.node_count();
    manifest.m = g.adjacency.nnz();
    manifest.feature_dim = g.features.n_cols;
    manifest.class_count = g.class_count;
    manifest.source_url = source_url;
    manifest.checksum = detail::dataset_checksum(dir);

    nlohmann::json meta{{"name", manifest.name}, {"n", manifest.n},       {"m", manifest.m},
                        {"L", manifest.feature_dim}, {"C", manifest.class_count},
                        {"checksum", *manifest.checksum}};
    if (manifest.source_url) meta["source_url"] = *manifest.source_url;
    std::ofstream out(dir / "meta.json", std::ios::binary);
    out << meta.dump(2) << "\n";
    return manifest;
}

/// Converter options. A zero delimiter splits on whitespace runs.
struct ConvertOptions {
    char delimiter = 0;
    bool string_ids = false;      // node tokens are arbitrary strings
    bool dense_features = false;  // feature rows are "node v1 v2 ... vL"
    std::string name = "dataset";
    std::optional<std::string> source_url;
};

/// Convert raw edge/feature/label text files into a canonical dataset
/// directory. Node ids are densified (numeric order, or lexicographic with
/// string_ids); label tokens map to dense ids with the mapping written to
/// label_map.csv. Re-running the conversion overwrites the directory with
/// identical bytes.
inline DatasetManifest convert_edgelist(const std::filesystem::path& edge_file,
                                        const std::filesystem::path& feature_file,
                                        const std::filesystem::path& label_file,
                                        const std::filesystem::path& out_dir,
                                        const ConvertOptions& options = {}) {
    namespace fs = std::filesystem;
    auto each_row = [&](const fs::path& file, auto&& on_row) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("convert: cannot open " + file.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            line = detail::trim_cr(line);
            if (line.empty() || line[0] == '#') continue;
            on_row(detail::split_fields(line, options.delimiter), line_no);
        }
    };

    // Pass 1: the label file defines the node set (isolated nodes are legal,
    // unlabeled nodes are not).
    std::vector<std::pair<std::string, std::string>> label_rows;
    each_row(label_file, [&](const auto& fields, std::size_t line_no) {
        if (fields.size() != 2) throw detail::CsvError(label_file, line_no, "expected 2 fields");
        label_rows.emplace_back(std::string(fields[0]), std::string(fields[1]));
    });
    if (label_rows.empty()) throw std::runtime_error("convert: label file has no rows");

    std::map<std::string, std::size_t> node_ids;
    if (options.string_ids) {
        std::set<std::string> tokens;
        for (const auto& [node, label] : label_rows) tokens.insert(node);
        std::size_t next = 0;
        for (const auto& token : tokens) node_ids[token] = next++;
    } else {
        std::set<std::int64_t> numeric;
        for (const auto& [node, label] : label_rows) {
            std::int64_t value = 0;
            auto [ptr, ec] = std::from_chars(node.data(), node.data() + node.size(), value);
            if (ec != std::errc{} || ptr != node.data() + node.size())
                throw std::runtime_error("convert: non-integer node token '" + node +
                                         "' (use string-ids mode)");
            numeric.insert(value);
        }
        std::size_t next = 0;
        std::map<std::int64_t, std::size_t> dense;
        for (auto value : numeric) dense[value] = next++;
        for (const auto& [node, label] : label_rows)
            node_ids[node] = dense.at(std::stoll(node));
    }
    const std::size_t n = node_ids.size();

    auto lookup = [&](std::string_view token, const fs::path& file, std::size_t line_no,
                      const char* what) {
        auto it = node_ids.find(std::string(token));
        if (it == node_ids.end())
            throw detail::CsvError(file, line_no,
                                   std::string(what) + " references unknown node '" +
                                       std::string(token) + "'");
        return it->second;
    };

    // Label tokens -> dense ids, lexicographic for strings, numeric when possible.
    std::map<std::string, std::size_t> label_ids;
    {
        std::set<std::string> tokens;
        for (const auto& [node, label] : label_rows) tokens.insert(label);
        bool all_numeric = true;
        std::vector<std::pair<std::int64_t, std::string>> numeric;
        for (const auto& token : tokens) {
            std::int64_t value = 0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size()) {
                all_numeric = false;
                break;
            }
            numeric.emplace_back(value, token);
        }
        std::size_t next = 0;
        if (all_numeric) {
            std::sort(numeric.begin(), numeric.end());
            for (const auto& [value, token] : numeric) label_ids[token] = next++;
        } else {
            for (const auto& token : tokens) label_ids[token] = next++;
        }
    }

    std::vector<std::int64_t> labels(n, -1);
    for (const auto& [node, label] : label_rows) {
        std::size_t id = node_ids.at(node);
        if (labels[id] != -1 && labels[id] != static_cast<std::int64_t>(label_ids.at(label)))
            throw std::runtime_error("convert: node '" + node + "' labeled twice inconsistently");
        labels[id] = static_cast<std::int64_t>(label_ids.at(label));
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    each_row(edge_file, [&](const auto& fields, std::size_t line_no) {
        if (fields.size() < 2) throw detail::CsvError(edge_file, line_no, "expected 2 fields");
        edges.emplace_back(lookup(fields[0], edge_file, line_no, "edge"),
                           lookup(fields[1], edge_file, line_no, "edge"));
    });

    std::vector<Triplet> features;
    std::size_t feature_dim = 0;
    if (options.dense_features) {
        std::optional<std::size_t> width;
        each_row(feature_file, [&](const auto& fields, std::size_t line_no) {
            if (fields.size() < 2) throw detail::CsvError(feature_file, line_no, "expected node + values");
            std::size_t row = lookup(fields[0], feature_file, line_no, "feature row");
            if (!width) width = fields.size() - 1;
            if (fields.size() - 1 != *width)
                throw detail::CsvError(feature_file, line_no, "inconsistent feature vector length");
            for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
                double value = detail::parse_number<double>(fields[c + 1], feature_file, line_no);
                if (value != 0.0) features.push_back({row, c, value});
            }
        });
        feature_dim = width.value_or(0);
    } else {
        each_row(feature_file, [&](const auto& fields, std::size_t line_no) {
            if (fields.size() != 3) throw detail::CsvError(feature_file, line_no, "expected 3 fields");
            Triplet t;
            t.row = lookup(fields[0], feature_file, line_no, "feature row");
            t.col = detail::parse_number<std::size_t>(fields[1], feature_file, line_no);
            t.value = detail::parse_number<double>(fields[2], feature_file, line_no);
            features.push_back(t);
            feature_dim = std::max(feature_dim, t.col + 1);
        });
    }

    SparseGraph g = build_graph(edges, features, labels, n, feature_dim, options.name);
    validate_graph(g);
    DatasetManifest manifest = save_dataset(g, out_dir, options.source_url);

    {
        std::ofstream out(out_dir / "label_map.csv", std::ios::binary);
        out << "label_id,original\n";
        std::vector<std::pair<std::size_t, std::string>> ordered;
        for (const auto& [token, id] : label_ids) ordered.emplace_back(id, token);
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [id, token] : ordered) out << id << "," << token << "\n";
    }
    {
        std::ofstream out(out_dir / "node_map.csv", std::ios::binary);
        out << "node_id,original\n";
        std::vector<std::pair<std::size_t, std::string>> ordered;
        for (const auto& [token, id] : node_ids) ordered.emplace_back(id, token);
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [id, token] : ordered) out << id << "," << token << "\n";
    }
    return manifest;
}

}  // namespace glr
