#include "torapp/experiment.hpp"

#include "torapp/error.hpp"
#include "torapp/pcap.hpp"
#include "torapp/scaler.hpp"
#include "torapp/session.hpp"
#include "torapp/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace torapp {
namespace {

std::string yes_no(bool b) { return b ? "Yes" : "No"; }

std::string padding_display(PaddingMode m) {
    switch (m) {
    case PaddingMode::None: return "None";
    case PaddingMode::Reduced: return "Reduced";
    case PaddingMode::Full: return "Full";
    }
    return "None";
}

std::string classifier_params(const ExperimentConfig& c, ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Knn: return "k=" + std::to_string(c.knn.k);
    case ClassifierKind::RandomForest:
        return "trees=" + std::to_string(c.forest.trees) +
               " max_depth=" + (c.forest.max_depth ? std::to_string(*c.forest.max_depth) : "none");
    case ClassifierKind::LinearSvmOvr:
        return "C=" + text::format_double(c.svm.C) + " epochs=" + std::to_string(c.svm.epochs);
    }
    return {};
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << body;
    if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

ClassifierModel train(const ExperimentConfig& c, ClassifierKind kind, const LabeledDataset& ds, std::size_t fold) {
    switch (kind) {
    case ClassifierKind::Knn: return train_knn(ds, c.knn);
    case ClassifierKind::RandomForest: {
        auto p = c.forest;
        p.seed = derive_seed(c.seed, 2, fold);
        return train_random_forest(ds, p);
    }
    case ClassifierKind::LinearSvmOvr: {
        auto p = c.svm;
        p.seed = derive_seed(c.seed, 3, fold);
        return train_linear_svm_ovr(ds, p);
    }
    }
    throw PreconditionError("unknown classifier kind");
}

} // namespace

FeatureDataset extract_dataset(const CorpusManifest& manifest, const FlowConfig& config,
                               const ExtractOptions& options, ExtractStats* stats) {
    config.validate();
    ExtractStats local;
    FeatureDataset ds;
    ds.flow_timeout_s = config.flow_timeout_s;
    ds.activity_timeout_s = config.activity_timeout_s;

    std::optional<PaddingMode> seen;
    for (const auto& entry : manifest.entries) {
        if (options.exclude_labels.count(entry.label)) continue;
        if (options.expect_padding && entry.padding != *options.expect_padding)
            throw PreconditionError("capture '" + entry.filename + "' uses " +
                                    std::string(padding_mode_id(entry.padding)) + " padding, expected " +
                                    std::string(padding_mode_id(*options.expect_padding)));
        if (!seen) seen = entry.padding;
        else if (*seen != entry.padding) ds.padding = "mixed";

        const auto contents = read_pcap(manifest.directory / entry.filename);
        ++local.captures;
        local.skipped_packets += contents.skipped();
        const auto sessions = assemble_sessions(contents.packets);
        for (std::size_t s = 0; s < sessions.size(); ++s) {
            auto split = split_flows(sessions[s], config, entry.filename + "#" + std::to_string(s));
            local.discarded_packets += split.discarded;
            ++local.sessions;
            for (const auto& flow : label_flows(std::move(split.flows), entry.label)) {
                ds.vectors.push_back(extract_features(flow, config));
                ++local.flows;
            }
        }
    }
    if (seen && ds.padding != "mixed") ds.padding = std::string(padding_mode_id(*seen));
    if (stats) *stats = local;
    return ds;
}

void ExperimentConfig::validate() const {
    if (name.empty() || name.find_first_of(" \t\r\n,=/") != std::string::npos)
        throw PreconditionError("experiment name '" + name + "' must be a token without '/', ',' or '='");
    if (padding == PaddingMode::None)
        throw PreconditionError("experiments run on reduced or full padding corpora");
    flow_config().validate();
    if (folds < 2) throw PreconditionError("cross-validation needs at least 2 folds");
    if (classifiers.empty()) throw PreconditionError("no classifiers selected");
}

std::string fold_scaler_tag(const std::string& experiment, std::size_t fold, std::span<const std::size_t> rows) {
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a over the row indices
    for (auto r : rows) {
        for (int b = 0; b < 8; ++b) {
            h ^= (r >> (8 * b)) & 0xff;
            h *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return experiment + "/fold" + std::to_string(fold) + "/train-n" + std::to_string(rows.size()) + "-" + hex;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const FeatureDataset& dataset, const Logger& log) {
    config.validate();
    if (dataset.padding != padding_mode_id(config.padding))
        throw PreconditionError("dataset padding '" + dataset.padding + "' does not match the experiment's '" +
                                std::string(padding_mode_id(config.padding)) + "'");
    if (seconds_to_micros(dataset.flow_timeout_s) != seconds_to_micros(config.flow_timeout_s) ||
        seconds_to_micros(dataset.activity_timeout_s) != seconds_to_micros(config.activity_timeout_s))
        throw PreconditionError("dataset was extracted with different flow/activity timeouts");

    std::vector<FeatureVector> vectors;
    for (const auto& v : dataset.vectors) {
        if (!v.label) throw PreconditionError("dataset contains an unlabeled flow");
        if (!config.include_browser && *v.label == config.browser_label) continue;
        vectors.push_back(v);
    }
    if (vectors.empty()) throw PreconditionError("experiment '" + config.name + "' has no flows");

    ExperimentResult result;
    result.config = config;
    const auto raw = LabeledDataset::from_vectors(vectors);
    result.classes = raw.classes;
    result.flows = raw.size();
    for (auto t : raw.targets) ++result.flows_per_class[raw.classes[t]];
    result.truths = raw.targets;

    const auto folds = stratified_folds(raw, config.folds, derive_seed(config.seed, 1));
    std::vector<ConfusionMatrix> cms(config.classifiers.size(), ConfusionMatrix(raw.classes));
    result.predictions.assign(config.classifiers.size(), std::vector<std::size_t>(raw.size(), 0));

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& split = folds[f];
        const auto tag = fold_scaler_tag(config.name, f, split.train);
        auto train_set = raw.subset(split.train);
        auto test_set = raw.subset(split.test);
        const auto scaler = fit_scaler(train_set.features, tag);
        train_set.features = apply_scaler(scaler, train_set.features);
        train_set.scaler_id = tag;
        test_set.features = apply_scaler(scaler, test_set.features);
        test_set.scaler_id = tag;
        result.folds.push_back({split, tag});

        for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
            const auto kind = config.classifiers[c];
            if (log)
                log(config.name + ": fold " + std::to_string(f + 1) + "/" + std::to_string(folds.size()) + " " +
                    std::string(kind_display_name(kind)));
            const auto model = train(config, kind, train_set, f);
            if (model.scaler_id != test_set.scaler_id)
                throw PreconditionError("model and test fold were standardized by different scalers");
            const auto predicted = predict_rows(model, test_set.features);
            for (std::size_t i = 0; i < predicted.size(); ++i) {
                cms[c].add(test_set.targets[i], predicted[i]);
                result.predictions[c][split.test[i]] = predicted[i];
            }
        }
    }

    for (std::size_t c = 0; c < config.classifiers.size(); ++c)
        result.reports.push_back(make_report(std::string(kind_display_name(config.classifiers[c])), std::move(cms[c])));
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const CorpusManifest& manifest, const Logger& log) {
    config.validate();
    ExtractOptions options;
    options.expect_padding = config.padding;
    if (!config.include_browser) options.exclude_labels.insert(config.browser_label);
    if (manifest.entries.empty()) throw PreconditionError("corpus manifest lists no captures");

    ExtractStats stats;
    const auto dataset = extract_dataset(manifest, config.flow_config(), options, &stats);
    if (log)
        log(config.name + ": " + std::to_string(stats.captures) + " captures, " + std::to_string(stats.sessions) +
            " sessions, " + std::to_string(stats.flows) + " flows");

    std::set<std::string> expected;
    for (const auto& e : manifest.entries)
        if (!options.exclude_labels.count(e.label)) expected.insert(e.label);
    std::set<std::string> present;
    for (const auto& v : dataset.vectors) present.insert(*v.label);
    for (const auto& label : expected)
        if (!present.count(label)) throw PreconditionError("class '" + label + "' produced zero flows");

    return run_experiment(config, dataset, log);
}

std::vector<std::pair<std::string, std::string>> experiment_metadata(const ExperimentResult& r) {
    const auto& c = r.config;
    std::vector<std::pair<std::string, std::string>> kv = {
        {"experiment", c.name},
        {"padding", std::string(padding_mode_id(c.padding))},
        {"flow_timeout_s", text::format_double(c.flow_timeout_s)},
        {"activity_timeout_s", text::format_double(c.activity_timeout_s)},
        {"include_browser", c.include_browser ? "true" : "false"},
        {"browser_label", c.browser_label},
        {"folds", std::to_string(c.folds)},
        {"seed", std::to_string(c.seed)},
        {"feature_layout", std::to_string(kFeatureLayoutVersion)},
        {"flows", std::to_string(r.flows)},
    };
    for (const auto& [label, n] : r.flows_per_class) kv.emplace_back("flows." + label, std::to_string(n));
    for (std::size_t f = 0; f < r.folds.size(); ++f)
        kv.emplace_back("fold" + std::to_string(f) + ".scaler", r.folds[f].scaler_tag);
    return kv;
}

void write_experiment_reports(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create report directory '" + dir.string() + "'");

    const auto& c = r.config;
    std::ostringstream out;
    out << "Experiment: " << c.name << '\n'
        << "Connection padding: " << padding_display(c.padding) << " | Flow timeout: "
        << text::format_double(c.flow_timeout_s) << " s | Activity timeout: " << text::format_double(c.activity_timeout_s)
        << " s | Web browser: " << yes_no(c.include_browser) << '\n'
        << "Flows: " << r.flows << " (";
    bool first = true;
    for (const auto& [label, n] : r.flows_per_class) {
        out << (first ? "" : ", ") << label << ": " << n;
        first = false;
    }
    out << ") | Folds: " << c.folds << " (stratified) | Seed: " << c.seed << '\n';
    out << "Classifiers:";
    for (std::size_t i = 0; i < c.classifiers.size(); ++i)
        out << (i ? "; " : " ") << kind_display_name(c.classifiers[i]) << " (" << classifier_params(c, c.classifiers[i])
            << ")";
    out << "\n\n";
    out << format_per_class_table(r.reports, "Per-class performance of each classifier") << '\n';
    out << format_overall_table(r.reports, "Classifiers' overall performance");
    write_text(dir / "report.txt", out.str());

    const auto meta = experiment_metadata(r);
    for (std::size_t i = 0; i < c.classifiers.size(); ++i) {
        auto kv = meta;
        kv.emplace_back("classifier_id", std::string(kind_id(c.classifiers[i])));
        kv.emplace_back("classifier_params", classifier_params(c, c.classifiers[i]));
        write_text(dir / (std::string(kind_id(c.classifiers[i])) + ".kv"), format_report_kv(r.reports[i], kv));
    }
}

std::vector<ExperimentConfig> table1_grid(const ExperimentConfig& base) {
    std::vector<ExperimentConfig> grid;
    int number = 1;
    for (double flow_timeout : {10.0, 15.0})
        for (double activity_timeout : {2.0, 5.0})
            for (auto padding : {PaddingMode::Reduced, PaddingMode::Full})
                for (bool browser : {true, false}) {
                    auto c = base;
                    char name[32];
                    std::snprintf(name, sizeof name, "experiment_%02d", number++);
                    c.name = name;
                    c.padding = padding;
                    c.flow_timeout_s = flow_timeout;
                    c.activity_timeout_s = activity_timeout;
                    c.include_browser = browser;
                    grid.push_back(std::move(c));
                }
    return grid;
}

std::vector<ExperimentResult> run_grid(const ExperimentConfig& base, const CorpusManifest& reduced,
                                       const CorpusManifest& full, const std::filesystem::path& out_dir,
                                       const Logger& log) {
    const auto grid = table1_grid(base);
    std::vector<ExperimentResult> results;
    std::optional<FeatureDataset> cached;
    std::optional<std::tuple<PaddingMode, double, double>> cached_key;

    for (const auto& cell : grid) {
        cell.validate();
        const auto key = std::make_tuple(cell.padding, cell.flow_timeout_s, cell.activity_timeout_s);
        if (cached_key != key) {
            const auto& manifest = cell.padding == PaddingMode::Full ? full : reduced;
            ExtractOptions options;
            options.expect_padding = cell.padding;
            cached = extract_dataset(manifest, cell.flow_config(), options);
            cached_key = key;
        }
        if (log) log(cell.name + ": running");
        results.push_back(run_experiment(cell, *cached, log));
        write_experiment_reports(results.back(), out_dir / cell.name);
    }

    std::ostringstream out;
    out << "Experiment grid (" << results.size() << " experiments, seed " << base.seed << ")\n\n";
    for (std::size_t c = 0; c < base.classifiers.size(); ++c) {
        out << kind_display_name(base.classifiers[c]) << '\n';
        out << "Experiment     | Padding | T_F | T_A | Browser | Avg. Accuracy | Error Rate | Micro F1 | Macro Precision | "
               "Macro Recall | Macro F1\n";
        for (const auto& r : results) {
            const auto& o = r.reports[c].overall;
            char line[256];
            std::snprintf(line, sizeof line,
                          "%-14s | %-7s | %3g | %3g | %-7s | %13.4f | %10.4f | %8.4f | %15.4f | %12.4f | %8.4f\n",
                          r.config.name.c_str(), padding_display(r.config.padding).c_str(), r.config.flow_timeout_s,
                          r.config.activity_timeout_s, yes_no(r.config.include_browser).c_str(), o.average_accuracy,
                          o.error_rate, o.micro_f1, o.macro_precision, o.macro_recall, o.macro_f1);
            out << line;
        }
        out << '\n';
    }
    write_text(out_dir / "grid_summary.txt", out.str());
    return results;
}

} // namespace torapp
