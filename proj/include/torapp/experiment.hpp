#pragma once

#include "torapp/dataset_io.hpp"
#include "torapp/flow.hpp"
#include "torapp/learn.hpp"
#include "torapp/metrics.hpp"
#include "torapp/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace torapp {

using Logger = std::function<void(const std::string&)>;

struct ExtractOptions {
    std::set<std::string> exclude_labels;
    std::optional<PaddingMode> expect_padding; // reject entries with another mode
};

struct ExtractStats {
    std::size_t captures = 0;
    std::size_t sessions = 0;
    std::size_t flows = 0;
    std::size_t discarded_packets = 0; // after a FIN/RST window
    std::size_t skipped_packets = 0;   // non-TCP, non-IPv4, malformed
};

/// Training-phase preprocessing over a labeled corpus: captures, sessions,
/// flows, labeled 68-dimensional vectors.
FeatureDataset extract_dataset(const CorpusManifest& manifest, const FlowConfig& config,
                               const ExtractOptions& options = {}, ExtractStats* stats = nullptr);

struct ExperimentConfig {
    std::string name = "experiment";
    PaddingMode padding = PaddingMode::Reduced;
    double flow_timeout_s = 10;
    double activity_timeout_s = 2;
    bool include_browser = true;
    std::string browser_label = "browser";
    std::vector<ClassifierKind> classifiers = {ClassifierKind::RandomForest, ClassifierKind::Knn,
                                               ClassifierKind::LinearSvmOvr};
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    KnnParams knn;
    ForestParams forest; // seed is derived per fold from `seed`
    SvmParams svm;       // likewise

    FlowConfig flow_config() const { return {flow_timeout_s, activity_timeout_s}; }
    void validate() const;
};

/// Provenance tag of a scaler fitted on `rows` of an experiment's dataset.
std::string fold_scaler_tag(const std::string& experiment, std::size_t fold, std::span<const std::size_t> rows);

struct FoldRecord {
    Fold split;
    std::string scaler_tag;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> classes;
    std::map<std::string, std::size_t> flows_per_class;
    std::size_t flows = 0;
    std::vector<FoldRecord> folds;
    std::vector<Report> reports; // same order as config.classifiers
    std::vector<std::size_t> truths;                    // per flow
    std::vector<std::vector<std::size_t>> predictions;  // per classifier, per flow
};

/// Cross-validated evaluation on already extracted flows: per fold, fit the
/// scaler on the training rows only, train each classifier, predict the
/// test rows; confusion matrices are summed over folds.
ExperimentResult run_experiment(const ExperimentConfig& config, const FeatureDataset& dataset,
                                const Logger& log = {});

/// Extract from the corpus, then evaluate.
ExperimentResult run_experiment(const ExperimentConfig& config, const CorpusManifest& manifest,
                                const Logger& log = {});

/// `report.txt` (tables) plus one `<classifier>.kv` file per classifier.
void write_experiment_reports(const ExperimentResult& result, const std::filesystem::path& dir);

/// Key/value metadata recorded alongside every report.
std::vector<std::pair<std::string, std::string>> experiment_metadata(const ExperimentResult& result);

/// The 16 combinations of padding x flow timeout x activity timeout x
/// browser, numbered as experiments 1-16: flow timeout varies slowest,
/// then activity timeout, then padding, then browser inclusion.
std::vector<ExperimentConfig> table1_grid(const ExperimentConfig& base);

/// Run every grid cell against the corpus matching its padding mode and
/// write `experiment_NN/` report directories plus `grid_summary.txt`.
std::vector<ExperimentResult> run_grid(const ExperimentConfig& base, const CorpusManifest& reduced,
                                       const CorpusManifest& full, const std::filesystem::path& out_dir,
                                       const Logger& log = {});

} // namespace torapp
