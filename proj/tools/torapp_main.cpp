#include "torapp/dataset_io.hpp"
#include "torapp/error.hpp"
#include "torapp/experiment.hpp"
#include "torapp/learn.hpp"
#include "torapp/metrics.hpp"
#include "torapp/scaler.hpp"
#include "torapp/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace torapp;

namespace {

struct ConfigFlags {
    std::string padding = "reduced";
    std::vector<std::string> classifiers = {"random_forest", "knn", "svm_linear_ovr"};
    std::size_t max_depth = 0;
};

void add_experiment_flags(CLI::App* cmd, ExperimentConfig& c, ConfigFlags& f) {
    cmd->add_option("--name", c.name, "Experiment name, used in scaler provenance tags")->capture_default_str();
    cmd->add_option("--padding", f.padding, "reduced or full")->capture_default_str();
    cmd->add_option("--flow-timeout-s", c.flow_timeout_s, "Flow timeout T_F in seconds")->capture_default_str();
    cmd->add_option("--activity-timeout-s", c.activity_timeout_s, "Activity timeout T_A in seconds")
        ->capture_default_str();
    cmd->add_option("--include-browser", c.include_browser, "Keep browser-labeled captures")->capture_default_str();
    cmd->add_option("--browser-label", c.browser_label)->capture_default_str();
    cmd->add_option("--classifiers", f.classifiers, "knn, random_forest, svm_linear_ovr")->capture_default_str();
    cmd->add_option("--folds", c.folds, "Stratified cross-validation folds")->capture_default_str();
    cmd->add_option("--seed", c.seed)->capture_default_str();
    cmd->add_option("--knn-k", c.knn.k)->capture_default_str();
    cmd->add_option("--forest-trees", c.forest.trees)->capture_default_str();
    cmd->add_option("--forest-max-depth", f.max_depth, "0 for unlimited")->capture_default_str();
    cmd->add_option("--svm-c", c.svm.C)->capture_default_str();
    cmd->add_option("--svm-epochs", c.svm.epochs)->capture_default_str();
}

void resolve(ExperimentConfig& c, const ConfigFlags& f) {
    c.padding = parse_padding_mode(f.padding);
    c.classifiers.clear();
    for (const auto& id : f.classifiers) c.classifiers.push_back(parse_kind(id));
    if (f.max_depth > 0) c.forest.max_depth = f.max_depth;
    c.validate();
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

CorpusManifest load_corpus(const fs::path& p) {
    if (!fs::exists(p)) throw IoError("corpus '" + p.string() + "' does not exist");
    return read_manifest(p);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tor app traffic classification pipeline"};
    app.set_config("--config", "", "Read flags from a TOML/INI file");
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic PCAP corpus");
    fs::path synth_out, archetypes_file;
    std::size_t sessions = 50;
    double duration = 120;
    std::string synth_padding = "reduced";
    std::uint64_t synth_seed = 1;
    PaddingConfig padding_cfg;
    synth->add_option("--out", synth_out, "Corpus directory")->required();
    synth->add_option("--archetypes", archetypes_file, "Archetype JSON; built-in presets when omitted");
    synth->add_option("--sessions-per-class", sessions)->capture_default_str();
    synth->add_option("--duration-s", duration)->capture_default_str();
    synth->add_option("--padding", synth_padding, "none, reduced or full")->capture_default_str();
    synth->add_option("--padding-cell-size", padding_cfg.padding_cell_size)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    // extract
    auto* extract = app.add_subcommand("extract", "Extract labeled flow features from a corpus");
    fs::path extract_corpus, extract_out;
    FlowConfig flow_cfg;
    std::vector<std::string> exclude;
    extract->add_option("--corpus", extract_corpus, "Corpus directory or manifest.csv")->required();
    extract->add_option("--out", extract_out, "Dataset file")->required();
    extract->add_option("--flow-timeout-s", flow_cfg.flow_timeout_s)->capture_default_str();
    extract->add_option("--activity-timeout-s", flow_cfg.activity_timeout_s)->capture_default_str();
    extract->add_option("--exclude-label", exclude, "Skip captures with this label");

    // train
    auto* train = app.add_subcommand("train", "Fit a scaler and train one classifier on a dataset");
    fs::path train_dataset, model_out, scaler_out;
    std::string train_kind = "random_forest";
    ExperimentConfig train_params;
    std::size_t train_max_depth = 0;
    train->add_option("--dataset", train_dataset)->required();
    train->add_option("--classifier", train_kind, "knn, random_forest or svm_linear_ovr")->capture_default_str();
    train->add_option("--model", model_out, "Model output file")->required();
    train->add_option("--scaler", scaler_out, "Scaler output file")->required();
    train->add_option("--seed", train_params.seed)->capture_default_str();
    train->add_option("--knn-k", train_params.knn.k)->capture_default_str();
    train->add_option("--forest-trees", train_params.forest.trees)->capture_default_str();
    train->add_option("--forest-max-depth", train_max_depth, "0 for unlimited")->capture_default_str();
    train->add_option("--svm-c", train_params.svm.C)->capture_default_str();
    train->add_option("--svm-epochs", train_params.svm.epochs)->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Classify a labeled dataset with a trained model");
    fs::path eval_model, eval_scaler, eval_dataset, eval_out;
    evaluate->add_option("--model", eval_model)->required();
    evaluate->add_option("--scaler", eval_scaler)->required();
    evaluate->add_option("--dataset", eval_dataset)->required();
    evaluate->add_option("--out", eval_out, "Report directory");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Cross-validated evaluation of one configuration");
    ExperimentConfig exp_cfg;
    ConfigFlags exp_flags;
    fs::path exp_corpus, exp_out;
    experiment->add_option("--corpus", exp_corpus, "Corpus directory or manifest.csv")->required();
    experiment->add_option("--out", exp_out, "Report directory")->required();
    add_experiment_flags(experiment, exp_cfg, exp_flags);

    // grid
    auto* grid = app.add_subcommand("grid", "Run the 16-configuration experiment grid");
    ExperimentConfig grid_cfg;
    ConfigFlags grid_flags;
    fs::path grid_reduced, grid_full, grid_out;
    grid->add_option("--reduced-corpus", grid_reduced)->required();
    grid->add_option("--full-corpus", grid_full)->required();
    grid->add_option("--out", grid_out, "Directory for experiment_NN/ reports")->required();
    add_experiment_flags(grid, grid_cfg, grid_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            const auto specs = archetypes_file.empty() ? default_archetypes() : load_archetypes(archetypes_file);
            padding_cfg.mode = parse_padding_mode(synth_padding);
            const auto m = build_labeled_corpus(specs, sessions, duration, padding_cfg, synth_seed, synth_out);
            std::cout << "wrote " << m.entries.size() << " captures to " << synth_out.string() << '\n';
        } else if (*extract) {
            ExtractOptions options;
            options.exclude_labels.insert(exclude.begin(), exclude.end());
            ExtractStats stats;
            const auto ds = extract_dataset(load_corpus(extract_corpus), flow_cfg, options, &stats);
            write_dataset(ds, extract_out);
            std::cout << stats.captures << " captures, " << stats.sessions << " sessions, " << stats.flows
                      << " flows, " << stats.discarded_packets << " packets after FIN/RST, " << stats.skipped_packets
                      << " skipped packets\n";
        } else if (*train) {
            const auto ds = read_dataset(train_dataset);
            if (ds.vectors.empty()) throw PreconditionError("dataset '" + train_dataset.string() + "' is empty");
            auto raw = LabeledDataset::from_vectors(ds.vectors);
            std::vector<std::size_t> all(raw.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            const auto scaler = fit_scaler(raw.features, fold_scaler_tag("train", 0, all));
            raw.features = apply_scaler(scaler, raw.features);
            raw.scaler_id = scaler.fitted_on;
            if (train_max_depth > 0) train_params.forest.max_depth = train_max_depth;
            ClassifierModel model;
            switch (parse_kind(train_kind)) {
            case ClassifierKind::Knn: model = train_knn(raw, train_params.knn); break;
            case ClassifierKind::RandomForest:
                train_params.forest.seed = train_params.seed;
                model = train_random_forest(raw, train_params.forest);
                break;
            case ClassifierKind::LinearSvmOvr:
                train_params.svm.seed = train_params.seed;
                model = train_linear_svm_ovr(raw, train_params.svm);
                break;
            }
            write_scaler(scaler, scaler_out);
            write_model(model, model_out);
            std::cout << "trained " << kind_display_name(model.kind()) << " on " << raw.size() << " flows, "
                      << raw.classes.size() << " classes\n";
        } else if (*evaluate) {
            const auto model = read_model(eval_model);
            const auto scaler = read_scaler(eval_scaler);
            if (scaler.fitted_on != model.scaler_id)
                throw PreconditionError("scaler '" + scaler.fitted_on + "' is not the one the model was trained with ('" +
                                        model.scaler_id + "')");
            const auto ds = read_dataset(eval_dataset);
            std::vector<std::string> truths, predictions;
            for (const auto& v : ds.vectors) {
                if (!v.label) throw PreconditionError("evaluation needs labeled flows");
                truths.push_back(*v.label);
                predictions.push_back(predict(model, apply_scaler(scaler, v)));
            }
            auto classes = model.classes;
            for (const auto& t : truths)
                if (std::find(classes.begin(), classes.end(), t) == classes.end()) classes.push_back(t);
            std::vector<Report> reports{
                make_report(std::string(kind_display_name(model.kind())), confusion_matrix(truths, predictions, classes))};
            const auto table = format_per_class_table(reports) + '\n' + format_overall_table(reports);
            std::cout << table;
            if (!eval_out.empty()) {
                fs::create_directories(eval_out);
                std::ofstream(eval_out / "report.txt") << table;
                const std::vector<std::pair<std::string, std::string>> meta{
                    {"classifier_id", std::string(kind_id(model.kind()))}, {"scaler", scaler.fitted_on},
                    {"flows", std::to_string(truths.size())}};
                std::ofstream(eval_out / (std::string(kind_id(model.kind())) + ".kv"))
                    << format_report_kv(reports[0], meta);
            }
        } else if (*experiment) {
            resolve(exp_cfg, exp_flags);
            const auto result = run_experiment(exp_cfg, load_corpus(exp_corpus), log_line);
            write_experiment_reports(result, exp_out);
            std::cout << format_overall_table(result.reports);
        } else if (*grid) {
            grid_cfg.padding = PaddingMode::Reduced;
            grid_flags.padding = "reduced";
            resolve(grid_cfg, grid_flags);
            run_grid(grid_cfg, load_corpus(grid_reduced), load_corpus(grid_full), grid_out, log_line);
            std::cout << "wrote 16 experiments to " << grid_out.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "torapp: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
