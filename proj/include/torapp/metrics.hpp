#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace torapp {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// counts(i, j) = instances of true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    CountMatrix counts;

    explicit ConfusionMatrix(std::vector<std::string> cls = {});

    std::size_t size() const { return classes.size(); }
    std::int64_t total() const { return counts.sum(); }
    std::int64_t tp(std::size_t i) const;
    std::int64_t fp(std::size_t i) const;
    std::int64_t fn(std::size_t i) const;
    std::int64_t tn(std::size_t i) const;
    std::size_t index_of(const std::string& label) const;

    void add(std::size_t truth, std::size_t predicted, std::int64_t n = 1);
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion_matrix(std::span<const std::string> truths, std::span<const std::string> predictions,
                                 std::vector<std::string> classes);
ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                 std::vector<std::string> classes);

/// Any ratio with a zero denominator is reported as 0 and sets `degenerate`.
struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0;
    bool degenerate = false;
};

ClassMetrics per_class_metrics(const ConfusionMatrix& cm, std::size_t i);
ClassMetrics per_class_metrics(const ConfusionMatrix& cm, const std::string& label);

struct OverallMetrics {
    double micro_precision = 0;
    double micro_recall = 0;
    double micro_f1 = 0;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;                // harmonic mean of macro precision and recall
    double macro_f1_class_mean = 0;     // unweighted mean of per-class F1
    double average_accuracy = 0;
    double error_rate = 0;
    bool degenerate = false;
};

OverallMetrics overall_metrics(const ConfusionMatrix& cm);

struct Report {
    std::string classifier; // display name
    ConfusionMatrix cm;
    std::vector<ClassMetrics> per_class;
    OverallMetrics overall;
};

Report make_report(std::string classifier, ConfusionMatrix cm);

/// Side-by-side per-class table: one block of PR./REC./F1/ACC. columns per
/// classifier, one row per class. All reports must share the class list.
std::string format_per_class_table(std::span<const Report> reports, const std::string& title = {});

/// One row per classifier with the overall measures.
std::string format_overall_table(std::span<const Report> reports, const std::string& title = {});

/// Flat `key=value` lines; `metadata` entries come first, in order.
std::string format_report_kv(const Report& report,
                             std::span<const std::pair<std::string, std::string>> metadata = {});

} // namespace torapp
