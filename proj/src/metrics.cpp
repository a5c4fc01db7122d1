#include "torapp/metrics.hpp"

#include "torapp/error.hpp"
#include "torapp/text.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace torapp {
namespace {

// 0/0 is reported as 0 and flagged.
double ratio(double num, double den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0;
    }
    return num / den;
}

double harmonic(double p, double r, bool& degenerate) {
    return ratio(2 * p * r, p + r, degenerate);
}

std::string fixed(double x, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rpad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

} // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> cls) : classes(std::move(cls)) {
    const auto n = static_cast<Eigen::Index>(classes.size());
    counts = CountMatrix::Zero(n, n);
}

std::int64_t ConfusionMatrix::tp(std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(i);
    return counts(k, k);
}

std::int64_t ConfusionMatrix::fp(std::size_t i) const {
    return counts.col(static_cast<Eigen::Index>(i)).sum() - tp(i);
}

std::int64_t ConfusionMatrix::fn(std::size_t i) const {
    return counts.row(static_cast<Eigen::Index>(i)).sum() - tp(i);
}

std::int64_t ConfusionMatrix::tn(std::size_t i) const {
    return total() - tp(i) - fp(i) - fn(i);
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw PreconditionError("unknown class '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::int64_t n) {
    if (truth >= size() || predicted >= size()) throw PreconditionError("class index out of range");
    counts(static_cast<Eigen::Index>(truth), static_cast<Eigen::Index>(predicted)) += n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.classes != classes) throw PreconditionError("cannot add confusion matrices over different classes");
    counts += other.counts;
    return *this;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> truths, std::span<const std::string> predictions,
                                 std::vector<std::string> classes) {
    if (truths.size() != predictions.size())
        throw PreconditionError("truths and predictions differ in length (" + std::to_string(truths.size()) +
                                " vs " + std::to_string(predictions.size()) + ")");
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < classes.size(); ++c) index.emplace(classes[c], c);
    auto lookup = [&](const std::string& label) {
        auto it = index.find(label);
        if (it == index.end()) throw PreconditionError("unknown class '" + label + "'");
        return it->second;
    };
    ConfusionMatrix cm(std::move(classes));
    for (std::size_t i = 0; i < truths.size(); ++i) cm.add(lookup(truths[i]), lookup(predictions[i]));
    return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                 std::vector<std::string> classes) {
    if (truths.size() != predictions.size())
        throw PreconditionError("truths and predictions differ in length");
    ConfusionMatrix cm(std::move(classes));
    for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], predictions[i]);
    return cm;
}

ClassMetrics per_class_metrics(const ConfusionMatrix& cm, std::size_t i) {
    if (i >= cm.size()) throw PreconditionError("class index out of range");
    const double tp = static_cast<double>(cm.tp(i));
    const double fp = static_cast<double>(cm.fp(i));
    const double fn = static_cast<double>(cm.fn(i));
    const double tn = static_cast<double>(cm.tn(i));
    ClassMetrics m;
    m.precision = ratio(tp, tp + fp, m.degenerate);
    m.recall = ratio(tp, tp + fn, m.degenerate);
    m.f1 = harmonic(m.precision, m.recall, m.degenerate);
    m.accuracy = ratio(tp + tn, tp + fp + tn + fn, m.degenerate);
    return m;
}

ClassMetrics per_class_metrics(const ConfusionMatrix& cm, const std::string& label) {
    return per_class_metrics(cm, cm.index_of(label));
}

OverallMetrics overall_metrics(const ConfusionMatrix& cm) {
    OverallMetrics o;
    const auto n = cm.size();
    if (n == 0) return o;

    double sum_tp = 0, sum_fp = 0, sum_fn = 0, errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = per_class_metrics(cm, i);
        o.degenerate |= m.degenerate;
        o.macro_precision += m.precision;
        o.macro_recall += m.recall;
        o.macro_f1_class_mean += m.f1;
        o.average_accuracy += m.accuracy;
        const double fp = static_cast<double>(cm.fp(i));
        const double fn = static_cast<double>(cm.fn(i));
        errors += ratio(fp + fn, static_cast<double>(cm.total()), o.degenerate);
        sum_tp += static_cast<double>(cm.tp(i));
        sum_fp += fp;
        sum_fn += fn;
    }
    const double dn = static_cast<double>(n);
    o.macro_precision /= dn;
    o.macro_recall /= dn;
    o.macro_f1_class_mean /= dn;
    o.average_accuracy /= dn;
    o.error_rate = errors / dn;
    o.macro_f1 = harmonic(o.macro_precision, o.macro_recall, o.degenerate);
    o.micro_precision = ratio(sum_tp, sum_tp + sum_fp, o.degenerate);
    o.micro_recall = ratio(sum_tp, sum_tp + sum_fn, o.degenerate);
    o.micro_f1 = harmonic(o.micro_precision, o.micro_recall, o.degenerate);
    return o;
}

Report make_report(std::string classifier, ConfusionMatrix cm) {
    Report r;
    r.classifier = std::move(classifier);
    for (std::size_t i = 0; i < cm.size(); ++i) r.per_class.push_back(per_class_metrics(cm, i));
    r.overall = overall_metrics(cm);
    r.cm = std::move(cm);
    return r;
}

std::string format_per_class_table(std::span<const Report> reports, const std::string& title) {
    if (reports.empty()) return {};
    const auto& classes = reports.front().cm.classes;
    for (const auto& r : reports)
        if (r.cm.classes != classes) throw PreconditionError("reports disagree on the class list");

    std::size_t app_w = 3;
    for (const auto& c : classes) app_w = std::max(app_w, c.size());
    app_w += 1;
    constexpr std::size_t col_w = 6;
    constexpr std::size_t block_w = 4 * col_w;

    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    out << std::string(app_w, ' ') << "|";
    for (const auto& r : reports) {
        std::string name = r.classifier.substr(0, block_w - 1);
        const auto left = (block_w - name.size()) / 2;
        out << ' ' << pad(std::string(left, ' ') + name, block_w) << " |";
    }
    out << '\n';
    out << pad("APP", app_w) << "|";
    for (std::size_t r = 0; r < reports.size(); ++r)
        out << ' ' << rpad("PR.", col_w) << rpad("REC.", col_w) << rpad("F1", col_w) << rpad("ACC.", col_w) << " |";
    out << '\n';
    const auto rule_w = app_w + 1 + reports.size() * (block_w + 3);
    out << std::string(rule_w, '-') << '\n';
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out << pad(classes[i], app_w) << "|";
        for (const auto& r : reports) {
            const auto& m = r.per_class[i];
            out << ' ' << rpad(fixed(m.precision, 2), col_w) << rpad(fixed(m.recall, 2), col_w)
                << rpad(fixed(m.f1, 2), col_w) << rpad(fixed(m.accuracy, 2), col_w) << " |";
        }
        out << '\n';
    }
    out << std::string(rule_w, '-') << '\n';
    return out.str();
}

std::string format_overall_table(std::span<const Report> reports, const std::string& title) {
    std::size_t name_w = 10;
    for (const auto& r : reports) name_w = std::max(name_w, r.classifier.size());
    name_w += 1;
    const char* headers[] = {"Avg. Accuracy", "Error Rate", "Micro F1", "Macro Precision", "Macro Recall",
                             "Macro F1"};
    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    out << pad("Classifier", name_w);
    for (const char* h : headers) out << " | " << h;
    out << '\n';
    for (const auto& r : reports) {
        const auto& o = r.overall;
        const double values[] = {o.average_accuracy, o.error_rate,   o.micro_f1,
                                 o.macro_precision,  o.macro_recall, o.macro_f1};
        out << pad(r.classifier, name_w);
        for (std::size_t k = 0; k < 6; ++k)
            out << " | " << rpad(fixed(values[k], 4), std::string(headers[k]).size());
        out << '\n';
    }
    return out.str();
}

std::string format_report_kv(const Report& report, std::span<const std::pair<std::string, std::string>> metadata) {
    std::ostringstream out;
    for (const auto& [k, v] : metadata) out << k << '=' << v << '\n';
    out << "classifier=" << report.classifier << '\n';
    out << "classes=";
    for (std::size_t i = 0; i < report.cm.classes.size(); ++i) out << (i ? "," : "") << report.cm.classes[i];
    out << '\n';
    out << "total=" << report.cm.total() << '\n';

    const auto& o = report.overall;
    const std::pair<const char*, double> overall[] = {
        {"average_accuracy", o.average_accuracy}, {"error_rate", o.error_rate},
        {"micro_precision", o.micro_precision},   {"micro_recall", o.micro_recall},
        {"micro_f1", o.micro_f1},                 {"macro_precision", o.macro_precision},
        {"macro_recall", o.macro_recall},         {"macro_f1", o.macro_f1},
        {"macro_f1_class_mean", o.macro_f1_class_mean}};
    for (const auto& [k, v] : overall) out << "overall." << k << '=' << text::format_double(v) << '\n';
    out << "overall.degenerate=" << (o.degenerate ? "true" : "false") << '\n';

    for (std::size_t i = 0; i < report.per_class.size(); ++i) {
        const auto& m = report.per_class[i];
        const auto& c = report.cm.classes[i];
        out << "class." << c << ".precision=" << text::format_double(m.precision) << '\n';
        out << "class." << c << ".recall=" << text::format_double(m.recall) << '\n';
        out << "class." << c << ".f1=" << text::format_double(m.f1) << '\n';
        out << "class." << c << ".accuracy=" << text::format_double(m.accuracy) << '\n';
        out << "class." << c << ".tp=" << report.cm.tp(i) << '\n';
        out << "class." << c << ".fp=" << report.cm.fp(i) << '\n';
        out << "class." << c << ".fn=" << report.cm.fn(i) << '\n';
        out << "class." << c << ".tn=" << report.cm.tn(i) << '\n';
        out << "class." << c << ".degenerate=" << (m.degenerate ? "true" : "false") << '\n';
    }
    for (std::size_t i = 0; i < report.cm.size(); ++i) {
        out << "confusion." << report.cm.classes[i] << '=';
        for (std::size_t j = 0; j < report.cm.size(); ++j)
            out << (j ? "," : "") << report.cm.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        out << '\n';
    }
    return out.str();
}

} // namespace torapp
