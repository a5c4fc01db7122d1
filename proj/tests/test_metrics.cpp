#include "support.hpp"

#include "torapp/error.hpp"
#include "torapp/metrics.hpp"

#include <doctest.h>

#include <numeric>

using namespace torapp;
using doctest::Approx;

TEST_CASE("confusion matrix tally") {
    const std::vector<std::string> t{"A", "A", "B", "B"}, p{"A", "B", "B", "B"};
    const auto cm = confusion_matrix(t, p, {"A", "B"});
    CHECK(cm.counts(0, 0) == 1);
    CHECK(cm.counts(0, 1) == 1);
    CHECK(cm.counts(1, 0) == 0);
    CHECK(cm.counts(1, 1) == 2);
    CHECK(cm.total() == 4);

    const auto diag = confusion_matrix(t, t, {"A", "B"});
    CHECK(diag.counts(0, 1) == 0);
    CHECK(diag.counts(1, 0) == 0);

    const auto empty = confusion_matrix(std::vector<std::string>{}, std::vector<std::string>{}, {"A", "B"});
    CHECK(empty.counts.isZero());

    CHECK_THROWS_AS(confusion_matrix(t, std::vector<std::string>{"A"}, {"A", "B"}), PreconditionError);
    CHECK_THROWS_AS(confusion_matrix(t, std::vector<std::string>{"A", "A", "A", "C"}, {"A", "B"}), PreconditionError);
}

TEST_CASE("per-class metrics of [[1,1],[0,2]]") {
    const auto cm = test::cm_from({{1, 1}, {0, 2}});
    const auto a = per_class_metrics(cm, 0);
    CHECK(a.precision == Approx(1.0).epsilon(1e-12));
    CHECK(a.recall == Approx(0.5).epsilon(1e-12));
    CHECK(a.f1 == Approx(2.0 / 3).epsilon(1e-12));
    CHECK(a.accuracy == Approx(0.75).epsilon(1e-12));
    const auto b = per_class_metrics(cm, "c1");
    CHECK(b.precision == Approx(2.0 / 3).epsilon(1e-12));
    CHECK(b.recall == Approx(1.0).epsilon(1e-12));
    CHECK(b.f1 == Approx(0.8).epsilon(1e-12));
    CHECK(b.accuracy == Approx(0.75).epsilon(1e-12));
    CHECK_FALSE(a.degenerate);
}

TEST_CASE("overall metrics of [[1,1],[0,2]]") {
    const auto o = overall_metrics(test::cm_from({{1, 1}, {0, 2}}));
    CHECK(o.micro_f1 == Approx(0.75));
    CHECK(o.macro_precision == Approx(5.0 / 6));
    CHECK(o.macro_recall == Approx(0.75));
    CHECK(o.macro_f1 == Approx(15.0 / 19));
    CHECK(o.macro_f1 == Approx(0.7895).epsilon(1e-4));
    CHECK(o.macro_f1_class_mean == Approx((2.0 / 3 + 0.8) / 2));
    CHECK(o.average_accuracy == Approx(0.75));
    CHECK(o.error_rate == Approx(0.25));
}

TEST_CASE("degenerate classes") {
    const auto cm = test::cm_from({{3, 0, 0}, {0, 2, 0}, {0, 0, 0}});
    const auto c = per_class_metrics(cm, 2);
    CHECK(c.precision == 0);
    CHECK(c.recall == 0);
    CHECK(c.f1 == 0);
    CHECK(c.degenerate);
    CHECK(overall_metrics(cm).degenerate);

    const auto diag = overall_metrics(test::cm_from({{4, 0}, {0, 6}}));
    CHECK(diag.micro_f1 == 1);
    CHECK(diag.macro_f1 == 1);
    CHECK(diag.average_accuracy == 1);
    CHECK(diag.error_rate == 0);
}

TEST_CASE("metric properties on random matrices") {
    std::mt19937_64 rng(12);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
        std::uniform_int_distribution<long long> cell(0, round % 3 ? 50 : 3);
        std::vector<std::vector<long long>> m(n, std::vector<long long>(n));
        for (auto& row : m)
            for (auto& v : row) v = cell(rng);
        m[0][0] += 1;
        const auto cm = test::cm_from(m);
        const auto o = overall_metrics(cm);
        const auto want = test::metrics_oracle(m);

        CHECK(o.micro_precision == Approx(o.micro_recall).epsilon(1e-12));
        CHECK(o.micro_f1 == Approx(o.micro_precision).epsilon(1e-12));
        CHECK(o.average_accuracy + o.error_rate == Approx(1.0).epsilon(1e-12));
        CHECK(o.macro_precision == Approx(want.macro_p).epsilon(1e-12));
        CHECK(o.macro_recall == Approx(want.macro_r).epsilon(1e-12));
        CHECK(o.macro_f1 == Approx(want.macro_f1).epsilon(1e-12));
        CHECK(o.error_rate == Approx(want.err).epsilon(1e-12));
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = per_class_metrics(cm, i);
            CHECK(c.precision == Approx(want.p[i]).epsilon(1e-12));
            CHECK(c.recall == Approx(want.r[i]).epsilon(1e-12));
            CHECK(c.f1 == Approx(want.f1[i]).epsilon(1e-12));
            CHECK(c.accuracy == Approx(want.acc[i]).epsilon(1e-12));
            CHECK(cm.tp(i) + cm.fn(i) == std::accumulate(m[i].begin(), m[i].end(), 0LL));
        }

        // relabeling the classes in another order leaves the overall metrics alone
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::vector<long long>> pm(n, std::vector<long long>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) pm[i][j] = m[perm[i]][perm[j]];
        const auto po = overall_metrics(test::cm_from(pm));
        CHECK(po.macro_f1 == Approx(o.macro_f1).epsilon(1e-12));
        CHECK(po.average_accuracy == Approx(o.average_accuracy).epsilon(1e-12));
        CHECK(po.micro_f1 == Approx(o.micro_f1).epsilon(1e-12));
        CHECK(per_class_metrics(test::cm_from(pm), 0).f1 == Approx(want.f1[perm[0]]).epsilon(1e-12));
    }
}

TEST_CASE("report tables list every class for every classifier") {
    std::vector<Report> reports{make_report("Random Forest", test::cm_from({{5, 1, 0}, {0, 6, 0}, {0, 0, 0}})),
                                make_report("k-NN", test::cm_from({{4, 2, 0}, {1, 5, 0}, {0, 0, 0}}))};
    const auto table = format_per_class_table(reports, "Per-class");
    for (const auto* name : {"APP", "PR.", "REC.", "F1", "ACC.", "Random Forest", "k-NN", "c0", "c1", "c2"})
        CHECK(table.find(name) != std::string::npos);

    const auto overall = format_overall_table(reports);
    for (const auto* name : {"Avg. Accuracy", "Error Rate", "Micro F1", "Macro Precision", "Macro Recall", "Macro F1"})
        CHECK(overall.find(name) != std::string::npos);

    const std::vector<std::pair<std::string, std::string>> meta{{"experiment", "x"}};
    const auto kv = format_report_kv(reports[0], meta);
    CHECK(kv.rfind("experiment=x\n", 0) == 0);
    CHECK(kv.find("class.c2.precision=0") != std::string::npos);
    CHECK(kv.find("overall.macro_f1=") != std::string::npos);

    std::vector<Report> mismatched{reports[0], make_report("SVM", test::cm_from({{1}}))};
    CHECK_THROWS(format_per_class_table(mismatched));
}
