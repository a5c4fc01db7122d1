#include "support.hpp"

#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace torapp;

namespace {

LabeledDataset make_dataset(const Eigen::MatrixXd& x, std::vector<std::size_t> y, std::vector<std::string> classes) {
    LabeledDataset ds;
    ds.features = x;
    ds.targets = std::move(y);
    ds.classes = std::move(classes);
    return ds;
}

LabeledDataset labeled_counts(std::vector<std::pair<std::string, int>> counts) {
    std::vector<FeatureVector> vs;
    for (const auto& [label, n] : counts)
        for (int i = 0; i < n; ++i) {
            FeatureVector v;
            v.values[0] = static_cast<double>(vs.size());
            v.label = label;
            vs.push_back(v);
        }
    return LabeledDataset::from_vectors(vs);
}

// Two blobs in disjoint boxes: class 0 in [0,1]^d, class 1 in [3,4]^d.
LabeledDataset blobs(std::size_t n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd x(n, d);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i % 2;
        for (int k = 0; k < d; ++k) x(i, k) = u(rng) + 3.0 * y[i];
    }
    return make_dataset(x, y, {"a", "b"});
}

} // namespace

TEST_CASE("dataset construction from labeled vectors") {
    const auto ds = labeled_counts({{"zeta", 2}, {"alpha", 1}});
    CHECK(ds.classes == std::vector<std::string>{"alpha", "zeta"});
    CHECK(ds.targets == std::vector<std::size_t>{1, 1, 0});
    CHECK(ds.dim() == kFeatureDim);

    std::vector<FeatureVector> vs(1);
    CHECK_THROWS_AS(LabeledDataset::from_vectors(vs), PreconditionError);
    vs[0].label = "x";
    CHECK_THROWS_AS(LabeledDataset::from_vectors(vs, std::vector<std::string>{"y"}), PreconditionError);
}

TEST_CASE("stratified folds") {
    SUBCASE("10 A + 10 B into 5 folds") {
        const auto ds = labeled_counts({{"A", 10}, {"B", 10}});
        const auto folds = stratified_folds(ds, 5, 1);
        REQUIRE(folds.size() == 5);
        for (const auto& f : folds) {
            std::size_t a = 0, b = 0;
            for (auto i : f.test) (ds.targets[i] == 0 ? a : b) += 1;
            CHECK(a == 2);
            CHECK(b == 2);
            CHECK(f.train.size() + f.test.size() == 20);
        }
    }
    SUBCASE("minimal case") {
        const auto ds = labeled_counts({{"A", 2}, {"B", 2}});
        for (const auto& f : stratified_folds(ds, 2, 9)) {
            REQUIRE(f.test.size() == 2);
            CHECK(ds.targets[f.test[0]] != ds.targets[f.test[1]]);
        }
    }
    SUBCASE("uneven classes, partition and balance") {
        const auto ds = labeled_counts({{"A", 13}, {"B", 7}, {"C", 31}});
        const auto folds = stratified_folds(ds, 5, 42);
        std::vector<int> seen(ds.size(), 0);
        for (const auto& f : folds) {
            std::set<std::size_t> test(f.test.begin(), f.test.end());
            for (auto i : f.test) ++seen[i];
            for (auto i : f.train) CHECK_FALSE(test.count(i));
            CHECK(f.train.size() + f.test.size() == ds.size());
        }
        for (int s : seen) CHECK(s == 1);
        for (std::size_t c = 0; c < 3; ++c) {
            std::size_t lo = SIZE_MAX, hi = 0;
            for (const auto& f : folds) {
                std::size_t n = 0;
                for (auto i : f.test) n += ds.targets[i] == c;
                lo = std::min(lo, n);
                hi = std::max(hi, n);
            }
            CHECK(hi - lo <= 1);
        }
    }
    SUBCASE("determinism") {
        const auto ds = labeled_counts({{"A", 20}, {"B", 20}});
        const auto x = stratified_folds(ds, 4, 7), y = stratified_folds(ds, 4, 7);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].test == y[i].test);
    }
    SUBCASE("too small class is named") {
        const auto ds = labeled_counts({{"big", 10}, {"tiny", 3}});
        try {
            stratified_folds(ds, 5, 1);
            FAIL("expected an error");
        } catch (const PreconditionError& e) {
            CHECK(std::string(e.what()).find("tiny") != std::string::npos);
        }
    }
}

TEST_CASE("k-NN") {
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 1, 0, 0, 1, 5, 5;
    const auto ds = make_dataset(x, {0, 0, 1, 1}, {"A", "B"});

    const auto m1 = train_knn(ds, {1});
    CHECK(predict_index(m1, Eigen::Vector2d(5, 5)) == 1);
    CHECK(predict_index(m1, Eigen::Vector2d(0, 0)) == 0);

    // nearest three of (0.2, 0.2) are A, A, B
    const auto m3 = train_knn(ds, {3});
    CHECK(predict_index(m3, Eigen::Vector2d(0.2, 0.2)) == 0);

    SUBCASE("vote tie goes to the class of the nearest neighbour") {
        const auto m2 = train_knn(ds, {2});
        CHECK(predict_index(m2, Eigen::Vector2d(0.1, 0.9)) == 1);
        CHECK(predict_index(m2, Eigen::Vector2d(0.9, 0.1)) == 0);
    }
    SUBCASE("distance tie goes to the lower training index") {
        Eigen::MatrixXd t(2, 1);
        t << -1, 1;
        const auto m = train_knn(make_dataset(t, {1, 0}, {"A", "B"}), {1});
        CHECK(predict_index(m, Eigen::VectorXd::Zero(1)) == 1);
    }

    CHECK_THROWS_AS(train_knn(ds, {0}), PreconditionError);
    CHECK_THROWS_AS(train_knn(ds, {5}), PreconditionError);
    CHECK_THROWS_AS(train_knn(make_dataset(Eigen::MatrixXd(0, 2), {}, {"A"}), {1}), PreconditionError);
    CHECK_THROWS_AS(predict_index(m1, Eigen::Vector3d(0, 0, 0)), PreconditionError);
}

TEST_CASE("k-NN matches an exhaustive oracle") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    const int dim = 5;
    Eigen::MatrixXd x(50, dim);
    std::vector<std::size_t> y(50);
    std::vector<std::vector<double>> rows(50, std::vector<double>(dim));
    for (int i = 0; i < 50; ++i) {
        y[i] = i % 2;
        for (int k = 0; k < dim; ++k) rows[i][k] = x(i, k) = std::round(n(rng) * 2) / 2 + 0.5 * y[i];
    }
    const auto ds = make_dataset(x, y, {"A", "B"});
    for (std::size_t k : {1, 3, 5, 7}) {
        const auto m = train_knn(ds, {k});
        for (int q = 0; q < 200; ++q) {
            std::vector<double> v(dim);
            Eigen::VectorXd e(dim);
            for (int j = 0; j < dim; ++j) v[j] = e[j] = std::round(n(rng) * 2) / 2;
            CHECK(predict_index(m, e) == test::knn_oracle(rows, y, v, k));
        }
        for (int i = 0; i < 50; ++i) CHECK(predict_index(m, x.row(i).transpose()) == test::knn_oracle(rows, y, rows[i], k));
    }
}

TEST_CASE("random forest") {
    const auto ds = blobs(200, 4, 3);
    const auto m = train_random_forest(ds, {25, std::nullopt, 11});
    const auto pred = predict_rows(m, ds.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds.targets[i];
    CHECK(correct == ds.size());

    const auto& forest = std::get<ForestModel>(m.impl);
    for (Eigen::Index i = 0; i < 20; ++i) {
        const auto votes = forest_votes(forest, 2, ds.features.row(i).transpose());
        CHECK(votes[0] + votes[1] == 25);
    }

    SUBCASE("same seed, same forest") {
        const auto again = train_random_forest(ds, {25, std::nullopt, 11});
        const auto& f2 = std::get<ForestModel>(again.impl);
        for (std::size_t t = 0; t < 25; ++t) CHECK(f2.trees[t].nodes == forest.trees[t].nodes);
        CHECK(predict_rows(again, ds.features) == pred);
    }
    SUBCASE("depth-0 single tree predicts one class everywhere") {
        Eigen::MatrixXd x = blobs(200, 2, 5).features;
        std::vector<std::size_t> y(200, 0);
        y[0] = 1;
        const auto stump = train_random_forest(make_dataset(x, y, {"major", "minor"}), {1, std::size_t{0}, 3});
        const auto& tree = std::get<ForestModel>(stump.impl).trees[0];
        REQUIRE(tree.nodes.size() == 1);
        for (auto p : predict_rows(stump, x)) CHECK(p == 0);
    }
    ForestParams none;
    none.trees = 0;
    CHECK_THROWS_AS(train_random_forest(ds, none), PreconditionError);
}

TEST_CASE("linear one-vs-rest SVM") {
    // two bands on a line, margin 2 around 0
    Eigen::MatrixXd x(40, 1);
    std::vector<std::size_t> y(40);
    for (int i = 0; i < 40; ++i) {
        y[i] = i % 2;
        x(i, 0) = (y[i] ? 1.0 : -1.0) * (1.0 + 0.05 * (i / 2));
    }
    const auto ds = make_dataset(x, y, {"neg", "pos"});
    const auto m = train_linear_svm_ovr(ds, {1.0, 50, 4});
    const auto pred = predict_rows(m, x);
    for (int i = 0; i < 40; ++i) CHECK(pred[i] == y[i]);

    const auto again = train_linear_svm_ovr(ds, {1.0, 50, 4});
    CHECK(std::get<SvmModel>(again.impl).weights == std::get<SvmModel>(m.impl).weights);
    CHECK(std::get<SvmModel>(again.impl).bias == std::get<SvmModel>(m.impl).bias);

    SUBCASE("equal decision values go to the earliest class") {
        ClassifierModel tie;
        tie.classes = {"a", "b", "c"};
        tie.dim = 2;
        SvmModel s;
        s.weights = Eigen::MatrixXd::Zero(3, 2);
        s.bias = Eigen::Vector3d(0.5, 2.0, 2.0);
        tie.impl = s;
        CHECK(predict_index(tie, Eigen::Vector2d(1, 1)) == 1);
    }
    CHECK_THROWS_AS(train_linear_svm_ovr(make_dataset(x, std::vector<std::size_t>(40, 0), {"only"})),
                    PreconditionError);
}

TEST_CASE("prediction contract") {
    auto ds = blobs(60, 3, 8);
    ds.scaler_id = "s1";
    const auto knn = train_knn(ds, {1});
    const auto pred = predict_rows(knn, ds.features);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(pred[i] == ds.targets[i]);

    FeatureVector v;
    v.scaled_by = "s1";
    CHECK_THROWS_AS(predict(knn, v), PreconditionError); // 68 dims vs 3
    CHECK(knn.kind() == ClassifierKind::Knn);
    CHECK(parse_kind("rf") == ClassifierKind::RandomForest);
    CHECK(kind_display_name(ClassifierKind::LinearSvmOvr) == "SVM (linear, OvR)");
    CHECK_THROWS(parse_kind("bayes"));
}

TEST_CASE("scaler provenance is checked at prediction") {
    std::vector<FeatureVector> vs(4);
    for (int i = 0; i < 4; ++i) {
        vs[i].values[0] = i;
        vs[i].label = i < 2 ? "a" : "b";
        vs[i].scaled_by = "fold0";
    }
    const auto ds = LabeledDataset::from_vectors(vs);
    CHECK(ds.scaler_id == "fold0");
    const auto m = train_knn(ds, {1});
    CHECK(predict(m, vs[3]) == "b");
    vs[3].scaled_by = "fold1";
    CHECK_THROWS_AS(predict(m, vs[3]), PreconditionError);
}

TEST_CASE("models survive a write/read cycle") {
    auto ds = blobs(120, 5, 21);
    ds.scaler_id = "exp/fold2";
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(1.5, 2);
    Eigen::MatrixXd queries(100, 5);
    for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = n(rng);

    for (const auto& m : {train_knn(ds, {3}), train_random_forest(ds, {10, 6, 5}), train_linear_svm_ovr(ds, {})}) {
        std::stringstream io;
        write_model(m, io);
        const auto back = read_model(io);
        CHECK(back.kind() == m.kind());
        CHECK(back.classes == m.classes);
        CHECK(back.scaler_id == m.scaler_id);
        CHECK(predict_rows(back, queries) == predict_rows(m, queries));
    }
    std::stringstream bad("torapp-model version=9 kind=knn dim=1 scaler_id=x\n");
    CHECK_THROWS(read_model(bad));
}
