#include "torapp/error.hpp"
#include "torapp/learn.hpp"
#include "torapp/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace torapp {
namespace {

constexpr std::string_view kMagic = "torapp-model";
constexpr int kModelVersion = 1;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

const std::string& get(const KeyValues& kv, const std::string& key) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    throw ParseError("model file is missing '" + key + "'");
}

std::size_t get_size(const KeyValues& kv, const std::string& key) {
    const auto v = text::parse_int(get(kv, key));
    if (v < 0) throw ParseError("model field '" + key + "' is negative");
    return static_cast<std::size_t>(v);
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key) {
    return text::parse_uint(get(kv, key));
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next(std::string_view what) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError("model file ended early, expected " + std::string(what));
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    /// Next line, which must start with `keyword`; returns the remainder.
    std::string expect(std::string_view keyword) {
        auto line = next(keyword);
        if (line.rfind(keyword, 0) != 0)
            throw ParseError("model file line " + std::to_string(line_) + ": expected '" + std::string(keyword) + "'");
        return line.substr(keyword.size());
    }

    Eigen::RowVectorXd values(Eigen::Index dim, std::string_view what) {
        const auto line = next(what);
        const auto fields = text::split(line, ',');
        if (static_cast<Eigen::Index>(fields.size()) != dim)
            throw ParseError("model file line " + std::to_string(line_) + ": expected " + std::to_string(dim) +
                             " values");
        Eigen::RowVectorXd v(dim);
        for (Eigen::Index k = 0; k < dim; ++k) v[k] = text::parse_double(fields[static_cast<std::size_t>(k)]);
        return v;
    }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

template <typename Row>
void write_row(std::ostream& out, const Row& row) {
    for (Eigen::Index k = 0; k < row.size(); ++k) {
        if (k) out << ',';
        out << text::format_double(row[k]);
    }
    out << '\n';
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

void write_model(const ClassifierModel& model, std::ostream& out) {
    out << kMagic << " version=" << kModelVersion << " kind=" << kind_id(model.kind()) << " dim=" << model.dim
        << " scaler_id=" << model.scaler_id << '\n';
    out << "classes";
    for (const auto& c : model.classes) out << ' ' << c;
    out << '\n';

    std::visit(overloaded{
                   [&](const KnnModel& knn) {
                       out << "params k=" << knn.params.k << '\n';
                       out << "points " << knn.points.rows() << '\n';
                       for (Eigen::Index i = 0; i < knn.points.rows(); ++i) write_row(out, knn.points.row(i));
                       out << "targets";
                       for (auto t : knn.targets) out << ' ' << t;
                       out << '\n';
                   },
                   [&](const ForestModel& forest) {
                       out << "params trees=" << forest.params.trees << " max_depth="
                           << (forest.params.max_depth ? std::to_string(*forest.params.max_depth) : "none")
                           << " seed=" << forest.params.seed << '\n';
                       for (const auto& tree : forest.trees) {
                           out << "tree " << tree.nodes.size() << '\n';
                           for (const auto& n : tree.nodes)
                               out << n.feature << ' ' << text::format_double(n.threshold) << ' ' << n.left << ' '
                                   << n.right << ' ' << n.label << '\n';
                       }
                   },
                   [&](const SvmModel& svm) {
                       out << "params C=" << text::format_double(svm.params.C) << " epochs=" << svm.params.epochs
                           << " seed=" << svm.params.seed << '\n';
                       out << "weights " << svm.weights.rows() << '\n';
                       for (Eigen::Index c = 0; c < svm.weights.rows(); ++c) write_row(out, svm.weights.row(c));
                       out << "bias\n";
                       write_row(out, svm.bias);
                   }},
               model.impl);
    out << "end\n";
}

void write_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    write_model(model, out);
    if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

ClassifierModel read_model(std::istream& in) {
    LineReader r(in);
    const auto head = r.next("header");
    const auto tokens = text::tokenize(head);
    if (tokens.empty() || tokens.front() != kMagic) throw FormatError("not a torapp model file");
    const auto kv = text::parse_key_values(head);
    if (text::parse_int(get(kv, "version")) != kModelVersion)
        throw FormatError("unsupported model version " + get(kv, "version"));

    ClassifierModel m;
    const auto kind = parse_kind(get(kv, "kind"));
    m.dim = static_cast<Eigen::Index>(get_size(kv, "dim"));
    m.scaler_id = get(kv, "scaler_id");
    const auto class_line = r.expect("classes");
    for (auto c : text::tokenize(class_line)) m.classes.emplace_back(c);
    if (m.classes.empty()) throw ParseError("model has no classes");
    const auto n_classes = m.classes.size();

    const auto params = text::parse_key_values(r.expect("params"));
    switch (kind) {
    case ClassifierKind::Knn: {
        KnnModel knn;
        knn.params.k = get_size(params, "k");
        const auto n = static_cast<Eigen::Index>(text::parse_int(text::tokenize(r.expect("points")).at(0)));
        knn.points.resize(n, m.dim);
        for (Eigen::Index i = 0; i < n; ++i) knn.points.row(i) = r.values(m.dim, "point");
        const auto target_line = r.expect("targets");
        for (auto t : text::tokenize(target_line)) {
            const auto v = static_cast<std::size_t>(text::parse_int(t));
            if (v >= n_classes) throw ParseError("k-NN target out of range");
            knn.targets.push_back(v);
        }
        if (static_cast<Eigen::Index>(knn.targets.size()) != n) throw ParseError("k-NN target count mismatch");
        m.impl = std::move(knn);
        break;
    }
    case ClassifierKind::RandomForest: {
        ForestModel forest;
        forest.params.trees = get_size(params, "trees");
        if (const auto& d = get(params, "max_depth"); d != "none")
            forest.params.max_depth = static_cast<std::size_t>(text::parse_int(d));
        forest.params.seed = get_u64(params, "seed");
        for (std::size_t t = 0; t < forest.params.trees; ++t) {
            const auto count = static_cast<std::size_t>(text::parse_int(text::tokenize(r.expect("tree")).at(0)));
            DecisionTree tree;
            for (std::size_t i = 0; i < count; ++i) {
                const auto line = r.next("tree node");
                const auto f = text::tokenize(line);
                if (f.size() != 5) throw ParseError("malformed tree node '" + line + "'");
                TreeNode n;
                n.feature = static_cast<int>(text::parse_int(f[0]));
                n.threshold = text::parse_double(f[1]);
                n.left = static_cast<int>(text::parse_int(f[2]));
                n.right = static_cast<int>(text::parse_int(f[3]));
                n.label = static_cast<std::size_t>(text::parse_int(f[4]));
                const auto bad_child = [&](int c) { return c < 0 || static_cast<std::size_t>(c) >= count; };
                if (n.label >= n_classes || n.feature >= m.dim ||
                    (!n.is_leaf() && (bad_child(n.left) || bad_child(n.right))))
                    throw ParseError("tree node out of range '" + line + "'");
                tree.nodes.push_back(n);
            }
            if (tree.nodes.empty()) throw ParseError("empty decision tree");
            forest.trees.push_back(std::move(tree));
        }
        m.impl = std::move(forest);
        break;
    }
    case ClassifierKind::LinearSvmOvr: {
        SvmModel svm;
        svm.params.C = text::parse_double(get(params, "C"));
        svm.params.epochs = get_size(params, "epochs");
        svm.params.seed = get_u64(params, "seed");
        const auto rows = static_cast<Eigen::Index>(text::parse_int(text::tokenize(r.expect("weights")).at(0)));
        if (rows != static_cast<Eigen::Index>(n_classes)) throw ParseError("SVM weight rows do not match classes");
        svm.weights.resize(rows, m.dim);
        for (Eigen::Index c = 0; c < rows; ++c) svm.weights.row(c) = r.values(m.dim, "weights");
        r.expect("bias");
        svm.bias = r.values(rows, "bias").transpose();
        m.impl = std::move(svm);
        break;
    }
    }
    r.expect("end");
    return m;
}

ClassifierModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_model(in);
}

} // namespace torapp
