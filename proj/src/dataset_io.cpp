#include "torapp/dataset_io.hpp"

#include "torapp/error.hpp"
#include "torapp/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace torapp {
namespace {

constexpr std::string_view kDatasetMagic = "torapp-dataset";
constexpr std::string_view kScalerMagic = "torapp-scaler";

std::string lookup(const std::vector<std::pair<std::string, std::string>>& kv, const std::string& key,
                   std::string_view what) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    throw ParseError(std::string(what) + " header is missing '" + key + "'");
}

void check_token(const std::string& value, std::string_view what) {
    if (value.empty() || value.find_first_of(" \t\r\n,=") != std::string::npos)
        throw PreconditionError(std::string(what) + " '" + value + "' must be a non-empty token");
}

template <typename Vec>
void write_csv_line(std::ostream& out, const Vec& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (k) out << ',';
        out << text::format_double(v[k]);
    }
    out << '\n';
}

Eigen::VectorXd parse_csv_values(std::string_view line, Eigen::Index dim, std::size_t line_no) {
    const auto fields = text::split(line, ',');
    if (static_cast<Eigen::Index>(fields.size()) != dim)
        throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                         " values, found " + std::to_string(fields.size()));
    Eigen::VectorXd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v[k] = text::parse_double(fields[static_cast<std::size_t>(k)]);
    return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    return out;
}

} // namespace

void write_dataset(const FeatureDataset& ds, std::ostream& out) {
    check_token(ds.padding, "padding tag");
    out << kDatasetMagic << " layout=" << ds.layout_version
        << " flow_timeout=" << text::format_double(ds.flow_timeout_s)
        << " activity_timeout=" << text::format_double(ds.activity_timeout_s) << " padding=" << ds.padding
        << '\n';
    for (const auto& v : ds.vectors) {
        if (v.label && !is_valid_label(*v.label))
            throw PreconditionError("invalid class label '" + *v.label + "'");
        for (int k = 0; k < kFeatureDim; ++k) out << text::format_double(v.values[k]) << ',';
        out << v.label.value_or("") << '\n';
    }
}

void write_dataset(const FeatureDataset& ds, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_dataset(ds, out);
    if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

FeatureDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset file");
    const auto head = text::tokenize(line);
    if (head.empty() || head.front() != kDatasetMagic) throw FormatError("not a torapp dataset file");

    FeatureDataset ds;
    const auto kv = text::parse_key_values(line);
    ds.layout_version = static_cast<int>(text::parse_int(lookup(kv, "layout", "dataset")));
    if (ds.layout_version != kFeatureLayoutVersion)
        throw FormatError("dataset layout version " + std::to_string(ds.layout_version) +
                          " is not supported (expected " + std::to_string(kFeatureLayoutVersion) + ")");
    ds.flow_timeout_s = text::parse_double(lookup(kv, "flow_timeout", "dataset"));
    ds.activity_timeout_s = text::parse_double(lookup(kv, "activity_timeout", "dataset"));
    ds.padding = lookup(kv, "padding", "dataset");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cut = line.rfind(',');
        if (cut == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": no label field");
        FeatureVector v;
        v.values = parse_csv_values(std::string_view(line).substr(0, cut), kFeatureDim, line_no);
        const auto label = line.substr(cut + 1);
        if (!label.empty()) {
            if (!is_valid_label(label))
                throw ParseError("line " + std::to_string(line_no) + ": invalid label '" + label + "'");
            v.label = label;
        }
        ds.vectors.push_back(std::move(v));
    }
    return ds;
}

FeatureDataset read_dataset(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_dataset(in);
}

void write_scaler(const Scaler& s, std::ostream& out) {
    check_token(s.fitted_on, "scaler provenance");
    out << kScalerMagic << " dim=" << s.dim() << " fitted_on=" << s.fitted_on << '\n';
    write_csv_line(out, s.mu);
    write_csv_line(out, s.sigma);
}

void write_scaler(const Scaler& s, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_scaler(s, out);
    if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

Scaler read_scaler(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty scaler file");
    const auto head = text::tokenize(line);
    if (head.empty() || head.front() != kScalerMagic) throw FormatError("not a torapp scaler file");
    const auto kv = text::parse_key_values(line);
    const auto dim = static_cast<Eigen::Index>(text::parse_int(lookup(kv, "dim", "scaler")));
    if (dim <= 0) throw ParseError("scaler dimension must be positive");

    Scaler s;
    s.fitted_on = lookup(kv, "fitted_on", "scaler");
    if (!std::getline(in, line)) throw ParseError("scaler file is missing the mean line");
    s.mu = parse_csv_values(line, dim, 2);
    if (!std::getline(in, line)) throw ParseError("scaler file is missing the deviation line");
    s.sigma = parse_csv_values(line, dim, 3);
    if ((s.sigma.array() < 0).any()) throw ParseError("scaler has a negative deviation");
    return s;
}

Scaler read_scaler(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_scaler(in);
}

} // namespace torapp
