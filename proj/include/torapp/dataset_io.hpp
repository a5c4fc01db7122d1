#pragma once

#include "torapp/features.hpp"
#include "torapp/scaler.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace torapp {

/// Extracted flows plus the settings they were extracted with.
///
/// On disk: one header line
///   torapp-dataset layout=1 flow_timeout=10 activity_timeout=2 padding=reduced
/// then one line per flow holding 68 comma-separated values and a trailing
/// label field, which may be empty.
struct FeatureDataset {
    int layout_version = kFeatureLayoutVersion;
    double flow_timeout_s = 10;
    double activity_timeout_s = 2;
    std::string padding = "none";
    std::vector<FeatureVector> vectors;
};

void write_dataset(const FeatureDataset& ds, std::ostream& out);
void write_dataset(const FeatureDataset& ds, const std::filesystem::path& path);
FeatureDataset read_dataset(std::istream& in);
FeatureDataset read_dataset(const std::filesystem::path& path);

/// Scaler file: `torapp-scaler dim=N fitted_on=TAG`, then mu and sigma as
/// one comma-separated line each.
void write_scaler(const Scaler& s, std::ostream& out);
void write_scaler(const Scaler& s, const std::filesystem::path& path);
Scaler read_scaler(std::istream& in);
Scaler read_scaler(const std::filesystem::path& path);

} // namespace torapp
