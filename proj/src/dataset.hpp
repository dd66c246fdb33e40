#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace rlf {

// Tabular binary-classification data. Labels are {0,1} with 1 the positive
// (by default minority) class.
struct Dataset {
    std::string name;
    std::vector<std::vector<double>> features; // one row per instance
    std::vector<int> labels;

    std::size_t instance_count() const { return features.size(); }
    std::size_t attribute_count() const { return features.empty() ? 0 : features[0].size(); }
};

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments; // fold index in [0,k) per instance
    std::uint64_t seed = 0;
};

// label_column is a header name or a decimal column index. An empty
// positive_label selects the minority class (ties broken toward the
// lexicographically greater label value).
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label = "");

// KEEL format: @relation/@attribute header, then @data rows. The class
// attribute is the @output one, or the last attribute when unspecified.
// "positive"/"negative" class values map directly; otherwise minority = 1.
Dataset load_keel(const std::string& path);

// Min-max scale every column to [0,1]; constant columns become all 0.5.
Dataset normalize(const Dataset& d);

// Majority count divided by minority count.
double imbalance_ratio(const Dataset& d);

// Deterministic stratified fold assignment; requires >= k instances per class.
FoldPlan stratified_folds(const Dataset& d, int k, std::uint64_t seed);

void write_csv(const Dataset& d, const std::string& path);

// One "instance_index,fold_index" line per instance.
std::string fold_plan_text(const FoldPlan& p);

} // namespace rlf
