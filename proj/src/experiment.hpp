#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "baselines.hpp"
#include "dataset.hpp"
#include "forest_env.hpp"
#include "mahsac.hpp"

namespace rlf {

struct DatasetSpec {
    std::string path;
    std::string format;         // "csv", "keel", or "" to infer from the extension
    std::string name;           // defaults to the file stem
    std::string label_column;   // csv only: header name or decimal index
    std::string positive_label; // empty selects the minority class
    bool normalize = true;
};

struct RandomForestSpec {
    int trees = 100;
    CartConfig cart;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

struct AdaBoostSpec {
    int rounds = 50;
};

struct GbdtSpec {
    int stages = 100;
    double learning_rate = 0.1;
    int depth = 3;
};

struct CompareSpec {
    std::vector<std::string> inputs; // per-run metrics CSV paths
    std::string metric = "accuracy";
    std::string base = "rlforest";
    double alpha = 0.1;
    std::string table_file = "scores.csv";
    std::string report_file = "report.txt";
};

// Parsed run description. Paths are resolved against the config file's
// directory; every stochastic component carries an explicit seed.
struct ExperimentConfig {
    DatasetSpec data;
    std::vector<std::string> methods; // rlforest | random_forest | adaboost | gbdt
    int folds = 10;
    std::uint64_t cv_seed = 0;
    std::vector<std::string> metrics; // accuracy | g_mean | auc
    std::string out_dir;
    EnvConfig env;       // attribute_count filled from the data at run time
    bool score_metric_auto = true;
    TrainConfig train;
    RandomForestSpec rf;
    AdaBoostSpec ada;
    GbdtSpec gbdt;
    CompareSpec compare;
};

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir = "");
// Also checks that the referenced dataset file exists.
ExperimentConfig load_experiment_config(const std::string& path);

Dataset load_experiment_data(const DatasetSpec& spec);

struct MetricRow {
    std::string dataset;
    int fold = 0;
    std::string method;
    std::string metric;
    double value = 0.0;
};

std::string metric_rows_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metric_rows_csv(const std::string& text);

// Temp-file write plus rename; parent directories are created on demand.
void write_file_atomic(const std::string& path, const std::string& content);

// Model container: "model <kind> attributes <M> normalized <0|1>" then the
// body in the owning module's text format.
std::string model_file_text(const std::string& kind, std::size_t attributes, bool normalized,
                            const std::string& body);

struct LoadedModel {
    std::string kind; // forest | random_forest | adaboost | gbdt
    std::size_t attributes = 0;
    bool normalized = true;
    ForestModel forest;
    RandomForestModel rf;
    AdaBoostModel ada;
    GbdtModel gbdt;

    int predict(const std::vector<double>& x) const;
    double score(const std::vector<double>& x) const; // positive-class score
};

LoadedModel parse_model_file(const std::string& text);

// Runners; they throw (InputError, SchemaError, ...) and return the metric
// rows they also wrote to <out>/<dataset>/<group>/metrics.csv.
std::vector<MetricRow> run_train(const ExperimentConfig& cfg, int jobs);
std::vector<MetricRow> run_baseline(const ExperimentConfig& cfg, int jobs);
void run_compare(const ExperimentConfig& cfg);
std::string run_predict(const std::string& model_path, const std::string& data_path,
                        const std::string& out_csv);

// Exit-code wrappers: 0 success, 2 input error, 3 schema mismatch, 1 internal.
// Diagnostics go to the error stream.
int cmd_train(const std::string& config_path, int jobs = 1);
int cmd_baseline(const std::string& config_path, int jobs = 1);
int cmd_compare(const std::string& config_path);
int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_csv);

struct CliOptions {
    std::string verb; // train | baseline | compare | predict
    std::string config_path;
    std::string model_path;
    std::string data_path;
    std::string out;          // output dir override, or the predictions file
    int jobs = 1;
    std::uint64_t seed = 0;
    bool seed_set = false; // overrides the cross-validation seed
};

// Applies overrides (out: flag, then config, then RLFOREST_OUT) and runs the
// verb; returns the exit code and fills error_out on failure.
int run_command(const CliOptions& opt, std::string& error_out);

} // namespace rlf
