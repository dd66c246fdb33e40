#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "json.hpp"
#include "metrics.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rlf {

namespace {

const std::vector<std::string> kMethods = {"rlforest", "random_forest", "adaboost", "gbdt"};
const std::vector<std::string> kMetrics = {"accuracy", "g_mean", "auc"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void check_keys(const json& obj, const std::string& context,
                const std::vector<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!contains(allowed, item.key()))
            throw InputError("config: unknown key '" + item.key() + "' in " + context);
}

const json& field(const json& obj, const std::string& context, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw InputError("config: " + context + " requires '" + std::string(key) + "'");
    return *it;
}

std::string str_field(const json& obj, const std::string& context, const char* key,
                      const std::string& dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_string())
        throw InputError("config: " + context + "." + key + " must be a string");
    return it->get<std::string>();
}

double num_field(const json& obj, const std::string& context, const char* key, double dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_number())
        throw InputError("config: " + context + "." + key + " must be a number");
    return it->get<double>();
}

int int_field(const json& obj, const std::string& context, const char* key, int dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_number_integer())
        throw InputError("config: " + context + "." + key + " must be an integer");
    return it->get<int>();
}

bool bool_field(const json& obj, const std::string& context, const char* key, bool dflt) {
    auto it = obj.find(key);
    if (it == obj.end()) return dflt;
    if (!it->is_boolean())
        throw InputError("config: " + context + "." + key + " must be a boolean");
    return it->get<bool>();
}

std::uint64_t seed_field(const json& obj, const std::string& context, const char* key,
                         bool& present) {
    auto it = obj.find(key);
    present = it != obj.end();
    if (!present) return 0;
    if (!it->is_number_unsigned() && !it->is_number_integer())
        throw InputError("config: " + context + "." + key + " must be a nonnegative integer");
    if (it->is_number_integer() && it->get<std::int64_t>() < 0)
        throw InputError("config: " + context + "." + key + " must be a nonnegative integer");
    return it->get<std::uint64_t>();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (base_dir.empty() || path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(std::string(what) + " not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

TrainConfig parse_train_config(const json& j, bool seed_required) {
    check_keys(j, "rlforest.train",
               {"episodes", "gamma", "tau", "alpha_d", "alpha_c", "actor_lr", "critic_lr",
                "batch_size", "actor_delay", "warmup", "buffer_capacity", "q_coefficient",
                "hidden", "seed"});
    TrainConfig t;
    t.episodes = int_field(j, "train", "episodes", t.episodes);
    t.gamma = num_field(j, "train", "gamma", t.gamma);
    t.tau = num_field(j, "train", "tau", t.tau);
    t.alpha_d = num_field(j, "train", "alpha_d", t.alpha_d);
    t.alpha_c = num_field(j, "train", "alpha_c", t.alpha_c);
    t.actor_lr = num_field(j, "train", "actor_lr", t.actor_lr);
    t.critic_lr = num_field(j, "train", "critic_lr", t.critic_lr);
    t.batch_size = int_field(j, "train", "batch_size", t.batch_size);
    t.actor_delay = int_field(j, "train", "actor_delay", t.actor_delay);
    t.warmup = int_field(j, "train", "warmup", t.warmup);
    t.buffer_capacity =
        std::size_t(int_field(j, "train", "buffer_capacity", int(t.buffer_capacity)));
    t.q_coefficient = num_field(j, "train", "q_coefficient", t.q_coefficient);
    if (j.contains("hidden")) {
        const json& h = j["hidden"];
        if (!h.is_array() || h.empty())
            throw InputError("config: rlforest.train.hidden must be a nonempty array");
        t.hidden.clear();
        for (const auto& v : h) {
            if (!v.is_number_integer() || v.get<int>() < 1)
                throw InputError("config: rlforest.train.hidden entries must be positive");
            t.hidden.push_back(v.get<int>());
        }
    }
    bool present = false;
    t.seed = seed_field(j, "rlforest.train", "seed", present);
    if (seed_required && !present)
        throw InputError("config: rlforest.train.seed is required (no implicit seeding)");
    return t;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config parse: ") + e.what());
    }
    if (!j.is_object()) throw InputError("config: top level must be an object");
    check_keys(j, "config",
               {"dataset", "methods", "cv", "metrics", "out_dir", "rlforest", "random_forest",
                "adaboost", "gbdt", "compare"});

    ExperimentConfig cfg;

    const json& data = field(j, "config", "dataset");
    if (!data.is_object()) throw InputError("config: dataset must be an object");
    check_keys(data, "dataset",
               {"path", "format", "name", "label_column", "positive_label", "normalize"});
    cfg.data.path = resolve(base_dir, str_field(data, "dataset", "path", ""));
    if (cfg.data.path.empty()) throw InputError("config: dataset requires 'path'");
    cfg.data.format = str_field(data, "dataset", "format", "");
    if (!cfg.data.format.empty() && cfg.data.format != "csv" && cfg.data.format != "keel")
        throw InputError("config: dataset.format must be 'csv' or 'keel'");
    cfg.data.name = str_field(data, "dataset", "name", "");
    if (cfg.data.name.find(',') != std::string::npos ||
        cfg.data.name.find('\n') != std::string::npos)
        throw InputError("config: dataset.name must not contain commas or newlines");
    cfg.data.label_column = str_field(data, "dataset", "label_column", "");
    cfg.data.positive_label = str_field(data, "dataset", "positive_label", "");
    cfg.data.normalize = bool_field(data, "dataset", "normalize", true);

    const json& methods = field(j, "config", "methods");
    if (!methods.is_array() || methods.empty())
        throw InputError("config: methods must be a nonempty array");
    for (const auto& m : methods) {
        if (!m.is_string() || !contains(kMethods, m.get<std::string>()))
            throw InputError("config: unknown method '" + m.dump() +
                             "' (expected rlforest, random_forest, adaboost, gbdt)");
        cfg.methods.push_back(m.get<std::string>());
    }

    const json& cv = field(j, "config", "cv");
    if (!cv.is_object()) throw InputError("config: cv must be an object");
    check_keys(cv, "cv", {"folds", "seed"});
    cfg.folds = int_field(cv, "cv", "folds", cfg.folds);
    if (cfg.folds < 2) throw InputError("config: cv.folds must be at least 2");
    bool cv_seed_set = false;
    cfg.cv_seed = seed_field(cv, "cv", "seed", cv_seed_set);
    if (!cv_seed_set)
        throw InputError("config: cv.seed is required (no implicit seeding)");

    const json& metrics = field(j, "config", "metrics");
    if (!metrics.is_array() || metrics.empty())
        throw InputError("config: metrics must be a nonempty array");
    for (const auto& m : metrics) {
        if (!m.is_string() || !contains(kMetrics, m.get<std::string>()))
            throw InputError("config: unknown metric '" + m.dump() +
                             "' (expected accuracy, g_mean, auc)");
        cfg.metrics.push_back(m.get<std::string>());
    }

    cfg.out_dir = resolve(base_dir, str_field(j, "config", "out_dir", ""));

    if (j.contains("rlforest")) {
        const json& rl = j["rlforest"];
        if (!rl.is_object()) throw InputError("config: rlforest must be an object");
        check_keys(rl, "rlforest",
                   {"agents", "depth", "score_metric", "bootstrap", "initial_score", "train"});
        cfg.env.n_agents = int_field(rl, "rlforest", "agents", cfg.env.n_agents);
        cfg.env.depth = int_field(rl, "rlforest", "depth", cfg.env.depth);
        std::string sm = str_field(rl, "rlforest", "score_metric", "auto");
        if (sm == "auto") {
            cfg.score_metric_auto = true;
        } else if (sm == "accuracy") {
            cfg.score_metric_auto = false;
            cfg.env.score_metric = ScoreMetric::accuracy;
        } else if (sm == "g_mean") {
            cfg.score_metric_auto = false;
            cfg.env.score_metric = ScoreMetric::g_mean;
        } else {
            throw InputError("config: rlforest.score_metric must be auto, accuracy or g_mean");
        }
        cfg.env.bootstrap = bool_field(rl, "rlforest", "bootstrap", cfg.env.bootstrap);
        cfg.env.sc0 = num_field(rl, "rlforest", "initial_score", cfg.env.sc0);
        cfg.train = parse_train_config(rl.contains("train") ? rl["train"] : json::object(),
                                       contains(cfg.methods, "rlforest"));
    } else if (contains(cfg.methods, "rlforest")) {
        throw InputError("config: method rlforest selected but no rlforest section given");
    }

    if (j.contains("random_forest")) {
        const json& rf = j["random_forest"];
        if (!rf.is_object()) throw InputError("config: random_forest must be an object");
        check_keys(rf, "random_forest",
                   {"trees", "max_depth", "feature_subset", "min_samples_split", "seed"});
        cfg.rf.trees = int_field(rf, "random_forest", "trees", cfg.rf.trees);
        cfg.rf.cart.max_depth = int_field(rf, "random_forest", "max_depth", -1);
        cfg.rf.cart.feature_subset = int_field(rf, "random_forest", "feature_subset", 0);
        cfg.rf.cart.min_samples_split =
            int_field(rf, "random_forest", "min_samples_split", 2);
        cfg.rf.seed = seed_field(rf, "random_forest", "seed", cfg.rf.seed_set);
    }
    if (contains(cfg.methods, "random_forest") && !cfg.rf.seed_set)
        throw InputError("config: random_forest.seed is required (no implicit seeding)");

    if (j.contains("adaboost")) {
        const json& a = j["adaboost"];
        if (!a.is_object()) throw InputError("config: adaboost must be an object");
        check_keys(a, "adaboost", {"rounds"});
        cfg.ada.rounds = int_field(a, "adaboost", "rounds", cfg.ada.rounds);
    }
    if (j.contains("gbdt")) {
        const json& g = j["gbdt"];
        if (!g.is_object()) throw InputError("config: gbdt must be an object");
        check_keys(g, "gbdt", {"stages", "learning_rate", "depth"});
        cfg.gbdt.stages = int_field(g, "gbdt", "stages", cfg.gbdt.stages);
        cfg.gbdt.learning_rate = num_field(g, "gbdt", "learning_rate", cfg.gbdt.learning_rate);
        cfg.gbdt.depth = int_field(g, "gbdt", "depth", cfg.gbdt.depth);
    }

    if (j.contains("compare")) {
        const json& c = j["compare"];
        if (!c.is_object()) throw InputError("config: compare must be an object");
        check_keys(c, "compare",
                   {"inputs", "metric", "base", "alpha", "table_file", "report_file"});
        if (c.contains("inputs")) {
            const json& in = c["inputs"];
            if (!in.is_array()) throw InputError("config: compare.inputs must be an array");
            for (const auto& p : in) {
                if (!p.is_string())
                    throw InputError("config: compare.inputs entries must be strings");
                cfg.compare.inputs.push_back(resolve(base_dir, p.get<std::string>()));
            }
        }
        cfg.compare.metric = str_field(c, "compare", "metric", cfg.compare.metric);
        if (!contains(kMetrics, cfg.compare.metric))
            throw InputError("config: compare.metric must be accuracy, g_mean or auc");
        cfg.compare.base = str_field(c, "compare", "base", cfg.compare.base);
        cfg.compare.alpha = num_field(c, "compare", "alpha", cfg.compare.alpha);
        if (cfg.compare.alpha <= 0.0 || cfg.compare.alpha >= 1.0)
            throw InputError("config: compare.alpha must be in (0,1)");
        cfg.compare.table_file = str_field(c, "compare", "table_file", cfg.compare.table_file);
        cfg.compare.report_file =
            str_field(c, "compare", "report_file", cfg.compare.report_file);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::string text = read_text_file(path, "config file");
    std::string base = fs::path(path).parent_path().string();
    ExperimentConfig cfg = parse_experiment_config(text, base);
    if (!fs::exists(cfg.data.path))
        throw InputError("dataset file not found: " + cfg.data.path);
    return cfg;
}

Dataset load_experiment_data(const DatasetSpec& spec) {
    std::string format = spec.format;
    if (format.empty()) {
        std::string ext = fs::path(spec.path).extension().string();
        if (ext == ".csv") format = "csv";
        else if (ext == ".dat" || ext == ".keel") format = "keel";
        else
            throw InputError("dataset format not recognized from extension '" + ext +
                             "': set dataset.format");
    }
    Dataset d;
    if (format == "csv") {
        if (spec.label_column.empty())
            throw InputError("csv dataset needs dataset.label_column");
        d = load_csv(spec.path, spec.label_column, spec.positive_label);
    } else {
        d = load_keel(spec.path);
    }
    if (!spec.name.empty()) d.name = spec.name;
    if (d.name.empty()) d.name = fs::path(spec.path).stem().string();
    if (spec.normalize) d = normalize(d);
    return d;
}

std::string metric_rows_csv(const std::vector<MetricRow>& rows) {
    std::string out = "dataset,fold,method,metric,value\n";
    char buf[160];
    for (const MetricRow& r : rows) {
        std::snprintf(buf, sizeof buf, ",%d,%s,%s,%.17g\n", r.fold, r.method.c_str(),
                      r.metric.c_str(), r.value);
        out += r.dataset;
        out += buf;
    }
    return out;
}

std::vector<MetricRow> parse_metric_rows_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "dataset,fold,method,metric,value")
        throw InputError("metrics csv: missing 'dataset,fold,method,metric,value' header");
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == ',') {
                parts.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        if (parts.size() != 5)
            throw InputError("metrics csv: expected 5 fields, got " +
                             std::to_string(parts.size()) + " in: " + line);
        MetricRow r;
        r.dataset = parts[0];
        r.method = parts[2];
        r.metric = parts[3];
        try {
            std::size_t used = 0;
            r.fold = std::stoi(parts[1], &used);
            if (used != parts[1].size()) throw std::invalid_argument("fold");
            r.value = std::stod(parts[4], &used);
            if (used != parts[4].size()) throw std::invalid_argument("value");
        } catch (const std::exception&) {
            throw InputError("metrics csv: bad numeric field in: " + line);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    fs::path p(path);
    try {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << content;
            out.flush();
            if (!out) throw InputError("write failed: " + tmp);
        }
        fs::rename(tmp, p);
    } catch (const fs::filesystem_error& e) {
        throw InputError("write failed for " + path + ": " + e.what());
    }
}

std::string model_file_text(const std::string& kind, std::size_t attributes, bool normalized,
                            const std::string& body) {
    return "model " + kind + " attributes " + std::to_string(attributes) + " normalized " +
           std::string(normalized ? "1" : "0") + "\n" + body;
}

LoadedModel parse_model_file(const std::string& text) {
    std::size_t nl = text.find('\n');
    if (nl == std::string::npos) throw InputError("model file: missing header line");
    std::istringstream head(text.substr(0, nl));
    std::string tag, kind, attr_word, norm_word;
    std::size_t attributes = 0;
    int normalized = 0;
    head >> tag >> kind >> attr_word >> attributes >> norm_word >> normalized;
    if (head.fail() || tag != "model" || attr_word != "attributes" ||
        norm_word != "normalized" || (normalized != 0 && normalized != 1))
        throw InputError("model file: bad header '" + text.substr(0, nl) + "'");
    LoadedModel m;
    m.kind = kind;
    m.attributes = attributes;
    m.normalized = normalized == 1;
    std::string body = text.substr(nl + 1);
    if (kind == "forest") m.forest = parse_forest_text(body);
    else if (kind == "random_forest") m.rf = parse_rf_text(body);
    else if (kind == "adaboost") m.ada = parse_ada_text(body);
    else if (kind == "gbdt") m.gbdt = parse_gbdt_text(body);
    else throw InputError("model file: unknown kind '" + kind + "'");
    return m;
}

int LoadedModel::predict(const std::vector<double>& x) const {
    if (kind == "forest") return forest_predict(forest, x);
    if (kind == "random_forest") return rf_predict(rf, x);
    if (kind == "adaboost") return ada_predict(ada, x);
    return gbdt_predict(gbdt, x);
}

double LoadedModel::score(const std::vector<double>& x) const {
    if (kind == "forest") {
        int votes = 0;
        for (const TreeModel& t : forest.trees) votes += tree_predict(t, x);
        return forest.trees.empty() ? 0.5 : double(votes) / double(forest.trees.size());
    }
    if (kind == "random_forest") return rf_vote_fraction(rf, x);
    if (kind == "adaboost") return ada_score(ada, x);
    return gbdt_score(gbdt, x);
}

namespace {

struct FoldOutput {
    std::vector<MetricRow> rows;
    std::vector<std::pair<std::string, std::string>> files; // out-dir relative
};

void split_fold(const Dataset& d, const FoldPlan& plan, int fold, Dataset& train,
                Dataset& test) {
    train.name = d.name;
    test.name = d.name;
    for (std::size_t i = 0; i < d.instance_count(); ++i) {
        Dataset& dst = plan.assignments[i] == fold ? test : train;
        dst.features.push_back(d.features[i]);
        dst.labels.push_back(d.labels[i]);
    }
}

double metric_value(const std::string& metric, const std::vector<int>& preds,
                    const std::vector<double>& scores, const std::vector<int>& truth) {
    if (metric == "auc") return auc_from_scores(scores, truth);
    Confusion c = confusion(preds, truth);
    return metric == "accuracy" ? accuracy(c) : g_mean(c);
}

template <typename Work>
void run_folds(int folds, int jobs, Work work) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(folds));
    if (jobs <= 1) {
        for (int f = 0; f < folds; ++f)
            try {
                work(f);
            } catch (...) {
                errors[std::size_t(f)] = std::current_exception();
            }
    } else {
        std::atomic<int> next{0};
        auto loop = [&]() {
            for (;;) {
                int f = next.fetch_add(1);
                if (f >= folds) return;
                try {
                    work(f);
                } catch (...) {
                    errors[std::size_t(f)] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        int n = std::min(jobs, folds);
        for (int i = 0; i < n; ++i) pool.emplace_back(loop);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

std::vector<MetricRow> run_train(const ExperimentConfig& cfg, int jobs) {
    if (jobs < 1) throw InputError("jobs must be at least 1");
    if (!contains(cfg.methods, "rlforest"))
        throw InputError("config does not select method rlforest");
    if (cfg.out_dir.empty()) throw InputError("no output directory configured");

    Dataset d = load_experiment_data(cfg.data);
    FoldPlan plan = stratified_folds(d, cfg.folds, cfg.cv_seed);
    std::size_t m = d.attribute_count();

    std::vector<FoldOutput> outputs(std::size_t(cfg.folds));
    run_folds(cfg.folds, jobs, [&](int f) {
        Dataset train, test;
        split_fold(d, plan, f, train, test);
        EnvConfig ec = cfg.env;
        ec.attribute_count = int(m);
        if (cfg.score_metric_auto) ec.score_metric = auto_score_metric(train);
        TrainConfig tc = cfg.train;
        tc.seed = cfg.train.seed + std::uint64_t(f);

        Trainer trainer(ec, train, tc);
        ForestModel forest = trainer.train();

        LoadedModel wrap;
        wrap.kind = "forest";
        wrap.forest = forest;
        std::vector<int> preds;
        std::vector<double> scores;
        for (const auto& x : test.features) {
            preds.push_back(wrap.predict(x));
            scores.push_back(wrap.score(x));
        }
        FoldOutput& out = outputs[std::size_t(f)];
        for (const std::string& metric : cfg.metrics)
            out.rows.push_back(
                {d.name, f, "rlforest", metric,
                 metric_value(metric, preds, scores, test.labels)});
        std::string base = d.name + "/rlforest/fold" + std::to_string(f) + "/";
        out.files.emplace_back(base + "forest.txt",
                               model_file_text("forest", m, cfg.data.normalize,
                                               forest_text(forest)));
        out.files.emplace_back(base + "curve.csv",
                               "episode,score,total_reward,actor_loss_mean,critic_loss_mean\n" +
                                   trainer.curve_text());
        for (const auto& [name, content] : trainer.checkpoint_files())
            out.files.emplace_back(base + "checkpoints/" + name, content);
    });

    std::vector<MetricRow> rows;
    fs::path root(cfg.out_dir);
    for (FoldOutput& out : outputs) {
        rows.insert(rows.end(), out.rows.begin(), out.rows.end());
        for (const auto& [rel, content] : out.files)
            write_file_atomic((root / rel).string(), content);
    }
    write_file_atomic((root / d.name / "rlforest" / "metrics.csv").string(),
                      metric_rows_csv(rows));
    return rows;
}

std::vector<MetricRow> run_baseline(const ExperimentConfig& cfg, int jobs) {
    if (jobs < 1) throw InputError("jobs must be at least 1");
    std::vector<std::string> selected;
    for (const std::string& m : cfg.methods)
        if (m != "rlforest") selected.push_back(m);
    if (selected.empty()) throw InputError("config selects no baseline method");
    if (cfg.out_dir.empty()) throw InputError("no output directory configured");

    Dataset d = load_experiment_data(cfg.data);
    FoldPlan plan = stratified_folds(d, cfg.folds, cfg.cv_seed);
    std::size_t m = d.attribute_count();

    std::vector<FoldOutput> outputs(std::size_t(cfg.folds));
    run_folds(cfg.folds, jobs, [&](int f) {
        Dataset train, test;
        split_fold(d, plan, f, train, test);
        FoldOutput& out = outputs[std::size_t(f)];
        for (const std::string& method : selected) {
            LoadedModel model;
            model.kind = method;
            std::string body;
            std::string extra_name, extra_content;
            if (method == "random_forest") {
                model.rf = random_forest(train, cfg.rf.trees, cfg.rf.cart,
                                         cfg.rf.seed + std::uint64_t(f));
                body = rf_text(model.rf);
            } else if (method == "adaboost") {
                model.ada = adaboost(train, cfg.ada.rounds);
                body = ada_text(model.ada);
            } else {
                model.gbdt =
                    gbdt_fit(train, cfg.gbdt.stages, cfg.gbdt.learning_rate, cfg.gbdt.depth);
                body = gbdt_text(model.gbdt);
                std::string curve = "stage,cross_entropy\n";
                char buf[64];
                for (std::size_t i = 0; i < model.gbdt.train_cross_entropy.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i,
                                  model.gbdt.train_cross_entropy[i]);
                    curve += buf;
                }
                extra_name = "curve.csv";
                extra_content = curve;
            }
            std::vector<int> preds;
            std::vector<double> scores;
            for (const auto& x : test.features) {
                preds.push_back(model.predict(x));
                scores.push_back(model.score(x));
            }
            for (const std::string& metric : cfg.metrics)
                out.rows.push_back({d.name, f, method, metric,
                                    metric_value(metric, preds, scores, test.labels)});
            std::string base = d.name + "/" + method + "/fold" + std::to_string(f) + "/";
            out.files.emplace_back(base + "model.txt",
                                   model_file_text(method, m, cfg.data.normalize, body));
            if (!extra_name.empty())
                out.files.emplace_back(base + extra_name, extra_content);
        }
    });

    std::vector<MetricRow> rows;
    fs::path root(cfg.out_dir);
    for (FoldOutput& out : outputs) {
        rows.insert(rows.end(), out.rows.begin(), out.rows.end());
        for (const auto& [rel, content] : out.files)
            write_file_atomic((root / rel).string(), content);
    }
    write_file_atomic((root / d.name / "baselines" / "metrics.csv").string(),
                      metric_rows_csv(rows));
    return rows;
}

namespace {

std::string metric_label(const std::string& metric) {
    if (metric == "accuracy") return "Accuracy";
    if (metric == "g_mean") return "G-Mean";
    return "AUC";
}

// Scores table plus the mean row, for tables too small for rank statistics.
std::string plain_report(const ScoreTable& st, const std::string& label) {
    std::size_t name_w = 12;
    for (const auto& d : st.datasets) name_w = std::max(name_w, d.size());
    std::size_t col_w = 10;
    for (const auto& m : st.methods) col_w = std::max(col_w, m.size() + 2);
    std::ostringstream out;
    auto cell = [&](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w + 2; ++i) out << ' ';
    };
    char buf[64];
    cell("dataset", name_w);
    for (const auto& mname : st.methods) cell(mname, col_w);
    out << "\n";
    for (std::size_t r = 0; r < st.datasets.size(); ++r) {
        cell(st.datasets[r], name_w);
        for (double v : st.scores[r]) {
            std::snprintf(buf, sizeof buf, "%.3f", v);
            cell(buf, col_w);
        }
        out << "\n";
    }
    cell("Avg." + label, name_w);
    for (std::size_t c = 0; c < st.methods.size(); ++c) {
        double mean = 0.0;
        for (const auto& row : st.scores) mean += row[c];
        std::snprintf(buf, sizeof buf, "%.3f", mean / double(st.scores.size()));
        cell(buf, col_w);
    }
    out << "\n";
    return out.str();
}

} // namespace

void run_compare(const ExperimentConfig& cfg) {
    const CompareSpec& spec = cfg.compare;
    if (spec.inputs.empty()) throw InputError("compare needs compare.inputs metrics files");
    if (cfg.out_dir.empty()) throw InputError("no output directory configured");

    std::vector<std::string> datasets, methods;
    struct Cell {
        double sum = 0.0;
        int count = 0;
    };
    std::vector<std::vector<Cell>> cells; // [dataset][method]
    for (const std::string& path : spec.inputs) {
        if (!fs::exists(path)) throw InputError("metrics file not found: " + path);
        for (const MetricRow& r : parse_metric_rows_csv(read_text_file(path, "metrics file"))) {
            if (r.metric != spec.metric) continue;
            std::size_t di =
                std::find(datasets.begin(), datasets.end(), r.dataset) - datasets.begin();
            if (di == datasets.size()) {
                datasets.push_back(r.dataset);
                cells.emplace_back(methods.size());
            }
            std::size_t mi =
                std::find(methods.begin(), methods.end(), r.method) - methods.begin();
            if (mi == methods.size()) {
                methods.push_back(r.method);
                for (auto& row : cells) row.resize(methods.size());
            }
            cells[di][mi].sum += r.value;
            cells[di][mi].count += 1;
        }
    }
    if (datasets.empty())
        throw InputError("no rows for metric '" + spec.metric + "' in the given files");

    ScoreTable st;
    st.methods = methods;
    st.datasets = datasets;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
        std::vector<double> row;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const Cell& c = cells[di][mi];
            if (c.count == 0)
                throw InputError("method " + methods[mi] + " has no '" + spec.metric +
                                 "' rows for dataset " + datasets[di]);
            row.push_back(c.sum / double(c.count));
        }
        st.scores.push_back(std::move(row));
    }

    std::string label = metric_label(spec.metric);
    std::string report;
    if (st.methods.size() < 2 || st.datasets.size() < 2) {
        report = plain_report(st, label);
    } else {
        if (!contains(st.methods, spec.base))
            throw InputError("compare.base '" + spec.base + "' not present in the inputs");
        report = comparison_report(st, spec.base, spec.alpha, label);
    }
    fs::path root(cfg.out_dir);
    write_file_atomic((root / spec.table_file).string(), score_table_csv(st));
    write_file_atomic((root / spec.report_file).string(), report);
}

std::string run_predict(const std::string& model_path, const std::string& data_path,
                        const std::string& out_csv) {
    LoadedModel model = parse_model_file(read_text_file(model_path, "model file"));

    std::string ext = fs::path(data_path).extension().string();
    Dataset d;
    if (ext == ".dat" || ext == ".keel") {
        d = load_keel(data_path);
    } else {
        std::string text = read_text_file(data_path, "data file");
        std::size_t nl = text.find('\n');
        std::string header = nl == std::string::npos ? text : text.substr(0, nl);
        std::size_t cols = std::count(header.begin(), header.end(), ',') + 1;
        if (cols < 2) throw InputError("data file: need at least two csv columns");
        d = load_csv(data_path, std::to_string(cols - 1));
    }
    if (model.normalized) d = normalize(d);
    if (d.attribute_count() != model.attributes)
        throw SchemaError("model expects " + std::to_string(model.attributes) +
                          " attributes, data has " + std::to_string(d.attribute_count()));

    std::string csv = "index,prediction,score\n";
    char buf[96];
    for (std::size_t i = 0; i < d.instance_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g\n", i, model.predict(d.features[i]),
                      model.score(d.features[i]));
        csv += buf;
    }
    write_file_atomic(out_csv, csv);
    return csv;
}

int run_command(const CliOptions& opt, std::string& error_out) {
    try {
        if (opt.jobs < 1) throw InputError("jobs must be at least 1");
        if (opt.verb == "train" || opt.verb == "baseline" || opt.verb == "compare") {
            ExperimentConfig cfg = load_experiment_config(opt.config_path);
            if (opt.seed_set) cfg.cv_seed = opt.seed;
            if (!opt.out.empty()) {
                cfg.out_dir = opt.out;
            } else if (cfg.out_dir.empty()) {
                const char* env = std::getenv("RLFOREST_OUT");
                if (env && *env) cfg.out_dir = env;
            }
            if (opt.verb == "train") run_train(cfg, opt.jobs);
            else if (opt.verb == "baseline") run_baseline(cfg, opt.jobs);
            else run_compare(cfg);
        } else if (opt.verb == "predict") {
            std::string out = opt.out.empty() ? "predictions.csv" : opt.out;
            run_predict(opt.model_path, opt.data_path, out);
        } else {
            throw InputError("unknown command verb '" + opt.verb + "'");
        }
        return 0;
    } catch (const SchemaError& e) {
        error_out = e.what();
        return 3;
    } catch (const InputError& e) {
        error_out = e.what();
        return 2;
    } catch (const std::exception& e) {
        error_out = e.what();
        return 1;
    }
}

namespace {

int report_errors(const CliOptions& opt) {
    std::string err;
    int code = run_command(opt, err);
    if (code != 0) std::fprintf(stderr, "error: %s\n", err.c_str());
    return code;
}

} // namespace

int cmd_train(const std::string& config_path, int jobs) {
    CliOptions opt;
    opt.verb = "train";
    opt.config_path = config_path;
    opt.jobs = jobs;
    return report_errors(opt);
}

int cmd_baseline(const std::string& config_path, int jobs) {
    CliOptions opt;
    opt.verb = "baseline";
    opt.config_path = config_path;
    opt.jobs = jobs;
    return report_errors(opt);
}

int cmd_compare(const std::string& config_path) {
    CliOptions opt;
    opt.verb = "compare";
    opt.config_path = config_path;
    return report_errors(opt);
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_csv) {
    CliOptions opt;
    opt.verb = "predict";
    opt.model_path = model_path;
    opt.data_path = data_path;
    opt.out = out_csv;
    return report_errors(opt);
}

} // namespace rlf
