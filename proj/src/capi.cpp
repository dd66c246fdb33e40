#include "rlforest/rlforest.h"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "experiment.hpp"

namespace {

thread_local std::string g_error;

template <typename F>
int guarded(F f) {
    try {
        f();
        g_error.clear();
        return RLF_OK;
    } catch (const rlf::SchemaError& e) {
        g_error = e.what();
        return RLF_ERR_SCHEMA;
    } catch (const rlf::InputError& e) {
        g_error = e.what();
        return RLF_ERR_INPUT;
    } catch (const std::exception& e) {
        g_error = e.what();
        return RLF_ERR_INTERNAL;
    }
}

const char* require(const char* arg, const char* name) {
    if (!arg) throw rlf::InputError(std::string(name) + " must not be NULL");
    return arg;
}

} // namespace

struct rlf_dataset {
    rlf::Dataset d;
};

struct rlf_model {
    rlf::LoadedModel m;
};

extern "C" {

const char* rlf_version(void) { return "1.0.0"; }

const char* rlf_last_error(void) { return g_error.c_str(); }

int rlf_run(const char* verb, const char* config_path, const char* model_path,
            const char* data_path, const char* out, int jobs, uint64_t seed, int seed_set) {
    rlf::CliOptions opt;
    opt.verb = verb ? verb : "";
    opt.config_path = config_path ? config_path : "";
    opt.model_path = model_path ? model_path : "";
    opt.data_path = data_path ? data_path : "";
    opt.out = out ? out : "";
    opt.jobs = jobs;
    opt.seed = seed;
    opt.seed_set = seed_set != 0;
    std::string err;
    int code = rlf::run_command(opt, err);
    g_error = err;
    return code;
}

int rlf_run_train(const char* config_path, int jobs) {
    return rlf_run("train", config_path, nullptr, nullptr, nullptr, jobs, 0, 0);
}

int rlf_run_baseline(const char* config_path, int jobs) {
    return rlf_run("baseline", config_path, nullptr, nullptr, nullptr, jobs, 0, 0);
}

int rlf_run_compare(const char* config_path) {
    return rlf_run("compare", config_path, nullptr, nullptr, nullptr, 1, 0, 0);
}

int rlf_run_predict(const char* model_path, const char* data_path, const char* out_csv) {
    return rlf_run("predict", nullptr, model_path, data_path, out_csv, 1, 0, 0);
}

rlf_dataset* rlf_dataset_open_csv(const char* path, const char* label_column,
                                  const char* positive_label, int normalize) {
    rlf_dataset* handle = nullptr;
    guarded([&] {
        rlf::Dataset d = rlf::load_csv(require(path, "path"),
                                       require(label_column, "label_column"),
                                       positive_label ? positive_label : "");
        if (normalize) d = rlf::normalize(d);
        handle = new rlf_dataset{std::move(d)};
    });
    return handle;
}

rlf_dataset* rlf_dataset_open_keel(const char* path, int normalize) {
    rlf_dataset* handle = nullptr;
    guarded([&] {
        rlf::Dataset d = rlf::load_keel(require(path, "path"));
        if (normalize) d = rlf::normalize(d);
        handle = new rlf_dataset{std::move(d)};
    });
    return handle;
}

void rlf_dataset_close(rlf_dataset* d) { delete d; }

size_t rlf_dataset_instances(const rlf_dataset* d) { return d ? d->d.instance_count() : 0; }

size_t rlf_dataset_attributes(const rlf_dataset* d) { return d ? d->d.attribute_count() : 0; }

int rlf_dataset_label(const rlf_dataset* d, size_t row) {
    if (!d || row >= d->d.labels.size()) return -1;
    return d->d.labels[row];
}

double rlf_dataset_feature(const rlf_dataset* d, size_t row, size_t col) {
    if (!d || row >= d->d.features.size() || col >= d->d.attribute_count())
        return std::nan("");
    return d->d.features[row][col];
}

rlf_model* rlf_model_open(const char* path) {
    rlf_model* handle = nullptr;
    guarded([&] {
        std::string p = require(path, "path");
        std::ifstream in(p, std::ios::binary);
        if (!in) throw rlf::InputError("model file not found: " + p);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        handle = new rlf_model{rlf::parse_model_file(text)};
    });
    return handle;
}

void rlf_model_close(rlf_model* m) { delete m; }

const char* rlf_model_kind(const rlf_model* m) { return m ? m->m.kind.c_str() : nullptr; }

size_t rlf_model_attributes(const rlf_model* m) { return m ? m->m.attributes : 0; }

int rlf_model_predict(const rlf_model* m, const double* features, size_t count) {
    int result = -1;
    guarded([&] {
        if (!m) throw rlf::InputError("model handle must not be NULL");
        if (!features) throw rlf::InputError("features must not be NULL");
        if (count != m->m.attributes)
            throw rlf::SchemaError("model expects " + std::to_string(m->m.attributes) +
                                   " attributes, got " + std::to_string(count));
        result = m->m.predict(std::vector<double>(features, features + count));
    });
    return result;
}

double rlf_model_score(const rlf_model* m, const double* features, size_t count) {
    double result = std::nan("");
    guarded([&] {
        if (!m) throw rlf::InputError("model handle must not be NULL");
        if (!features) throw rlf::InputError("features must not be NULL");
        if (count != m->m.attributes)
            throw rlf::SchemaError("model expects " + std::to_string(m->m.attributes) +
                                   " attributes, got " + std::to_string(count));
        result = m->m.score(std::vector<double>(features, features + count));
    });
    return result;
}

} // extern "C"
