#ifndef RLFOREST_H
#define RLFOREST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; they double as process exit codes. */
enum {
    RLF_OK = 0,
    RLF_ERR_INTERNAL = 1,
    RLF_ERR_INPUT = 2,
    RLF_ERR_SCHEMA = 3
};

/* Library version as "major.minor.patch". */
const char* rlf_version(void);

/* Message for the most recent failing call on this thread; empty string when
 * the last call succeeded. The pointer stays valid until the next call. */
const char* rlf_last_error(void);

/* Command runners mirroring the command-line verbs. Config files are JSON;
 * outputs are written under the configured output directory. */
int rlf_run_train(const char* config_path, int jobs);
int rlf_run_baseline(const char* config_path, int jobs);
int rlf_run_compare(const char* config_path);
int rlf_run_predict(const char* model_path, const char* data_path, const char* out_csv);

/* Full option form. verb is train|baseline|compare|predict; out overrides the
 * output directory (or names the predictions file) and may be NULL; seed_set
 * nonzero replaces the cross-validation seed with seed. */
int rlf_run(const char* verb, const char* config_path, const char* model_path,
            const char* data_path, const char* out, int jobs, uint64_t seed, int seed_set);

/* Tabular binary-classification data. Handles are freed with close; every
 * accessor tolerates NULL and reports failure through rlf_last_error. */
typedef struct rlf_dataset rlf_dataset;

rlf_dataset* rlf_dataset_open_csv(const char* path, const char* label_column,
                                  const char* positive_label, int normalize);
rlf_dataset* rlf_dataset_open_keel(const char* path, int normalize);
void rlf_dataset_close(rlf_dataset* d);
size_t rlf_dataset_instances(const rlf_dataset* d);
size_t rlf_dataset_attributes(const rlf_dataset* d);
/* Label in {0,1}; -1 on a bad handle or row. */
int rlf_dataset_label(const rlf_dataset* d, size_t row);
/* Feature value; NaN on a bad handle or index. */
double rlf_dataset_feature(const rlf_dataset* d, size_t row, size_t col);

/* A model saved by the train or baseline commands. Feature vectors are used
 * as given; apply the same scaling as the training run. */
typedef struct rlf_model rlf_model;

rlf_model* rlf_model_open(const char* path);
void rlf_model_close(rlf_model* m);
/* forest | random_forest | adaboost | gbdt; NULL on a bad handle. */
const char* rlf_model_kind(const rlf_model* m);
size_t rlf_model_attributes(const rlf_model* m);
/* Predicted label in {0,1}; -1 and rlf_last_error on failure. */
int rlf_model_predict(const rlf_model* m, const double* features, size_t count);
/* Positive-class score in [0,1]; NaN and rlf_last_error on failure. */
double rlf_model_score(const rlf_model* m, const double* features, size_t count);

#ifdef __cplusplus
}
#endif

#endif /* RLFOREST_H */
