#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "rlforest/rlforest.h"

namespace {

struct Options {
    std::string verb;
    std::string config;
    std::string model;
    std::string data;
    std::string out;
    int jobs = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config, "experiment configuration JSON")
        ->required();
    sub->add_option("--jobs", opt.jobs, "worker thread cap (1 = deterministic)");
    auto* seed = sub->add_option("--seed", opt.seed, "override the cross-validation seed");
    sub->add_option("--out", opt.out, "override the output directory");
    sub->final_callback([seed, &opt] { opt.seed_set = seed->count() > 0; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decision-forest training, baselines, comparison and prediction"};
    app.require_subcommand(1);
    Options opt;

    add_common(app.add_subcommand("train", "train forests across CV folds"), opt);
    add_common(app.add_subcommand("baseline", "run classical ensemble baselines"), opt);
    add_common(app.add_subcommand("compare", "rank methods from metrics CSVs"), opt);
    CLI::App* predict = app.add_subcommand("predict", "score a dataset with a saved model");
    predict->add_option("--model", opt.model, "saved model file")->required();
    predict->add_option("--data", opt.data, "CSV with the label in the last column")
        ->required();
    predict->add_option("--out", opt.out, "predictions CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // help/version exit clean, bad usage is an input error
    }
    opt.verb = app.get_subcommands().front()->get_name();

    int code = rlf_run(opt.verb.c_str(), opt.config.empty() ? nullptr : opt.config.c_str(),
                       opt.model.empty() ? nullptr : opt.model.c_str(),
                       opt.data.empty() ? nullptr : opt.data.c_str(),
                       opt.out.empty() ? nullptr : opt.out.c_str(), opt.jobs, opt.seed,
                       opt.seed_set ? 1 : 0);
    if (code != 0) std::fprintf(stderr, "error: %s\n", rlf_last_error());
    return code;
}
