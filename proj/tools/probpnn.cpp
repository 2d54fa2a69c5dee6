// probpnn: prepare data, train models, evaluate forecasts, generate synthetic series.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probpnn/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> methods;
    std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "root seed, overrides the config");
    cmd->add_option("--out", f.out, "output directory, overrides the config");
    cmd->add_option("--methods", f.methods, "comma-separated methods, overrides the config");
    cmd->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
}

probpnn::RunConfig resolve(const CommonFlags& f) {
    auto c = probpnn::load_run_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.output_dir = *f.out;
    if (f.jobs) c.jobs = *f.jobs;
    if (f.methods) {
        c.methods.clear();
        std::stringstream in(*f.methods);
        for (std::string m; std::getline(in, m, ',');)
            if (!m.empty()) c.methods.push_back(m);
    }
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic forecasts from rolling statistics and a small convolutional network"};
    app.require_subcommand(1);

    CommonFlags prepare_flags, train_flags, evaluate_flags;
    auto* prepare = app.add_subcommand("prepare", "load series, compute statistics and windows");
    add_common(prepare, prepare_flags);
    auto* train = app.add_subcommand("train", "train one model per series and ProbPNN method");
    add_common(train, train_flags);
    auto* evaluate = app.add_subcommand("evaluate", "score every method and write the report");
    add_common(evaluate, evaluate_flags);

    probpnn::SyntheticRunOptions syn;
    std::string kind = "standard";
    auto* synthetic = app.add_subcommand("synthetic", "write synthetic series and a matching run config");
    synthetic->add_option("--out", syn.output_dir, "output directory")->required();
    synthetic->add_option("--series", syn.data.series, "number of series")->capture_default_str();
    synthetic->add_option("--weeks", syn.data.weeks, "length in weeks")->capture_default_str();
    synthetic->add_option("--test-weeks", syn.test_weeks, "weeks held out for testing")->capture_default_str();
    synthetic->add_option("--seed", syn.data.seed, "generator seed")->capture_default_str();
    synthetic->add_option("--kind", kind, "standard | gaussian_profile")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*prepare) return probpnn::cmd_prepare(resolve(prepare_flags));
        if (*train) return probpnn::cmd_train(resolve(train_flags));
        if (*evaluate) return probpnn::cmd_evaluate(resolve(evaluate_flags));
        if (*synthetic) {
            syn.data.kind = probpnn::parse_synthetic_kind(kind);
            return probpnn::cmd_synthetic(syn);
        }
    } catch (const probpnn::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
