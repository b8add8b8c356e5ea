#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using arlif::cli::RunConfig;

namespace {

void add_model_flags(CLI::App& cmd, RunConfig& c, std::string& format) {
    cmd.add_option("--format", format, "Dataset layout")
        ->check(CLI::IsMember({"nsl-kdd", "kdd99"}))
        ->capture_default_str();
    cmd.add_option("--model", c.model_path, "Model file")->capture_default_str();
}

void add_training_flags(CLI::App& cmd, RunConfig& c) {
    cmd.add_option("--train", c.train_path, "Training records")->required();
    cmd.add_option("-m,--features", c.features, "Selected feature count")
        ->check(CLI::Range(1, 41))
        ->capture_default_str();
    cmd.add_option("--trees", c.trees, "Isolation trees (T)")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--psi", c.psi, "Per-tree subsample size")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    cmd.add_option("-k,--window", c.window, "History window length")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--eta", c.eta, "SGD learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--tau", c.tau, "Decision threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd.add_option("--epochs", c.epochs, "Online training passes")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--train-limit", c.train_limit, "Use only the first N training rows (0 = all)")
        ->capture_default_str();
}

void add_test_flags(CLI::App& cmd, RunConfig& c) {
    cmd.add_option("--test", c.test_path, "Test records")->required();
    cmd.add_option("--test-limit", c.test_limit, "Use only the first N test rows (0 = all)")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARLIF streaming intrusion detector"};
    app.require_subcommand(1);

    RunConfig config;
    std::string format = "nsl-kdd";
    std::string mode = "arlif";

    auto* train = app.add_subcommand("train", "Fit preprocessor and forest, learn attention online, write model");
    add_model_flags(*train, config, format);
    add_training_flags(*train, config);

    auto* eval = app.add_subcommand("eval", "Evaluate a model on labeled records");
    add_model_flags(*eval, config, format);
    add_test_flags(*eval, config);
    eval->add_option("--mode", mode, "Scoring path")
        ->check(CLI::IsMember({"arlif", "baseline-if"}))
        ->capture_default_str();

    auto* stream = app.add_subcommand("stream", "Score records from standard input, one line each");
    add_model_flags(*stream, config, format);

    auto* bench = app.add_subcommand("bench", "Train once, compare ARLIF against the plain isolation forest");
    add_model_flags(*bench, config, format);
    add_training_flags(*bench, config);
    add_test_flags(*bench, config);

    std::size_t synth_count = 1000;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write synthetic records in NSL-KDD or KDDCUP'99 layout");
    synth->add_option("--format", format, "Dataset layout")
        ->check(CLI::IsMember({"nsl-kdd", "kdd99"}))
        ->capture_default_str();
    synth->add_option("-n,--count", synth_count, "Rows to generate")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
    synth->add_option("-o,--out", synth_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    config.format = arlif::parse_format(format);
    config.mode = arlif::parse_mode(mode);

    if (*train) return arlif::cli::cmd_train(config, std::cout, std::cerr);
    if (*eval) return arlif::cli::cmd_eval(config, std::cout, std::cerr);
    if (*stream) return arlif::cli::cmd_stream(config, std::cin, std::cout, std::cerr);
    if (*bench) return arlif::cli::cmd_bench(config, std::cout, std::cerr);
    if (*synth) return arlif::cli::cmd_synth(synth_count, synth_seed, config.format, synth_out, std::cout, std::cerr);
    return 1;
}
