#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <vector>

#include "arlif/error.hpp"
#include "arlif/synthetic.hpp"

namespace arlif::cli {

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void print_training(const TrainingReport& report, std::ostream& out) {
    for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e) {
        out << "epoch=" << e + 1
            << " mean_loss=" << format_double("%.6f", report.epoch_mean_loss[e]) << '\n';
    }
}

std::vector<Record> load_test(const RunConfig& config) {
    if (config.test_path.empty()) throw Error(ErrorKind::InvalidArgument, "--test is required");
    return read_records_file(config.test_path, config.format, config.test_limit);
}

}  // namespace

void validate(const RunConfig& c) {
    const auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::InvalidArgument, what);
    };
    require(c.features >= 1 && c.features <= kNumColumns, "--features must lie in [1, 41]");
    require(c.trees >= 1, "--trees must be >= 1");
    require(c.psi >= 2, "--psi must be >= 2");
    require(c.window >= 1, "--window must be >= 1");
    require(c.eta > 0.0, "--eta must be > 0");
    require(c.tau > 0.0 && c.tau < 1.0, "--tau must lie in (0, 1)");
    require(c.epochs >= 1, "--epochs must be >= 1");
}

TrainedModel train_model(const RunConfig& config) {
    validate(config);
    if (config.train_path.empty()) throw Error(ErrorKind::InvalidArgument, "--train is required");
    const auto records = read_records_file(config.train_path, config.format, config.train_limit);
    if (records.empty()) throw Error(ErrorKind::EmptyStream, "no records in '" + config.train_path + "'");

    auto pre = std::make_shared<const Preprocessor>(fit_preprocessor(records, config.features));
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    features.reserve(records.size());
    labels.reserve(records.size());
    for (const auto& r : records) {
        features.push_back(transform(*pre, r));
        labels.push_back(r.label);
    }
    auto forest = std::make_shared<const IsolationForest>(
        build_forest(features, config.trees, config.psi, config.seed));
    const double baseline_tau = tune_baseline_threshold(*forest, features, labels);

    Detector det(forest, init_params(config.window, config.seed), pre, config.tau, config.eta);
    det.set_baseline_threshold(baseline_tau);
    auto report = train_online(det, records, config.epochs);
    return {std::move(det), std::move(report)};
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        auto trained = train_model(config);
        save_model_file(trained.detector, config.model_path);
        print_training(trained.report, out);
        out << "model=" << config.model_path
            << " bytes=" << model_size_bytes(trained.detector)
            << " trees=" << trained.detector.trees() << " window=" << trained.detector.window()
            << " samples=" << trained.report.samples
            << " baseline_threshold=" << format_double("%.2f", trained.detector.baseline_threshold())
            << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "arlif train: " << e.what() << '\n';
        return 1;
    }
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const auto det = load_model_file(config.model_path);
        const auto test = load_test(config);
        const auto report = evaluate(det, test, config.mode);
        out << render_text(report) << render_kv(report) << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "arlif eval: " << e.what() << '\n';
        return 1;
    }
}

int cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    std::unique_ptr<Detector> det;
    try {
        det = std::make_unique<Detector>(load_model_file(config.model_path));
    } catch (const std::exception& e) {
        err << "arlif stream: " << e.what() << '\n';
        return 1;
    }
    det->reset_histories();

    std::string line;
    std::size_t line_no = 0;
    long long cumulative_ns = 0;
    char buf[128];
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            const auto result = det->observe(parse_unlabeled_record(line, config.format));
            cumulative_ns += result.latency.count();
            std::snprintf(buf, sizeof buf, "score=%.17g pred=%d ns=%lld", result.score,
                          result.predicted, cumulative_ns);
            out << buf << std::endl;
        } catch (const std::exception& e) {
            err << "arlif stream: line " << line_no << ": " << e.what() << std::endl;
        }
    }
    return 0;
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        auto trained = train_model(config);
        const auto test = load_test(config);
        const auto arlif = evaluate(trained.detector, test, EvalMode::Arlif);
        const auto baseline = evaluate(trained.detector, test, EvalMode::BaselineIf);

        print_training(trained.report, out);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-16s %9s %16s %20s %14s %14s %14s\n", "Model Name",
                      "F1-Score", "Memory Acquired", "Detection-Time (ms)", "mean (us)",
                      "p50 (us)", "p99 (us)");
        out << buf;
        for (const auto* r : {&arlif, &baseline}) {
            std::snprintf(buf, sizeof buf, "%-16s %9.4f %14zu B %20.3f %14.2f %14.2f %14.2f\n",
                          std::string(display_name(r->mode)).c_str(), r->f1, r->model_bytes,
                          static_cast<double>(r->total_detection_time.count()) / 1e6,
                          static_cast<double>(r->latency.mean.count()) / 1e3,
                          static_cast<double>(r->latency.p50.count()) / 1e3,
                          static_cast<double>(r->latency.p99.count()) / 1e3);
            out << buf;
        }
        out << render_kv(arlif) << '\n' << render_kv(baseline) << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "arlif bench: " << e.what() << '\n';
        return 1;
    }
}

int cmd_synth(std::size_t count, std::uint64_t seed, DatasetFormat format, const std::string& path,
              std::ostream& out, std::ostream& err) {
    const auto lines = synthetic_lines(count, seed, format);
    if (path.empty() || path == "-") {
        for (const auto& l : lines) out << l << '\n';
        return 0;
    }
    std::ofstream file(path, std::ios::trunc);
    if (!file) {
        err << "arlif synth: cannot write '" << path << "'\n";
        return 1;
    }
    for (const auto& l : lines) file << l << '\n';
    return 0;
}

}  // namespace arlif::cli
