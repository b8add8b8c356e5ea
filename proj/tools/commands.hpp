#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "arlif/attention.hpp"
#include "arlif/detector.hpp"
#include "arlif/iforest.hpp"
#include "arlif/ingest.hpp"
#include "arlif/metrics.hpp"

namespace arlif::cli {

struct RunConfig {
    DatasetFormat format = DatasetFormat::NslKdd;
    std::string train_path;
    std::string test_path;
    std::string model_path = "arlif.model";
    std::size_t features = 10;  // m
    std::size_t trees = kDefaultTrees;
    std::size_t psi = kDefaultPsi;
    std::size_t window = kDefaultWindow;  // k
    double eta = kDefaultEta;
    double tau = kDefaultTau;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    std::size_t train_limit = 0;  // 0 = whole file
    std::size_t test_limit = 0;
    EvalMode mode = EvalMode::Arlif;
};

/// Throws InvalidArgument on out-of-range settings.
void validate(const RunConfig& config);

/// Everything cmd_train builds before writing the model file.
struct TrainedModel {
    Detector detector;
    TrainingReport report;
};

TrainedModel train_model(const RunConfig& config);

// Each command returns the process exit code; diagnostics go to `err`.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(std::size_t count, std::uint64_t seed, DatasetFormat format, const std::string& path,
              std::ostream& out, std::ostream& err);

}  // namespace arlif::cli
