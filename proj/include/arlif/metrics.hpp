#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "arlif/detector.hpp"
#include "arlif/iforest.hpp"
#include "arlif/ingest.hpp"

namespace arlif {

/// Attack (1) is the positive class.
struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    double precision() const noexcept;
    double recall() const noexcept;
    bool operator==(const Confusion&) const = default;
};

Confusion confusion_matrix(std::span<const int> predictions, std::span<const int> labels);

/// 0 whenever tp == 0.
double f1_score(const Confusion& c);

enum class EvalMode { Arlif, BaselineIf };

EvalMode parse_mode(std::string_view name);
std::string_view to_string(EvalMode mode) noexcept;
/// Row label used in benchmark tables.
std::string_view display_name(EvalMode mode) noexcept;

struct LatencyStats {
    std::chrono::nanoseconds mean{0};
    std::chrono::nanoseconds p50{0};
    std::chrono::nanoseconds p99{0};
};

LatencyStats latency_stats(std::span<const std::chrono::nanoseconds> samples);

struct EvalReport {
    EvalMode mode = EvalMode::Arlif;
    Confusion confusion;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::chrono::nanoseconds total_detection_time{0};
    LatencyStats latency;
    std::size_t model_bytes = 0;
};

/// Detection-only pass over `test` in order. Works on a copy of the detector
/// whose histories start from the neutral fill; `det` is left untouched.
EvalReport evaluate(const Detector& det, std::span<const Record> test, EvalMode mode);

/// F1-maximizing threshold on forest_score over the grid 0.01..0.99, ties to
/// the smallest.
double tune_baseline_threshold(const IsolationForest& forest, std::span<const FeatureVector> samples,
                               std::span<const int> labels);

/// Multi-line human-readable rendering.
std::string render_text(const EvalReport& report);
/// One line of space-separated key=value tokens.
std::string render_kv(const EvalReport& report);

}  // namespace arlif
