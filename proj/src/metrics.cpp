#include "arlif/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "arlif/error.hpp"

namespace arlif {

double Confusion::precision() const noexcept {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const noexcept {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

Confusion confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) +
                                                   " predictions vs " +
                                                   std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw Error(ErrorKind::Empty, "no predictions to tally");
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = predictions[i] != 0;
        const bool truth = labels[i] != 0;
        if (pred && truth) ++c.tp;
        else if (pred) ++c.fp;
        else if (truth) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double f1_score(const Confusion& c) {
    if (c.tp == 0) return 0.0;
    const double p = c.precision();
    const double r = c.recall();
    return 2.0 * p * r / (p + r);
}

EvalMode parse_mode(std::string_view name) {
    if (name == "arlif") return EvalMode::Arlif;
    if (name == "baseline-if") return EvalMode::BaselineIf;
    throw Error(ErrorKind::InvalidArgument, "unknown evaluation mode '" + std::string(name) + "'");
}

std::string_view to_string(EvalMode mode) noexcept {
    return mode == EvalMode::Arlif ? "arlif" : "baseline-if";
}

std::string_view display_name(EvalMode mode) noexcept {
    return mode == EvalMode::Arlif ? "ARLIF-IDS" : "IsolationForest";
}

LatencyStats latency_stats(std::span<const std::chrono::nanoseconds> samples) {
    if (samples.empty()) return {};
    std::vector<std::int64_t> ns(samples.size());
    std::transform(samples.begin(), samples.end(), ns.begin(), [](auto d) { return d.count(); });
    std::sort(ns.begin(), ns.end());
    // Nearest-rank percentile.
    const auto rank = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(ns.size())));
        return std::chrono::nanoseconds(ns[std::clamp<std::size_t>(idx, 1, ns.size()) - 1]);
    };
    const auto sum = std::accumulate(ns.begin(), ns.end(), std::int64_t{0});
    return {std::chrono::nanoseconds(sum / static_cast<std::int64_t>(ns.size())), rank(0.50),
            rank(0.99)};
}

EvalReport evaluate(const Detector& det, std::span<const Record> test, EvalMode mode) {
    if (test.empty()) throw Error(ErrorKind::Empty, "empty test set");

    Detector work = det;
    work.reset_histories();

    std::vector<int> predictions;
    std::vector<int> labels;
    std::vector<std::chrono::nanoseconds> latencies;
    predictions.reserve(test.size());
    labels.reserve(test.size());
    latencies.reserve(test.size());

    const auto start = std::chrono::steady_clock::now();
    for (const auto& r : test) {
        if (mode == EvalMode::Arlif) {
            const auto result = work.observe(r);
            predictions.push_back(result.predicted);
            latencies.push_back(result.latency);
        } else {
            const auto t0 = std::chrono::steady_clock::now();
            const auto x = transform(work.preprocessor(), r);
            const double score = forest_score(work.forest(), x);
            predictions.push_back(score >= work.baseline_threshold() ? 1 : 0);
            latencies.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(
                std::chrono::steady_clock::now() - t0));
        }
        labels.push_back(r.label);
    }
    const auto stop = std::chrono::steady_clock::now();

    EvalReport report;
    report.mode = mode;
    report.confusion = confusion_matrix(predictions, labels);
    report.precision = report.confusion.precision();
    report.recall = report.confusion.recall();
    report.f1 = f1_score(report.confusion);
    report.total_detection_time = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start);
    report.latency = latency_stats(latencies);
    report.model_bytes = model_size_bytes(
        det, mode == EvalMode::Arlif ? ModelSections::Full : ModelSections::ForestOnly);
    return report;
}

double tune_baseline_threshold(const IsolationForest& forest, std::span<const FeatureVector> samples,
                               std::span<const int> labels) {
    if (samples.size() != labels.size()) {
        throw Error(ErrorKind::LengthMismatch, "samples and labels differ in length");
    }
    const auto positives = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw Error(ErrorKind::SingleClass, "threshold tuning needs both classes");
    }

    std::vector<double> scores(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) scores[i] = forest_score(forest, samples[i]);

    // Sort once, then sweep the grid upwards: everything at or above the
    // threshold is predicted attack.
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    Confusion c;
    c.tp = static_cast<std::uint64_t>(positives);
    c.fp = labels.size() - c.tp;
    std::size_t below = 0;
    double best_threshold = 0.01;
    double best_f1 = -1.0;
    for (int step = 1; step <= 99; ++step) {
        const double threshold = step / 100.0;
        while (below < order.size() && scores[order[below]] < threshold) {
            if (labels[order[below]] != 0) {
                --c.tp;
                ++c.fn;
            } else {
                --c.fp;
                ++c.tn;
            }
            ++below;
        }
        const double f1 = f1_score(c);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = threshold;
        }
    }
    return best_threshold;
}

namespace {

double to_ms(std::chrono::nanoseconds d) { return static_cast<double>(d.count()) / 1e6; }
double to_us(std::chrono::nanoseconds d) { return static_cast<double>(d.count()) / 1e3; }

}  // namespace

std::string render_text(const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "model            %s\n"
                  "confusion        tp=%llu fp=%llu fn=%llu tn=%llu\n"
                  "precision        %.4f\n"
                  "recall           %.4f\n"
                  "F1-Score         %.4f\n"
                  "Memory Acquired  %zu bytes (%.2f kB)\n"
                  "Detection-Time   %.3f ms total, per sample mean %.2f us p50 %.2f us p99 %.2f us\n",
                  std::string(display_name(r.mode)).c_str(),
                  static_cast<unsigned long long>(r.confusion.tp),
                  static_cast<unsigned long long>(r.confusion.fp),
                  static_cast<unsigned long long>(r.confusion.fn),
                  static_cast<unsigned long long>(r.confusion.tn), r.precision, r.recall, r.f1,
                  r.model_bytes, static_cast<double>(r.model_bytes) / 1000.0,
                  to_ms(r.total_detection_time), to_us(r.latency.mean), to_us(r.latency.p50),
                  to_us(r.latency.p99));
    return buf;
}

std::string render_kv(const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "mode=%s tp=%llu fp=%llu fn=%llu tn=%llu precision=%.6f recall=%.6f f1=%.6f "
                  "model_bytes=%zu total_ns=%lld mean_ns=%lld p50_ns=%lld p99_ns=%lld",
                  std::string(to_string(r.mode)).c_str(),
                  static_cast<unsigned long long>(r.confusion.tp),
                  static_cast<unsigned long long>(r.confusion.fp),
                  static_cast<unsigned long long>(r.confusion.fn),
                  static_cast<unsigned long long>(r.confusion.tn), r.precision, r.recall, r.f1,
                  r.model_bytes, static_cast<long long>(r.total_detection_time.count()),
                  static_cast<long long>(r.latency.mean.count()),
                  static_cast<long long>(r.latency.p50.count()),
                  static_cast<long long>(r.latency.p99.count()));
    return buf;
}

}  // namespace arlif
