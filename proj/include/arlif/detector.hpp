#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "arlif/attention.hpp"
#include "arlif/iforest.hpp"
#include "arlif/ingest.hpp"
#include "arlif/matrix.hpp"

namespace arlif {

inline constexpr double kDefaultTau = 0.5;
inline constexpr double kDefaultEta = 0.05;
inline constexpr double kHistoryFill = 0.5;

struct DetectionResult {
    double score = 0.0;
    int predicted = 0;
    std::chrono::nanoseconds latency{0};
};

struct TrainingReport {
    std::vector<double> epoch_mean_loss;
    std::size_t samples = 0;
};

/// Streaming ARLIF detector. The forest and preprocessor are frozen and shared;
/// only the attention parameters and the per-tree histories change.
///
/// Single writer: observe/learn must be externally serialized.
class Detector {
public:
    Detector(std::shared_ptr<const IsolationForest> forest, AttentionParams params,
             std::shared_ptr<const Preprocessor> pre, double tau = kDefaultTau,
             double eta = kDefaultEta);

    DetectionResult observe(const Record& r);
    DetectionResult observe_features(std::span<const double> x);

    /// observe + one normalized gradient step on the attention layer; returns
    /// the BCE loss of the pre-update score.
    double learn(const Record& r, int label);
    double learn_features(std::span<const double> x, int label);

    /// Refills every history slot with the neutral 0.5.
    void reset_histories();

    /// T x k history, oldest response in column 0.
    Matrix history() const;
    void set_history(const Matrix& chronological);

    const IsolationForest& forest() const noexcept { return *forest_; }
    const Preprocessor& preprocessor() const noexcept { return *pre_; }
    const AttentionParams& params() const noexcept { return params_; }
    AttentionParams& params() noexcept { return params_; }
    const ForwardCache& last_forward() const noexcept { return cache_; }

    std::size_t window() const noexcept { return params_.k(); }
    std::size_t trees() const noexcept { return forest_->size(); }
    double tau() const noexcept { return tau_; }
    double eta() const noexcept { return eta_; }
    std::uint64_t samples_seen() const noexcept { return samples_seen_; }
    void set_samples_seen(std::uint64_t n) noexcept { samples_seen_ = n; }

    /// Operating point of the plain isolation-forest baseline on forest_score.
    double baseline_threshold() const noexcept { return baseline_tau_; }
    void set_baseline_threshold(double t);

    bool operator==(const Detector& other) const;

private:
    void push_probas(std::span<const double> x);

    std::shared_ptr<const IsolationForest> forest_;
    std::shared_ptr<const Preprocessor> pre_;
    AttentionParams params_;
    double tau_;
    double eta_;
    double baseline_tau_ = kDefaultTau;
    std::uint64_t samples_seen_ = 0;

    Matrix ring_;  // T x k, slot `head_` holds the oldest response
    std::size_t head_ = 0;
    std::vector<double> probas_;
    Matrix window_;
    ForwardCache cache_;
};

/// One learn() per record per epoch, in stream order; histories carry over
/// between epochs.
TrainingReport train_online(Detector& det, std::span<const Record> stream, std::size_t epochs = 1);

enum class ModelSections { Full, ForestOnly };

inline constexpr std::uint32_t kModelVersion = 1;

/// Little-endian "ARLF" model image. ForestOnly omits the attention and
/// history segments (the plain isolation-forest model).
std::vector<std::uint8_t> serialize(const Detector& det, ModelSections sections = ModelSections::Full);
Detector deserialize(std::span<const std::uint8_t> bytes);

void save_model(const Detector& det, std::ostream& out);
Detector load_model(std::istream& in);
void save_model_file(const Detector& det, const std::string& path);
Detector load_model_file(const std::string& path);

std::size_t model_size_bytes(const Detector& det, ModelSections sections = ModelSections::Full);

/// Byte offset and length of the attention-parameter segment in a Full image.
struct Segment {
    std::size_t offset = 0;
    std::size_t length = 0;
};
Segment attention_segment(const Detector& det);
Segment forest_segment(const Detector& det);

}  // namespace arlif
