#include "arlif/detector.hpp"

#include <cmath>

#include "arlif/error.hpp"

namespace arlif {

Detector::Detector(std::shared_ptr<const IsolationForest> forest, AttentionParams params,
                   std::shared_ptr<const Preprocessor> pre, double tau, double eta)
    : forest_(std::move(forest)),
      pre_(std::move(pre)),
      params_(std::move(params)),
      tau_(tau),
      eta_(eta) {
    if (!forest_ || forest_->size() == 0) throw Error(ErrorKind::InvalidArgument, "empty forest");
    if (!pre_) throw Error(ErrorKind::InvalidArgument, "missing preprocessor");
    if (params_.k() < 1) throw Error(ErrorKind::InvalidArgument, "window k must be >= 1");
    if (!(tau_ > 0.0 && tau_ < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1), got " + std::to_string(tau_));
    }
    if (!(eta_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be > 0");
    if (pre_->m() != forest_->dims) {
        throw Error(ErrorKind::DimensionMismatch,
                    "preprocessor emits " + std::to_string(pre_->m()) +
                        " features, forest was built on " + std::to_string(forest_->dims));
    }
    ring_ = Matrix(forest_->size(), params_.k(), kHistoryFill);
    probas_.resize(forest_->size());
    window_ = Matrix(forest_->size(), params_.k());
}

void Detector::reset_histories() {
    for (auto& v : ring_.flat()) v = kHistoryFill;
    head_ = 0;
}

Matrix Detector::history() const {
    const std::size_t k = window();
    Matrix h(trees(), k);
    for (std::size_t i = 0; i < trees(); ++i) {
        for (std::size_t c = 0; c < k; ++c) h(i, c) = ring_(i, (head_ + c) % k);
    }
    return h;
}

void Detector::set_history(const Matrix& chronological) {
    if (chronological.rows() != trees() || chronological.cols() != window()) {
        throw Error(ErrorKind::DimensionMismatch, "history shape does not match detector");
    }
    ring_ = chronological;
    head_ = 0;
}

void Detector::set_baseline_threshold(double t) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::InvalidArgument, "baseline threshold outside (0, 1)");
    baseline_tau_ = t;
}

void Detector::push_probas(std::span<const double> x) {
    if (x.size() != forest_->dims) {
        throw Error(ErrorKind::DimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                      " entries, expected " +
                                                      std::to_string(forest_->dims));
    }
    tree_probas(*forest_, x, probas_);
    const std::size_t k = window();
    for (std::size_t i = 0; i < trees(); ++i) ring_(i, head_) = probas_[i];
    head_ = (head_ + 1) % k;
    for (std::size_t i = 0; i < trees(); ++i) {
        for (std::size_t c = 0; c < k; ++c) window_(i, c) = ring_(i, (head_ + c) % k);
    }
}

DetectionResult Detector::observe_features(std::span<const double> x) {
    const auto start = std::chrono::steady_clock::now();
    push_probas(x);
    const double score = forward(params_, window_, cache_);
    ++samples_seen_;
    const auto stop = std::chrono::steady_clock::now();
    return {score, score >= tau_ ? 1 : 0,
            std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)};
}

DetectionResult Detector::observe(const Record& r) {
    const auto start = std::chrono::steady_clock::now();
    const auto x = transform(*pre_, r);
    auto result = observe_features(x);
    result.latency = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - start);
    return result;
}

double Detector::learn_features(std::span<const double> x, int label) {
    const auto result = observe_features(x);
    const double loss = bce_loss(result.score, label);
    normalized_step(params_, backward(params_, cache_, label), cache_, label, eta_);
    return loss;
}

double Detector::learn(const Record& r, int label) {
    return learn_features(transform(*pre_, r), label);
}

bool Detector::operator==(const Detector& other) const {
    return *forest_ == *other.forest_ && *pre_ == *other.pre_ && params_ == other.params_ &&
           tau_ == other.tau_ && eta_ == other.eta_ && baseline_tau_ == other.baseline_tau_ &&
           samples_seen_ == other.samples_seen_ && history() == other.history();
}

TrainingReport train_online(Detector& det, std::span<const Record> stream, std::size_t epochs) {
    if (stream.empty()) throw Error(ErrorKind::EmptyStream, "training stream is empty");
    if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 1");
    TrainingReport report;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        double total = 0.0;
        for (const auto& r : stream) total += det.learn(r, r.label);
        report.epoch_mean_loss.push_back(total / static_cast<double>(stream.size()));
        report.samples += stream.size();
    }
    return report;
}

}  // namespace arlif
