#include <doctest.h>

#include <memory>
#include <vector>

#include "arlif/error.hpp"
#include "arlif/metrics.hpp"
#include "arlif/random.hpp"
#include "arlif/synthetic.hpp"

using namespace arlif;
using std::chrono::nanoseconds;

namespace {

// Direct evaluation at each grid point, no sorting tricks.
double reference_threshold(const IsolationForest& forest, std::span<const FeatureVector> xs,
                           std::span<const int> labels) {
    double best = 0.01;
    double best_f1 = -1.0;
    for (int step = 1; step <= 99; ++step) {
        const double t = step / 100.0;
        std::vector<int> pred;
        for (const auto& x : xs) pred.push_back(forest_score(forest, x) >= t ? 1 : 0);
        const double f1 = f1_score(confusion_matrix(pred, labels));
        if (f1 > best_f1) {
            best_f1 = f1;
            best = t;
        }
    }
    return best;
}

Detector small_detector(std::span<const Record> records, std::size_t k) {
    auto pre = std::make_shared<const Preprocessor>(fit_preprocessor(records, 8));
    std::vector<FeatureVector> xs;
    for (const auto& r : records) xs.push_back(transform(*pre, r));
    auto forest = std::make_shared<const IsolationForest>(build_forest(xs, 10, 64, 3));
    return Detector(forest, init_params(k, 3), pre);
}

}  // namespace

TEST_CASE("confusion_matrix") {
    SUBCASE("hand example") {
        const std::vector<int> pred = {1, 1, 1, 0};
        const std::vector<int> label = {1, 0, 1, 1};
        const auto c = confusion_matrix(pred, label);
        CHECK(c == Confusion{2, 1, 1, 0});
        CHECK(c.precision() == doctest::Approx(2.0 / 3.0));
        CHECK(c.recall() == doctest::Approx(2.0 / 3.0));
        CHECK(f1_score(c) == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("perfect and hopeless") {
        const std::vector<int> y = {0, 1, 1, 0, 1};
        CHECK(f1_score(confusion_matrix(y, y)) == 1.0);
        const std::vector<int> zeros(5, 0);
        const auto c = confusion_matrix(zeros, y);
        CHECK(c.tp == 0);
        CHECK(f1_score(c) == 0.0);
        CHECK(c.precision() == 0.0);
    }
    SUBCASE("counts always sum to n") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            const auto n = 1 + uniform_index(rng, 60);
            std::vector<int> p(n);
            std::vector<int> y(n);
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = static_cast<int>(uniform_index(rng, 2));
                y[i] = static_cast<int>(uniform_index(rng, 2));
            }
            const auto c = confusion_matrix(p, y);
            CHECK(c.total() == n);
            const double f1 = f1_score(c);
            CHECK(f1 >= 0.0);
            CHECK(f1 <= 1.0);
        }
    }
    SUBCASE("errors") {
        const std::vector<int> a = {1, 0};
        const std::vector<int> b = {1};
        CHECK_THROWS_AS(confusion_matrix(a, b), Error);
        CHECK_THROWS_AS(confusion_matrix({}, {}), Error);
    }
}

TEST_CASE("latency_stats uses nearest rank") {
    std::vector<nanoseconds> samples;
    for (int i = 100; i >= 1; --i) samples.emplace_back(i);
    const auto s = latency_stats(samples);
    CHECK(s.p50.count() == 50);
    CHECK(s.p99.count() == 99);
    CHECK(s.mean.count() == 50);
    CHECK(latency_stats({}).p99.count() == 0);
}

TEST_CASE("modes") {
    CHECK(parse_mode("arlif") == EvalMode::Arlif);
    CHECK(parse_mode("baseline-if") == EvalMode::BaselineIf);
    CHECK_THROWS_AS(parse_mode("svm"), Error);
    CHECK(display_name(EvalMode::Arlif) == "ARLIF-IDS");
    CHECK(display_name(EvalMode::BaselineIf) == "IsolationForest");
}

TEST_CASE("evaluate") {
    const auto train = synthetic_records(400, 11);
    const auto test = synthetic_records(200, 12);
    auto det = small_detector(train, 4);
    train_online(det, train, 1);
    const auto before = serialize(det);

    SUBCASE("empty test set") {
        CHECK_THROWS_AS(evaluate(det, {}, EvalMode::Arlif), Error);
    }
    SUBCASE("leaves the detector untouched and is repeatable") {
        const auto a = evaluate(det, test, EvalMode::Arlif);
        const auto b = evaluate(det, test, EvalMode::Arlif);
        CHECK(serialize(det) == before);
        CHECK(a.confusion == b.confusion);
        CHECK(a.confusion.total() == test.size());
        CHECK(a.latency.p50 <= a.latency.p99);
        CHECK(a.model_bytes == serialize(det).size());
        CHECK(a.f1 == f1_score(a.confusion));
    }
    SUBCASE("arlif matches a manual observe loop") {
        auto manual = det;
        manual.reset_histories();
        Confusion c;
        for (const auto& r : test) {
            const int p = manual.observe(r).predicted;
            if (p == 1 && r.label == 1) ++c.tp;
            if (p == 1 && r.label == 0) ++c.fp;
            if (p == 0 && r.label == 1) ++c.fn;
            if (p == 0 && r.label == 0) ++c.tn;
        }
        CHECK(evaluate(det, test, EvalMode::Arlif).confusion == c);
    }
    SUBCASE("baseline uses the forest threshold and the smaller image") {
        const auto report = evaluate(det, test, EvalMode::BaselineIf);
        std::vector<int> pred;
        std::vector<int> labels;
        for (const auto& r : test) {
            const double s = forest_score(det.forest(), transform(det.preprocessor(), r));
            pred.push_back(s >= det.baseline_threshold() ? 1 : 0);
            labels.push_back(r.label);
        }
        CHECK(report.confusion == confusion_matrix(pred, labels));
        CHECK(report.model_bytes == model_size_bytes(det, ModelSections::ForestOnly));
        CHECK(report.model_bytes < evaluate(det, test, EvalMode::Arlif).model_bytes);
    }
    SUBCASE("renderings carry the table columns") {
        const auto report = evaluate(det, test, EvalMode::Arlif);
        const auto text = render_text(report);
        CHECK(text.find("F1-Score") != std::string::npos);
        CHECK(text.find("Memory Acquired") != std::string::npos);
        CHECK(text.find("Detection-Time") != std::string::npos);
        const auto kv = render_kv(report);
        CHECK(kv.find("mode=arlif ") == 0);
        CHECK(kv.find(" f1=") != std::string::npos);
        CHECK(kv.find('\n') == std::string::npos);
    }
}

TEST_CASE("tune_baseline_threshold") {
    SUBCASE("matches an exhaustive grid search") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto records = synthetic_records(300, 100 + seed);
            auto pre = fit_preprocessor(records, 6);
            std::vector<FeatureVector> xs;
            std::vector<int> labels;
            for (const auto& r : records) {
                xs.push_back(transform(pre, r));
                labels.push_back(r.label);
            }
            const auto forest = build_forest(xs, 15, 64, seed);
            CHECK(tune_baseline_threshold(forest, xs, labels) ==
                  reference_threshold(forest, xs, labels));
        }
    }
    SUBCASE("separable one-dimensional data") {
        std::vector<FeatureVector> xs;
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) {
            xs.push_back({0.4 + 0.2 * i / 59.0});
            labels.push_back(0);
        }
        for (int i = 0; i < 4; ++i) {
            xs.push_back({i % 2 == 0 ? 0.0 : 1.0});
            labels.push_back(1);
        }
        const auto forest = build_forest(xs, 50, 64, 0);
        const double t = tune_baseline_threshold(forest, xs, labels);
        std::vector<int> pred;
        for (const auto& x : xs) pred.push_back(forest_score(forest, x) >= t ? 1 : 0);
        CHECK(f1_score(confusion_matrix(pred, labels)) > 0.5);
    }
    SUBCASE("single class") {
        const std::vector<FeatureVector> xs = {{0.1}, {0.2}, {0.9}};
        const std::vector<int> zeros = {0, 0, 0};
        const auto forest = build_forest(xs, 3, 3, 0);
        CHECK_THROWS_AS(tune_baseline_threshold(forest, xs, zeros), Error);
    }
}
