#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pointseg/errors.hpp"
#include "pointseg/metrics.hpp"
#include "pointseg/rng.hpp"

#include "oracles.hpp"

using namespace pointseg;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("perfect prediction scores one everywhere") {
    const std::vector<std::int32_t> truth = {0, 1, 2, 1, 0, 2};
    const SegmentationMetrics m = compute_metrics(truth, truth, 3);
    CHECK(m.miou == 1.0);
    CHECK(m.oa == 1.0);
    CHECK(m.macc == 1.0);
    for (double iou : m.per_class_iou) CHECK(iou == 1.0);
    CHECK(m.confusion[0] == 2);
    CHECK(m.confusion[4] == 2);
    CHECK(m.confusion[8] == 2);
    CHECK(m.confusion[1] == 0);
}

TEST_CASE("constant prediction on a balanced two-class problem") {
    const std::vector<std::int32_t> truth = {0, 0, 1, 1};
    const std::vector<std::int32_t> predicted = {0, 0, 0, 0};
    const SegmentationMetrics m = compute_metrics(truth, predicted, 2);
    CHECK(m.per_class_iou[0] == 0.5);
    CHECK(m.per_class_iou[1] == 0.0);
    CHECK(m.miou == 0.25);
    CHECK(m.oa == 0.5);
    CHECK(m.macc == 0.5);
}

TEST_CASE("classes absent from truth and prediction are skipped") {
    const std::vector<std::int32_t> truth = {0, 0, 1};
    const std::vector<std::int32_t> predicted = {0, 1, 1};
    const SegmentationMetrics m = compute_metrics(truth, predicted, 4);
    CHECK(std::isnan(m.per_class_iou[2]));
    CHECK(std::isnan(m.per_class_iou[3]));
    CHECK(m.per_class_iou[0] == 0.5);
    CHECK(m.per_class_iou[1] == 0.5);
    CHECK(m.miou == 0.5);
    CHECK(m.oa == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("a class only ever predicted gets zero iou but no miou share") {
    // Class 1 never appears in the truth, so it cannot contribute to the
    // truth-present averages, yet its iou is well defined (and zero).
    const std::vector<std::int32_t> truth = {0, 0};
    const std::vector<std::int32_t> predicted = {0, 1};
    const SegmentationMetrics m = compute_metrics(truth, predicted, 2);
    CHECK(m.per_class_iou[0] == 0.5);
    CHECK(m.per_class_iou[1] == 0.0);
    CHECK(m.miou == 0.5);
    CHECK(m.macc == 0.5);
}

TEST_CASE("merged accumulators equal one-shot scoring") {
    Rng rng(5);
    std::vector<std::int32_t> truth(500);
    std::vector<std::int32_t> predicted(500);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = static_cast<std::int32_t>(rng.below(4));
        predicted[i] = static_cast<std::int32_t>(rng.below(4));
    }

    ConfusionAccumulator merged(4);
    ConfusionAccumulator part1(4);
    ConfusionAccumulator part2(4);
    part1.add(std::span(truth).subspan(0, 200), std::span(predicted).subspan(0, 200));
    part2.add(std::span(truth).subspan(200), std::span(predicted).subspan(200));
    merged.merge(part1);
    merged.merge(part2);
    CHECK(merged.total() == 500);

    const SegmentationMetrics whole = compute_metrics(truth, predicted, 4);
    const SegmentationMetrics stitched = merged.finalize();
    CHECK(stitched.confusion == whole.confusion);
    CHECK(stitched.miou == whole.miou);
    CHECK(stitched.oa == whole.oa);
    CHECK(stitched.macc == whole.macc);
}

TEST_CASE("argument and label validation") {
    CHECK_THROWS_AS(ConfusionAccumulator(1), ArgumentError);
    ConfusionAccumulator acc(3);
    const std::vector<std::int32_t> ok = {0, 1, 2};
    const std::vector<std::int32_t> high = {0, 1, 3};
    const std::vector<std::int32_t> negative = {0, -1, 2};
    CHECK_THROWS_AS(acc.add(ok, high), DataError);
    CHECK_THROWS_AS(acc.add(high, ok), DataError);
    CHECK_THROWS_AS(acc.add(negative, ok), DataError);
    CHECK_THROWS_AS(acc.add(ok, std::span(ok).subspan(0, 2)), ArgumentError);
    ConfusionAccumulator other(4);
    CHECK_THROWS_AS(acc.merge(other), ArgumentError);
}

TEST_CASE("empty accumulators finalize to zeros") {
    const SegmentationMetrics m = ConfusionAccumulator(2).finalize();
    CHECK(m.miou == 0.0);
    CHECK(m.oa == 0.0);
    CHECK(std::isnan(m.per_class_iou[0]));
}

TEST_CASE("scores match a point-by-point recount on random instances") {
    Rng rng(31);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n_class = 2 + rng.below(6);
        const std::size_t n = 1 + rng.below(300);
        std::vector<std::int32_t> truth(n);
        std::vector<std::int32_t> predicted(n);
        // Bias sampling toward low labels so some classes go missing.
        const std::size_t truth_span = 1 + rng.below(n_class);
        const std::size_t pred_span = 1 + rng.below(n_class);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<std::int32_t>(rng.below(truth_span));
            predicted[i] = static_cast<std::int32_t>(rng.below(pred_span));
        }

        const SegmentationMetrics m = compute_metrics(truth, predicted, n_class);
        const oracles::MetricsRecount r = oracles::recount_metrics(truth, predicted, n_class);
        CHECK(m.confusion == r.confusion);
        CHECK(m.miou == r.miou);
        CHECK(m.oa == r.oa);
        CHECK(m.macc == r.macc);
        for (std::size_t c = 0; c < n_class; ++c) {
            if (std::isnan(r.iou[c])) {
                CHECK(std::isnan(m.per_class_iou[c]));
            } else {
                CHECK(m.per_class_iou[c] == r.iou[c]);
            }
        }
    }
}

TEST_CASE("json report writes null for absent classes") {
    const std::vector<std::int32_t> truth = {0, 1};
    const std::vector<std::int32_t> predicted = {0, 1};
    const std::string json = metrics_json(compute_metrics(truth, predicted, 3));
    CHECK(json.find("\"miou\"") != std::string::npos);
    CHECK(json.find("\"oa\"") != std::string::npos);
    CHECK(json.find("\"macc\"") != std::string::npos);
    CHECK(json.find("\"per_class_iou\"") != std::string::npos);
    CHECK(json.find("null") != std::string::npos);
    CHECK(json.find("\"confusion\"") != std::string::npos);
    CHECK(json.find("nan") == std::string::npos);
}

TEST_SUITE_END();
