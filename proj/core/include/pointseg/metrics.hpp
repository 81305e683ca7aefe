#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pointseg {

// Confusion-matrix derived segmentation scores. Rows of `confusion` are
// ground truth, columns are predictions. per_class_iou is NaN for classes
// absent from both truth and prediction; miou and macc average only over
// classes present in the ground truth.
struct SegmentationMetrics {
    std::size_t n_class = 0;
    std::vector<std::uint64_t> confusion;  // n_class x n_class, row-major
    std::vector<double> per_class_iou;
    double miou = 0.0;
    double oa = 0.0;
    double macc = 0.0;
};

// Streaming confusion counter; scenes can be scored independently and the
// counters merged additively.
class ConfusionAccumulator {
public:
    explicit ConfusionAccumulator(std::size_t n_class);

    // Throws DataError when a label or prediction is outside [0, n_class).
    void add(std::span<const std::int32_t> truth, std::span<const std::int32_t> predicted);

    void merge(const ConfusionAccumulator& other);

    std::size_t total() const { return total_; }

    SegmentationMetrics finalize() const;

private:
    std::size_t n_class_;
    std::size_t total_ = 0;
    std::vector<std::uint64_t> counts_;
};

// One-shot convenience over a single (truth, prediction) pair.
SegmentationMetrics compute_metrics(std::span<const std::int32_t> truth,
                                    std::span<const std::int32_t> predicted,
                                    std::size_t n_class);

// JSON report of the scores; absent classes serialize as null IoU.
std::string metrics_json(const SegmentationMetrics& metrics);

}  // namespace pointseg
