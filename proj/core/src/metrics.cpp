#include "pointseg/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "pointseg/errors.hpp"

namespace pointseg {

ConfusionAccumulator::ConfusionAccumulator(std::size_t n_class) : n_class_(n_class) {
    if (n_class < 2) throw ArgumentError("metrics need at least 2 classes");
    counts_.assign(n_class * n_class, 0);
}

void ConfusionAccumulator::add(std::span<const std::int32_t> truth,
                               std::span<const std::int32_t> predicted) {
    if (truth.size() != predicted.size()) {
        throw ArgumentError("metrics: truth and prediction lengths differ");
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::int32_t t = truth[i];
        const std::int32_t p = predicted[i];
        if (t < 0 || static_cast<std::size_t>(t) >= n_class_) {
            throw DataError("metrics: label " + std::to_string(t) + " at row " +
                            std::to_string(i) + " outside [0, " + std::to_string(n_class_) + ")");
        }
        if (p < 0 || static_cast<std::size_t>(p) >= n_class_) {
            throw DataError("metrics: prediction " + std::to_string(p) + " at row " +
                            std::to_string(i) + " outside [0, " + std::to_string(n_class_) + ")");
        }
        ++counts_[static_cast<std::size_t>(t) * n_class_ + static_cast<std::size_t>(p)];
    }
    total_ += truth.size();
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
    if (other.n_class_ != n_class_) {
        throw ArgumentError("metrics: cannot merge accumulators with different class counts");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
}

SegmentationMetrics ConfusionAccumulator::finalize() const {
    SegmentationMetrics m;
    m.n_class = n_class_;
    m.confusion = counts_;
    m.per_class_iou.assign(n_class_, std::numeric_limits<double>::quiet_NaN());

    std::uint64_t trace = 0;
    double iou_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < n_class_; ++c) {
        std::uint64_t tp = counts_[c * n_class_ + c];
        std::uint64_t fn = 0;
        std::uint64_t fp = 0;
        for (std::size_t j = 0; j < n_class_; ++j) {
            if (j != c) {
                fn += counts_[c * n_class_ + j];
                fp += counts_[j * n_class_ + c];
            }
        }
        trace += tp;
        if (tp + fp + fn > 0) {
            m.per_class_iou[c] =
                static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
        }
        // Averages run over classes present in the ground truth only.
        if (tp + fn > 0) {
            ++present;
            iou_sum += m.per_class_iou[c];
            recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
        }
    }
    if (total_ > 0) m.oa = static_cast<double>(trace) / static_cast<double>(total_);
    if (present > 0) {
        m.miou = iou_sum / static_cast<double>(present);
        m.macc = recall_sum / static_cast<double>(present);
    }
    return m;
}

SegmentationMetrics compute_metrics(std::span<const std::int32_t> truth,
                                    std::span<const std::int32_t> predicted,
                                    std::size_t n_class) {
    ConfusionAccumulator acc(n_class);
    acc.add(truth, predicted);
    return acc.finalize();
}

std::string metrics_json(const SegmentationMetrics& metrics) {
    nlohmann::ordered_json j;
    j["n_class"] = metrics.n_class;
    j["miou"] = metrics.miou;
    j["oa"] = metrics.oa;
    j["macc"] = metrics.macc;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
    for (double iou : metrics.per_class_iou) {
        if (std::isnan(iou)) {
            per_class.push_back(nullptr);
        } else {
            per_class.push_back(iou);
        }
    }
    j["per_class_iou"] = per_class;
    j["confusion"] = metrics.confusion;
    return j.dump(2) + "\n";
}

}  // namespace pointseg
