#pragma once

// Fish counting, annotation-frame sampling and single-class detector metrics
// (IoU, all-point interpolated AP, mAP50, mAP@[.5:.95]).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reefmap/ingest.hpp"

namespace reefmap {

inline constexpr int kFishClass = 0;

// Detections of the fish class with confidence >= threshold.
std::size_t count_fish(std::span<const Detection> frame, double conf_threshold);

// Frames picked for manual labelling: every `interval_s` seconds plus the
// frames `bracket_s` before and after. Sorted and unique.
std::vector<std::size_t> sample_annotation_frames(std::size_t num_frames, double fps, double interval_s = 20.0,
                                                  double bracket_s = 1.0);

double iou(const Detection& a, const Detection& b);

// Greedy single-frame matching. Returns, for each prediction in descending
// confidence order (ties by input order), whether it is a true positive.
// `order` receives the input index of each ranked prediction when non-null.
std::vector<bool> match_predictions(std::span<const Detection> preds, std::span<const Detection> gts,
                                    double iou_thresh, std::vector<std::size_t>* order = nullptr);

// Area under the precision envelope for a ranked TP/FP sequence.
double ap_from_ranked(const std::vector<bool>& ranked_tp, std::size_t num_gt);

double average_precision(std::span<const Detection> preds, std::span<const Detection> gts, double iou_thresh);

// The ten COCO thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

struct EvalConfig {
    std::vector<double> iou_thresholds = coco_iou_thresholds();
    double confidence_threshold_for_counting = 0.25;

    void validate() const;
};

struct PrPoint {
    double confidence = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct ThresholdAp {
    double iou_threshold = 0.0;
    double ap = 0.0;
};

struct EvalReport {
    std::vector<ThresholdAp> per_threshold;  // one per configured threshold
    double map50 = 0.0;
    double map50_95 = 0.0;  // mean over per_threshold
    double ap_at_095 = 0.0;
    std::size_t tp = 0;  // at the counting threshold, IoU 0.5
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t frames = 0;
    std::size_t num_gt = 0;
    std::size_t num_pred = 0;
    std::vector<PrPoint> pr_curve;  // IoU 0.5
};

// Matching per frame, PR curve pooled over all frames in the union of both
// sets (a frame missing on one side counts as empty there). Returns nullopt
// when no frame appears in both sets.
std::optional<EvalReport> evaluate(const DetectionSet& preds, const DetectionSet& gts, const EvalConfig& cfg = {});

// `key=value` lines with fixed 6-decimal metrics.
std::string format_eval_report(const EvalReport& report);
// `confidence,precision,recall` CSV.
std::string format_pr_csv(const EvalReport& report);

}  // namespace reefmap
