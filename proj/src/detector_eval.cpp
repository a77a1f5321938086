#include "reefmap/detector_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "reefmap/errors.hpp"
#include "reefmap/text.hpp"

namespace reefmap {

std::size_t count_fish(std::span<const Detection> frame, double conf_threshold) {
    return static_cast<std::size_t>(std::count_if(frame.begin(), frame.end(), [&](const Detection& d) {
        return d.class_id == kFishClass && d.confidence >= conf_threshold;
    }));
}

std::vector<std::size_t> sample_annotation_frames(std::size_t num_frames, double fps, double interval_s,
                                                  double bracket_s) {
    if (!(fps > 0.0) || !std::isfinite(fps)) throw PreconditionError("fps must be > 0");
    if (!(bracket_s > 0.0) || !(interval_s > bracket_s) || !std::isfinite(interval_s)) {
        throw PreconditionError("need interval_s > bracket_s > 0");
    }
    std::set<std::size_t> picked;
    const auto n = static_cast<long long>(num_frames);
    for (long long k = 0;; ++k) {
        const double t = static_cast<double>(k) * interval_s;
        if (std::llround(t * fps) >= n) break;
        for (double offset : {-bracket_s, 0.0, bracket_s}) {
            const long long idx = std::llround((t + offset) * fps);
            if (idx >= 0 && idx < n) picked.insert(static_cast<std::size_t>(idx));
        }
    }
    return {picked.begin(), picked.end()};
}

double iou(const Detection& a, const Detection& b) {
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

std::vector<std::size_t> rank_by_confidence(std::span<const Detection> preds) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].confidence > preds[b].confidence; });
    return order;
}

}  // namespace

std::vector<bool> match_predictions(std::span<const Detection> preds, std::span<const Detection> gts,
                                    double iou_thresh, std::vector<std::size_t>* order_out) {
    const auto order = rank_by_confidence(preds);
    std::vector<bool> gt_used(gts.size(), false);
    std::vector<bool> tp(preds.size(), false);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const Detection& p = preds[order[r]];
        double best = -1.0;
        std::size_t best_gt = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_used[g]) continue;
            const double o = iou(p, gts[g]);
            if (o >= iou_thresh && o > best) {
                best = o;
                best_gt = g;
            }
        }
        if (best_gt < gts.size()) {
            gt_used[best_gt] = true;
            tp[r] = true;
        }
    }
    if (order_out) *order_out = order;
    return tp;
}

double ap_from_ranked(const std::vector<bool>& ranked_tp, std::size_t num_gt) {
    if (num_gt == 0) return ranked_tp.empty() ? 1.0 : 0.0;
    const std::size_t n = ranked_tp.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (ranked_tp[k]) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    // Precision envelope: best precision at any recall >= this one.
    for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (recall[k] > prev_recall) {
            ap += (recall[k] - prev_recall) * precision[k];
            prev_recall = recall[k];
        }
    }
    return ap;
}

double average_precision(std::span<const Detection> preds, std::span<const Detection> gts, double iou_thresh) {
    return ap_from_ranked(match_predictions(preds, gts, iou_thresh), gts.size());
}

std::vector<double> coco_iou_thresholds() {
    return {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
}

void EvalConfig::validate() const {
    if (iou_thresholds.empty()) throw PreconditionError("at least one IoU threshold is required");
    for (std::size_t k = 0; k < iou_thresholds.size(); ++k) {
        const double t = iou_thresholds[k];
        if (!(t > 0.0 && t < 1.0)) throw PreconditionError("IoU thresholds must lie in (0, 1)");
        if (k > 0 && !(t > iou_thresholds[k - 1])) throw PreconditionError("IoU thresholds must be strictly increasing");
    }
    if (!std::isfinite(confidence_threshold_for_counting)) throw PreconditionError("counting threshold must be finite");
}

namespace {

struct PooledPrediction {
    double confidence;
    bool tp;
};

// Pools per-frame matches into one ranked list. Predictions are gathered in
// (frame id, input index) order before the stable confidence sort, which
// fixes tie handling across frames.
std::vector<PooledPrediction> pool(const std::vector<std::uint64_t>& frames, const DetectionSet& preds,
                                   const DetectionSet& gts, double iou_thresh, std::size_t& num_gt) {
    static const std::vector<Detection> none;
    std::vector<PooledPrediction> ranked;
    num_gt = 0;
    for (auto id : frames) {
        const auto pit = preds.frames.find(id);
        const auto git = gts.frames.find(id);
        const auto& p = pit == preds.frames.end() ? none : pit->second;
        const auto& g = git == gts.frames.end() ? none : git->second;
        num_gt += g.size();
        std::vector<std::size_t> order;
        const auto tp = match_predictions(p, g, iou_thresh, &order);
        std::vector<bool> tp_by_input(p.size());
        for (std::size_t r = 0; r < order.size(); ++r) tp_by_input[order[r]] = tp[r];
        for (std::size_t k = 0; k < p.size(); ++k) {
            ranked.push_back({p[k].confidence, static_cast<bool>(tp_by_input[k])});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const PooledPrediction& a, const PooledPrediction& b) { return a.confidence > b.confidence; });
    return ranked;
}

double pooled_ap(const std::vector<PooledPrediction>& ranked, std::size_t num_gt) {
    std::vector<bool> flags;
    flags.reserve(ranked.size());
    for (const auto& p : ranked) flags.push_back(p.tp);
    return ap_from_ranked(flags, num_gt);
}

}  // namespace

std::optional<EvalReport> evaluate(const DetectionSet& preds, const DetectionSet& gts, const EvalConfig& cfg) {
    cfg.validate();
    std::set<std::uint64_t> universe;
    bool overlap = false;
    for (const auto& [id, d] : gts.frames) universe.insert(id);
    for (const auto& [id, d] : preds.frames) {
        universe.insert(id);
        overlap = overlap || gts.has_frame(id);
    }
    if (!overlap) return std::nullopt;
    const std::vector<std::uint64_t> frames(universe.begin(), universe.end());

    EvalReport report;
    report.frames = frames.size();
    report.num_pred = 0;
    for (auto id : frames) {
        if (auto it = preds.frames.find(id); it != preds.frames.end()) report.num_pred += it->second.size();
    }

    auto ap_at = [&](double thresh) {
        std::size_t num_gt = 0;
        const auto ranked = pool(frames, preds, gts, thresh, num_gt);
        report.num_gt = num_gt;
        return pooled_ap(ranked, num_gt);
    };

    double sum = 0.0;
    for (double t : cfg.iou_thresholds) {
        const double ap = ap_at(t);
        report.per_threshold.push_back({t, ap});
        sum += ap;
    }
    report.map50_95 = sum / static_cast<double>(cfg.iou_thresholds.size());
    report.map50 = ap_at(0.5);
    report.ap_at_095 = ap_at(0.95);

    // PR curve at IoU 0.5.
    {
        std::size_t num_gt = 0;
        const auto ranked = pool(frames, preds, gts, 0.5, num_gt);
        std::size_t tp = 0;
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            if (ranked[k].tp) ++tp;
            report.pr_curve.push_back({ranked[k].confidence, static_cast<double>(tp) / static_cast<double>(k + 1),
                                       num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gt)});
        }
    }

    // Counting-threshold confusion counts at IoU 0.5.
    const double ct = cfg.confidence_threshold_for_counting;
    for (auto id : frames) {
        std::vector<Detection> kept;
        if (auto it = preds.frames.find(id); it != preds.frames.end()) {
            for (const auto& d : it->second) {
                if (d.confidence >= ct) kept.push_back(d);
            }
        }
        std::vector<Detection> g;
        if (auto it = gts.frames.find(id); it != gts.frames.end()) g = it->second;
        const auto tp = match_predictions(kept, g, 0.5);
        const auto hits = static_cast<std::size_t>(std::count(tp.begin(), tp.end(), true));
        report.tp += hits;
        report.fp += kept.size() - hits;
        report.fn += g.size() - hits;
    }
    return report;
}

std::string format_eval_report(const EvalReport& r) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    kv("frames", std::to_string(r.frames));
    kv("ground_truths", std::to_string(r.num_gt));
    kv("predictions", std::to_string(r.num_pred));
    kv("interpolation", "all-point");
    kv("mAP50", text::fixed(r.map50));
    kv("mAP50_95", text::fixed(r.map50_95));
    kv("AP@0.95", text::fixed(r.ap_at_095));
    for (const auto& t : r.per_threshold) kv("AP@" + text::fixed(t.iou_threshold, 2), text::fixed(t.ap));
    kv("tp", std::to_string(r.tp));
    kv("fp", std::to_string(r.fp));
    kv("fn", std::to_string(r.fn));
    return out;
}

std::string format_pr_csv(const EvalReport& r) {
    std::string out = "confidence,precision,recall\n";
    for (const auto& p : r.pr_curve) {
        out += text::fixed(p.confidence) + "," + text::fixed(p.precision) + "," + text::fixed(p.recall) + "\n";
    }
    return out;
}

}  // namespace reefmap
