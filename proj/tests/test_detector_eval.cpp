#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reefmap/detector_eval.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/text.hpp"

using namespace reefmap;

namespace {

Detection box(double cx, double cy, double w, double h, double conf = 1.0) { return {0, cx, cy, w, h, conf}; }

// Boxes drawn from a small lattice so exact IoU ties and confidence ties are
// common.
Detection random_box(std::mt19937_64& rng, bool with_conf) {
    std::uniform_int_distribution<int> c(2, 8), s(1, 4), conf(1, 5);
    return {0, c(rng) / 10.0, c(rng) / 10.0, s(rng) / 10.0, s(rng) / 10.0, with_conf ? conf(rng) / 5.0 : 1.0};
}

DetectionSet random_set(std::mt19937_64& rng, const std::vector<std::uint64_t>& frames, bool with_conf) {
    std::uniform_int_distribution<int> n(0, 6);
    DetectionSet set;
    for (auto id : frames) {
        auto& list = set.frames[id];
        for (int k = n(rng); k > 0; --k) list.push_back(random_box(rng, with_conf));
    }
    return set;
}

}  // namespace

TEST_CASE("count_fish") {
    const std::vector<Detection> dets{box(.5, .5, .1, .1, .9), box(.5, .5, .1, .1, .8), box(.5, .5, .1, .1, .3),
                                      box(.5, .5, .1, .1, .2), box(.5, .5, .1, .1, .1)};
    CHECK(count_fish({}, 0.5) == 0);
    CHECK(count_fish(dets, 0.5) == 2);
    CHECK(count_fish(dets, 0.0) == 5);
    std::vector<Detection> other = dets;
    other[0].class_id = 3;
    CHECK(count_fish(other, 0.5) == 1);
    std::size_t prev = dets.size();
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        const auto c = count_fish(dets, t);
        CHECK(c <= prev);
        prev = c;
    }
}

TEST_CASE("sample_annotation_frames small cases") {
    CHECK(sample_annotation_frames(1, 6.0) == std::vector<std::size_t>{0});
    CHECK(sample_annotation_frames(0, 6.0).empty());
    CHECK(sample_annotation_frames(130, 6.0) == std::vector<std::size_t>{0, 6, 114, 120, 126});
    CHECK_THROWS_AS(sample_annotation_frames(100, 6.0, 20.0, 0.0), PreconditionError);
    CHECK_THROWS_AS(sample_annotation_frames(100, 0.0), PreconditionError);
    CHECK_THROWS_AS(sample_annotation_frames(100, 6.0, 1.0, 1.0), PreconditionError);
}

TEST_CASE("sample_annotation_frames matches direct enumeration") {
    // Integer-frame enumeration: anchors every interval*fps frames, brackets
    // of bracket*fps frames, valid for integer products.
    auto enumerate = [](long long n, long long step, long long half) {
        std::vector<std::size_t> out;
        for (long long f = 0; f < n; ++f) {
            const long long r = f % step;
            const long long anchor = f - r;
            const bool is_anchor = r == 0;
            const bool after = r == half;
            const bool before = r == step - half && anchor + step < n;
            if (is_anchor || after || before) out.push_back(static_cast<std::size_t>(f));
        }
        return out;
    };
    CHECK(sample_annotation_frames(13236, 6.0) == enumerate(13236, 120, 6));
    CHECK(sample_annotation_frames(1000, 5.0, 10.0, 2.0) == enumerate(1000, 50, 10));
    CHECK(sample_annotation_frames(121, 6.0) == enumerate(121, 120, 6));
}

TEST_CASE("iou examples") {
    CHECK(iou(box(.5, .5, .2, .2), box(.5, .5, .2, .2)) == doctest::Approx(1.0));
    CHECK(iou(box(.2, .2, .1, .1), box(.8, .8, .1, .1)) == 0.0);
    CHECK(iou(box(.5, .5, .2, .2), box(.6, .5, .2, .2)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou agrees with the oracle and is symmetric") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> c(0, 1), s(0.01, 0.5);
    for (int k = 0; k < 2000; ++k) {
        const auto a = box(c(rng), c(rng), s(rng), s(rng));
        const auto b = box(c(rng), c(rng), s(rng), s(rng));
        CHECK(iou(a, b) == doctest::Approx(oracle::box_iou(a, b)).epsilon(1e-12));
        CHECK(iou(a, b) == iou(b, a));
    }
}

TEST_CASE("average_precision hand-computed cases") {
    const std::vector<Detection> gt{box(.5, .5, .2, .2)};
    CHECK(average_precision(gt, gt, 0.5) == 1.0);
    // TP at 0.9, disjoint FP at 0.8: recall 1 is reached at precision 1.
    const std::vector<Detection> preds{box(.52, .5, .2, .2, .9), box(.1, .1, .05, .05, .8)};
    CHECK(iou(preds[0], gt[0]) >= 0.8);
    CHECK(average_precision(preds, gt, 0.5) == 1.0);
    // FP ranked first halves the precision at full recall.
    const std::vector<Detection> swapped{box(.52, .5, .2, .2, .7), box(.1, .1, .05, .05, .8)};
    CHECK(average_precision(swapped, gt, 0.5) == 0.5);
    CHECK(average_precision({}, {}, 0.5) == 1.0);
    CHECK(average_precision(preds, {}, 0.5) == 0.0);
    CHECK(average_precision({}, gt, 0.5) == 0.0);
}

TEST_CASE("a prediction takes the unmatched ground truth with highest IoU") {
    const std::vector<Detection> gts{box(.5, .5, .2, .2), box(.56, .5, .2, .2)};
    const std::vector<Detection> preds{box(.57, .5, .2, .2, .9), box(.5, .5, .2, .2, .8)};
    const auto tp = match_predictions(preds, gts, 0.5);
    CHECK(tp == std::vector<bool>{true, true});
}

TEST_CASE("average_precision equals the brute-force oracle on random instances") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> n(0, 6);
    for (int k = 0; k < 2000; ++k) {
        std::vector<Detection> preds, gts;
        for (int a = n(rng); a > 0; --a) preds.push_back(random_box(rng, true));
        for (int a = n(rng); a > 0; --a) gts.push_back(random_box(rng, false));
        for (double t : {0.3, 0.5, 0.75}) {
            CHECK(average_precision(preds, gts, t) == doctest::Approx(oracle::brute_ap(preds, gts, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("AP properties") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> n(0, 6);
    for (int k = 0; k < 500; ++k) {
        std::vector<Detection> preds, gts;
        for (int a = n(rng); a > 0; --a) preds.push_back(random_box(rng, true));
        for (int a = n(rng) + 1; a > 0; --a) gts.push_back(random_box(rng, false));
        double prev = 1.0;
        for (double t : coco_iou_thresholds()) {
            const double ap = average_precision(preds, gts, t);
            CHECK(ap >= 0.0);
            CHECK(ap <= prev + 1e-15);
            prev = ap;
        }
        // Ranking-only dependence.
        auto squashed = preds;
        for (auto& p : squashed) p.confidence = std::pow(p.confidence, 3.0) * 0.5;
        CHECK(average_precision(squashed, gts, 0.5) == average_precision(preds, gts, 0.5));
    }
}

TEST_CASE("evaluate trivial cases") {
    DetectionSet gts;
    gts.frames[1] = {box(.5, .5, .2, .2), box(.2, .2, .1, .1)};
    gts.frames[2] = {box(.7, .7, .1, .1)};
    const auto same = evaluate(gts, gts);
    REQUIRE(same.has_value());
    CHECK(same->map50 == 1.0);
    CHECK(same->map50_95 == 1.0);
    CHECK(same->tp == 3);
    CHECK(same->fp == 0);
    CHECK(same->fn == 0);

    DetectionSet empty_preds;
    empty_preds.frames[1] = {};
    const auto none = evaluate(empty_preds, gts);
    REQUIRE(none.has_value());
    CHECK(none->map50 == 0.0);
    CHECK(none->fn == 3);

    DetectionSet disjoint;
    disjoint.frames[9] = {box(.5, .5, .2, .2, .9)};
    CHECK_FALSE(evaluate(disjoint, gts).has_value());
}

TEST_CASE("evaluate reports all thresholds and the mean") {
    std::mt19937_64 rng(44);
    const auto gts = random_set(rng, {0, 1, 2}, false);
    const auto preds = random_set(rng, {0, 1, 2}, true);
    const auto r = evaluate(preds, gts);
    REQUIRE(r.has_value());
    REQUIRE(r->per_threshold.size() == 10);
    double sum = 0.0;
    for (const auto& t : r->per_threshold) sum += t.ap;
    CHECK(r->map50_95 == doctest::Approx(sum / 10.0));
    CHECK(r->map50 == r->per_threshold.front().ap);
    CHECK(r->ap_at_095 == r->per_threshold.back().ap);
    CHECK(r->map50_95 <= r->map50 + 1e-15);
}

TEST_CASE("evaluate equals the multi-frame brute-force oracle") {
    std::mt19937_64 rng(45);
    std::uniform_int_distribution<int> nf(1, 4);
    for (int k = 0; k < 500; ++k) {
        std::vector<std::uint64_t> frames;
        for (int f = nf(rng); f > 0; --f) frames.push_back(static_cast<std::uint64_t>(f * 3));
        const auto gts = random_set(rng, frames, false);
        auto preds = random_set(rng, frames, true);
        if (k % 5 == 0) preds.frames.erase(frames.front());  // missing frame counts as empty
        const auto r = evaluate(preds, gts);
        if (!r) {
            CHECK(preds.frames.empty());
            continue;
        }
        CHECK(text::fixed(r->map50) == text::fixed(oracle::brute_ap_multi(preds, gts, 0.5)));
        double sum = 0.0;
        for (double t : coco_iou_thresholds()) sum += oracle::brute_ap_multi(preds, gts, t);
        CHECK(text::fixed(r->map50_95) == text::fixed(sum / 10.0));
    }
}

TEST_CASE("hand-built two-frame fixture") {
    // Frozen against the brute-force oracle.
    DetectionSet gts, preds;
    gts.frames[0] = {box(.3, .3, .2, .2), box(.7, .7, .2, .2)};
    gts.frames[1] = {box(.5, .5, .3, .3)};
    preds.frames[0] = {box(.31, .3, .2, .2, .9), box(.1, .9, .1, .1, .6), box(.7, .72, .2, .2, .4)};
    preds.frames[1] = {box(.5, .55, .3, .3, .8), box(.5, .5, .3, .3, .3)};
    const auto r = evaluate(preds, gts);
    REQUIRE(r.has_value());
    CHECK(text::fixed(r->map50) == text::fixed(oracle::brute_ap_multi(preds, gts, 0.5)));
    CHECK(text::fixed(r->map50) == "0.916667");
    CHECK(r->tp == 3);
    CHECK(r->fp == 2);
    CHECK(r->fn == 0);
    const auto text_report = format_eval_report(*r);
    CHECK(text_report.find("mAP50=0.916667\n") != std::string::npos);
    CHECK(text_report.find("interpolation=all-point\n") != std::string::npos);
}

TEST_CASE("EvalConfig validation") {
    EvalConfig cfg;
    cfg.iou_thresholds = {0.5, 0.5};
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg.iou_thresholds = {1.0};
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg.iou_thresholds = {};
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}
