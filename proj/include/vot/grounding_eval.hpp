#pragma once

// Grounding quality metrics: box IoU, per-frame greedy object matching,
// category-level triplet precision/recall, and temporal span overlap.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vot/stsg.hpp"

namespace vot::eval {

// Intersection over union; 0 when the union has no area (two degenerate
// boxes count as non-overlapping).
double iou(const stsg::BBox& a, const stsg::BBox& b);

struct MatchedPair {
  std::string pred_id;
  std::string gold_id;
  double iou = 0.0;
};

// Greedy one-to-one matching between the boxed nodes of two frames with the
// same frame_index (FRAME_MISMATCH otherwise): candidate pairs need equal
// category (case-insensitive) and IoU >= threshold; pairs are taken in
// descending IoU order, ties broken by (pred_id, gold_id).
std::vector<MatchedPair> match_objects(const stsg::FrameSceneGraph& pred,
                                       const stsg::FrameSceneGraph& gold,
                                       double threshold = 0.5);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Degenerate denominators follow one rule everywhere: empty predictions give
// precision 0; empty gold gives recall 1 when the prediction is empty too,
// else 0; f1 is 0 when both inputs are 0.
PrecisionRecall make_pr(std::size_t matched, std::size_t n_pred, std::size_t n_gold);

// Category-level triplet scores, micro-averaged over the union of frame
// indices: each frame contributes multiset overlap of
// (subject_category, predicate, object_category) triples.
PrecisionRecall triplet_scores(const stsg::STSG& pred, const stsg::STSG& gold);

// Overlap of two inclusive integer spans, |intersection| / |union| over frame
// sets. INVALID_ARGUMENT when a span has start > end.
double temporal_iou(std::pair<std::int64_t, std::int64_t> pred,
                    std::pair<std::int64_t, std::int64_t> gold);

struct GroundingReport {
  double mean_iou = 0.0;       // over matched pairs; 0 when nothing matched
  PrecisionRecall detection;   // object matches at iou_threshold
  PrecisionRecall triplets;
  double temporal_iou = 0.0;   // mean per-instance extent overlap (see below)
  double iou_threshold = 0.5;
};

// Whole-graph comparison. Detection and mean_iou aggregate match_objects over
// the union of frame indices (a frame missing on one side counts as empty).
// temporal_iou averages the span overlap per instance id over the union of
// ids in either graph; an id missing on one side scores 0, and the field is
// vacuously 1 when neither graph has instances.
GroundingReport evaluate(const stsg::STSG& pred, const stsg::STSG& gold,
                         double threshold = 0.5);

nlohmann::json to_json(const GroundingReport& report);

}  // namespace vot::eval
