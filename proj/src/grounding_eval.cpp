#include "vot/grounding_eval.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace vot::eval {

using stsg::BBox;
using stsg::FrameSceneGraph;
using stsg::STSG;

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

double iou(const BBox& a, const BBox& b) {
  double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::vector<MatchedPair> match_objects(const FrameSceneGraph& pred, const FrameSceneGraph& gold,
                                       double threshold) {
  if (pred.frame_index != gold.frame_index) {
    throw Error(ErrorCode::FrameMismatch,
                "frame " + std::to_string(pred.frame_index) + " vs " +
                    std::to_string(gold.frame_index));
  }

  struct Candidate {
    double overlap;
    const stsg::ObjectNode* p;
    const stsg::ObjectNode* g;
  };
  std::vector<Candidate> candidates;
  for (const auto& p : pred.nodes) {
    if (!p.bbox) continue;
    for (const auto& g : gold.nodes) {
      if (!g.bbox) continue;
      if (lower(p.category) != lower(g.category)) continue;
      double overlap = iou(*p.bbox, *g.bbox);
      if (overlap >= threshold) candidates.push_back({overlap, &p, &g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    return std::tie(a.p->instance_id, a.g->instance_id) <
           std::tie(b.p->instance_id, b.g->instance_id);
  });

  std::set<std::string> used_pred, used_gold;
  std::vector<MatchedPair> matches;
  for (const auto& c : candidates) {
    if (used_pred.count(c.p->instance_id) || used_gold.count(c.g->instance_id)) continue;
    used_pred.insert(c.p->instance_id);
    used_gold.insert(c.g->instance_id);
    matches.push_back({c.p->instance_id, c.g->instance_id, c.overlap});
  }
  return matches;
}

PrecisionRecall make_pr(std::size_t matched, std::size_t n_pred, std::size_t n_gold) {
  PrecisionRecall pr;
  pr.precision = n_pred == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n_pred);
  pr.recall = n_gold == 0 ? (n_pred == 0 ? 1.0 : 0.0)
                          : static_cast<double>(matched) / static_cast<double>(n_gold);
  pr.f1 = (pr.precision + pr.recall) > 0.0
              ? 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall)
              : 0.0;
  return pr;
}

namespace {

using TripletKey = std::tuple<std::string, std::string, std::string>;

// Relation triple keyed by endpoint categories, not instance numbering.
std::map<TripletKey, std::size_t> triplet_multiset(const FrameSceneGraph& frame) {
  std::map<TripletKey, std::size_t> counts;
  for (const auto& edge : frame.edges) {
    auto category = [&](const std::string& id) {
      const stsg::ObjectNode* node = frame.find(id);
      return lower(node ? node->category : stsg::category_of_label(id));
    };
    counts[{category(edge.subject_id), lower(edge.predicate), category(edge.object_id)}]++;
  }
  return counts;
}

}  // namespace

PrecisionRecall triplet_scores(const STSG& pred, const STSG& gold) {
  std::map<std::int64_t, const FrameSceneGraph*> pred_frames, gold_frames;
  for (const auto& f : pred.frames) pred_frames[f.frame_index] = &f;
  for (const auto& f : gold.frames) gold_frames[f.frame_index] = &f;

  std::set<std::int64_t> indices;
  for (const auto& [k, f] : pred_frames) indices.insert(k);
  for (const auto& [k, f] : gold_frames) indices.insert(k);

  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  for (std::int64_t k : indices) {
    std::map<TripletKey, std::size_t> p, g;
    if (auto it = pred_frames.find(k); it != pred_frames.end()) p = triplet_multiset(*it->second);
    if (auto it = gold_frames.find(k); it != gold_frames.end()) g = triplet_multiset(*it->second);
    for (const auto& [key, count] : p) {
      n_pred += count;
      if (auto it = g.find(key); it != g.end()) matched += std::min(count, it->second);
    }
    for (const auto& [key, count] : g) n_gold += count;
  }
  return make_pr(matched, n_pred, n_gold);
}

double temporal_iou(std::pair<std::int64_t, std::int64_t> pred,
                    std::pair<std::int64_t, std::int64_t> gold) {
  if (pred.first > pred.second || gold.first > gold.second) {
    throw Error(ErrorCode::InvalidArgument, "span start must be <= span end");
  }
  std::int64_t inter_lo = std::max(pred.first, gold.first);
  std::int64_t inter_hi = std::min(pred.second, gold.second);
  double inter = inter_hi >= inter_lo ? static_cast<double>(inter_hi - inter_lo + 1) : 0.0;
  double len_pred = static_cast<double>(pred.second - pred.first + 1);
  double len_gold = static_cast<double>(gold.second - gold.first + 1);
  return inter / (len_pred + len_gold - inter);
}

namespace {

std::map<std::string, std::pair<std::int64_t, std::int64_t>> extents(const STSG& graph) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
  for (const auto& frame : graph.frames) {
    for (const auto& node : frame.nodes) {
      auto [it, inserted] =
          spans.emplace(node.instance_id, std::make_pair(frame.frame_index, frame.frame_index));
      if (!inserted) {
        it->second.first = std::min(it->second.first, frame.frame_index);
        it->second.second = std::max(it->second.second, frame.frame_index);
      }
    }
  }
  return spans;
}

std::size_t boxed_count(const FrameSceneGraph& frame) {
  std::size_t n = 0;
  for (const auto& node : frame.nodes) {
    if (node.bbox) ++n;
  }
  return n;
}

}  // namespace

GroundingReport evaluate(const STSG& pred, const STSG& gold, double threshold) {
  GroundingReport report;
  report.iou_threshold = threshold;

  std::map<std::int64_t, const FrameSceneGraph*> pred_frames, gold_frames;
  for (const auto& f : pred.frames) pred_frames[f.frame_index] = &f;
  for (const auto& f : gold.frames) gold_frames[f.frame_index] = &f;
  std::set<std::int64_t> indices;
  for (const auto& [k, f] : pred_frames) indices.insert(k);
  for (const auto& [k, f] : gold_frames) indices.insert(k);

  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  double iou_sum = 0.0;
  for (std::int64_t k : indices) {
    auto pit = pred_frames.find(k);
    auto git = gold_frames.find(k);
    if (pit != pred_frames.end()) n_pred += boxed_count(*pit->second);
    if (git != gold_frames.end()) n_gold += boxed_count(*git->second);
    if (pit == pred_frames.end() || git == gold_frames.end()) continue;
    for (const auto& pair : match_objects(*pit->second, *git->second, threshold)) {
      ++matched;
      iou_sum += pair.iou;
    }
  }
  report.detection = make_pr(matched, n_pred, n_gold);
  report.mean_iou = matched == 0 ? 0.0 : iou_sum / static_cast<double>(matched);
  report.triplets = triplet_scores(pred, gold);

  auto pred_spans = extents(pred);
  auto gold_spans = extents(gold);
  std::set<std::string> ids;
  for (const auto& [id, span] : pred_spans) ids.insert(id);
  for (const auto& [id, span] : gold_spans) ids.insert(id);
  if (ids.empty()) {
    report.temporal_iou = 1.0;  // nothing to ground on either side
  } else {
    double sum = 0.0;
    for (const auto& id : ids) {
      auto pit = pred_spans.find(id);
      auto git = gold_spans.find(id);
      if (pit == pred_spans.end() || git == gold_spans.end()) continue;  // contributes 0
      sum += temporal_iou(pit->second, git->second);
    }
    report.temporal_iou = sum / static_cast<double>(ids.size());
  }
  return report;
}

nlohmann::json to_json(const GroundingReport& report) {
  return {
      {"mean_iou", report.mean_iou},
      {"detection", {{"precision", report.detection.precision},
                     {"recall", report.detection.recall},
                     {"f1", report.detection.f1}}},
      {"triplets", {{"precision", report.triplets.precision},
                    {"recall", report.triplets.recall},
                    {"f1", report.triplets.f1}}},
      {"temporal_iou", report.temporal_iou},
      {"iou_threshold", report.iou_threshold},
  };
}

}  // namespace vot::eval
