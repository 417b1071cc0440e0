#include "vot/stsg_query.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>

namespace vot::stsg {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool is_stopword(const std::string& token) {
  return token == "the" || token == "a" || token == "an" || token == "this" || token == "that";
}

}  // namespace

std::vector<std::string> resolve_targets(std::string_view phrase, const STSG& graph) {
  std::vector<std::string> phrase_tokens;
  for (auto& token : tokenize(phrase)) {
    if (!is_stopword(token)) phrase_tokens.push_back(std::move(token));
  }

  struct Hit {
    std::size_t first_frame_pos;
    std::string category;
    std::int64_t index;  // numeric suffix; bare labels sort as 0
    std::string id;
  };
  std::vector<Hit> hits;
  std::set<std::string> seen;

  for (std::size_t fi = 0; fi < graph.frames.size(); ++fi) {
    for (const auto& node : graph.frames[fi].nodes) {
      if (seen.count(node.instance_id)) continue;
      bool match = false;
      for (const auto& cat_token : tokenize(node.category)) {
        if (std::find(phrase_tokens.begin(), phrase_tokens.end(), cat_token) !=
            phrase_tokens.end()) {
          match = true;
          break;
        }
      }
      if (!match) continue;
      seen.insert(node.instance_id);
      auto parts = split_instance_id(node.instance_id);
      hits.push_back({fi, lower(node.category), parts ? parts->second : 0, node.instance_id});
    }
  }

  // First appearance wins; within one frame the order must not depend on how
  // the node list happens to be stored.
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::tie(a.first_frame_pos, a.category, a.index, a.id) <
           std::tie(b.first_frame_pos, b.category, b.index, b.id);
  });

  std::vector<std::string> ids;
  ids.reserve(hits.size());
  for (auto& hit : hits) ids.push_back(std::move(hit.id));
  return ids;
}

Tracklet extract_tracklet(const STSG& graph, const std::string& target_id) {
  Tracklet tracklet;
  tracklet.target_id = target_id;
  for (const auto& frame : graph.frames) {
    const ObjectNode* node = frame.find(target_id);
    if (!node) continue;
    TrackletFrame tf;
    tf.frame_index = frame.frame_index;
    tf.node = *node;
    for (const auto& edge : frame.edges) {
      if (edge.subject_id == target_id || edge.object_id == target_id) {
        tf.edges.push_back(edge);
      }
    }
    tracklet.frames.push_back(std::move(tf));
  }
  if (tracklet.frames.empty()) {
    throw Error(ErrorCode::UnknownInstance, target_id + " occurs in no frame");
  }
  for (const auto& link : graph.coref) {
    if (link.instance_id == target_id) tracklet.coref.push_back(link);
  }
  return tracklet;
}

STSG partial_stsg(const STSG& graph, std::span<const std::string> target_ids) {
  std::set<std::string> targets(target_ids.begin(), target_ids.end());
  for (const auto& id : targets) {
    bool found = false;
    for (const auto& frame : graph.frames) {
      if (frame.find(id)) {
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::UnknownInstance, id + " occurs in no frame");
  }

  std::vector<FrameSceneGraph> kept_frames;
  for (const auto& frame : graph.frames) {
    std::set<std::string> keep;
    std::vector<PredicateEdge> edges;
    for (const auto& node : frame.nodes) {
      if (targets.count(node.instance_id)) keep.insert(node.instance_id);
    }
    if (keep.empty()) continue;
    for (const auto& edge : frame.edges) {
      if (targets.count(edge.subject_id) || targets.count(edge.object_id)) {
        edges.push_back(edge);
        keep.insert(edge.subject_id);
        keep.insert(edge.object_id);
      }
    }
    FrameSceneGraph out;
    out.frame_index = frame.frame_index;
    for (const auto& node : frame.nodes) {
      if (keep.count(node.instance_id)) out.nodes.push_back(node);
    }
    out.edges = std::move(edges);
    kept_frames.push_back(std::move(out));
  }
  return link_coreferences(std::move(kept_frames));
}

NeighborScene neighbor_scene(const STSG& graph, const std::string& target_id,
                             std::int64_t frame_index, int hops) {
  if (hops < 1) throw Error(ErrorCode::InvalidArgument, "hops must be >= 1");
  const FrameSceneGraph* frame = graph.find_frame(frame_index);
  if (!frame) {
    throw Error(ErrorCode::FrameNotFound, "no frame with index " + std::to_string(frame_index));
  }
  if (!frame->find(target_id)) {
    throw Error(ErrorCode::UnknownInstance,
                target_id + " not present in frame " + std::to_string(frame_index));
  }

  std::map<std::string, std::vector<const std::string*>> adjacency;
  for (const auto& edge : frame->edges) {
    adjacency[edge.subject_id].push_back(&edge.object_id);
    adjacency[edge.object_id].push_back(&edge.subject_id);
  }

  std::map<std::string, int> distance;
  std::deque<std::string> queue;
  distance[target_id] = 0;
  queue.push_back(target_id);
  while (!queue.empty()) {
    std::string current = std::move(queue.front());
    queue.pop_front();
    int d = distance[current];
    if (d == hops) continue;
    auto it = adjacency.find(current);
    if (it == adjacency.end()) continue;
    for (const std::string* next : it->second) {
      if (distance.emplace(*next, d + 1).second) queue.push_back(*next);
    }
  }

  NeighborScene scene;
  scene.center_id = target_id;
  scene.frame_index = frame_index;
  scene.subgraph.frame_index = frame_index;
  for (const auto& node : frame->nodes) {
    if (distance.count(node.instance_id)) scene.subgraph.nodes.push_back(node);
  }
  for (const auto& edge : frame->edges) {
    if (distance.count(edge.subject_id) && distance.count(edge.object_id)) {
      scene.subgraph.edges.push_back(edge);
    }
  }
  return scene;
}

std::pair<std::int64_t, std::int64_t> temporal_extent(const Tracklet& tracklet) {
  if (tracklet.frames.empty()) {
    throw Error(ErrorCode::EmptyTracklet, tracklet.target_id + " has no frames");
  }
  std::int64_t lo = tracklet.frames.front().frame_index;
  std::int64_t hi = lo;
  for (const auto& tf : tracklet.frames) {
    lo = std::min(lo, tf.frame_index);
    hi = std::max(hi, tf.frame_index);
  }
  return {lo, hi};
}

}  // namespace vot::stsg
