#pragma once

// Grounding queries against a scene graph: map a noun phrase to instance ids,
// pull one instance's tracklet (its frames, incident relations and temporal
// chain), and cut hop-bounded neighbor scenes around it.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vot/stsg.hpp"

namespace vot::stsg {

struct TrackletFrame {
  std::int64_t frame_index = 0;
  ObjectNode node;                   // the target's occurrence in this frame
  std::vector<PredicateEdge> edges;  // relations touching the target
};

struct Tracklet {
  std::string target_id;
  std::vector<TrackletFrame> frames;      // in frame order
  std::vector<CoreferenceLink> coref;     // the target's chain
};

struct NeighborScene {
  std::string center_id;
  std::int64_t frame_index = 0;
  FrameSceneGraph subgraph;  // nodes within `hops` relation steps of the center
};

// Phrase-to-instance grounding: lowercases, drops the stopwords
// {the, a, an, this, that} and any token that matches no category token of the
// graph, then returns every instance whose category shares a token with what
// remains. Ordered by first appearance (then category, index). May be empty.
std::vector<std::string> resolve_targets(std::string_view phrase, const STSG& graph);

// Errors: UNKNOWN_INSTANCE when the id occurs in no frame.
Tracklet extract_tracklet(const STSG& graph, const std::string& target_id);

// Partial graph covering the given instances: frames where any of them occur,
// their incident relations, and the relation partners those need. Temporal
// links are rebuilt over the survivors so the result always validates.
STSG partial_stsg(const STSG& graph, std::span<const std::string> target_ids);

inline STSG tracklet_stsg(const STSG& graph, const Tracklet& tracklet) {
  const std::string ids[] = {tracklet.target_id};
  return partial_stsg(graph, ids);
}

// BFS over relation edges, directions ignored, within one frame.
// Errors: FRAME_NOT_FOUND, UNKNOWN_INSTANCE (present frame, absent target),
// INVALID_ARGUMENT for hops < 1.
NeighborScene neighbor_scene(const STSG& graph, const std::string& target_id,
                             std::int64_t frame_index, int hops);

// First and last frame of the tracklet. Errors: EMPTY_TRACKLET.
std::pair<std::int64_t, std::int64_t> temporal_extent(const Tracklet& tracklet);

}  // namespace vot::stsg
