#pragma once

// Spatial-temporal scene graph model: an ordered sequence of per-frame scene
// graphs plus temporal coreference links that tie one object instance across
// the frames where it appears.

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vot/errors.hpp"

namespace vot::stsg {

// Axis-aligned box in abstract units (whatever the producer used: pixels,
// percentages, normalized floats). Metrics are unit-agnostic.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;  // >= 0
  double h = 0.0;  // >= 0

  bool operator==(const BBox&) const = default;
  double area() const { return w * h; }
};

// One object occurrence inside one frame.
// Regular nodes carry a box and an id of the form "<category>-<index>".
// Stuff nodes (background regions referenced only by relation endpoints,
// e.g. "street") carry no box; their id is the bare label or, when a
// relation names an undeclared "<category>-<index>" id, that id itself.
struct ObjectNode {
  std::string instance_id;
  std::string category;
  std::optional<BBox> bbox;                       // absent <=> is_stuff
  std::optional<std::vector<double>> feature;     // opaque, carried through
  bool is_stuff = false;
};

// Directed relation between two nodes of the same frame.
struct PredicateEdge {
  std::string subject_id;
  std::string predicate;
  std::string object_id;

  bool operator==(const PredicateEdge&) const = default;
  auto tie() const { return std::tie(subject_id, predicate, object_id); }
  bool operator<(const PredicateEdge& o) const { return tie() < o.tie(); }
};

struct FrameSceneGraph {
  std::int64_t frame_index = 0;  // >= 0
  std::vector<ObjectNode> nodes;
  std::vector<PredicateEdge> edges;

  const ObjectNode* find(const std::string& instance_id) const;
};

// Temporal identity: the same instance in two frames, from_frame < to_frame.
struct CoreferenceLink {
  std::string instance_id;
  std::int64_t from_frame = 0;
  std::int64_t to_frame = 0;

  bool operator==(const CoreferenceLink&) const = default;
  auto tie() const { return std::tie(instance_id, from_frame, to_frame); }
  bool operator<(const CoreferenceLink& o) const { return tie() < o.tie(); }
};

struct STSG {
  std::vector<FrameSceneGraph> frames;  // strictly increasing frame_index
  std::vector<CoreferenceLink> coref;
  std::optional<double> source_fps;     // > 0 when present

  const FrameSceneGraph* find_frame(std::int64_t frame_index) const;
  bool empty() const { return frames.empty(); }
};

enum class ViolationCode {
  NonfiniteBBox,
  NegativeExtent,
  BadInstanceId,
  StuffBBoxMismatch,
  DuplicateInstanceId,
  SelfLoop,
  UnknownEndpoint,
  DuplicateTriplet,
  NegativeFrameIndex,
  NonMonotonicFrames,
  BadCorefOrder,
  CorefEndpointMissing,
  CorefSkipsOccurrence,
  BrokenCorefChain,
  DuplicateCoref,
  BadSourceFps,
};

const char* to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::optional<std::int64_t> frame_index;  // when tied to one frame
  std::string detail;
};

// Findings are data, not exceptions: callers decide what a violation means.
struct ValidationReport {
  bool ok = true;  // <=> violations.empty()
  std::vector<Violation> violations;
};

ValidationReport validate(const STSG& graph);

// Rebuilds temporal links from scratch: for every instance id, consecutive
// occurrences get linked even across frame gaps. Frames are ordered by index;
// a duplicated frame index is an error (DUPLICATE_FRAME_INDEX).
STSG link_coreferences(std::vector<FrameSceneGraph> frames);

// Keeps every stride-th frame starting from the first, where
// stride = floor(source_fps / target_fps), clamped to >= 1. Coreference links
// are recomputed over the survivors and source_fps becomes target_fps.
// Errors: MISSING_SOURCE_FPS when the graph has no source_fps,
// INVALID_ARGUMENT for target_fps <= 0.
STSG subsample(const STSG& graph, double target_fps);

// Order-insensitive graph equality: same frame sequence, same node/edge/link
// sets per frame. Ignores source_fps (the textual form does not carry it) and,
// unless compare_features is set, feature vectors.
bool structurally_equal(const STSG& a, const STSG& b, bool compare_features = false);

// "car-1" -> {"car", 1}. Requires a positive index without leading zeros;
// returns nullopt otherwise (bare stuff labels, "car-0", "car-01", ...).
std::optional<std::pair<std::string, std::int64_t>> split_instance_id(const std::string& id);

// Category implied by a relation-endpoint label: the prefix of a
// "<category>-<index>" id, else the label itself.
std::string category_of_label(const std::string& label);

}  // namespace vot::stsg
