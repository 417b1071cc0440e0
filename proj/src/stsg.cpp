#include "vot/stsg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace vot::stsg {

namespace {

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

// Occurrence list per instance id, in frame order.
std::map<std::string, std::vector<std::int64_t>> occurrences(
    const std::vector<FrameSceneGraph>& frames) {
  std::map<std::string, std::vector<std::int64_t>> occ;
  for (const auto& frame : frames) {
    for (const auto& node : frame.nodes) {
      occ[node.instance_id].push_back(frame.frame_index);
    }
  }
  return occ;
}

}  // namespace

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::NonfiniteBBox: return "NONFINITE_BBOX";
    case ViolationCode::NegativeExtent: return "NEGATIVE_EXTENT";
    case ViolationCode::BadInstanceId: return "BAD_INSTANCE_ID";
    case ViolationCode::StuffBBoxMismatch: return "STUFF_BBOX_MISMATCH";
    case ViolationCode::DuplicateInstanceId: return "DUPLICATE_INSTANCE_ID";
    case ViolationCode::SelfLoop: return "SELF_LOOP";
    case ViolationCode::UnknownEndpoint: return "UNKNOWN_ENDPOINT";
    case ViolationCode::DuplicateTriplet: return "DUPLICATE_TRIPLET";
    case ViolationCode::NegativeFrameIndex: return "NEGATIVE_FRAME_INDEX";
    case ViolationCode::NonMonotonicFrames: return "NONMONOTONIC_FRAMES";
    case ViolationCode::BadCorefOrder: return "BAD_COREF_ORDER";
    case ViolationCode::CorefEndpointMissing: return "COREF_ENDPOINT_MISSING";
    case ViolationCode::CorefSkipsOccurrence: return "COREF_SKIPS_OCCURRENCE";
    case ViolationCode::BrokenCorefChain: return "BROKEN_COREF_CHAIN";
    case ViolationCode::DuplicateCoref: return "DUPLICATE_COREF";
    case ViolationCode::BadSourceFps: return "BAD_SOURCE_FPS";
  }
  return "UNKNOWN";
}

const ObjectNode* FrameSceneGraph::find(const std::string& instance_id) const {
  for (const auto& node : nodes) {
    if (node.instance_id == instance_id) return &node;
  }
  return nullptr;
}

const FrameSceneGraph* STSG::find_frame(std::int64_t frame_index) const {
  for (const auto& frame : frames) {
    if (frame.frame_index == frame_index) return &frame;
  }
  return nullptr;
}

std::optional<std::pair<std::string, std::int64_t>> split_instance_id(const std::string& id) {
  auto dash = id.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= id.size()) return std::nullopt;
  std::string digits = id.substr(dash + 1);
  if (digits[0] == '0') return std::nullopt;  // no leading zeros, no index 0
  std::int64_t value = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    if (value > (INT64_MAX - (c - '0')) / 10) return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return std::make_pair(id.substr(0, dash), value);
}

std::string category_of_label(const std::string& label) {
  if (auto parts = split_instance_id(label)) return parts->first;
  return label;
}

ValidationReport validate(const STSG& graph) {
  ValidationReport report;
  auto add = [&](ViolationCode code, std::optional<std::int64_t> frame, std::string detail) {
    report.violations.push_back({code, frame, std::move(detail)});
  };

  if (graph.source_fps && (!(*graph.source_fps > 0.0) || !std::isfinite(*graph.source_fps))) {
    add(ViolationCode::BadSourceFps, std::nullopt,
        "source_fps must be a positive finite number");
  }

  std::optional<std::int64_t> prev_index;
  for (const auto& frame : graph.frames) {
    const std::int64_t k = frame.frame_index;
    if (k < 0) add(ViolationCode::NegativeFrameIndex, k, "frame_index < 0");
    if (prev_index && k <= *prev_index) {
      add(ViolationCode::NonMonotonicFrames, k,
          "frame_index " + std::to_string(k) + " follows " + std::to_string(*prev_index));
    }
    prev_index = k;

    std::set<std::string> ids;
    for (const auto& node : frame.nodes) {
      if (!ids.insert(node.instance_id).second) {
        add(ViolationCode::DuplicateInstanceId, k, "duplicate node id " + node.instance_id);
      }
      if (node.instance_id.empty() || node.category.empty()) {
        add(ViolationCode::BadInstanceId, k, "empty id or category");
        continue;
      }
      auto parts = split_instance_id(node.instance_id);
      if (node.is_stuff) {
        if (parts) {
          if (!iequals(parts->first, node.category)) {
            add(ViolationCode::BadInstanceId, k,
                node.instance_id + " category prefix != " + node.category);
          }
        } else if (!iequals(node.instance_id, node.category)) {
          add(ViolationCode::BadInstanceId, k,
              "stuff id " + node.instance_id + " != category " + node.category);
        }
      } else {
        if (!parts) {
          add(ViolationCode::BadInstanceId, k,
              node.instance_id + " is not of the form <category>-<index>");
        } else if (!iequals(parts->first, node.category)) {
          add(ViolationCode::BadInstanceId, k,
              node.instance_id + " category prefix != " + node.category);
        }
      }
      if (node.is_stuff == node.bbox.has_value()) {
        add(ViolationCode::StuffBBoxMismatch, k,
            node.instance_id + (node.is_stuff ? " is stuff but has a bbox"
                                              : " is not stuff but has no bbox"));
      }
      if (node.bbox) {
        const BBox& b = *node.bbox;
        if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) ||
            !std::isfinite(b.h)) {
          add(ViolationCode::NonfiniteBBox, k, node.instance_id);
        } else if (b.w < 0.0 || b.h < 0.0) {
          add(ViolationCode::NegativeExtent, k, node.instance_id);
        }
      }
    }

    std::set<std::tuple<std::string, std::string, std::string>> seen_edges;
    for (const auto& edge : frame.edges) {
      if (edge.subject_id == edge.object_id) {
        add(ViolationCode::SelfLoop, k, edge.subject_id + " -" + edge.predicate + "-> itself");
      }
      if (!ids.count(edge.subject_id)) {
        add(ViolationCode::UnknownEndpoint, k, "subject " + edge.subject_id + " not in frame");
      }
      if (!ids.count(edge.object_id)) {
        add(ViolationCode::UnknownEndpoint, k, "object " + edge.object_id + " not in frame");
      }
      if (!seen_edges.insert({edge.subject_id, edge.predicate, edge.object_id}).second) {
        add(ViolationCode::DuplicateTriplet, k,
            "(" + edge.subject_id + "," + edge.predicate + "," + edge.object_id + ")");
      }
    }
  }

  const auto occ = occurrences(graph.frames);

  std::set<std::tuple<std::string, std::int64_t, std::int64_t>> links;
  for (const auto& link : graph.coref) {
    if (link.from_frame >= link.to_frame) {
      add(ViolationCode::BadCorefOrder, std::nullopt,
          link.instance_id + ": " + std::to_string(link.from_frame) + " -> " +
              std::to_string(link.to_frame));
    }
    if (!links.insert({link.instance_id, link.from_frame, link.to_frame}).second) {
      add(ViolationCode::DuplicateCoref, std::nullopt, link.instance_id);
      continue;
    }
    auto it = occ.find(link.instance_id);
    bool from_ok = false;
    bool to_ok = false;
    if (it != occ.end()) {
      from_ok = std::count(it->second.begin(), it->second.end(), link.from_frame) > 0;
      to_ok = std::count(it->second.begin(), it->second.end(), link.to_frame) > 0;
    }
    if (!from_ok || !to_ok) {
      add(ViolationCode::CorefEndpointMissing, std::nullopt,
          link.instance_id + " not present in frame " +
              std::to_string(from_ok ? link.to_frame : link.from_frame));
      continue;
    }
    for (std::int64_t f : it->second) {
      if (f > link.from_frame && f < link.to_frame) {
        add(ViolationCode::CorefSkipsOccurrence, std::nullopt,
            link.instance_id + " also occurs in frame " + std::to_string(f) + " between " +
                std::to_string(link.from_frame) + " and " + std::to_string(link.to_frame));
        break;
      }
    }
  }

  for (const auto& [id, frames_with] : occ) {
    for (std::size_t i = 0; i + 1 < frames_with.size(); ++i) {
      if (!links.count({id, frames_with[i], frames_with[i + 1]})) {
        add(ViolationCode::BrokenCorefChain, std::nullopt,
            id + " missing link " + std::to_string(frames_with[i]) + " -> " +
                std::to_string(frames_with[i + 1]));
      }
    }
  }

  report.ok = report.violations.empty();
  return report;
}

STSG link_coreferences(std::vector<FrameSceneGraph> frames) {
  std::set<std::int64_t> indices;
  for (const auto& frame : frames) {
    if (!indices.insert(frame.frame_index).second) {
      throw Error(ErrorCode::DuplicateFrameIndex,
                  "frame_index " + std::to_string(frame.frame_index) + " appears twice");
    }
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const FrameSceneGraph& a, const FrameSceneGraph& b) {
                     return a.frame_index < b.frame_index;
                   });

  STSG graph;
  graph.frames = std::move(frames);
  for (const auto& [id, frames_with] : occurrences(graph.frames)) {
    for (std::size_t i = 0; i + 1 < frames_with.size(); ++i) {
      graph.coref.push_back({id, frames_with[i], frames_with[i + 1]});
    }
  }
  std::sort(graph.coref.begin(), graph.coref.end());
  return graph;
}

STSG subsample(const STSG& graph, double target_fps) {
  if (!(target_fps > 0.0) || !std::isfinite(target_fps)) {
    throw Error(ErrorCode::InvalidArgument, "target_fps must be positive");
  }
  if (!graph.source_fps) {
    throw Error(ErrorCode::MissingSourceFps, "cannot subsample without source_fps");
  }
  auto stride = static_cast<std::int64_t>(std::floor(*graph.source_fps / target_fps));
  if (stride < 1) stride = 1;

  std::vector<FrameSceneGraph> kept;
  for (std::size_t i = 0; i < graph.frames.size(); i += static_cast<std::size_t>(stride)) {
    kept.push_back(graph.frames[i]);
  }
  STSG out = link_coreferences(std::move(kept));
  out.source_fps = target_fps;
  return out;
}

namespace {

bool nodes_equal(const ObjectNode& a, const ObjectNode& b, bool compare_features) {
  if (a.instance_id != b.instance_id || a.category != b.category || a.is_stuff != b.is_stuff ||
      a.bbox != b.bbox) {
    return false;
  }
  return !compare_features || a.feature == b.feature;
}

}  // namespace

bool structurally_equal(const STSG& a, const STSG& b, bool compare_features) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const auto& fa = a.frames[i];
    const auto& fb = b.frames[i];
    if (fa.frame_index != fb.frame_index) return false;
    if (fa.nodes.size() != fb.nodes.size() || fa.edges.size() != fb.edges.size()) return false;

    auto by_id = [](const ObjectNode& l, const ObjectNode& r) {
      return l.instance_id < r.instance_id;
    };
    std::vector<ObjectNode> na = fa.nodes, nb = fb.nodes;
    std::sort(na.begin(), na.end(), by_id);
    std::sort(nb.begin(), nb.end(), by_id);
    for (std::size_t j = 0; j < na.size(); ++j) {
      if (!nodes_equal(na[j], nb[j], compare_features)) return false;
    }

    std::vector<PredicateEdge> ea = fa.edges, eb = fb.edges;
    std::sort(ea.begin(), ea.end());
    std::sort(eb.begin(), eb.end());
    if (ea != eb) return false;
  }

  std::vector<CoreferenceLink> ca = a.coref, cb = b.coref;
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return ca == cb;
}

}  // namespace vot::stsg
