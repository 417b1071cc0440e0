#pragma once

// Shared helpers for the test suites: a seeded random scene-graph generator
// plus small brute-force reference implementations ("oracles") that the
// library code is checked against. The oracles are deliberately independent
// of the library internals — they enumerate, count cells, or search
// exhaustively instead of sharing any logic with the code under test.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vot/stsg.hpp"

namespace vot::testing {

// ---- builders ----------------------------------------------------------------

inline stsg::BBox make_box(double x, double y, double w, double h) {
  stsg::BBox b;
  b.x = x;
  b.y = y;
  b.w = w;
  b.h = h;
  return b;
}

inline stsg::ObjectNode boxed_node(std::string id, std::string category, stsg::BBox box,
                                   std::optional<std::vector<double>> feature = std::nullopt) {
  stsg::ObjectNode n;
  n.instance_id = std::move(id);
  n.category = std::move(category);
  n.bbox = box;
  n.feature = std::move(feature);
  n.is_stuff = false;
  return n;
}

inline stsg::ObjectNode stuff_node(std::string id, std::string category) {
  stsg::ObjectNode n;
  n.instance_id = std::move(id);
  n.category = std::move(category);
  n.is_stuff = true;
  return n;
}

inline stsg::PredicateEdge edge(std::string s, std::string p, std::string o) {
  stsg::PredicateEdge e;
  e.subject_id = std::move(s);
  e.predicate = std::move(p);
  e.object_id = std::move(o);
  return e;
}

// ---- random scene graphs -------------------------------------------------------

struct RandomGraphOptions {
  int max_frames = 6;
  int max_instances = 6;     // boxed instances in the roster
  int max_edges_per_frame = 6;
  bool with_features = true;
  bool with_stuff = true;
  bool with_fps = true;
};

// Valid by construction: coordinates land on tenths (so the textual form is
// exact), stuff nodes only exist where a relation touches them, coreference
// links come from link_coreferences.
inline stsg::STSG random_stsg(std::mt19937_64& rng, const RandomGraphOptions& options = {}) {
  static const char* const kCategories[] = {"car",  "person", "dog",   "truck",
                                            "bike", "chair",  "ball"};
  static const char* const kStuff[] = {"street", "sky", "grass", "wall"};
  static const char* const kPredicates[] = {"on the left", "behind", "next to", "holding",
                                            "above"};

  auto pick = [&](auto&& array) -> const char* {
    return array[rng() % (sizeof(array) / sizeof(array[0]))];
  };
  auto coord = [&](int lo_tenths, int hi_tenths) {
    return static_cast<double>(lo_tenths + static_cast<int>(rng() % (hi_tenths - lo_tenths + 1))) /
           10.0;
  };

  stsg::STSG graph;
  if (options.with_fps && rng() % 2 == 0) graph.source_fps = 30.0;

  // Roster: category-indexed instances, each alive on a random frame subset.
  const int n_frames = 1 + static_cast<int>(rng() % options.max_frames);
  std::vector<std::int64_t> frame_indices;
  std::int64_t fi = static_cast<std::int64_t>(rng() % 3);
  for (int k = 0; k < n_frames; ++k) {
    frame_indices.push_back(fi);
    fi += 1 + static_cast<std::int64_t>(rng() % 3);
  }

  struct Instance {
    std::string id;
    std::string category;
    std::optional<std::vector<double>> feature;
    std::set<int> alive;  // positions into frame_indices
  };
  std::vector<Instance> roster;
  std::map<std::string, int> next_index;
  const int n_instances = 1 + static_cast<int>(rng() % options.max_instances);
  for (int k = 0; k < n_instances; ++k) {
    Instance inst;
    inst.category = pick(kCategories);
    inst.id = inst.category + "-" + std::to_string(++next_index[inst.category]);
    if (options.with_features && rng() % 3 == 0) {
      inst.feature = std::vector<double>{static_cast<double>(rng() % 10) / 10.0,
                                         static_cast<double>(rng() % 10) / 10.0};
    }
    for (int p = 0; p < n_frames; ++p) {
      if (rng() % 3 != 0) inst.alive.insert(p);  // gaps appear with p=1/3
    }
    if (inst.alive.empty()) inst.alive.insert(static_cast<int>(rng() % n_frames));
    roster.push_back(std::move(inst));
  }

  for (int p = 0; p < n_frames; ++p) {
    stsg::FrameSceneGraph frame;
    frame.frame_index = frame_indices[p];
    std::vector<std::string> present;
    for (const Instance& inst : roster) {
      if (inst.alive.count(p) == 0) continue;
      stsg::BBox box = make_box(coord(0, 500), coord(0, 500), coord(1, 200), coord(1, 200));
      frame.nodes.push_back(boxed_node(inst.id, inst.category, box, inst.feature));
      present.push_back(inst.id);
    }

    // Stuff nodes enter only together with an edge that uses them, otherwise
    // the textual form (which lists stuff implicitly through triplets) would
    // lose them.
    std::vector<std::string> stuff_ids;
    if (options.with_stuff && !present.empty() && rng() % 2 == 0) {
      const std::string category = pick(kStuff);
      frame.nodes.push_back(stuff_node(category, category));
      stuff_ids.push_back(category);
    }

    std::set<std::tuple<std::string, std::string, std::string>> used;
    auto add_edge = [&](const std::string& a, const std::string& b) {
      const std::string predicate = pick(kPredicates);
      if (a == b) return;
      if (!used.insert({a, predicate, b}).second) return;
      frame.edges.push_back(edge(a, predicate, b));
    };
    for (const std::string& sid : stuff_ids) {
      add_edge(present[rng() % present.size()], sid);
    }
    if (present.size() >= 2) {
      const int n_edges = static_cast<int>(rng() % (options.max_edges_per_frame + 1));
      for (int k = 0; k < n_edges; ++k) {
        const std::string& a = present[rng() % present.size()];
        const std::string& b = present[rng() % present.size()];
        add_edge(a, b);
      }
    }
    graph.frames.push_back(std::move(frame));
  }

  const std::optional<double> fps = graph.source_fps;
  graph = stsg::link_coreferences(std::move(graph.frames));
  graph.source_fps = fps;
  return graph;
}

// ---- oracles -------------------------------------------------------------------

struct OracleTrackletFrame {
  std::int64_t frame_index = 0;
  stsg::ObjectNode node;
  std::vector<stsg::PredicateEdge> edges;
};

// Tracklet by direct filtering: the target's node and every edge touching it,
// frame by frame.
inline std::vector<OracleTrackletFrame> oracle_tracklet(const stsg::STSG& graph,
                                                        const std::string& target_id) {
  std::vector<OracleTrackletFrame> out;
  for (const stsg::FrameSceneGraph& frame : graph.frames) {
    const stsg::ObjectNode* found = nullptr;
    for (const stsg::ObjectNode& node : frame.nodes) {
      if (node.instance_id == target_id) found = &node;
    }
    if (found == nullptr) continue;
    OracleTrackletFrame tf;
    tf.frame_index = frame.frame_index;
    tf.node = *found;
    for (const stsg::PredicateEdge& e : frame.edges) {
      if (e.subject_id == target_id || e.object_id == target_id) tf.edges.push_back(e);
    }
    out.push_back(std::move(tf));
  }
  return out;
}

// Coreference links by definition: consecutive occurrence frames per id.
inline std::vector<stsg::CoreferenceLink> oracle_coref(const stsg::STSG& graph) {
  std::map<std::string, std::set<std::int64_t>> occurrences;
  for (const stsg::FrameSceneGraph& frame : graph.frames) {
    for (const stsg::ObjectNode& node : frame.nodes) {
      occurrences[node.instance_id].insert(frame.frame_index);
    }
  }
  std::vector<stsg::CoreferenceLink> out;
  for (const auto& [id, frames] : occurrences) {
    std::optional<std::int64_t> prev;
    for (std::int64_t f : frames) {
      if (prev) {
        stsg::CoreferenceLink link;
        link.instance_id = id;
        link.from_frame = *prev;
        link.to_frame = f;
        out.push_back(link);
      }
      prev = f;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Reachable instance ids within `hops` undirected relation steps, by plain BFS
// over an explicit adjacency list.
inline std::set<std::string> oracle_reachable(const stsg::FrameSceneGraph& frame,
                                              const std::string& center, int hops) {
  std::map<std::string, std::set<std::string>> adjacency;
  for (const stsg::PredicateEdge& e : frame.edges) {
    adjacency[e.subject_id].insert(e.object_id);
    adjacency[e.object_id].insert(e.subject_id);
  }
  std::set<std::string> seen = {center};
  std::vector<std::string> frontier = {center};
  for (int step = 0; step < hops && !frontier.empty(); ++step) {
    std::vector<std::string> next;
    for (const std::string& id : frontier) {
      for (const std::string& neighbor : adjacency[id]) {
        if (seen.insert(neighbor).second) next.push_back(neighbor);
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

// Exact box IoU on a tenth-unit integer grid; only valid when every
// coordinate is a multiple of 0.1 (how the generator builds boxes).
inline double oracle_grid_iou(const stsg::BBox& a, const stsg::BBox& b) {
  auto cells = [](double v) { return std::llround(v * 10.0); };
  const long long ax0 = cells(a.x), ax1 = cells(a.x + a.w);
  const long long ay0 = cells(a.y), ay1 = cells(a.y + a.h);
  const long long bx0 = cells(b.x), bx1 = cells(b.x + b.w);
  const long long by0 = cells(b.y), by1 = cells(b.y + b.h);
  const long long ix = std::max(0LL, std::min(ax1, bx1) - std::max(ax0, bx0));
  const long long iy = std::max(0LL, std::min(ay1, by1) - std::max(ay0, by0));
  const long long inter = ix * iy;
  const long long area_a = (ax1 - ax0) * (ay1 - ay0);
  const long long area_b = (bx1 - bx0) * (by1 - by0);
  const long long uni = area_a + area_b - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Inclusive integer-span overlap by counting points.
inline double oracle_temporal_iou(std::int64_t a0, std::int64_t a1, std::int64_t b0,
                                  std::int64_t b1) {
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  const std::int64_t lo = std::min(a0, b0);
  const std::int64_t hi = std::max(a1, b1);
  for (std::int64_t t = lo; t <= hi; ++t) {
    const bool in_a = t >= a0 && t <= a1;
    const bool in_b = t >= b0 && t <= b1;
    if (in_a && in_b) ++inter;
    if (in_a || in_b) ++uni;
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Maximum one-to-one match count between two frames' boxed nodes
// (same-category pairs at or above the IoU threshold), found with augmenting
// paths — exact, unlike the greedy matcher under test.
inline int oracle_max_match_count(const stsg::FrameSceneGraph& pred,
                                  const stsg::FrameSceneGraph& gold, double threshold,
                                  double (*iou)(const stsg::BBox&, const stsg::BBox&)) {
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  std::vector<const stsg::ObjectNode*> p_nodes;
  std::vector<const stsg::ObjectNode*> g_nodes;
  for (const stsg::ObjectNode& n : pred.nodes) {
    if (!n.is_stuff) p_nodes.push_back(&n);
  }
  for (const stsg::ObjectNode& n : gold.nodes) {
    if (!n.is_stuff) g_nodes.push_back(&n);
  }
  std::vector<std::vector<int>> candidates(p_nodes.size());
  for (std::size_t i = 0; i < p_nodes.size(); ++i) {
    for (std::size_t j = 0; j < g_nodes.size(); ++j) {
      if (lower(p_nodes[i]->category) != lower(g_nodes[j]->category)) continue;
      if (iou(*p_nodes[i]->bbox, *g_nodes[j]->bbox) < threshold) continue;
      candidates[i].push_back(static_cast<int>(j));
    }
  }
  std::vector<int> matched_gold(g_nodes.size(), -1);
  std::vector<char> visited;
  std::function<bool(int)> augment = [&](int i) {
    for (int j : candidates[i]) {
      if (visited[j]) continue;
      visited[j] = 1;
      if (matched_gold[j] == -1 || augment(matched_gold[j])) {
        matched_gold[j] = i;
        return true;
      }
    }
    return false;
  };
  int count = 0;
  for (std::size_t i = 0; i < p_nodes.size(); ++i) {
    visited.assign(g_nodes.size(), 0);
    if (augment(static_cast<int>(i))) ++count;
  }
  return count;
}

}  // namespace vot::testing
