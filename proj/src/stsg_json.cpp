#include "vot/stsg_json.hpp"

#include <fstream>

namespace vot::stsg {

using nlohmann::json;

json to_json(const STSG& graph) {
  json j;
  j["source_fps"] = graph.source_fps ? json(*graph.source_fps) : json(nullptr);
  j["frames"] = json::array();
  for (const auto& frame : graph.frames) {
    json jf;
    jf["frame_index"] = frame.frame_index;
    jf["objects"] = json::array();
    for (const auto& node : frame.nodes) {
      json jo;
      jo["id"] = node.instance_id;
      jo["category"] = node.category;
      jo["bbox"] = node.bbox ? json::array({node.bbox->x, node.bbox->y, node.bbox->w,
                                            node.bbox->h})
                             : json(nullptr);
      if (node.feature) jo["feature"] = *node.feature;
      jf["objects"].push_back(std::move(jo));
    }
    jf["triplets"] = json::array();
    for (const auto& edge : frame.edges) {
      jf["triplets"].push_back(json::array({edge.subject_id, edge.predicate, edge.object_id}));
    }
    j["frames"].push_back(std::move(jf));
  }
  j["coref"] = json::array();
  for (const auto& link : graph.coref) {
    j["coref"].push_back({{"id", link.instance_id}, {"from", link.from_frame},
                          {"to", link.to_frame}});
  }
  return j;
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::SchemaError, path + ": " + why);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

std::int64_t require_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  return j;
}

const json& require_field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad(path + "." + key, "missing field");
  return j.at(key);
}

}  // namespace

STSG from_json(const json& j) {
  if (!j.is_object()) bad("$", "expected an object");
  STSG graph;

  const json& fps = require_field(j, "source_fps", "$");
  if (!fps.is_null()) graph.source_fps = require_number(fps, "$.source_fps");

  const json& frames = require_array(require_field(j, "frames", "$"), "$.frames");
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const std::string fpath = "$.frames[" + std::to_string(fi) + "]";
    const json& jf = frames[fi];
    FrameSceneGraph frame;
    frame.frame_index = require_int(require_field(jf, "frame_index", fpath),
                                    fpath + ".frame_index");

    const json& objects = require_array(require_field(jf, "objects", fpath), fpath + ".objects");
    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      const std::string opath = fpath + ".objects[" + std::to_string(oi) + "]";
      const json& jo = objects[oi];
      ObjectNode node;
      node.instance_id = require_string(require_field(jo, "id", opath), opath + ".id");
      node.category = require_string(require_field(jo, "category", opath), opath + ".category");
      const json& bbox = require_field(jo, "bbox", opath);
      if (bbox.is_null()) {
        node.is_stuff = true;
      } else {
        const json& arr = require_array(bbox, opath + ".bbox");
        if (arr.size() != 4) bad(opath + ".bbox", "expected [x,y,w,h]");
        node.bbox = BBox{require_number(arr[0], opath + ".bbox[0]"),
                         require_number(arr[1], opath + ".bbox[1]"),
                         require_number(arr[2], opath + ".bbox[2]"),
                         require_number(arr[3], opath + ".bbox[3]")};
      }
      if (jo.contains("feature") && !jo.at("feature").is_null()) {
        const json& feat = require_array(jo.at("feature"), opath + ".feature");
        std::vector<double> values;
        for (std::size_t vi = 0; vi < feat.size(); ++vi) {
          values.push_back(require_number(feat[vi], opath + ".feature[" + std::to_string(vi) +
                                                        "]"));
        }
        node.feature = std::move(values);
      }
      frame.nodes.push_back(std::move(node));
    }

    const json& triplets = require_array(require_field(jf, "triplets", fpath),
                                         fpath + ".triplets");
    for (std::size_t ti = 0; ti < triplets.size(); ++ti) {
      const std::string tpath = fpath + ".triplets[" + std::to_string(ti) + "]";
      const json& jt = require_array(triplets[ti], tpath);
      if (jt.size() != 3) bad(tpath, "expected [subject, predicate, object]");
      frame.edges.push_back({require_string(jt[0], tpath + "[0]"),
                             require_string(jt[1], tpath + "[1]"),
                             require_string(jt[2], tpath + "[2]")});
    }
    graph.frames.push_back(std::move(frame));
  }

  const json& coref = require_array(require_field(j, "coref", "$"), "$.coref");
  for (std::size_t ci = 0; ci < coref.size(); ++ci) {
    const std::string cpath = "$.coref[" + std::to_string(ci) + "]";
    const json& jc = coref[ci];
    graph.coref.push_back({require_string(require_field(jc, "id", cpath), cpath + ".id"),
                           require_int(require_field(jc, "from", cpath), cpath + ".from"),
                           require_int(require_field(jc, "to", cpath), cpath + ".to")});
  }
  return graph;
}

STSG load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return from_json(j);
}

void save_json_file(const STSG& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << to_json(graph).dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace vot::stsg
