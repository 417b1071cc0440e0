#include "vot/datagen.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vot/stsg_json.hpp"
#include "vot/stsg_query.hpp"
#include "vot/stsg_text.hpp"

namespace vot::datagen {

const char* const kInstructionTemplateVersion = "v1";

namespace {

// splitmix64: per-record generator seeds stay stable no matter how many draws
// other records consume.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    state = mix(state);
    return state;
  }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
};

const char* const kL1[3] = {
    "Determine whether the following STSG expression is paired with this video. Answer yes or "
    "no.",
    "Does the given STSG expression describe the content of this video? Answer yes or no.",
    "Check if the STSG expression below corresponds to this video. Reply with yes or no.",
};
const char* const kL2[3] = {
    "Generate the whole STSG expression of this video.",
    "Output the complete STSG expression describing this video.",
    "Produce the full STSG expression for this video.",
};
const char* const kL3[3] = {
    "Given the action description \"%s\", output the corresponding object tracklet as a partial "
    "STSG expression.",
    "For the described action \"%s\", provide the matching object tracklet as a partial STSG "
    "expression.",
    "Output the object tracklet, as a partial STSG expression, that corresponds to the action "
    "\"%s\".",
};
const char* const kL4[3] = {
    "For the key object %s in this video, describe the corresponding temporal action and output "
    "its tracklet as a partial STSG expression.",
    "Describe what the key object %s does over time in this video and provide its tracklet as a "
    "partial STSG expression.",
    "Given the key object %s, output a textual description of its action together with its "
    "tracklet as a partial STSG expression.",
};
const char* const kL5[3] = {
    "Given the bounding box of an object in the indicated frame of this video, output the "
    "object category and its corresponding tracklet expression.",
    "Identify the category of the object at the given frame and bounding box, and output its "
    "tracklet expression.",
    "For the object located by the provided frame and bounding box, output its category label "
    "and tracklet expression.",
};

std::string fill(const char* templ, const std::string& value) {
  std::string out(templ);
  auto at = out.find("%s");
  if (at != std::string::npos) out.replace(at, 2, value);
  return out;
}

std::string tracklet_text(const VideoStsgPair& pair, const std::string& target_id) {
  return stsg::serialize(stsg::tracklet_stsg(pair.graph, stsg::extract_tracklet(pair.graph,
                                                                                target_id)))
      .text;
}

void check_pair(const VideoStsgPair& pair, std::size_t index) {
  auto where = [&] { return "corpus[" + std::to_string(index) + "]"; };
  if (pair.graph.frames.empty()) {
    throw Error(ErrorCode::SchemaError, where() + ": graph has no frames");
  }
  const stsg::ValidationReport report = stsg::validate(pair.graph);
  if (!report.ok) {
    throw Error(ErrorCode::SchemaError,
                where() + ".stsg: " + report.violations.front().detail);
  }
  std::int64_t lo = pair.graph.frames.front().frame_index;
  std::int64_t hi = pair.graph.frames.back().frame_index;
  for (const auto& caption : pair.action_captions) {
    bool found = false;
    for (const auto& frame : pair.graph.frames) {
      if (frame.find(caption.target_id)) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::SchemaError,
                  where() + ": caption target " + caption.target_id + " occurs in no frame");
    }
    if (caption.span.first > caption.span.second || caption.span.first < lo ||
        caption.span.second > hi) {
      throw Error(ErrorCode::SchemaError,
                  where() + ": caption span outside the frame range of the graph");
    }
  }
}

}  // namespace

const char* to_string(Objective objective) {
  switch (objective) {
    case Objective::L1: return "L1";
    case Objective::L2: return "L2";
    case Objective::L3: return "L3";
    case Objective::L4: return "L4";
    case Objective::L5: return "L5";
  }
  return "?";
}

Objective objective_from_string(const std::string& name) {
  for (Objective o : {Objective::L1, Objective::L2, Objective::L3, Objective::L4,
                      Objective::L5}) {
    if (name == to_string(o)) return o;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown objective " + name);
}

std::vector<TuningExample> gen_examples(Objective objective,
                                        std::span<const VideoStsgPair> corpus,
                                        double negative_ratio, std::uint64_t seed) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no records");
  for (std::size_t i = 0; i < corpus.size(); ++i) check_pair(corpus[i], i);

  const auto negatives_per_item = static_cast<std::size_t>(
      negative_ratio > 0.0 ? std::floor(negative_ratio) : 0.0);
  if (objective == Objective::L1 && negative_ratio > 0.0 && corpus.size() < 2) {
    throw Error(ErrorCode::SingletonCorpus,
                "cannot draw L1 negatives from a single-record corpus");
  }
  if (objective == Objective::L3 || objective == Objective::L4) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].action_captions.empty()) {
        throw Error(ErrorCode::MissingCaptions,
                    "corpus[" + std::to_string(i) + "] has no action captions");
      }
    }
  }

  std::vector<TuningExample> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const VideoStsgPair& pair = corpus[i];
    Rng rng{mix(seed ^ mix(static_cast<std::uint64_t>(i) + 1))};
    auto variant = [&](const char* const (&bank)[3]) { return bank[rng.below(3)]; };

    switch (objective) {
      case Objective::L1: {
        TuningExample positive;
        positive.objective = Objective::L1;
        positive.instruction = variant(kL1);
        positive.video_id = pair.video_id;
        positive.context.stsg_text = stsg::serialize(pair.graph).text;
        positive.expected = "yes";
        out.push_back(std::move(positive));

        for (std::size_t n = 0; n < negatives_per_item; ++n) {
          std::size_t j = rng.below(corpus.size() - 1);
          if (j >= i) ++j;
          // A drawn graph that happens to be identical to our own is not a
          // negative; probe forward for a structurally different record.
          std::size_t probes = 0;
          while (stsg::structurally_equal(corpus[j].graph, pair.graph) &&
                 probes < corpus.size()) {
            j = (j + 1) % corpus.size();
            if (j == i) j = (j + 1) % corpus.size();
            ++probes;
          }
          if (stsg::structurally_equal(corpus[j].graph, pair.graph)) {
            throw Error(ErrorCode::SingletonCorpus,
                        "every corpus graph is structurally identical; no negatives exist");
          }
          TuningExample negative;
          negative.objective = Objective::L1;
          negative.instruction = variant(kL1);
          negative.video_id = pair.video_id;
          negative.context.stsg_text = stsg::serialize(corpus[j].graph).text;
          negative.expected = "no";
          out.push_back(std::move(negative));
        }
        break;
      }
      case Objective::L2: {
        TuningExample example;
        example.objective = Objective::L2;
        example.instruction = variant(kL2);
        example.video_id = pair.video_id;
        example.expected = stsg::serialize(pair.graph).text;
        out.push_back(std::move(example));
        break;
      }
      case Objective::L3: {
        for (const auto& caption : pair.action_captions) {
          TuningExample example;
          example.objective = Objective::L3;
          example.instruction = fill(variant(kL3), caption.text);
          example.video_id = pair.video_id;
          example.expected = tracklet_text(pair, caption.target_id);
          out.push_back(std::move(example));
        }
        break;
      }
      case Objective::L4: {
        for (const auto& caption : pair.action_captions) {
          TuningExample example;
          example.objective = Objective::L4;
          example.instruction = fill(variant(kL4), caption.target_id);
          example.video_id = pair.video_id;
          example.expected = caption.text + "\n" + tracklet_text(pair, caption.target_id);
          out.push_back(std::move(example));
        }
        break;
      }
      case Objective::L5: {
        std::set<std::string> seen;
        for (const auto& frame : pair.graph.frames) {
          for (const auto& node : frame.nodes) {
            if (!seen.insert(node.instance_id).second) continue;  // first occurrence only
            if (!node.bbox) continue;
            TuningExample example;
            example.objective = Objective::L5;
            example.instruction = variant(kL5);
            example.video_id = pair.video_id;
            example.context.frame_index = frame.frame_index;
            example.context.bbox = *node.bbox;
            example.expected = node.category + "\n" + tracklet_text(pair, node.instance_id);
            out.push_back(std::move(example));
          }
        }
        break;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const TuningExample& example) {
  nlohmann::json context;
  if (example.context.stsg_text) {
    context = {{"stsg", *example.context.stsg_text}};
  } else if (example.context.frame_index && example.context.bbox) {
    const stsg::BBox& b = *example.context.bbox;
    context = {{"frame_index", *example.context.frame_index},
               {"bbox", {b.x, b.y, b.w, b.h}}};
  } else {
    context = nullptr;
  }
  return {{"objective", to_string(example.objective)},
          {"instruction", example.instruction},
          {"video_id", example.video_id},
          {"context", std::move(context)},
          {"expected", example.expected}};
}

std::string to_jsonl(std::span<const TuningExample> examples) {
  std::string out;
  for (const auto& example : examples) {
    out += to_json(example).dump();
    out += "\n";
  }
  return out;
}

std::vector<VideoStsgPair> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "corpus must be a JSON array");

  std::vector<VideoStsgPair> corpus;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto where = [&] { return "corpus[" + std::to_string(i) + "]"; };
    const auto& record = j[i];
    if (!record.is_object() || !record.contains("video_id") || !record.contains("stsg")) {
      throw Error(ErrorCode::SchemaError, where() + ": expected {video_id, stsg, ...}");
    }
    VideoStsgPair pair;
    if (!record.at("video_id").is_string()) {
      throw Error(ErrorCode::SchemaError, where() + ".video_id: expected a string");
    }
    pair.video_id = record.at("video_id").get<std::string>();
    pair.graph = stsg::from_json(record.at("stsg"));
    if (record.contains("action_captions")) {
      const auto& captions = record.at("action_captions");
      if (!captions.is_array()) {
        throw Error(ErrorCode::SchemaError, where() + ".action_captions: expected an array");
      }
      for (const auto& jc : captions) {
        if (!jc.is_object() || !jc.contains("text") || !jc.contains("target_id") ||
            !jc.contains("span") || !jc.at("span").is_array() || jc.at("span").size() != 2 ||
            !jc.at("text").is_string() || !jc.at("target_id").is_string() ||
            !jc.at("span")[0].is_number_integer() || !jc.at("span")[1].is_number_integer()) {
          throw Error(ErrorCode::SchemaError,
                      where() + ".action_captions: expected {text, target_id, span: [a, b]}");
        }
        pair.action_captions.push_back({jc.at("text").get<std::string>(),
                                        jc.at("target_id").get<std::string>(),
                                        {jc.at("span")[0].get<std::int64_t>(),
                                         jc.at("span")[1].get<std::int64_t>()}});
      }
    }
    check_pair(pair, i);
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace vot::datagen
