#pragma once

// Instruction-tuning data generator. Five objectives over a corpus of
// (video, scene graph, action captions) records:
//   L1  video <-> graph pairing, yes/no (negatives drawn from other records)
//   L2  full graph expression for the video
//   L3  action caption -> target tracklet expression
//   L4  target id -> caption + tracklet expression
//   L5  (frame, box) -> category + tracklet expression

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vot/stsg.hpp"

namespace vot::datagen {

enum class Objective { L1, L2, L3, L4, L5 };

const char* to_string(Objective objective);
Objective objective_from_string(const std::string& name);  // INVALID_ARGUMENT

struct ActionCaption {
  std::string text;
  std::string target_id;                        // must occur in the graph
  std::pair<std::int64_t, std::int64_t> span;   // inclusive, within frame range
};

struct VideoStsgPair {
  std::string video_id;
  stsg::STSG graph;
  std::vector<ActionCaption> action_captions;
};

// At most one of the members is set: an expression for L1, a (frame, box)
// probe for L5, nothing otherwise.
struct TuningContext {
  std::optional<std::string> stsg_text;
  std::optional<std::int64_t> frame_index;
  std::optional<stsg::BBox> bbox;
};

struct TuningExample {
  Objective objective = Objective::L1;
  std::string instruction;
  std::string video_id;
  TuningContext context;
  std::string expected;
};

// Deterministic for a given (objective, corpus, negative_ratio, seed); the
// same call produces byte-identical JSONL. Output sizes:
//   L1: one positive plus floor(negative_ratio) negatives per record
//   L2: one per record
//   L3, L4: one per caption
//   L5: one per instance whose first occurrence carries a box
// Errors: EMPTY_CORPUS; MISSING_CAPTIONS (L3/L4 with a caption-less record);
// SINGLETON_CORPUS (L1, negative_ratio > 0, nowhere to draw negatives from).
std::vector<TuningExample> gen_examples(Objective objective,
                                        std::span<const VideoStsgPair> corpus,
                                        double negative_ratio, std::uint64_t seed);

// Instruction paraphrases are compiled in; bump when the wording changes.
extern const char* const kInstructionTemplateVersion;

nlohmann::json to_json(const TuningExample& example);
std::string to_jsonl(std::span<const TuningExample> examples);

// Corpus file: JSON array of {"video_id", "stsg", "action_captions":
// [{"text", "target_id", "span": [start, end]}]}. SCHEMA_ERROR names the
// offending record; caption targets and spans are checked against the graph.
std::vector<VideoStsgPair> load_corpus(const std::filesystem::path& path);

}  // namespace vot::datagen
