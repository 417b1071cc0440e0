#pragma once

// JSON interchange for scene graphs:
// {
//   "source_fps": number|null,
//   "frames": [{"frame_index": int,
//               "objects": [{"id": str, "category": str, "bbox": [x,y,w,h]|null,
//                            "feature": [num,...]?}],
//               "triplets": [[subj, pred, obj], ...]}],
//   "coref": [{"id": str, "from": int, "to": int}]
// }
// Objects with "bbox": null are stuff nodes.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "vot/stsg.hpp"

namespace vot::stsg {

nlohmann::json to_json(const STSG& graph);

// Structural decode; shape problems raise SCHEMA_ERROR with a field path.
STSG from_json(const nlohmann::json& j);

// File helpers: IO_ERROR on filesystem problems, SCHEMA_ERROR on bad content.
STSG load_json_file(const std::filesystem::path& path);
void save_json_file(const STSG& graph, const std::filesystem::path& path);

}  // namespace vot::stsg
