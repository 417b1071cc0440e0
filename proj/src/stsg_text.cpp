#include "vot/stsg_text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

namespace vot::stsg {

namespace {

std::string escape(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string format_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

StsgText serialize(const STSG& graph) {
  ValidationReport report = validate(graph);
  if (!report.ok) {
    throw Error(ErrorCode::InvalidStsg,
                "refusing to serialize: " + std::string(to_string(report.violations[0].code)) +
                    " " + report.violations[0].detail);
  }

  std::ostringstream out;
  bool first_frame = true;
  for (const auto& frame : graph.frames) {
    if (!first_frame) out << "\n";
    first_frame = false;

    std::vector<const ObjectNode*> boxed;
    for (const auto& node : frame.nodes) {
      if (!node.is_stuff) boxed.push_back(&node);
    }
    std::sort(boxed.begin(), boxed.end(), [](const ObjectNode* a, const ObjectNode* b) {
      return a->instance_id < b->instance_id;
    });

    std::vector<PredicateEdge> edges = frame.edges;
    std::sort(edges.begin(), edges.end());

    out << "Frame " << frame.frame_index << ": {Objects: [";
    for (std::size_t i = 0; i < boxed.size(); ++i) {
      if (i) out << ", ";
      const BBox& b = *boxed[i]->bbox;
      out << "{\"" << escape(boxed[i]->instance_id) << "\": [" << format_coord(b.x) << ","
          << format_coord(b.y) << "," << format_coord(b.w) << "," << format_coord(b.h) << "]}";
    }
    out << "], Triplets: [";
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (i) out << ", ";
      out << "(\"" << escape(edges[i].subject_id) << "\",\"" << escape(edges[i].predicate)
          << "\",\"" << escape(edges[i].object_id) << "\")";
    }
    out << "]}";
  }
  return StsgText{out.str()};
}

namespace {

// Single-pass scanner over the raw bytes. Every failure throws TextParseError
// with the byte offset it happened at.
class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool eof() const { return pos_ >= s_.size(); }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void expect(char c, const char* what) {
    skip_ws();
    if (eof() || s_[pos_] != c) fail(what);
    ++pos_;
  }

  void expect_word(std::string_view word, const char* what) {
    skip_ws();
    if (s_.substr(pos_, word.size()) != word) fail(what);
    std::size_t end = pos_ + word.size();
    if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) {
      fail(what);
    }
    pos_ = end;
  }

  std::int64_t read_frame_index() {
    skip_ws();
    if (eof() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("a frame index");
    std::int64_t value = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      int digit = s_[pos_] - '0';
      if (value > (INT64_MAX - digit) / 10) fail("a smaller frame index");
      value = value * 10 + digit;
      ++pos_;
    }
    return value;
  }

  double read_number() {
    skip_ws();
    std::size_t start = pos_;
    if (!eof() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    std::size_t digits_at = pos_;
    while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == digits_at) {
      pos_ = start;
      fail("a number");
    }
    if (!eof() && s_[pos_] == '.') {
      ++pos_;
      while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (!eof() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t exp_at = pos_++;
      if (!eof() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
      if (eof() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        pos_ = exp_at;  // "1e" followed by junk: stop before the 'e'
      } else {
        while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    std::string token(s_.substr(start, pos_ - start));
    double value = std::strtod(token.c_str(), nullptr);
    if (!std::isfinite(value)) {
      pos_ = start;
      fail("a finite number");
    }
    return value;
  }

  std::string read_string() {
    skip_ws();
    if (eof() || s_[pos_] != '"') fail("a quoted string");
    ++pos_;
    std::string out;
    while (true) {
      if (eof()) fail("a closing '\"'");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\' && !eof()) {
        char next = s_[pos_];
        if (next == '"' || next == '\\') {
          out.push_back(next);
          ++pos_;
          continue;
        }
      }
      out.push_back(c);
    }
    return out;
  }

  // True when the text at `p` starts a "Frame <int> :" block header.
  bool anchor_at(std::size_t p) const {
    if (s_.substr(p, 5) != "Frame") return false;
    if (p > 0 && (std::isalnum(static_cast<unsigned char>(s_[p - 1])) || s_[p - 1] == '_')) {
      return false;
    }
    std::size_t q = p + 5;
    if (q >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[q]))) return false;
    while (q < s_.size() && std::isspace(static_cast<unsigned char>(s_[q]))) ++q;
    if (q >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[q]))) return false;
    while (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) ++q;
    while (q < s_.size() && std::isspace(static_cast<unsigned char>(s_[q]))) ++q;
    return q < s_.size() && s_[q] == ':';
  }

  std::size_t find_anchor(std::size_t from) const {
    for (std::size_t p = s_.find("Frame", from); p != std::string_view::npos;
         p = s_.find("Frame", p + 1)) {
      if (anchor_at(p)) return p;
    }
    return std::string_view::npos;
  }

  [[noreturn]] void fail(const char* expected) const { throw TextParseError(pos_, expected); }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& expected) const {
    throw TextParseError(offset, expected);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct ParsedObject {
  std::string id;
  BBox bbox;
  std::size_t offset;
};

FrameSceneGraph parse_frame(Scanner& sc) {
  FrameSceneGraph frame;
  sc.expect_word("Frame", "'Frame'");
  frame.frame_index = sc.read_frame_index();
  sc.expect(':', "':' after the frame index");
  sc.expect('{', "'{'");
  sc.expect_word("Objects", "'Objects:'");
  sc.expect(':', "':' after 'Objects'");
  sc.expect('[', "'[' opening the object list");

  std::vector<ParsedObject> objects;
  sc.skip_ws();
  if (sc.peek() != ']') {
    while (true) {
      sc.skip_ws();
      std::size_t at = sc.pos();
      sc.expect('{', "'{' opening an object entry");
      std::string id = sc.read_string();
      if (id.empty()) sc.fail_at(at, "a non-empty object id");
      if (!split_instance_id(id)) {
        sc.fail_at(at, "an object id of the form <category>-<index>");
      }
      sc.expect(':', "':' after the object id");
      sc.expect('[', "'[' opening the box");
      BBox box;
      box.x = sc.read_number();
      sc.expect(',', "',' between box numbers");
      box.y = sc.read_number();
      sc.expect(',', "',' between box numbers");
      box.w = sc.read_number();
      sc.expect(',', "',' between box numbers");
      box.h = sc.read_number();
      sc.expect(']', "']' closing the box");
      sc.expect('}', "'}' closing the object entry");
      if (box.w < 0.0 || box.h < 0.0) sc.fail_at(at, "non-negative box extents");
      objects.push_back({std::move(id), box, at});

      sc.skip_ws();
      if (sc.peek() == ',') {
        sc.expect(',', "','");
        continue;
      }
      break;
    }
  }
  sc.expect(']', "']' closing the object list");
  sc.expect(',', "',' before 'Triplets:'");
  sc.expect_word("Triplets", "'Triplets:'");
  sc.expect(':', "':' after 'Triplets'");
  sc.expect('[', "'[' opening the triplet list");

  std::vector<std::pair<PredicateEdge, std::size_t>> triplets;
  sc.skip_ws();
  if (sc.peek() != ']') {
    while (true) {
      sc.skip_ws();
      std::size_t at = sc.pos();
      sc.expect('(', "'(' opening a triplet");
      PredicateEdge edge;
      edge.subject_id = sc.read_string();
      sc.expect(',', "',' after the subject");
      edge.predicate = sc.read_string();
      sc.expect(',', "',' after the predicate");
      edge.object_id = sc.read_string();
      sc.expect(')', "')' closing the triplet");
      if (edge.subject_id.empty() || edge.object_id.empty()) {
        sc.fail_at(at, "non-empty triplet endpoints");
      }
      if (edge.subject_id == edge.object_id) {
        sc.fail_at(at, "distinct triplet endpoints (self-loops are invalid)");
      }
      triplets.emplace_back(std::move(edge), at);

      sc.skip_ws();
      if (sc.peek() == ',') {
        sc.expect(',', "','");
        continue;
      }
      break;
    }
  }
  sc.expect(']', "']' closing the triplet list");
  sc.expect('}', "'}' closing the frame");

  // Identical repeats collapse (lists denote sets); contradictions are errors.
  std::map<std::string, BBox> by_id;
  for (const auto& obj : objects) {
    auto [it, inserted] = by_id.emplace(obj.id, obj.bbox);
    if (inserted) {
      frame.nodes.push_back(
          {obj.id, category_of_label(obj.id), obj.bbox, std::nullopt, false});
    } else if (!(it->second == obj.bbox)) {
      sc.fail_at(obj.offset, "a fresh object id (duplicate with a different box)");
    }
  }
  std::set<std::string> node_ids;
  for (const auto& node : frame.nodes) node_ids.insert(node.instance_id);

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (auto& [edge, at] : triplets) {
    (void)at;
    if (!seen.insert({edge.subject_id, edge.predicate, edge.object_id}).second) continue;
    for (const std::string* endpoint : {&edge.subject_id, &edge.object_id}) {
      if (!node_ids.count(*endpoint)) {
        frame.nodes.push_back(
            {*endpoint, category_of_label(*endpoint), std::nullopt, std::nullopt, true});
        node_ids.insert(*endpoint);
      }
    }
    frame.edges.push_back(std::move(edge));
  }
  return frame;
}

}  // namespace

STSG parse(std::string_view text) {
  Scanner sc(text);
  std::size_t anchor = sc.find_anchor(0);
  if (anchor == std::string_view::npos) {
    throw Error(ErrorCode::EmptyInput, "no 'Frame <k>:' block found");
  }

  std::vector<FrameSceneGraph> frames;
  std::map<std::int64_t, std::size_t> seen_indices;
  sc.seek(anchor);
  while (true) {
    std::size_t frame_at = sc.pos();
    FrameSceneGraph frame = parse_frame(sc);
    if (!seen_indices.emplace(frame.frame_index, frame_at).second) {
      sc.fail_at(frame_at, "a fresh frame index (frame " + std::to_string(frame.frame_index) +
                               " appears twice)");
    }
    frames.push_back(std::move(frame));

    std::size_t after = sc.pos();
    sc.skip_ws();
    if (!sc.eof() && sc.anchor_at(sc.pos())) continue;
    sc.seek(after);  // whatever follows is trailing prose
    break;
  }
  return link_coreferences(std::move(frames));
}

}  // namespace vot::stsg
