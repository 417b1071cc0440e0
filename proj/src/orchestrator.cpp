#include "vot/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string_view>
#include <utility>

#include "vot/errors.hpp"
#include "vot/prompts.hpp"
#include "vot/stsg_json.hpp"
#include "vot/stsg_query.hpp"
#include "vot/stsg_text.hpp"

namespace vot::pipeline {

namespace {

constexpr std::size_t npos = std::string::npos;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// First occurrence of `needle` (give it lowercase) ignoring case.
std::size_t ifind(const std::string& haystack, std::string_view needle, std::size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() &&
           std::tolower(static_cast<unsigned char>(haystack[i + k])) == needle[k]) {
      ++k;
    }
    if (k == needle.size()) return i;
  }
  return npos;
}

// First occurrence of `word` delimited by non-word characters.
std::size_t find_word(const std::string& s, std::string_view word) {
  std::size_t from = 0;
  while (true) {
    std::size_t i = ifind(s, word, from);
    if (i == npos) return npos;
    const bool left_ok = i == 0 || !is_word_char(s[i - 1]);
    const std::size_t end = i + word.size();
    const bool right_ok = end >= s.size() || !is_word_char(s[end]);
    if (left_ok && right_ok) return i;
    from = i + 1;
  }
}

std::string_view trim_view(std::string_view s, std::string_view cut = " \t\r\n") {
  const std::size_t first = s.find_first_not_of(cut);
  if (first == npos) return {};
  const std::size_t last = s.find_last_not_of(cut);
  return s.substr(first, last - first + 1);
}

std::string snippet(const std::string& s, std::size_t limit = 96) {
  std::string out = s.substr(0, limit);
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  if (s.size() > limit) out += "...";
  return out;
}

backend::ChatResponse send(backend::ChatSession& session, backend::StepTag tag,
                           const std::string& prompt, const VotConfig& config) {
  backend::ChatRequest request;
  request.messages.push_back({backend::Role::User, prompt});
  request.tag = tag;
  request.temperature = config.temperature;
  return session.complete(request);
}

StepRecord make_record(backend::StepTag tag, std::string prompt, std::string completion,
                       nlohmann::json artifact) {
  StepRecord record;
  record.tag = tag;
  record.prompt = std::move(prompt);
  record.completion = std::move(completion);
  record.artifact = std::move(artifact);
  return record;
}

std::string letter_str(char letter) { return std::string(1, letter); }

// "PASS" / "FAIL" (any case, word-delimited prefix) -> true / false.
std::optional<bool> parse_pass_fail(std::string_view value) {
  const std::string v = lower(trim_view(value, " \t\r`*"));
  auto starts_word = [&](std::string_view word) {
    if (v.size() < word.size() || v.compare(0, word.size(), word) != 0) return false;
    return v.size() == word.size() || !is_word_char(v[word.size()]);
  };
  if (starts_word("pass")) return true;
  if (starts_word("fail")) return false;
  return std::nullopt;
}

}  // namespace

void check_config(const VotConfig& config) {
  if (config.hops < 1)
    throw Error(ErrorCode::InvalidArgument, "hops must be >= 1");
  if (config.max_retries < 0)
    throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  if (config.candidate_count_open_ended < 2)
    throw Error(ErrorCode::InvalidArgument, "candidate_count_open_ended must be >= 2");
  if (!(config.temperature >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
}

// ---- completion parsing ------------------------------------------------------

std::vector<std::string> parse_targets(const std::string& completion) {
  const std::size_t plural = ifind(completion, "targets are");
  const std::size_t singular = ifind(completion, "target is");
  std::size_t start = npos;
  std::size_t marker_len = 0;
  if (plural != npos && (singular == npos || plural <= singular)) {
    start = plural;
    marker_len = 11;
  } else if (singular != npos) {
    start = singular;
    marker_len = 9;
  }
  if (start == npos) {
    throw Error(ErrorCode::NoTargetsParsed,
                "no \"targets are\"/\"target is\" marker in: " + snippet(completion));
  }

  std::vector<std::string> targets;
  std::size_t pos = start + marker_len;
  while (true) {
    const std::size_t open = completion.find('[', pos);
    if (open == npos) break;
    const std::size_t close = completion.find(']', open + 1);
    if (close == npos) break;
    const std::string phrase(trim_view(std::string_view(completion).substr(open + 1, close - open - 1)));
    if (!phrase.empty() && std::find(targets.begin(), targets.end(), phrase) == targets.end()) {
      targets.push_back(phrase);
    }
    pos = close + 1;
  }
  if (targets.empty()) {
    throw Error(ErrorCode::NoTargetsParsed,
                "no bracketed targets after marker in: " + snippet(completion));
  }
  return targets;
}

std::vector<std::string> parse_candidate_blocks(const std::string& completion) {
  // Block headers look like "Answer B:"; the letters models claim are ignored
  // and blocks are re-lettered by position.
  struct Header {
    std::size_t start = 0;  // of "Answer"
    std::size_t body = 0;   // just past the colon
  };
  std::vector<Header> headers;
  std::size_t from = 0;
  while (true) {
    const std::size_t i = completion.find("Answer", from);
    if (i == npos) break;
    from = i + 6;
    if (i > 0 && is_word_char(completion[i - 1])) continue;
    std::size_t p = i + 6;
    std::size_t blanks = 0;
    while (p < completion.size() && (completion[p] == ' ' || completion[p] == '\t')) {
      ++p;
      ++blanks;
    }
    if (blanks == 0) continue;
    if (p >= completion.size() || !std::isalpha(static_cast<unsigned char>(completion[p]))) continue;
    std::size_t q = p + 1;
    while (q < completion.size() && (completion[q] == ' ' || completion[q] == '\t')) ++q;
    if (q >= completion.size() || completion[q] != ':') continue;
    headers.push_back({i, q + 1});
  }

  std::vector<std::string> blocks;
  for (std::size_t k = 0; k < headers.size(); ++k) {
    const std::size_t body_end =
        (k + 1 < headers.size()) ? headers[k + 1].start : completion.size();
    const std::string text(
        trim_view(std::string_view(completion).substr(headers[k].body, body_end - headers[k].body)));
    if (!text.empty()) blocks.push_back(text);
  }
  return blocks;
}

int parse_score(const std::string& completion) {
  const std::size_t is_at = find_word(completion, "is");
  const std::size_t score_at = find_word(completion, "score");
  std::size_t start = 0;
  if (is_at != npos && (score_at == npos || is_at <= score_at)) {
    start = is_at + 2;
  } else if (score_at != npos) {
    start = score_at + 5;
  }

  auto digit = [&](std::size_t i) {
    return i < completion.size() && std::isdigit(static_cast<unsigned char>(completion[i])) != 0;
  };
  for (std::size_t i = start; i < completion.size(); ++i) {
    if (!digit(i)) continue;
    std::size_t begin = i;
    std::size_t end = i;
    while (digit(end)) ++end;
    i = end - 1;

    bool negative = false;
    if (begin > 0) {
      const char prev = completion[begin - 1];
      if (std::isalpha(static_cast<unsigned char>(prev)) || prev == '_') continue;
      if (prev == '.' && begin >= 2 && digit(begin - 2)) continue;  // decimal tail
      if (prev == '-') {
        if (begin >= 2 && digit(begin - 2)) continue;  // "1-10" range tail
        negative = true;
      }
    }
    if (end < completion.size()) {
      const char next = completion[end];
      if (std::isalpha(static_cast<unsigned char>(next)) || next == '_') continue;
      if (next == '.' && digit(end + 1)) continue;  // decimal head
      if (next == '-' && digit(end + 1)) continue;  // "1-10" range head
    }

    long value = 0;
    for (std::size_t k = begin; k < end && value <= 100000; ++k) {
      value = value * 10 + (completion[k] - '0');
    }
    if (negative) value = -value;
    if (value < 1 || value > 10) {
      throw Error(ErrorCode::ScoreOutOfRange,
                  "got " + std::to_string(value) + " in: " + snippet(completion));
    }
    return static_cast<int>(value);
  }
  throw Error(ErrorCode::ScoreNotFound, "no standalone integer in: " + snippet(completion));
}

Verdict parse_verdict(const std::string& completion) {
  std::optional<bool> grounding;
  std::optional<bool> commonsense;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    const std::size_t eol = completion.find('\n', pos);
    const std::size_t line_end = eol == npos ? completion.size() : eol;
    std::string_view line =
        trim_view(std::string_view(completion).substr(pos, line_end - pos), " \t\r`*");
    const std::string low = lower(line);
    for (const auto& [key, slot] :
         {std::pair<std::string_view, std::optional<bool>*>{"grounding", &grounding},
          std::pair<std::string_view, std::optional<bool>*>{"commonsense", &commonsense}}) {
      if (low.size() <= key.size() || low.compare(0, key.size(), key) != 0) continue;
      std::string_view rest = trim_view(line.substr(key.size()));
      if (rest.empty() || rest.front() != ':') continue;
      if (auto value = parse_pass_fail(rest.substr(1))) *slot = *value;
    }
    if (eol == npos) break;
    pos = eol + 1;
  }

  Verdict verdict;
  verdict.rationale = completion;
  if (grounding.has_value() && commonsense.has_value()) {
    verdict.grounding_ok = *grounding;
    verdict.commonsense_ok = *commonsense;
    verdict.consistent = verdict.grounding_ok && verdict.commonsense_ok;
    return verdict;
  }

  const std::string low = lower(completion);
  if (low.find("contradict") != npos || low.find("incorrect") != npos) {
    verdict.grounding_ok = true;
    verdict.commonsense_ok = false;
    verdict.consistent = false;
    return verdict;
  }
  if (low.find("is correct") != npos) {
    verdict.grounding_ok = true;
    verdict.commonsense_ok = true;
    verdict.consistent = true;
    return verdict;
  }
  throw Error(ErrorCode::VerdictUnparseable, "no verdict in: " + snippet(completion));
}

std::string question_repr(const QAInstance& q) {
  std::string out = q.question;
  for (const QaOption& option : q.options) {
    out += "  ";
    out += option.letter;
    out += ". ";
    out += option.text;
  }
  return out;
}

std::string answer_repr(const QaOption& option) {
  std::string out(1, option.letter);
  out += ". ";
  out += option.text;
  return out;
}

// ---- instance JSON -----------------------------------------------------------

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw Error(ErrorCode::SchemaError, where + "." + key + ": missing");
  return *it;
}

std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  const nlohmann::json& v = require_field(j, key, where);
  if (!v.is_string())
    throw Error(ErrorCode::SchemaError, where + "." + key + ": expected a string");
  return v.get<std::string>();
}

char parse_letter(const nlohmann::json& v, const std::string& where) {
  if (!v.is_string() || v.get<std::string>().size() != 1)
    throw Error(ErrorCode::SchemaError, where + ": expected a single letter");
  const char letter = v.get<std::string>()[0];
  if (letter < 'A' || letter > 'Z')
    throw Error(ErrorCode::SchemaError, where + ": expected a letter A-Z");
  return letter;
}

}  // namespace

QAInstance qa_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "$: expected an object");
  QAInstance q;
  q.id = require_string(j, "id", "$");
  if (q.id.empty()) throw Error(ErrorCode::SchemaError, "$.id: must be non-empty");
  q.video_id = require_string(j, "video_id", "$");
  q.question = require_string(j, "question", "$");

  if (auto it = j.find("options"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::SchemaError, "$.options: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "$.options[" + std::to_string(i) + "]";
      const nlohmann::json& o = (*it)[i];
      if (!o.is_object()) throw Error(ErrorCode::SchemaError, where + ": expected an object");
      QaOption option;
      option.letter = parse_letter(require_field(o, "letter", where), where + ".letter");
      const char expected = static_cast<char>('A' + i);
      if (option.letter != expected) {
        throw Error(ErrorCode::SchemaError, where + ".letter: expected \"" +
                                                std::string(1, expected) + "\"");
      }
      option.text = require_string(o, "text", where);
      if (option.text.empty())
        throw Error(ErrorCode::SchemaError, where + ".text: must be non-empty");
      q.options.push_back(std::move(option));
    }
  }

  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
    const char gold = parse_letter(*it, "$.gold");
    if (q.options.empty() || gold >= static_cast<char>('A' + q.options.size()))
      throw Error(ErrorCode::SchemaError, "$.gold: names no option");
    q.gold = gold;
  }
  if (auto it = j.find("category"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::SchemaError, "$.category: expected a string");
    q.category = it->get<std::string>();
  }
  if (auto it = j.find("stsg"); it != j.end() && !it->is_null()) {
    stsg::STSG graph;
    try {
      graph = stsg::from_json(*it);
    } catch (const Error& e) {
      // Re-root the decoder's field path under $.stsg so the message names
      // the instance field, not a bare top-level one.
      std::string message = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
      if (message.rfind("$", 0) == 0) message = "$.stsg" + message.substr(1);
      throw Error(e.code(), message);
    }
    const stsg::ValidationReport report = stsg::validate(graph);
    if (!report.ok) {
      throw Error(ErrorCode::SchemaError,
                  "$.stsg: " + (report.violations.empty() ? std::string("invalid")
                                                          : report.violations.front().detail));
    }
    q.graph = std::move(graph);
  }
  return q;
}

nlohmann::json qa_to_json(const QAInstance& q) {
  nlohmann::json j;
  j["id"] = q.id;
  j["video_id"] = q.video_id;
  j["question"] = q.question;
  nlohmann::json options = nlohmann::json::array();
  for (const QaOption& option : q.options) {
    options.push_back({{"letter", letter_str(option.letter)}, {"text", option.text}});
  }
  j["options"] = std::move(options);
  if (q.gold) j["gold"] = letter_str(*q.gold);
  if (q.category) j["category"] = *q.category;
  if (q.graph) j["stsg"] = stsg::to_json(*q.graph);
  return j;
}

nlohmann::json ReasoningTrace::to_json() const {
  nlohmann::json j;
  j["instance_id"] = instance_id;
  j["video_id"] = video_id;
  j["targets"] = targets;
  j["tracklets"] = nlohmann::json::object();
  for (const auto& [target, text] : tracklets) j["tracklets"][target] = text;
  j["observation"] = observation;
  nlohmann::json scored_json = nlohmann::json::array();
  for (const ScoredOption& s : scored) {
    scored_json.push_back({{"letter", letter_str(s.letter)},
                           {"rationale", s.rationale},
                           {"score", s.score},
                           {"text", s.text}});
  }
  j["scored"] = std::move(scored_json);
  nlohmann::json rank_json = nlohmann::json::array();
  for (char letter : rank) rank_json.push_back(letter_str(letter));
  j["rank"] = std::move(rank_json);
  nlohmann::json verdicts_json = nlohmann::json::array();
  for (const Verdict& v : verdicts) {
    verdicts_json.push_back({{"commonsense_ok", v.commonsense_ok},
                             {"consistent", v.consistent},
                             {"grounding_ok", v.grounding_ok},
                             {"rationale", v.rationale}});
  }
  j["verdicts"] = std::move(verdicts_json);
  j["retries"] = retries;
  j["final"] = letter_str(final);
  j["unverified"] = unverified;
  nlohmann::json steps_json = nlohmann::json::array();
  for (const StepRecord& record : steps) {
    steps_json.push_back({{"artifact", record.artifact},
                          {"completion", record.completion},
                          {"prompt", record.prompt},
                          {"tag", backend::to_string(record.tag)}});
  }
  j["steps"] = std::move(steps_json);
  return j;
}

// ---- steps -------------------------------------------------------------------

Step1Result step1_identify_targets(const QAInstance& q, backend::ChatSession& session,
                                   const VotConfig& config) {
  const std::string_view templ =
      q.open_ended() ? prompts::kStep1OpenEnded : prompts::kStep1MultiChoice;
  const std::string prompt = prompts::render(
      templ, {{"[Question]", question_repr(q)}, {"[VideoId]", q.video_id}});
  const backend::ChatResponse response = send(session, backend::StepTag::Step1, prompt, config);

  Step1Result result;
  result.targets = parse_targets(response.content);
  result.record = make_record(backend::StepTag::Step1, prompt, response.content,
                              nlohmann::json(result.targets));
  return result;
}

Step2Result step2_ground(const QAInstance& q, const std::vector<std::string>& targets,
                         backend::ChatSession& session, const VotConfig& config) {
  Step2Result result;
  std::vector<std::string> unresolved;

  if (config.grounding_mode == GroundingMode::Oracle && q.graph.has_value()) {
    for (const std::string& target : targets) {
      const std::vector<std::string> ids = stsg::resolve_targets(target, *q.graph);
      if (ids.empty()) {
        unresolved.push_back(target);
        continue;
      }
      const stsg::STSG partial = stsg::partial_stsg(*q.graph, ids);
      result.tracklets[target] = stsg::serialize(partial).text;
    }
  } else {
    unresolved = targets;
  }

  if (!unresolved.empty()) {
    // One request covers every target the local pass could not resolve.
    const bool with_graph = q.graph.has_value();
    std::vector<prompts::Substitution> subs = {{"[Target]", ""}};
    const std::string target_list = prompts::bracket_list(unresolved);
    subs[0].second = target_list;
    std::string graph_text;
    if (with_graph) {
      graph_text = stsg::serialize(*q.graph).text;
      subs.push_back({"[STSG]", graph_text});
    }
    const std::string prompt =
        prompts::render(with_graph ? prompts::kStep2WithStsg : prompts::kStep2, subs);
    const backend::ChatResponse response = send(session, backend::StepTag::Step2, prompt, config);

    std::string canonical;
    try {
      canonical = stsg::serialize(stsg::parse(response.content)).text;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseFailure || e.code() == ErrorCode::EmptyInput ||
          e.code() == ErrorCode::InvalidStsg) {
        throw Error(ErrorCode::GroundingFailed,
                    "no tracklet expression for " + target_list + ": " + e.what());
      }
      throw;
    }
    nlohmann::json artifact = nlohmann::json::object();
    for (const std::string& target : unresolved) {
      result.tracklets[target] = canonical;
      artifact[target] = canonical;
    }
    result.records.push_back(
        make_record(backend::StepTag::Step2, prompt, response.content, std::move(artifact)));
  }
  return result;
}

Step3Result step3_analyze(const QAInstance& q, const std::vector<std::string>& targets,
                          const std::map<std::string, std::string>& tracklets,
                          backend::ChatSession& session, const VotConfig& config) {
  std::string block;
  for (const std::string& target : targets) {
    if (!block.empty()) block += "\n\n";
    block += "Tracklet of [" + target + "]:\n";
    auto it = tracklets.find(target);
    block += it == tracklets.end() ? std::string() : it->second;

    if (config.grounding_mode == GroundingMode::Oracle && q.graph.has_value()) {
      std::string scenes;
      for (const std::string& id : stsg::resolve_targets(target, *q.graph)) {
        for (const stsg::FrameSceneGraph& frame : q.graph->frames) {
          if (frame.find(id) == nullptr) continue;
          const stsg::NeighborScene scene =
              stsg::neighbor_scene(*q.graph, id, frame.frame_index, config.hops);
          stsg::STSG one;
          one.frames.push_back(scene.subgraph);
          if (!scenes.empty()) scenes += "\n";
          scenes += stsg::serialize(one).text;
        }
      }
      if (!scenes.empty()) {
        block += "\nNeighbor scenes of [" + target + "]:\n" + scenes;
      }
    }
  }

  const std::string prompt = prompts::render(
      prompts::kStep3, {{"[Target]", prompts::bracket_list(targets)}, {"[STSG]", block}});
  const backend::ChatResponse response = send(session, backend::StepTag::Step3, prompt, config);

  Step3Result result;
  result.observation = response.content;
  result.record = make_record(backend::StepTag::Step3, prompt, response.content, nullptr);
  return result;
}

Step4PreResult step4_pre_candidates(const QAInstance& q, const std::string& observation,
                                    backend::ChatSession& session, const VotConfig& config) {
  const std::string prompt = prompts::render(
      prompts::kStep4Pre,
      {{"[Question]", question_repr(q)},
       {"[Observation and Implication]", observation},
       {"[CandidateCount]", std::to_string(config.candidate_count_open_ended)}});
  const backend::ChatResponse response =
      send(session, backend::StepTag::Step4Pre, prompt, config);

  std::vector<std::string> blocks = parse_candidate_blocks(response.content);
  if (blocks.size() < 2) {
    throw Error(ErrorCode::TooFewCandidates,
                "got " + std::to_string(blocks.size()) + " candidate answers");
  }
  if (blocks.size() > 26) blocks.resize(26);

  Step4PreResult result;
  result.with_options = q;
  result.with_options.options.clear();
  result.with_options.gold.reset();
  nlohmann::json artifact = nlohmann::json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    QaOption option;
    option.letter = static_cast<char>('A' + i);
    option.text = blocks[i];
    artifact.push_back({{"letter", letter_str(option.letter)}, {"text", option.text}});
    result.with_options.options.push_back(std::move(option));
  }
  result.record =
      make_record(backend::StepTag::Step4Pre, prompt, response.content, std::move(artifact));
  return result;
}

Step4ScoreResult step4_score_option(const QAInstance& q, const QaOption& option,
                                    const std::string& observation,
                                    backend::ChatSession& session, const VotConfig& config) {
  const std::string prompt = prompts::render(
      prompts::kStep4Score, {{"[Question]", question_repr(q)},
                             {"[Answer]", answer_repr(option)},
                             {"[Observation and Implication]", observation},
                             {"[Letter]", letter_str(option.letter)}});
  const backend::ChatResponse response =
      send(session, backend::StepTag::Step4Score, prompt, config);

  Step4ScoreResult result;
  result.scored.letter = option.letter;
  result.scored.text = option.text;
  result.scored.score = parse_score(response.content);
  result.scored.rationale = response.content;
  result.record = make_record(
      backend::StepTag::Step4Score, prompt, response.content,
      {{"letter", letter_str(option.letter)}, {"score", result.scored.score}});
  return result;
}

RankResult step4_rank(const std::vector<ScoredOption>& scored, const std::set<char>& excluded) {
  std::vector<const ScoredOption*> live;
  for (const ScoredOption& s : scored) {
    if (excluded.count(s.letter) == 0) live.push_back(&s);
  }
  if (live.empty()) {
    throw Error(ErrorCode::AllExcluded, "every scored answer has been rejected");
  }
  std::sort(live.begin(), live.end(), [](const ScoredOption* a, const ScoredOption* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->letter < b->letter;
  });
  RankResult result;
  for (const ScoredOption* s : live) result.rank.push_back(s->letter);
  result.final = result.rank.front();
  return result;
}

Step5Result step5_verify(const QAInstance& q, char final_letter, const std::string& observation,
                         backend::ChatSession& session, const VotConfig& config) {
  const QaOption* option = nullptr;
  for (const QaOption& o : q.options) {
    if (o.letter == final_letter) option = &o;
  }
  if (option == nullptr) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("no option with letter ") + final_letter);
  }
  const std::string prompt = prompts::render(
      prompts::kStep5, {{"[Question]", question_repr(q)},
                        {"[Answer]", answer_repr(*option)},
                        {"[VideoId]", q.video_id},
                        {"[Observation and Implication]", observation}});
  const backend::ChatResponse response = send(session, backend::StepTag::Step5, prompt, config);

  Step5Result result;
  result.verdict = parse_verdict(response.content);
  result.record = make_record(backend::StepTag::Step5, prompt, response.content,
                              {{"commonsense_ok", result.verdict.commonsense_ok},
                               {"consistent", result.verdict.consistent},
                               {"grounding_ok", result.verdict.grounding_ok}});
  return result;
}

// ---- whole pipeline ----------------------------------------------------------

namespace {

template <typename Fn>
auto with_step(backend::StepTag tag, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    // Keep the code, prefix the step; drop the code name the base class
    // already put in front of the message so it is not repeated.
    std::string message = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
    if (e.code() == ErrorCode::HttpStatus) {
      throw Error(e.code(), std::string(backend::to_string(tag)) + ": " + message,
                  e.http_status());
    }
    throw Error(e.code(), std::string(backend::to_string(tag)) + ": " + message);
  }
}

}  // namespace

RunResult run_vot(const QAInstance& q, backend::ChatBackend& backend, const VotConfig& config) {
  check_config(config);
  const std::unique_ptr<backend::ChatSession> session = backend.open_session();

  RunResult result;
  ReasoningTrace& trace = result.trace;
  trace.instance_id = q.id;
  trace.video_id = q.video_id;

  Step1Result step1 = with_step(backend::StepTag::Step1, [&] {
    return step1_identify_targets(q, *session, config);
  });
  trace.targets = step1.targets;
  trace.steps.push_back(std::move(step1.record));

  Step2Result step2 = with_step(backend::StepTag::Step2, [&] {
    return step2_ground(q, trace.targets, *session, config);
  });
  trace.tracklets = step2.tracklets;
  for (StepRecord& record : step2.records) trace.steps.push_back(std::move(record));

  Step3Result step3 = with_step(backend::StepTag::Step3, [&] {
    return step3_analyze(q, trace.targets, trace.tracklets, *session, config);
  });
  trace.observation = step3.observation;
  trace.steps.push_back(std::move(step3.record));

  QAInstance working = q;
  if (working.open_ended()) {
    Step4PreResult pre = with_step(backend::StepTag::Step4Pre, [&] {
      return step4_pre_candidates(working, trace.observation, *session, config);
    });
    working = std::move(pre.with_options);
    trace.steps.push_back(std::move(pre.record));
  }
  if (working.options.empty()) {
    throw Error(ErrorCode::TooFewCandidates, "no candidate answers to score");
  }

  for (const QaOption& option : working.options) {
    Step4ScoreResult scored = with_step(backend::StepTag::Step4Score, [&] {
      return step4_score_option(working, option, trace.observation, *session, config);
    });
    trace.scored.push_back(std::move(scored.scored));
    trace.steps.push_back(std::move(scored.record));
  }

  std::set<char> excluded;
  RankResult ranked = step4_rank(trace.scored, excluded);
  trace.rank = ranked.rank;
  char final = ranked.final;

  for (int attempt = 0;; ++attempt) {
    Step5Result step5 = with_step(backend::StepTag::Step5, [&] {
      return step5_verify(working, final, trace.observation, *session, config);
    });
    trace.verdicts.push_back(step5.verdict);
    trace.steps.push_back(std::move(step5.record));
    if (trace.verdicts.back().consistent) break;

    if (attempt == config.max_retries) {
      trace.unverified = true;
      break;
    }
    trace.retries = attempt + 1;
    excluded.insert(final);
    if (excluded.size() >= working.options.size()) {
      // Every answer was rejected: fall back to the overall best and flag it.
      ranked = step4_rank(trace.scored, {});
      trace.rank = ranked.rank;
      final = ranked.final;
      trace.unverified = true;
      break;
    }
    ranked = step4_rank(trace.scored, excluded);
    trace.rank = ranked.rank;
    final = ranked.final;
  }

  trace.final = final;
  result.final = final;
  return result;
}

}  // namespace vot::pipeline
