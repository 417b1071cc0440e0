#pragma once

// Five-step video reasoning over a chat backend:
//   1  identify the question's target objects
//   2  ground each target as a tracklet expression (locally when the scene
//      graph is attached and the phrase resolves, via the model otherwise)
//   3  analyze the action given tracklets and neighbor scenes
//   4  score every candidate answer 1-10, rank descending
//   5  verify the top answer from grounding and commonsense perspectives,
//      re-ranking with the rejected answer excluded until max_retries is spent
//
// Questions with several gold answers are not representable here: an instance
// carries at most one gold letter, and answering picks exactly one option.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vot/backend.hpp"
#include "vot/stsg.hpp"

namespace vot::pipeline {

struct QaOption {
  char letter = 'A';
  std::string text;
};

struct QAInstance {
  std::string id;
  std::string video_id;
  std::string question;
  std::vector<QaOption> options;         // empty for open-ended questions
  std::optional<char> gold;              // must name one of the options
  std::optional<std::string> category;
  std::optional<stsg::STSG> graph;

  bool open_ended() const { return options.empty(); }
};

// Shape checks (sequential letters from 'A', gold within options, attached
// graph validates); SCHEMA_ERROR with a field path.
QAInstance qa_from_json(const nlohmann::json& j);
nlohmann::json qa_to_json(const QAInstance& q);

struct ScoredOption {
  char letter = 'A';
  std::string text;
  int score = 0;  // 1..10
  std::string rationale;
};

struct Verdict {
  bool consistent = false;  // grounding_ok && commonsense_ok
  bool grounding_ok = false;
  bool commonsense_ok = false;
  std::string rationale;
};

struct StepRecord {
  backend::StepTag tag = backend::StepTag::Step1;
  std::string prompt;
  std::string completion;
  nlohmann::json artifact;
};

struct ReasoningTrace {
  std::string instance_id;
  std::string video_id;
  std::vector<StepRecord> steps;                // every request, in order
  std::vector<std::string> targets;
  std::map<std::string, std::string> tracklets; // target phrase -> expression
  std::string observation;
  std::vector<ScoredOption> scored;             // letter order
  std::vector<char> rank;                       // last ranking computed
  std::vector<Verdict> verdicts;                // one per verification attempt
  int retries = 0;
  char final = '?';
  bool unverified = false;

  // Canonical form: no timestamps or latencies, keys sorted. Two identical
  // runs serialize to identical bytes.
  nlohmann::json to_json() const;
};

enum class GroundingMode { Model, Oracle };
enum class BackendKind { Mock, Http };

struct VotConfig {
  GroundingMode grounding_mode = GroundingMode::Model;
  int hops = 2;                        // neighbor-scene radius, >= 1
  int max_retries = 2;                 // failed verifications tolerated, >= 0
  int candidate_count_open_ended = 4;  // >= 2
  BackendKind backend = BackendKind::Mock;
  double temperature = 0.0;            // >= 0
};

void check_config(const VotConfig& config);  // INVALID_ARGUMENT

// ---- completion parsing (exposed for direct testing) ------------------------

// Bracketed phrases after the first "targets are" / "target is" marker.
// NO_TARGETS_PARSED when the marker or the brackets are missing.
std::vector<std::string> parse_targets(const std::string& completion);

// "Answer <L>: <text>" blocks, in order of appearance.
std::vector<std::string> parse_candidate_blocks(const std::string& completion);

// First standalone integer after the first "is"/"score" word (scans from the
// start when neither occurs). Digit runs glued to letters, decimals, or
// "1-10"-style ranges do not count. SCORE_NOT_FOUND / SCORE_OUT_OF_RANGE.
int parse_score(const std::string& completion);

// Structured "GROUNDING: PASS|FAIL" / "COMMONSENSE: PASS|FAIL" tail lines;
// falls back to keywords ("contradict"/"incorrect" => commonsense fail,
// "is correct" => pass). VERDICT_UNPARSEABLE when neither form is present.
Verdict parse_verdict(const std::string& completion);

// Question as written into prompts: the bare question for open-ended
// instances, question plus "A. ...  B. ..." for multi-choice.
std::string question_repr(const QAInstance& q);
std::string answer_repr(const QaOption& option);

// ---- steps ------------------------------------------------------------------

struct Step1Result {
  std::vector<std::string> targets;
  StepRecord record;
};
Step1Result step1_identify_targets(const QAInstance& q, backend::ChatSession& session,
                                   const VotConfig& config);

struct Step2Result {
  std::map<std::string, std::string> tracklets;  // target -> expression
  std::vector<StepRecord> records;               // empty when fully oracle-grounded
};
Step2Result step2_ground(const QAInstance& q, const std::vector<std::string>& targets,
                         backend::ChatSession& session, const VotConfig& config);

struct Step3Result {
  std::string observation;
  StepRecord record;
};
Step3Result step3_analyze(const QAInstance& q, const std::vector<std::string>& targets,
                          const std::map<std::string, std::string>& tracklets,
                          backend::ChatSession& session, const VotConfig& config);

struct Step4PreResult {
  QAInstance with_options;  // candidates installed as options A..
  StepRecord record;
};
Step4PreResult step4_pre_candidates(const QAInstance& q, const std::string& observation,
                                    backend::ChatSession& session, const VotConfig& config);

struct Step4ScoreResult {
  ScoredOption scored;
  StepRecord record;
};
Step4ScoreResult step4_score_option(const QAInstance& q, const QaOption& option,
                                    const std::string& observation,
                                    backend::ChatSession& session, const VotConfig& config);

struct RankResult {
  std::vector<char> rank;  // score descending, ties by letter
  char final = '?';        // rank.front()
};
// ALL_EXCLUDED when exclusion covers every scored option.
RankResult step4_rank(const std::vector<ScoredOption>& scored, const std::set<char>& excluded);

struct Step5Result {
  Verdict verdict;
  StepRecord record;
};
Step5Result step5_verify(const QAInstance& q, char final_letter, const std::string& observation,
                         backend::ChatSession& session, const VotConfig& config);

struct RunResult {
  char final = '?';
  ReasoningTrace trace;
};
// The whole pipeline over one fresh backend session. Step failures surface as
// typed errors prefixed with the step tag. With the mock backend at
// temperature 0 the result is a pure function of (instance, script, config).
RunResult run_vot(const QAInstance& q, backend::ChatBackend& backend, const VotConfig& config);

}  // namespace vot::pipeline
