#pragma once

// Versioned prompt templates for the five-step reasoning pipeline.
// Substitutable placeholders are bracketed tokens; render() replaces them in
// a single pass, so substituted values are never re-scanned. Two bracketed
// words are deliberately NOT placeholders and stay in the sent prompt as
// literal self-references: [Video] (the attached video) and [Observations]
// (the step-3 results restated in the <Observations> block).

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vot::prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

// Every token render() knows how to substitute; prompts must leave none of
// these behind.
const std::vector<std::string>& placeholder_tokens();

// True when any substitutable token is still present.
bool has_placeholder_residue(std::string_view prompt);

using Substitution = std::pair<std::string_view, std::string_view>;
std::string render(std::string_view templ, const std::vector<Substitution>& subs);

inline constexpr std::string_view kStep1MultiChoice =
    "<Task Definition>\n"
    "Now you are an expert in analyzing video data, and you should answer a question based on "
    "the given video.\n"
    "For the question, several candidate answers are provided, where you need to choose the "
    "most suitable option.\n"
    "</Task Definition>\n"
    "\n"
    "<Input Video> [Video] (id: [VideoId]) </Input Video>\n"
    "\n"
    "<Question>\n"
    "Given the question: [[Question]], what are the possible targets of the [Video] mainly "
    "mentioned or involved?\n"
    "</Question>";

inline constexpr std::string_view kStep1OpenEnded =
    "<Task Definition>\n"
    "Now you are an expert in analyzing video data, and you should answer a question based on "
    "the given video.\n"
    "For the question, you should answer in an open-ended format.\n"
    "</Task Definition>\n"
    "\n"
    "<Video> [Video] (id: [VideoId]) </Video>\n"
    "\n"
    "<Question>\n"
    "Given the question: [[Question]], what are the possible targets of the [Video] mainly "
    "mentioned or involved?\n"
    "</Question>";

inline constexpr std::string_view kStep2 =
    "<Question>\n"
    "Provide the tracklet of involved [Target] by outputting the corresponding partial STSG "
    "expression.\n"
    "</Question>";

inline constexpr std::string_view kStep2WithStsg =
    "<Question>\n"
    "Provide the tracklet of involved [Target] by outputting the corresponding partial STSG "
    "expression.\n"
    "</Question>\n"
    "\n"
    "<STSG>\n"
    "[STSG]\n"
    "</STSG>";

inline constexpr std::string_view kStep3 =
    "<Question>\n"
    "Combining all possible related commonsense, analyze the motion behavior based on the "
    "[Target] and the neighbor scenes within the STSG below. Describing the action observations "
    "and implications.\n"
    "</Question>\n"
    "\n"
    "<STSG>\n"
    "[STSG]\n"
    "</STSG>";

inline constexpr std::string_view kStep4Pre =
    "<Question>\n"
    "For the question [[Question]], please based on the action's [[Observation and "
    "Implication]] combined with commonsense, output [CandidateCount] distinct optional answers "
    "with the rationality score of this answer with a 1-10 scale.\n"
    "</Question>";

inline constexpr std::string_view kStep4Score =
    "<Question for Answer [Letter]>\n"
    "For the question [[Question]], given a candidate answer [[Answer]], please based on the "
    "action's [[Observation and Implication]] combined with commonsense, score the rationality "
    "of this answer with a 1-10 scale, and also output the rationale.\n"
    "</Question for Answer [Letter]>";

inline constexpr std::string_view kStep5 =
    "<Video> [Video] (id: [VideoId]) </Video>\n"
    "\n"
    "<Question>\n"
    "Given the [Video], and the raw question [[Question]], now you need to verify the previous "
    "answer by\n"
    "  1) checking the pixel grounding information if the answer [[Answer]] aligns with the "
    "facts presented in the video from a perception standpoint;\n"
    "  2) determining from a cognition perspective if the commonsense implications inherent in "
    "the answer [[Answer]] contradict any of the main [Observations] inferred in the 3-rd "
    "reasoning step.\n"
    "Output the verification result with rationale.\n"
    "End your output with two lines: `GROUNDING: PASS|FAIL` and `COMMONSENSE: PASS|FAIL`\n"
    "</Question>\n"
    "\n"
    "<Observations>\n"
    "[Observation and Implication]\n"
    "</Observations>";

// "[a] and [b]" — how target lists are written into prompts.
std::string bracket_list(const std::vector<std::string>& items);

}  // namespace vot::prompts
