#include "vot/prompts.hpp"

namespace vot::prompts {

const std::vector<std::string>& placeholder_tokens() {
  static const std::vector<std::string> tokens = {
      "[Question]", "[Answer]", "[Target]", "[STSG]", "[Observation and Implication]",
      "[VideoId]", "[CandidateCount]", "[Letter]",
  };
  return tokens;
}

bool has_placeholder_residue(std::string_view prompt) {
  for (const auto& token : placeholder_tokens()) {
    if (prompt.find(token) != std::string_view::npos) return true;
  }
  return false;
}

std::string render(std::string_view templ, const std::vector<Substitution>& subs) {
  std::string out;
  out.reserve(templ.size());
  std::size_t i = 0;
  while (i < templ.size()) {
    if (templ[i] == '[') {
      bool replaced = false;
      for (const auto& [token, value] : subs) {
        if (templ.substr(i, token.size()) == token) {
          out.append(value);
          i += token.size();
          replaced = true;
          break;
        }
      }
      if (replaced) continue;
    }
    out.push_back(templ[i]);
    ++i;
  }
  return out;
}

std::string bracket_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += " and ";
    out += "[" + items[i] + "]";
  }
  return out;
}

}  // namespace vot::prompts
