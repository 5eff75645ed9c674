#include "semnav/labels.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace semnav {

LabelSanitizer::LabelSanitizer(std::set<std::string> stop_list) {
  for (const auto& word : stop_list) {
    if (auto clean = LabelSanitizer{}.sanitize(word)) {
      stop_list_.insert(*clean);
    }
  }
}

std::optional<std::string> LabelSanitizer::sanitize(std::string_view raw) const {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!raw.empty() && is_space(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  while (!raw.empty() && is_space(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);

  std::string out;
  out.reserve(raw.size());
  bool has_letter = false;
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      has_letter = true;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (!has_letter || stop_list_.contains(out)) {
    return std::nullopt;
  }
  return out;
}

std::vector<std::string> LabelSanitizer::sanitize_all(const std::vector<std::string>& raw) const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& label : raw) {
    if (auto clean = sanitize(label); clean && seen.insert(*clean).second) {
      out.push_back(std::move(*clean));
    }
  }
  return out;
}

std::vector<std::string> sanitize_labels(const std::vector<std::string>& raw,
                                         const std::set<std::string>& stop_list) {
  return LabelSanitizer(stop_list).sanitize_all(raw);
}

}  // namespace semnav
