#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace semnav {

/// Normalizes detector labels and drops meaningless ones: empty strings,
/// strings made only of punctuation/digits/whitespace, and stop-listed words.
class LabelSanitizer {
 public:
  LabelSanitizer() = default;
  explicit LabelSanitizer(std::set<std::string> stop_list);

  /// Lowercased, trimmed label, or nullopt when it should be dropped.
  std::optional<std::string> sanitize(std::string_view raw) const;

  /// Sanitizes each label, deduplicating while preserving first occurrence.
  std::vector<std::string> sanitize_all(const std::vector<std::string>& raw) const;

  const std::set<std::string>& stop_list() const { return stop_list_; }

 private:
  std::set<std::string> stop_list_;
};

/// Free-function form used by the relevance engine contract.
std::vector<std::string> sanitize_labels(const std::vector<std::string>& raw,
                                         const std::set<std::string>& stop_list = {});

}  // namespace semnav
